#include "divnav/query_pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "divnav/util.hpp"

namespace divnav {

std::string to_string(RelationKind k) {
  switch (k) {
    case RelationKind::In: return "in";
    case RelationKind::On: return "on";
    case RelationKind::Near: return "near";
    case RelationKind::NextTo: return "next_to";
    case RelationKind::Under: return "under";
    case RelationKind::NotIn: return "not_in";
    case RelationKind::FarFrom: return "far_from";
    case RelationKind::Unrelated: return "unrelated";
  }
  return "unrelated";
}

std::optional<RelationKind> relation_kind_from_string(const std::string& s) {
  static const std::map<std::string, RelationKind> table = {
      {"in", RelationKind::In},           {"on", RelationKind::On},
      {"near", RelationKind::Near},       {"next_to", RelationKind::NextTo},
      {"under", RelationKind::Under},     {"not_in", RelationKind::NotIn},
      {"far_from", RelationKind::FarFrom}, {"unrelated", RelationKind::Unrelated}};
  auto it = table.find(lower(s));
  if (it == table.end()) return std::nullopt;
  return it->second;
}

bool is_proximity(RelationKind k) {
  switch (k) {
    case RelationKind::In:
    case RelationKind::On:
    case RelationKind::Near:
    case RelationKind::NextTo:
    case RelationKind::Under:
      return true;
    default:
      return false;
  }
}

Lexicon Lexicon::defaults() {
  Lexicon lex;
  lex.containers = {
      {"towel", {"bathroom"}},      {"toothbrush", {"bathroom"}},
      {"soap", {"bathroom"}},       {"mug", {"kitchen"}},
      {"kettle", {"kitchen"}},      {"plate", {"kitchen"}},
      {"pillow", {"bedroom"}},      {"blanket", {"bedroom"}},
      {"remote", {"sofa"}},         {"monitor", {"desk"}},
      {"keyboard", {"desk"}},       {"spatula", {"kitchen"}},
  };
  lex.demands = {
      {"fire", {"fire extinguisher"}},
      {"thirsty", {"water bottle"}},
      {"hungry", {"snack"}},
      {"tired", {"bed"}},
      {"bleeding", {"first aid kit"}},
  };
  return lex;
}

namespace {

struct PrepEntry {
  std::vector<std::string> words;
  RelationKind kind;
};

// Closed preposition table; multi-word entries first so the longest phrase
// wins at a given position.
std::vector<PrepEntry> preposition_table(const Lexicon& lexicon) {
  std::vector<PrepEntry> table = {
      {{"not", "in"}, RelationKind::NotIn},
      {{"not", "inside"}, RelationKind::NotIn},
      {{"not", "on"}, RelationKind::NotIn},
      {{"outside", "of"}, RelationKind::NotIn},
      {{"outside"}, RelationKind::NotIn},
      {{"far", "from"}, RelationKind::FarFrom},
      {{"away", "from"}, RelationKind::FarFrom},
      {{"on", "top", "of"}, RelationKind::On},
      {{"next", "to"}, RelationKind::NextTo},
      {{"close", "to"}, RelationKind::Near},
      {{"beside"}, RelationKind::NextTo},
      {{"inside"}, RelationKind::In},
      {{"in"}, RelationKind::In},
      {{"on"}, RelationKind::On},
      {{"near"}, RelationKind::Near},
      {{"by"}, RelationKind::Near},
      {{"with"}, RelationKind::Near},
      {{"under"}, RelationKind::Under},
      {{"underneath"}, RelationKind::Under},
  };
  for (const auto& [word, kind] : lexicon.preposition_overrides) {
    std::vector<std::string> words;
    std::istringstream in(word);
    std::string w;
    while (in >> w) words.push_back(lower(w));
    if (words.empty()) continue;
    bool replaced = false;
    for (auto& e : table)
      if (e.words == words) {
        e.kind = kind;
        replaced = true;
      }
    if (!replaced) table.push_back({words, kind});
  }
  std::stable_sort(table.begin(), table.end(),
                   [](const PrepEntry& a, const PrepEntry& b) { return a.words.size() > b.words.size(); });
  return table;
}

const std::set<std::string>& skip_words() {
  static const std::set<std::string> words = {
      "a",    "an",   "the",  "this", "that",  "my",    "your", "his",   "her",  "its",
      "our",  "their", "some", "me",  "please", "is",   "are",  "was",   "were", "i",
      "im",   "am",   "you",  "we",   "it"};
  return words;
}

const std::vector<std::vector<std::string>>& command_prefixes() {
  static const std::vector<std::vector<std::string>> p = {
      {"find", "me"}, {"find"},     {"get", "me"},  {"get"},         {"go", "to"},
      {"bring", "me"}, {"bring"},   {"where", "is"}, {"navigate", "to"}, {"look", "for"},
      {"locate"},     {"fetch"},    {"search", "for"}};
  return p;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  return tokens;
}

bool matches_at(const std::vector<std::string>& tokens, size_t pos,
                const std::vector<std::string>& phrase) {
  if (pos + phrase.size() > tokens.size()) return false;
  for (size_t i = 0; i < phrase.size(); ++i)
    if (tokens[pos + i] != phrase[i]) return false;
  return true;
}

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

void push_unique(std::vector<std::string>& v, const std::string& s) {
  if (!s.empty() && !contains(v, s)) v.push_back(s);
}

}  // namespace

QueryDecomposition decompose(const std::string& text, const Lexicon& lexicon) {
  QueryDecomposition d;
  d.raw = text;

  std::vector<std::string> tokens = tokenize(text);
  size_t pos = 0;
  for (const auto& prefix : command_prefixes())
    if (matches_at(tokens, pos, prefix)) {
      pos += prefix.size();
      break;
    }

  const auto preps = preposition_table(lexicon);

  // Noun phrases split at prepositions; adjectives stay attached.
  std::vector<std::string> phrases;
  std::vector<RelationKind> phrase_kinds;  // kind linking phrase i (i>=1) to the primary
  std::vector<std::string> current;
  RelationKind pending = RelationKind::Unrelated;
  bool saw_prep_without_np = false;
  while (pos < tokens.size()) {
    const PrepEntry* matched = nullptr;
    for (const auto& e : preps)
      if (matches_at(tokens, pos, e.words)) {
        matched = &e;
        break;
      }
    if (matched) {
      // A preposition before any noun phrase is treated as plain text.
      if (phrases.empty() && current.empty()) {
        for (const auto& w : matched->words) current.push_back(w);
        pos += matched->words.size();
        continue;
      }
      if (!current.empty()) {
        phrases.push_back(join(current));
        current.clear();
      } else {
        saw_prep_without_np = true;
      }
      if (phrases.size() > 1) phrase_kinds.push_back(pending);
      pending = matched->kind;
      pos += matched->words.size();
      continue;
    }
    const std::string& tok = tokens[pos];
    if (!skip_words().count(tok)) current.push_back(tok);
    ++pos;
  }
  if (!current.empty()) phrases.push_back(join(current));
  if (phrases.size() > 1) phrase_kinds.push_back(pending);
  else if (pending != RelationKind::Unrelated) saw_prep_without_np = true;

  if (phrases.empty()) {
    d.primary = text;
    d.parse_quality = ParseQuality::Fallback;
    return filter_proximity(std::move(d));
  }

  d.primary = phrases.front();
  d.parse_quality = saw_prep_without_np ? ParseQuality::Partial : ParseQuality::Full;
  push_unique(d.explicit_targets, d.primary);
  for (size_t i = 1; i < phrases.size(); ++i) {
    push_unique(d.explicit_targets, phrases[i]);
    d.relations.push_back({phrase_kinds[i - 1], phrases[i], d.primary});
  }

  // Demand queries ("the room is on fire") promote the implied object to
  // primary; the trigger must be a full noun phrase so that e.g. "fire pit"
  // does not match the "fire" demand.
  std::vector<std::string> demand_objects;
  for (const auto& [keyword, objects] : lexicon.demands) {
    if (!contains(phrases, keyword)) continue;
    for (const auto& o : objects) demand_objects.push_back(o);
  }
  if (!demand_objects.empty()) {
    d.primary = demand_objects.front();
    for (const auto& o : demand_objects) push_unique(d.implicit_targets, o);
    std::vector<SpatialRelation> rewritten;
    for (const auto& phrase : phrases) {
      if (phrase == d.primary || contains(demand_objects, phrase)) continue;
      if (lexicon.demands.count(phrase)) continue;  // the trigger word itself
      rewritten.push_back({RelationKind::Near, phrase, d.primary});
    }
    d.relations = std::move(rewritten);
  }

  // Lexicon-inferred higher-level locations for the primary (full phrase,
  // then head noun).
  auto infer_from = [&](const std::string& key) {
    auto it = lexicon.containers.find(key);
    if (it == lexicon.containers.end()) return false;
    for (const auto& loc : it->second) {
      if (contains(d.explicit_targets, loc)) continue;
      push_unique(d.inferred_targets, loc);
      d.relations.push_back({RelationKind::Near, loc, d.primary});
    }
    return true;
  };
  if (!infer_from(d.primary)) {
    const auto space = d.primary.rfind(' ');
    if (space != std::string::npos) infer_from(d.primary.substr(space + 1));
  }

  return filter_proximity(std::move(d));
}

QueryDecomposition filter_proximity(QueryDecomposition d) {
  auto eligible = [&](const std::string& t) {
    if (t == d.primary) return false;
    bool related = false;
    for (const auto& r : d.relations) {
      if (r.subject != t || r.object != d.primary) continue;
      if (!is_proximity(r.kind)) return false;
      related = true;
    }
    return related;
  };

  d.proximity_set.clear();
  d.proximity_set.push_back(d.primary);
  for (const auto* bucket : {&d.explicit_targets, &d.inferred_targets, &d.implicit_targets}) {
    std::vector<std::string> keep;
    for (const auto& t : *bucket)
      if (eligible(t) && !contains(d.proximity_set, t)) keep.push_back(t);
    std::sort(keep.begin(), keep.end());
    for (auto& t : keep) d.proximity_set.push_back(std::move(t));
  }
  return d;
}

}  // namespace divnav
