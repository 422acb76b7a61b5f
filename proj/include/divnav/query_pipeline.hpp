#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "divnav/types.hpp"

namespace divnav {

enum class RelationKind { In, On, Near, NextTo, Under, NotIn, FarFrom, Unrelated };

std::string to_string(RelationKind k);
std::optional<RelationKind> relation_kind_from_string(const std::string& s);

// {In, On, Near, NextTo, Under} count as proximity; the rest do not.
bool is_proximity(RelationKind k);

// subject R object, where object is always the primary target.
struct SpatialRelation {
  RelationKind kind{RelationKind::Unrelated};
  std::string subject;
  std::string object;
};

enum class ParseQuality { Full, Partial, Fallback };

struct QueryDecomposition {
  std::string raw;
  std::string primary;
  std::vector<std::string> explicit_targets;
  std::vector<std::string> inferred_targets;
  std::vector<std::string> implicit_targets;
  std::vector<SpatialRelation> relations;
  std::vector<std::string> proximity_set;  // Q: primary first, deterministic order
  ParseQuality parse_quality{ParseQuality::Full};
  bool remote_fallback{false};  // set when a remote decomposition degraded to the rules
};

// Editable knowledge used by the rule-based decomposer: which containers or
// rooms an object is typically found in, which "demand" keywords imply which
// objects, and overrides for the preposition table.
struct Lexicon {
  std::map<std::string, std::vector<std::string>> containers;  // towel -> {bathroom}
  std::map<std::string, std::vector<std::string>> demands;     // fire -> {fire extinguisher}
  std::map<std::string, RelationKind> preposition_overrides;

  static Lexicon defaults();
};

// Rule-based decomposition of a natural-language target description:
// strips command verbs and determiners, splits noun phrases at spatial
// prepositions (adjectives stay attached to the nouns), classifies the
// prepositions, and augments with lexicon-inferred and demand-implied
// targets. Unparseable text degrades to primary = full text.
QueryDecomposition decompose(const std::string& text, const Lexicon& lexicon);

// Rebuilds proximity_set = {primary} + targets whose relations to primary are
// all of proximity kind. Order: primary, then explicit, inferred, implicit,
// each alphabetical. Idempotent.
QueryDecomposition filter_proximity(QueryDecomposition d);

}  // namespace divnav
