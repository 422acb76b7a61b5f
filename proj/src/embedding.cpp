#include "divnav/embedding.hpp"

#include <random>

#include "divnav/util.hpp"

namespace divnav {

bool AffinityMatrix::has(const std::string& label) const { return index_of(label) >= 0; }

int AffinityMatrix::index_of(const std::string& label) const {
  for (size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return static_cast<int>(i);
  return -1;
}

double AffinityMatrix::at(const std::string& a, const std::string& b) const {
  const int i = index_of(a);
  const int j = index_of(b);
  if (i < 0 || j < 0) throw VocabularyError("affinity: unknown label '" + (i < 0 ? a : b) + "'");
  return values(i, j);
}

void AffinityMatrix::validate() const {
  const auto n = static_cast<Eigen::Index>(labels.size());
  if (values.rows() != n || values.cols() != n)
    throw LoadError("affinity matrix shape does not match label count");
  if (n == 0) return;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(values(i, i) - 1.0) > 1e-9)
      throw LoadError("affinity matrix diagonal must be 1 (label '" + labels[i] + "')");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(values(i, j) - values(j, i)) > 1e-9)
        throw LoadError("affinity matrix must be symmetric");
      if (values(i, j) < -1.0 - 1e-9 || values(i, j) > 1.0 + 1e-9)
        throw LoadError("affinity entries must lie in [-1,1]");
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(values, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-8)
    throw LoadError("affinity matrix must be positive semidefinite");
}

AffinityMatrix AffinityMatrix::identity(std::vector<std::string> labels) {
  AffinityMatrix a;
  a.values = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(labels.size()),
                                       static_cast<Eigen::Index>(labels.size()));
  a.labels = std::move(labels);
  return a;
}

namespace {

Embedding gaussian_vector(int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Embedding v(dim);
  for (int i = 0; i < dim; ++i) v(i) = normal(rng);
  return v;
}

}  // namespace

SyntheticEmbedder::SyntheticEmbedder(int dim, AffinityMatrix affinity, bool strict)
    : dim_(dim), strict_(strict), affinity_(std::move(affinity)) {
  if (dim_ < 1) throw DimensionError("embedding dimension must be >= 1");
  affinity_.validate();
  const auto n = static_cast<Eigen::Index>(affinity_.labels.size());
  if (n == 0) return;
  if (n > dim_) throw LoadError("embedding dimension smaller than affinity label count");

  // Gram factor B with B*B^T = A, eigenvalues clamped at zero.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(affinity_.values);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd factor = es.eigenvectors() * ev.cwiseSqrt().asDiagonal();

  // Orthonormal residual directions seeded from the label set, so the
  // embedder is a pure function of (dim, affinity).
  std::uint64_t seed = fnv1a("divnav-basis");
  for (const auto& l : affinity_.labels) seed = fnv1a(l, seed);
  Eigen::MatrixXd raw(dim_, n);
  for (Eigen::Index j = 0; j < n; ++j) raw.col(j) = gaussian_vector(dim_, mix_seed(seed, j));
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
  Eigen::MatrixXd basis = qr.householderQ() * Eigen::MatrixXd::Identity(dim_, n);

  for (Eigen::Index i = 0; i < n; ++i) {
    Embedding e = basis * factor.row(i).transpose();
    const double norm = e.norm();
    // Unit diagonal of A makes rows of the factor unit-length already;
    // renormalize to absorb clamping error.
    if (norm > 1e-12) e /= norm;
    table_[affinity_.labels[i]] = std::move(e);
  }
}

Embedding SyntheticEmbedder::hashed_unit(const std::string& label) const {
  Embedding v = gaussian_vector(dim_, fnv1a(label, fnv1a("divnav-label")));
  const double norm = v.norm();
  if (norm < 1e-12) return hashed_unit(label + "#");
  return v / norm;
}

Embedding SyntheticEmbedder::embed_text(const std::string& label) const {
  if (label.empty()) throw VocabularyError("cannot embed empty label");
  if (auto it = table_.find(label); it != table_.end()) return it->second;
  if (strict_) throw VocabularyError("label '" + label + "' not in vocabulary (strict mode)");
  return hashed_unit(label);
}

}  // namespace divnav
