#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "divnav/types.hpp"

namespace divnav {

using Embedding = Eigen::VectorXd;

inline bool is_unit(const Embedding& e, double tol = 1e-6) {
  return std::abs(e.norm() - 1.0) <= tol;
}

// Symmetric label-affinity matrix with unit diagonal; declares target cosine
// similarities between label embeddings. Must be positive semidefinite so a
// Gram factorization exists.
struct AffinityMatrix {
  std::vector<std::string> labels;
  Eigen::MatrixXd values;  // labels.size() x labels.size()

  bool has(const std::string& label) const;
  int index_of(const std::string& label) const;  // -1 if absent
  double at(const std::string& a, const std::string& b) const;

  // Throws LoadError on asymmetry, off-unit diagonal, out-of-range entries
  // or negative eigenvalues beyond tolerance.
  void validate() const;

  static AffinityMatrix identity(std::vector<std::string> labels);
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual int dim() const = 0;
  // Deterministic: same label, same unit vector.
  virtual Embedding embed_text(const std::string& label) const = 0;
};

// Deterministic text embedder. Labels declared in the affinity matrix get
// embeddings whose pairwise cosines reproduce the matrix exactly (Gram
// factorization spanned by hash-seeded orthonormal directions); any other
// label maps to a hash-seeded random unit vector, or raises VocabularyError
// in strict mode.
class SyntheticEmbedder : public EmbeddingProvider {
 public:
  SyntheticEmbedder(int dim, AffinityMatrix affinity, bool strict = false);
  explicit SyntheticEmbedder(int dim) : SyntheticEmbedder(dim, AffinityMatrix{}, false) {}

  int dim() const override { return dim_; }
  Embedding embed_text(const std::string& label) const override;

 private:
  Embedding hashed_unit(const std::string& label) const;

  int dim_;
  bool strict_;
  AffinityMatrix affinity_;
  std::map<std::string, Embedding> table_;
};

}  // namespace divnav
