#pragma once

// Random forest classifier with Gini splits. Bootstrap weights are keyed
// Poisson(1) draws per (tree, row id), so training is invariant to row order
// and to thread count.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "parity_forge/condmodels.hpp"
#include "parity_forge/transform.hpp"

namespace parity_forge {

struct ForestParams {
  std::size_t trees = 500;
  std::size_t mtry = 0;      // 0: ceil(sqrt(p))
  std::size_t min_leaf = 5;  // minimum bootstrap weight per child
  std::size_t max_depth = 0; // 0: unlimited
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;  // go left when x <= threshold
  std::uint32_t left = 0, right = 0;
  double value = 0.0;  // class-1 fraction at the node
};

struct Tree {
  std::vector<TreeNode> nodes;
  std::size_t depth = 0;
  double predict(const double* row) const;
};

class Forest {
 public:
  Forest() = default;

  // X is n x p (row-major); y in {0, 1}; row_ids key the bootstrap (defaults
  // to 0..n-1).
  static Forest train(const RowMatrix& X, std::span<const double> y, const ForestParams& params,
                      std::uint64_t seed, std::span<const std::uint64_t> row_ids = {},
                      Execution exec = Execution::parallel);

  std::vector<double> predict(const RowMatrix& X, Execution exec = Execution::parallel) const;

  const std::vector<Tree>& trees() const noexcept { return trees_; }
  std::size_t num_features() const noexcept { return p_; }

 private:
  std::vector<Tree> trees_;
  std::size_t p_ = 0;
};

}  // namespace parity_forge
