#include "parity_forge/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "parity_forge/error.hpp"
#include "parity_forge/rng.hpp"
#include "parity_forge/special.hpp"

namespace parity_forge {

double Tree::predict(const double* row) const {
  std::uint32_t k = 0;
  while (nodes[k].feature >= 0) {
    const TreeNode& nd = nodes[k];
    k = row[nd.feature] <= nd.threshold ? nd.left : nd.right;
  }
  return nodes[k].value;
}

namespace {

struct Range {
  std::uint32_t node;
  std::size_t begin, end;
  std::size_t depth;
};

class TreeBuilder {
 public:
  TreeBuilder(const RowMatrix& X, std::span<const double> y, const ForestParams& params,
              std::uint64_t seed, std::uint32_t tree, std::span<const std::uint64_t> row_ids)
      : X_(X), y_(y), params_(params), seed_(seed), tree_(tree),
        p_(static_cast<std::size_t>(X.cols())) {
    const std::size_t n = y.size();
    w_.assign(n, 0.0);
    DrawKey bk{seed, Domain::bootstrap, tree, 0};
    std::vector<std::uint32_t> in_bag;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t id = row_ids.empty() ? i : row_ids[i];
      w_[i] = static_cast<double>(poisson_from_uniform(keyed_uniform(bk, id), 1.0));
      if (w_[i] > 0) in_bag.push_back(static_cast<std::uint32_t>(i));
    }
    order_.resize(p_);
    for (std::size_t f = 0; f < p_; ++f) {
      order_[f] = in_bag;
      std::stable_sort(order_[f].begin(), order_[f].end(),
                       [&](std::uint32_t a, std::uint32_t b) { return x(a, f) < x(b, f); });
    }
    left_flag_.assign(n, 0);
    scratch_.resize(in_bag.size());
    mtry_ = params.mtry ? std::min(params.mtry, p_)
                        : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(p_))));
    mtry_ = std::max<std::size_t>(mtry_, 1);
  }

  Tree build() {
    Tree t;
    t.nodes.emplace_back();
    std::vector<Range> stack;
    if (!order_.empty() && !order_[0].empty()) stack.push_back({0, 0, order_[0].size(), 0});
    while (!stack.empty()) {
      Range r = stack.back();
      stack.pop_back();
      t.depth = std::max(t.depth, r.depth);
      split_node(t, r, stack);
    }
    return t;
  }

 private:
  double x(std::size_t i, std::size_t f) const {
    return X_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f));
  }

  std::vector<std::size_t> sample_features(std::uint32_t node) const {
    std::vector<std::size_t> feats(p_);
    std::iota(feats.begin(), feats.end(), 0);
    DrawKey fk{seed_, Domain::feature_sampling, tree_, 0};
    for (std::size_t k = 0; k < mtry_; ++k) {
      double u = keyed_uniform(fk, static_cast<std::uint64_t>(node) * p_ + k);
      std::size_t j = k + std::min(p_ - k - 1, static_cast<std::size_t>(u * static_cast<double>(p_ - k)));
      std::swap(feats[k], feats[j]);
    }
    feats.resize(mtry_);
    return feats;
  }

  static double impurity(double w, double w1) {
    if (w <= 0) return 0.0;
    double w0 = w - w1;
    return w - (w1 * w1 + w0 * w0) / w;
  }

  void split_node(Tree& t, const Range& r, std::vector<Range>& stack) {
    const auto& ord0 = order_[0];
    double W = 0, W1 = 0;
    for (std::size_t k = r.begin; k < r.end; ++k) {
      W += w_[ord0[k]];
      W1 += w_[ord0[k]] * y_[ord0[k]];
    }
    t.nodes[r.node].value = W1 / W;
    const double min_leaf = static_cast<double>(params_.min_leaf);
    if (W < 2 * min_leaf || W1 == 0 || W1 == W) return;
    if (params_.max_depth && r.depth >= params_.max_depth) return;

    const double parent = impurity(W, W1);
    double best = parent - 1e-12;
    int best_f = -1;
    double best_thr = 0;
    for (std::size_t f : sample_features(r.node)) {
      const auto& ord = order_[f];
      double wl = 0, wl1 = 0;
      for (std::size_t k = r.begin; k + 1 < r.end; ++k) {
        std::uint32_t i = ord[k];
        wl += w_[i];
        wl1 += w_[i] * y_[i];
        double xi = x(i, f), xn = x(ord[k + 1], f);
        if (!(xn > xi)) continue;
        if (wl < min_leaf || W - wl < min_leaf) continue;
        double score = impurity(wl, wl1) + impurity(W - wl, W1 - wl1);
        if (score < best) {
          best = score;
          best_f = static_cast<int>(f);
          double mid = 0.5 * (xi + xn);
          best_thr = (mid < xn) ? mid : xi;
        }
      }
    }
    if (best_f < 0) return;

    const auto bf = static_cast<std::size_t>(best_f);
    std::size_t n_left = 0;
    for (std::size_t k = r.begin; k < r.end; ++k) {
      std::uint32_t i = ord0[k];
      left_flag_[i] = x(i, bf) <= best_thr;
      n_left += left_flag_[i];
    }
    for (std::size_t f = 0; f < p_; ++f) {
      auto& ord = order_[f];
      std::size_t l = 0, rr = n_left;
      for (std::size_t k = r.begin; k < r.end; ++k) {
        std::uint32_t i = ord[k];
        scratch_[left_flag_[i] ? l++ : rr++] = i;
      }
      std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(r.end - r.begin),
                ord.begin() + static_cast<std::ptrdiff_t>(r.begin));
    }

    auto left = static_cast<std::uint32_t>(t.nodes.size());
    auto right = left + 1;
    t.nodes.emplace_back();
    t.nodes.emplace_back();
    TreeNode& nd = t.nodes[r.node];
    nd.feature = best_f;
    nd.threshold = best_thr;
    nd.left = left;
    nd.right = right;
    // Right pushed first so the left subtree is numbered first.
    stack.push_back({right, r.begin + n_left, r.end, r.depth + 1});
    stack.push_back({left, r.begin, r.begin + n_left, r.depth + 1});
  }

  const RowMatrix& X_;
  std::span<const double> y_;
  const ForestParams& params_;
  std::uint64_t seed_;
  std::uint32_t tree_;
  std::size_t p_;
  std::size_t mtry_ = 1;
  std::vector<double> w_;
  std::vector<std::vector<std::uint32_t>> order_;
  std::vector<unsigned char> left_flag_;
  std::vector<std::uint32_t> scratch_;
};

}  // namespace

Forest Forest::train(const RowMatrix& X, std::span<const double> y, const ForestParams& params,
                     std::uint64_t seed, std::span<const std::uint64_t> row_ids, Execution exec) {
  if (static_cast<std::size_t>(X.rows()) != y.size()) {
    throw Error(ErrorKind::contract, "feature rows and labels differ in length");
  }
  if (!row_ids.empty() && row_ids.size() != y.size()) {
    throw Error(ErrorKind::contract, "row ids and labels differ in length");
  }
  if (params.trees == 0) throw Error(ErrorKind::config, "forest needs at least one tree");
  if (params.min_leaf == 0) throw Error(ErrorKind::config, "min_leaf must be positive");
  for (double v : y) {
    if (v != 0.0 && v != 1.0) throw Error(ErrorKind::contract, "forest labels must be 0 or 1");
  }
  Forest f;
  f.p_ = static_cast<std::size_t>(X.cols());
  f.trees_.resize(params.trees);
  if (exec == Execution::serial) {
    for (std::size_t t = 0; t < params.trees; ++t) {
      f.trees_[t] = TreeBuilder(X, y, params, seed, static_cast<std::uint32_t>(t), row_ids).build();
    }
  } else {
    const auto st = static_cast<std::ptrdiff_t>(params.trees);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t t = 0; t < st; ++t) {
      f.trees_[static_cast<std::size_t>(t)] =
          TreeBuilder(X, y, params, seed, static_cast<std::uint32_t>(t), row_ids).build();
    }
  }
  return f;
}

std::vector<double> Forest::predict(const RowMatrix& X, Execution exec) const {
  if (static_cast<std::size_t>(X.cols()) != p_) {
    throw Error(ErrorKind::contract, "forest expects " + std::to_string(p_) + " features");
  }
  const auto n = static_cast<std::ptrdiff_t>(X.rows());
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  const double inv = 1.0 / static_cast<double>(trees_.size());
  auto one = [&](std::ptrdiff_t i) {
    const double* row = X.data() + i * X.cols();
    double s = 0.0;
    for (const auto& t : trees_) s += t.predict(row);
    out[static_cast<std::size_t>(i)] = s * inv;
  };
  if (exec == Execution::serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) one(i);
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) one(i);
  }
  return out;
}

}  // namespace parity_forge
