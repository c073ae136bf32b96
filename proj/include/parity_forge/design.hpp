#pragma once

// Regression design matrices from mixed-scale columns. Categorical inputs
// are one-hot encoded against their lowest observed level.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "parity_forge/condmodels.hpp"
#include "parity_forge/core.hpp"

namespace parity_forge {

class DesignBuilder {
 public:
  explicit DesignBuilder(std::size_t rows);

  std::size_t rows() const noexcept { return n_; }
  // Column names added so far, without the intercept.
  const std::vector<std::string>& names() const noexcept { return names_; }

  void add_numeric(std::string name, std::span<const double> values);
  // Dummy columns "name=label" for every observed code except the smallest.
  // `labels[c]` names code c; numeric labels are used when empty.
  void add_categorical(const std::string& name, std::span<const double> codes,
                       const std::vector<std::string>& labels = {});
  // Numeric scales enter as-is, categorical as dummies.
  void add_column(const Column& col);
  // Element-wise product of two already-added columns.
  void add_product(const std::string& a, const std::string& b);

  // Intercept first, then columns in insertion order.
  DesignMatrix build() const;

 private:
  std::size_t n_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> cols_;
};

// Joint level of several discrete columns per row, coded 0..k-1 in sorted
// order of the joint labels.
struct GroupCodes {
  std::vector<std::size_t> codes;
  std::vector<std::string> labels;
};

GroupCodes joint_groups(const std::vector<const Column*>& cols);

// Single-column design [group code] for empirical_by_group models.
DesignMatrix group_design(const GroupCodes& g);

}  // namespace parity_forge
