#include "parity_forge/design.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "parity_forge/error.hpp"

namespace parity_forge {

DesignBuilder::DesignBuilder(std::size_t rows) : n_(rows) {}

void DesignBuilder::add_numeric(std::string name, std::span<const double> values) {
  if (values.size() != n_) {
    throw Error(ErrorKind::contract, "design column '" + name + "' has wrong length");
  }
  names_.push_back(std::move(name));
  cols_.emplace_back(values.begin(), values.end());
}

void DesignBuilder::add_categorical(const std::string& name, std::span<const double> codes,
                                   const std::vector<std::string>& labels) {
  if (codes.size() != n_) {
    throw Error(ErrorKind::contract, "design column '" + name + "' has wrong length");
  }
  std::set<double> seen(codes.begin(), codes.end());
  if (seen.size() < 2) return;
  auto it = seen.begin();
  for (++it; it != seen.end(); ++it) {
    double level = *it;
    std::string label;
    auto idx = static_cast<std::size_t>(level);
    if (level >= 0 && idx < labels.size()) {
      label = labels[idx];
    } else {
      label = std::to_string(static_cast<long long>(level));
    }
    std::vector<double> dummy(n_);
    for (std::size_t i = 0; i < n_; ++i) dummy[i] = codes[i] == level ? 1.0 : 0.0;
    names_.push_back(name + "=" + label);
    cols_.push_back(std::move(dummy));
  }
}

void DesignBuilder::add_column(const Column& col) {
  if (col.spec().scale == Scale::categorical) {
    add_categorical(col.name(), col.values(), col.levels());
  } else {
    add_numeric(col.name(), col.values());
  }
}

void DesignBuilder::add_product(const std::string& a, const std::string& b) {
  auto find = [&](const std::string& nm) -> const std::vector<double>& {
    for (std::size_t k = 0; k < names_.size(); ++k) {
      if (names_[k] == nm) return cols_[k];
    }
    throw Error(ErrorKind::contract, "design has no column '" + nm + "'");
  };
  const auto& ca = find(a);
  const auto& cb = find(b);
  std::vector<double> prod(n_);
  for (std::size_t i = 0; i < n_; ++i) prod[i] = ca[i] * cb[i];
  names_.push_back(a + ":" + b);
  cols_.push_back(std::move(prod));
}

DesignMatrix DesignBuilder::build() const {
  DesignMatrix d;
  d.names.reserve(names_.size() + 1);
  d.names.emplace_back(kIntercept);
  d.names.insert(d.names.end(), names_.begin(), names_.end());
  d.X.resize(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(names_.size() + 1));
  for (std::size_t i = 0; i < n_; ++i) {
    auto r = static_cast<Eigen::Index>(i);
    d.X(r, 0) = 1.0;
    for (std::size_t k = 0; k < cols_.size(); ++k) {
      d.X(r, static_cast<Eigen::Index>(k + 1)) = cols_[k][i];
    }
  }
  return d;
}

GroupCodes joint_groups(const std::vector<const Column*>& cols) {
  if (cols.empty()) throw Error(ErrorKind::contract, "joint_groups needs at least one column");
  const std::size_t n = cols.front()->size();
  std::vector<std::string> row_label(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string s;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) s += "|";
      s += cols[c]->name() + "=";
      const Column& col = *cols[c];
      if (col.spec().scale == Scale::categorical) {
        s += col.levels()[static_cast<std::size_t>(col.values()[i])];
      } else {
        s += col.format(i);
      }
    }
    row_label[i] = std::move(s);
  }
  std::map<std::string, std::size_t> index;
  for (const auto& l : row_label) index.emplace(l, 0);
  GroupCodes g;
  for (auto& [label, code] : index) {
    code = g.labels.size();
    g.labels.push_back(label);
  }
  g.codes.resize(n);
  for (std::size_t i = 0; i < n; ++i) g.codes[i] = index.at(row_label[i]);
  return g;
}

DesignMatrix group_design(const GroupCodes& g) {
  DesignMatrix d;
  d.names = {"group"};
  d.X.resize(static_cast<Eigen::Index>(g.codes.size()), 1);
  for (std::size_t i = 0; i < g.codes.size(); ++i) {
    d.X(static_cast<Eigen::Index>(i), 0) = static_cast<double>(g.codes[i]);
  }
  return d;
}

}  // namespace parity_forge
