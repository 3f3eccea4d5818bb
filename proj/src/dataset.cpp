#include "dipr/dataset.hpp"

#include <algorithm>

namespace dipr {

Dataset::Dataset(std::vector<std::string> columns, Mat values, RoleMap roles)
    : columns_(std::move(columns)), values_(std::move(values)), roles_(std::move(roles)) {
  if (static_cast<Index>(columns_.size()) != values_.cols())
    throw ConfigError("dataset has " + std::to_string(values_.cols()) +
                      " value columns but " + std::to_string(columns_.size()) + " names");
  for (std::size_t i = 0; i < columns_.size(); ++i)
    for (std::size_t j = i + 1; j < columns_.size(); ++j)
      if (columns_[i] == columns_[j])
        throw ConfigError("duplicate dataset column: " + columns_[i]);
  if (!values_.allFinite()) throw ConfigError("dataset contains non-finite values");
  validate_roles();
}

void Dataset::validate_roles() const {
  auto require = [this](const std::string& name, const char* role) {
    if (!name.empty() && !has_column(name))
      throw ConfigError(std::string("role ") + role + " references missing column: " + name);
  };
  for (const auto& c : roles_.v_h) require(c, "v_h");
  for (const auto& c : roles_.v_q) require(c, "v_q");
  require(roles_.g0, "g0");
  require(roles_.g1, "g1");
}

bool Dataset::has_column(const std::string& name) const {
  return std::find(columns_.begin(), columns_.end(), name) != columns_.end();
}

Index Dataset::column_index(const std::string& name) const {
  const auto it = std::find(columns_.begin(), columns_.end(), name);
  if (it == columns_.end()) throw ConfigError("no such column: " + name);
  return static_cast<Index>(it - columns_.begin());
}

Vec Dataset::column(const std::string& name) const {
  return values_.col(column_index(name));
}

Mat Dataset::matrix_of(const std::vector<std::string>& names) const {
  Mat out(values_.rows(), static_cast<Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j)
    out.col(static_cast<Index>(j)) = values_.col(column_index(names[j]));
  return out;
}

Mat Dataset::v_h_points() const {
  if (roles_.v_h.empty()) throw ConfigError("dataset has no v_h role bound");
  return matrix_of(roles_.v_h);
}

Mat Dataset::v_q_points() const {
  if (roles_.v_q.empty()) throw ConfigError("dataset has no v_q role bound");
  return matrix_of(roles_.v_q);
}

Vec Dataset::g0() const {
  if (roles_.g0.empty()) throw ConfigError("dataset has no g0 role bound");
  return column(roles_.g0);
}

Vec Dataset::g1() const {
  if (roles_.g1.empty()) throw ConfigError("dataset has no g1 role bound");
  return column(roles_.g1);
}

Dataset Dataset::subset(const std::vector<Index>& rows) const {
  Mat v(static_cast<Index>(rows.size()), values_.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= values_.rows())
      throw ConfigError("subset row index out of range");
    v.row(static_cast<Index>(i)) = values_.row(rows[i]);
  }
  return Dataset(columns_, std::move(v), roles_);
}

Dataset Dataset::with_column(const std::string& name, const Vec& col) const {
  if (col.size() != values_.rows())
    throw ConfigError("with_column: length mismatch for " + name);
  if (has_column(name)) {
    Mat v = values_;
    v.col(column_index(name)) = col;
    return Dataset(columns_, std::move(v), roles_);
  }
  std::vector<std::string> names = columns_;
  names.push_back(name);
  Mat v(values_.rows(), values_.cols() + 1);
  v.leftCols(values_.cols()) = values_;
  v.col(values_.cols()) = col;
  return Dataset(std::move(names), std::move(v), roles_);
}

Dataset Dataset::with_roles(RoleMap roles) const {
  return Dataset(columns_, values_, std::move(roles));
}

}  // namespace dipr
