#pragma once

#include <string>
#include <vector>

#include "dipr/types.hpp"

namespace dipr {

// Binds column names to the parts of the conditional moment restriction
// E[g1 * h(V_h) - g0 | V_q] = 0. Lists or names may be empty until an
// adapter attaches them; every bound name must exist in the dataset.
struct RoleMap {
  std::vector<std::string> v_h;
  std::vector<std::string> v_q;
  std::string g0;
  std::string g1;
};

class Dataset {
 public:
  Dataset(std::vector<std::string> columns, Mat values, RoleMap roles);

  Index n() const { return values_.rows(); }
  const std::vector<std::string>& columns() const { return columns_; }
  const Mat& values() const { return values_; }
  Mat& values() { return values_; }
  const RoleMap& roles() const { return roles_; }

  bool has_column(const std::string& name) const;
  Index column_index(const std::string& name) const;
  Vec column(const std::string& name) const;

  // n x |names| matrix of the named columns, in order.
  Mat matrix_of(const std::vector<std::string>& names) const;
  Mat v_h_points() const;
  Mat v_q_points() const;
  Vec g0() const;
  Vec g1() const;

  // Row-subset copy; fits that receive it cannot observe other rows.
  Dataset subset(const std::vector<Index>& rows) const;
  // Copy with one column appended (or replaced if the name exists).
  Dataset with_column(const std::string& name, const Vec& values) const;
  Dataset with_roles(RoleMap roles) const;

 private:
  void validate_roles() const;

  std::vector<std::string> columns_;
  Mat values_;  // n x columns
  RoleMap roles_;
};

}  // namespace dipr
