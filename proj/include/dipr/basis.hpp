#pragma once

#include <string>
#include <vector>

#include "dipr/types.hpp"

namespace dipr {

enum class BasisFamily { cosine, legendre, indicator, tensor };

std::string to_string(BasisFamily f);
BasisFamily basis_family_from_string(const std::string& s);

// A finite orthonormal dictionary. The continuous families live on [0, 1]
// under the uniform measure; the indicator family is orthonormal under its
// declared category weights; a tensor basis multiplies two sub-bases and
// consumes their concatenated coordinates.
class BasisSpec {
 public:
  // Empty placeholder (dimension 0); fill via the factories before use.
  BasisSpec() = default;

  static BasisSpec cosine(Index dim);
  static BasisSpec legendre(Index dim);
  static BasisSpec indicator(Vec category_weights);
  static BasisSpec tensor(BasisSpec first, BasisSpec second);

  BasisFamily family() const { return family_; }
  Index dimension() const { return dim_; }
  // Number of point coordinates one evaluation consumes.
  int arity() const { return arity_; }
  const Vec& weights() const;
  const BasisSpec& factor(int i) const;

  // Value of element j (0-based) at a point of length arity().
  double evaluate_element(Index j, const double* x) const;
  // All element values at one point.
  Vec evaluate_point(const double* x) const;
  // n x dimension() design matrix; points is n x arity().
  Mat design(const Mat& points) const;

  bool operator==(const BasisSpec& other) const;
  bool operator!=(const BasisSpec& other) const { return !(*this == other); }

 private:
  BasisFamily family_ = BasisFamily::cosine;
  Index dim_ = 0;
  int arity_ = 1;
  Vec weights_;                     // indicator only
  std::vector<BasisSpec> factors_;  // tensor only
};

// Empirical Gram matrix (1/n) * design' * design.
Mat gram(const BasisSpec& basis, const Mat& points);

// A function represented by coefficients on an orthonormal basis; its L2 norm
// under the basis measure is the Euclidean norm of the coefficients.
class FunctionHandle {
 public:
  FunctionHandle() = default;  // empty placeholder
  FunctionHandle(BasisSpec basis, Vec coeffs);

  const BasisSpec& basis() const { return basis_; }
  const Vec& coeffs() const { return coeffs_; }
  Vec& coeffs() { return coeffs_; }
  double l2_norm() const { return coeffs_.norm(); }

  double operator()(const double* x) const;
  double operator()(double x) const { return (*this)(&x); }

 private:
  BasisSpec basis_;
  Vec coeffs_;
};

// Zero function on a basis.
FunctionHandle zero_function(const BasisSpec& basis);

// Values of h at each row of points.
Vec evaluate(const FunctionHandle& h, const Mat& points);

}  // namespace dipr
