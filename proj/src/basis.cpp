#include "dipr/basis.hpp"

#include <cmath>
#include <numbers>

namespace dipr {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kPi = std::numbers::pi;

void check_unit_interval(double x) {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::domain_error("basis point outside [0, 1]: " + std::to_string(x));
}

int checked_category(double x, Index k) {
  const double r = std::round(x);
  if (std::abs(x - r) > 1e-9)
    throw std::domain_error("indicator basis point is not integral: " + std::to_string(x));
  if (r < 0.0 || r >= static_cast<double>(k))
    throw std::domain_error("indicator category out of range: " + std::to_string(x));
  return static_cast<int>(r);
}

}  // namespace

std::string to_string(BasisFamily f) {
  switch (f) {
    case BasisFamily::cosine: return "cosine";
    case BasisFamily::legendre: return "legendre";
    case BasisFamily::indicator: return "indicator";
    case BasisFamily::tensor: return "tensor";
  }
  throw ConfigError("unknown basis family");
}

BasisFamily basis_family_from_string(const std::string& s) {
  if (s == "cosine") return BasisFamily::cosine;
  if (s == "legendre") return BasisFamily::legendre;
  if (s == "indicator") return BasisFamily::indicator;
  if (s == "tensor") return BasisFamily::tensor;
  throw ConfigError("unknown basis family: " + s);
}

BasisSpec BasisSpec::cosine(Index dim) {
  if (dim < 1) throw ConfigError("basis dimension must be positive");
  BasisSpec b;
  b.family_ = BasisFamily::cosine;
  b.dim_ = dim;
  b.arity_ = 1;
  return b;
}

BasisSpec BasisSpec::legendre(Index dim) {
  if (dim < 1) throw ConfigError("basis dimension must be positive");
  BasisSpec b;
  b.family_ = BasisFamily::legendre;
  b.dim_ = dim;
  b.arity_ = 1;
  return b;
}

BasisSpec BasisSpec::indicator(Vec category_weights) {
  if (category_weights.size() < 1)
    throw ConfigError("indicator basis needs at least one category");
  if ((category_weights.array() <= 0.0).any())
    throw ConfigError("indicator category weights must be positive");
  if (std::abs(category_weights.sum() - 1.0) > 1e-8)
    throw ConfigError("indicator category weights must sum to one");
  BasisSpec b;
  b.family_ = BasisFamily::indicator;
  b.dim_ = category_weights.size();
  b.arity_ = 1;
  b.weights_ = std::move(category_weights);
  return b;
}

BasisSpec BasisSpec::tensor(BasisSpec first, BasisSpec second) {
  BasisSpec b;
  b.family_ = BasisFamily::tensor;
  b.dim_ = first.dimension() * second.dimension();
  b.arity_ = first.arity() + second.arity();
  b.factors_.push_back(std::move(first));
  b.factors_.push_back(std::move(second));
  return b;
}

const Vec& BasisSpec::weights() const {
  if (family_ != BasisFamily::indicator)
    throw ConfigError("weights() is only defined for indicator bases");
  return weights_;
}

const BasisSpec& BasisSpec::factor(int i) const {
  if (family_ != BasisFamily::tensor)
    throw ConfigError("factor() is only defined for tensor bases");
  return factors_.at(static_cast<std::size_t>(i));
}

double BasisSpec::evaluate_element(Index j, const double* x) const {
  if (j < 0 || j >= dim_) throw ConfigError("basis element index out of range");
  switch (family_) {
    case BasisFamily::cosine: {
      check_unit_interval(x[0]);
      if (j == 0) return 1.0;
      return kSqrt2 * std::cos(static_cast<double>(j) * kPi * x[0]);
    }
    case BasisFamily::legendre: {
      check_unit_interval(x[0]);
      // Shifted Legendre, normalized on [0, 1]: sqrt(2j+1) * P_j(2x - 1).
      const double u = 2.0 * x[0] - 1.0;
      double pm1 = 1.0, p = u;
      if (j == 0) return 1.0;
      for (Index k = 1; k < j; ++k) {
        const double pk1 = ((2.0 * k + 1.0) * u * p - k * pm1) / (k + 1.0);
        pm1 = p;
        p = pk1;
      }
      return std::sqrt(2.0 * j + 1.0) * p;
    }
    case BasisFamily::indicator: {
      const int c = checked_category(x[0], dim_);
      return c == static_cast<int>(j) ? 1.0 / std::sqrt(weights_[c]) : 0.0;
    }
    case BasisFamily::tensor: {
      const Index d2 = factors_[1].dimension();
      const Index j1 = j / d2, j2 = j % d2;
      return factors_[0].evaluate_element(j1, x) *
             factors_[1].evaluate_element(j2, x + factors_[0].arity());
    }
  }
  throw ConfigError("unknown basis family");
}

Vec BasisSpec::evaluate_point(const double* x) const {
  Vec out(dim_);
  for (Index j = 0; j < dim_; ++j) out[j] = evaluate_element(j, x);
  return out;
}

Mat BasisSpec::design(const Mat& points) const {
  if (points.cols() != arity_)
    throw ConfigError("points have " + std::to_string(points.cols()) +
                      " coordinates, basis consumes " + std::to_string(arity_));
  Mat out(points.rows(), dim_);
  std::vector<double> row(static_cast<std::size_t>(arity_));
  for (Index i = 0; i < points.rows(); ++i) {
    for (int c = 0; c < arity_; ++c) row[static_cast<std::size_t>(c)] = points(i, c);
    out.row(i) = evaluate_point(row.data()).transpose();
  }
  return out;
}

bool BasisSpec::operator==(const BasisSpec& other) const {
  if (family_ != other.family_ || dim_ != other.dim_) return false;
  switch (family_) {
    case BasisFamily::indicator:
      return weights_.size() == other.weights_.size() && weights_ == other.weights_;
    case BasisFamily::tensor:
      return factors_[0] == other.factors_[0] && factors_[1] == other.factors_[1];
    default:
      return true;
  }
}

Mat gram(const BasisSpec& basis, const Mat& points) {
  if (points.rows() == 0) throw ConfigError("gram of an empty point set");
  const Mat d = basis.design(points);
  return d.transpose() * d / static_cast<double>(points.rows());
}

FunctionHandle::FunctionHandle(BasisSpec basis, Vec coeffs)
    : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != basis_.dimension())
    throw ConfigError("coefficient length " + std::to_string(coeffs_.size()) +
                      " does not match basis dimension " +
                      std::to_string(basis_.dimension()));
}

double FunctionHandle::operator()(const double* x) const {
  return basis_.evaluate_point(x).dot(coeffs_);
}

FunctionHandle zero_function(const BasisSpec& basis) {
  return FunctionHandle(basis, Vec::Zero(basis.dimension()));
}

Vec evaluate(const FunctionHandle& h, const Mat& points) {
  return h.basis().design(points) * h.coeffs();
}

}  // namespace dipr
