#include "dipr/operators.hpp"

#include <cmath>

namespace dipr {

SingularSystem::SingularSystem(Vec sigmas_in, BasisSpec input, BasisSpec output)
    : sigmas(std::move(sigmas_in)),
      input_basis(std::move(input)),
      output_basis(std::move(output)) {
  if (sigmas.size() < 1) throw ConfigError("singular system needs at least one value");
  if (sigmas.size() > input_basis.dimension() ||
      sigmas.size() > output_basis.dimension())
    throw ConfigError("singular system rank exceeds a basis dimension");
  for (Index i = 0; i < sigmas.size(); ++i) {
    if (!(sigmas[i] > 0.0))
      throw ConfigError("singular values must be positive");
    if (i > 0 && sigmas[i] > sigmas[i - 1])
      throw ConfigError("singular values must be nonincreasing");
  }
}

SieveOperator::SieveOperator(Mat m, BasisSpec input, BasisSpec output)
    : matrix(std::move(m)),
      input_basis(std::move(input)),
      output_basis(std::move(output)) {
  if (matrix.rows() != output_basis.dimension() ||
      matrix.cols() != input_basis.dimension())
    throw ConfigError("sieve operator matrix shape does not match its bases");
}

SieveOperator to_sieve(const SingularSystem& sys) {
  Mat m = Mat::Zero(sys.output_basis.dimension(), sys.input_basis.dimension());
  for (Index i = 0; i < sys.rank(); ++i) m(i, i) = sys.sigmas[i];
  return SieveOperator(std::move(m), sys.input_basis, sys.output_basis);
}

FunctionHandle apply(const SingularSystem& sys, const FunctionHandle& h) {
  if (h.basis() != sys.input_basis)
    throw ConfigError("apply: function basis does not match operator input basis");
  Vec out = Vec::Zero(sys.output_basis.dimension());
  const Index r = std::min(sys.rank(), h.coeffs().size());
  out.head(r) = sys.sigmas.head(r).cwiseProduct(h.coeffs().head(r));
  return FunctionHandle(sys.output_basis, std::move(out));
}

FunctionHandle adjoint_apply(const SingularSystem& sys, const FunctionHandle& g) {
  if (g.basis() != sys.output_basis)
    throw ConfigError("adjoint_apply: function basis does not match operator output basis");
  Vec out = Vec::Zero(sys.input_basis.dimension());
  const Index r = std::min(sys.rank(), g.coeffs().size());
  out.head(r) = sys.sigmas.head(r).cwiseProduct(g.coeffs().head(r));
  return FunctionHandle(sys.input_basis, std::move(out));
}

FunctionHandle apply(const SieveOperator& op, const FunctionHandle& h) {
  if (h.basis() != op.input_basis)
    throw ConfigError("apply: function basis does not match operator input basis");
  return FunctionHandle(op.output_basis, op.matrix * h.coeffs());
}

FunctionHandle adjoint_apply(const SieveOperator& op, const FunctionHandle& g) {
  if (g.basis() != op.output_basis)
    throw ConfigError("adjoint_apply: function basis does not match operator output basis");
  return FunctionHandle(op.input_basis, op.matrix.transpose() * g.coeffs());
}

FunctionHandle picard_solve(const SingularSystem& sys, const FunctionHandle& r,
                            Index k) {
  if (r.basis() != sys.output_basis)
    throw ConfigError("picard_solve: data basis does not match operator output basis");
  if (k < 1 || k > sys.rank())
    throw ConfigError("picard_solve: truncation exceeds rank");
  Vec out = Vec::Zero(sys.input_basis.dimension());
  for (Index i = 0; i < k; ++i) out[i] = r.coeffs()[i] / sys.sigmas[i];
  return FunctionHandle(sys.input_basis, std::move(out));
}

double source_condition_norm(const SingularSystem& sys, const FunctionHandle& h,
                             double beta) {
  if (h.basis() != sys.input_basis)
    throw ConfigError("source_condition_norm: basis mismatch");
  if (!(beta > 0.0)) throw ConfigError("source_condition_norm: beta must be positive");
  double acc = 0.0;
  for (Index i = 0; i < h.coeffs().size(); ++i) {
    const double c = h.coeffs()[i];
    if (c == 0.0) continue;
    if (i >= sys.rank())
      throw NumericalError("source condition violated at component " + std::to_string(i) +
                           ": coefficient beyond operator rank");
    const double denom = std::pow(sys.sigmas[i], 2.0 * beta);
    const double term = (c / denom) * c;
    if (denom == 0.0 || !std::isfinite(term))
      throw NumericalError("source condition violated at component " + std::to_string(i) +
                           ": sigma^(2 beta) underflows");
    acc += term;
  }
  return std::sqrt(acc);
}

FunctionHandle population_tikhonov_iterate(const SingularSystem& sys,
                                           const FunctionHandle& h0,
                                           double lambda, int t) {
  if (h0.basis() != sys.input_basis)
    throw ConfigError("population_tikhonov_iterate: basis mismatch");
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (t < 1) throw ConfigError("iteration count must be at least one");
  // Components beyond the rank have sigma = 0, so their filter factor is
  // 1 - (lambda/lambda)^t = 0: the recursion never moves off the zero start.
  Vec out = Vec::Zero(h0.coeffs().size());
  const Index r = std::min(sys.rank(), h0.coeffs().size());
  out.head(r) = tikhonov_filter_factors(sys.sigmas.head(r), lambda, t)
                    .cwiseProduct(h0.coeffs().head(r));
  return FunctionHandle(sys.input_basis, std::move(out));
}

namespace {

// gram^(+-1/2) through an eigendecomposition; rejects near-singular input.
Mat gram_power(const Mat& g, double power, const char* what) {
  Eigen::SelfAdjointEigenSolver<Mat> es(g);
  if (es.info() != Eigen::Success)
    throw NumericalError("eigendecomposition failed for a Gram matrix");
  const Vec& ev = es.eigenvalues();
  const double floor = 1e-12 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  Vec scaled(ev.size());
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev[i] <= floor)
      throw NumericalError(std::string("degenerate empirical design: ") + what +
                           " Gram matrix is singular");
    scaled[i] = std::pow(ev[i], power);
  }
  return es.eigenvectors() * scaled.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double operator_norm_diff(const SieveOperator& a, const SieveOperator& b,
                          const Mat& gram_in, const Mat& gram_out) {
  if (a.input_basis != b.input_basis || a.output_basis != b.output_basis)
    throw ConfigError("operator_norm_diff: operators live on different bases");
  if (gram_in.rows() != a.matrix.cols() || gram_out.rows() != a.matrix.rows())
    throw ConfigError("operator_norm_diff: Gram shapes do not match the operators");
  const Mat m = gram_power(gram_out, 0.5, "output") * (a.matrix - b.matrix) *
                gram_power(gram_in, -0.5, "input");
  return m.jacobiSvd().singularValues()[0];
}

double operator_norm_diff(const SieveOperator& a, const SieveOperator& b) {
  if (a.input_basis != b.input_basis || a.output_basis != b.output_basis)
    throw ConfigError("operator_norm_diff: operators live on different bases");
  return (a.matrix - b.matrix).jacobiSvd().singularValues()[0];
}

}  // namespace dipr
