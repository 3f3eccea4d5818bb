#pragma once

#include "dipr/basis.hpp"
#include "dipr/types.hpp"

namespace dipr {

// Diagonal representation of a compact operator between two orthonormal
// bases: T phi_i = sigma_i psi_i for i < rank, T phi_i = 0 beyond.
struct SingularSystem {
  SingularSystem(Vec sigmas_in, BasisSpec input, BasisSpec output);

  Index rank() const { return sigmas.size(); }

  Vec sigmas;  // positive, nonincreasing
  BasisSpec input_basis;
  BasisSpec output_basis;
};

// Matrix representation of an estimated operator on sieve coefficients:
// output coefficients = matrix * input coefficients.
struct SieveOperator {
  SieveOperator(Mat m, BasisSpec input, BasisSpec output);

  Mat matrix;  // output_dim x input_dim
  BasisSpec input_basis;
  BasisSpec output_basis;
};

SieveOperator to_sieve(const SingularSystem& sys);

FunctionHandle apply(const SingularSystem& sys, const FunctionHandle& h);
FunctionHandle adjoint_apply(const SingularSystem& sys, const FunctionHandle& g);
FunctionHandle apply(const SieveOperator& op, const FunctionHandle& h);
FunctionHandle adjoint_apply(const SieveOperator& op, const FunctionHandle& g);

// Truncated Picard inversion: keep the first k singular components of r.
// Requires r in the range of the operator and k <= rank.
FunctionHandle picard_solve(const SingularSystem& sys, const FunctionHandle& r,
                            Index k);

// Norm of the source-condition representer w with h = (T*T)^(beta/2) w,
// i.e. sqrt(sum_i <h, phi_i>^2 / sigma_i^(2 beta)).
double source_condition_norm(const SingularSystem& sys, const FunctionHandle& h,
                             double beta);

// Filter factors of the t-times iterated Tikhonov regularizer started at
// zero: factor_i = 1 - (lambda / (sigma_i^2 + lambda))^t.
template <typename Derived>
Vec tikhonov_filter_factors(const Eigen::MatrixBase<Derived>& sigmas,
                            double lambda, int t) {
  Vec f(sigmas.size());
  for (Index i = 0; i < sigmas.size(); ++i) {
    const double s2 = static_cast<double>(sigmas[i]) * static_cast<double>(sigmas[i]);
    f[i] = 1.0 - std::pow(lambda / (s2 + lambda), t);
  }
  return f;
}

// Noiseless population iterate of the iterated-Tikhonov recursion, written
// in closed form through the filter factors.
FunctionHandle population_tikhonov_iterate(const SingularSystem& sys,
                                           const FunctionHandle& h0,
                                           double lambda, int t);

// Largest singular value of gram_out^(1/2) (A - B) gram_in^(-1/2): the
// operator norm of the difference between the L2 spaces induced by the two
// Gram matrices.
double operator_norm_diff(const SieveOperator& a, const SieveOperator& b,
                          const Mat& gram_in, const Mat& gram_out);
double operator_norm_diff(const SieveOperator& a, const SieveOperator& b);

}  // namespace dipr
