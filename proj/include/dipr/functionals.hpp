#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dipr/dataset.hpp"
#include "dipr/dgp.hpp"
#include "dipr/estimators.hpp"
#include "dipr/rational.hpp"
#include "dipr/selection.hpp"
#include "dipr/types.hpp"

namespace dipr {

// Per-row evaluator of one s-term of a linear moment functional.
using MomentTerm = std::function<double(const Dataset&, Index)>;

// Linear functional psi_0 = E[s1 q0(V_q) h0(V_h) + s2 q0(V_q) + s3 h0(V_h) + s4]
// whose bridge functions solve
//   E[s1 h0 + s2 | V_q] = 0   (outcome bridge, unknown on V_h)
//   E[s1 q0 + s3 | V_h] = 0   (treatment bridge, unknown on V_q).
struct MomentFunctional {
  MomentTerm s1, s2, s3, s4;
  std::vector<std::string> v_h;  // argument columns of h
  std::vector<std::string> v_q;  // argument columns of q
};

// Counterfactual-mean functional for discrete proxies:
//   s1 = -1{A=a}, s2 = 1{A=a} Y, s3 = 1, s4 = 0, v_h = {W}, v_q = {Z, A}.
// The h-equation then reads E[1{A=a} h(W) | Z, A] = E[1{A=a} Y | Z, A] and the
// q-equation E[1{A=a} q(Z, A) - 1 | W] = 0.
MomentFunctional proximal_functional(int a_level);

// Materialize the bridge equations as conditional moment restrictions ready
// for the estimation pipeline, appending g0/g1 columns and binding roles:
//   h-equation: E[g1 h(V_h) - g0 | V_q] = 0 with g1 = s1, g0 = -s2;
//   q-equation: E[g1 q(V_q) - g0 | V_h] = 0 with g1 = s1, g0 = -s3
// (unknown-argument and conditioning roles swap).
Dataset h_equation(const MomentFunctional& f, const Dataset& data);
Dataset q_equation(const MomentFunctional& f, const Dataset& data);

struct FunctionalEstimate {
  double psi_hat = 0.0;
  double standard_error = 0.0;
  double ci_lo = 0.0;  // psi_hat - 1.96 SE
  double ci_hi = 0.0;  // psi_hat + 1.96 SE
  Index n = 0;
};

// Doubly robust estimate psi_hat = E_n[s1 q h + s2 q + s3 h + s4]; the
// standard error is the sample standard deviation of the integrand / sqrt(n).
FunctionalEstimate if_estimate(const Dataset& data, const FunctionHandle& h_hat,
                               const FunctionHandle& q_hat,
                               const MomentFunctional& f);

// Population value of the same integrand under the finite proximal model by
// exact enumeration; exact whenever the s-terms keep the integrand polynomial
// of degree at most two in Y (true for the counterfactual-mean functional).
double enumerate_functional(const DiscreteProximalDgp& dgp,
                            const MomentFunctional& f, const FunctionHandle& h,
                            const FunctionHandle& q);

struct MixedBiasResult {
  double bias = 0.0;     // psi_0 - E[psi_hat integrand at (h_hat, q_hat)]
  double product = 0.0;  // E[s1 (q0 - q_hat)(h_hat - h0)]
};

// Exact enumeration of both sides of the mixed-bias identity
//   psi_0 - E[s1 q_hat h_hat + s2 q_hat + s3 h_hat + s4]
//     = E[s1 (q0 - q_hat)(h_hat - h0)],
// so the bias vanishes whenever either bridge is exact. Note the orientation:
// the two error factors enter with opposite signs. Throws NumericalError if
// the independently computed sides disagree beyond 1e-9.
MixedBiasResult mixed_bias(const DiscreteProximalDgp& dgp,
                           const FunctionHandle& h_hat, const FunctionHandle& q_hat,
                           const FunctionHandle& h0, const FunctionHandle& q0,
                           const MomentFunctional& f);

// Root-n feasibility calculator. All nuisance errors are coupled to a single
// sieve-rate knob rho_n as in the worked smooth-series example; the result is
// the exponent e such that rho_n = o(n^{-e}) makes the first-order bias of the
// functional estimator o(n^{-1/2}).
enum class RateRegime {
  source_projected,  // pair one bridge's source error with the other's projected error
  alpha_conversion,  // source errors recovered from projected rates via the alpha condition
  no_debias,         // single-layer (plug-in) bridge estimates, alpha conversion
};
RateRegime rate_regime_from_string(const std::string& s);
std::string to_string(RateRegime r);

struct RateRequirement {
  Rational exponent;         // rho_n = o(n^{-exponent}) suffices
  Rational branch_qh;        // q-error paired first / h-error second
  Rational branch_hq;        // h-error paired first / q-error second
  bool feasible = true;      // exponent <= 1/2, i.e. slower than parametric
};

// beta_* are the source-condition exponents of the two bridges; alpha_* the
// error-decay exponents used by the alpha_conversion and no_debias regimes.
RateRequirement rate_requirement(const Rational& beta_h, const Rational& beta_q,
                                 const Rational& alpha_h, const Rational& alpha_q,
                                 RateRegime regime);

struct FunctionalPipelineConfig {
  BasisSpec basis_h;  // sieve for h on the v_h columns
  BasisSpec basis_q;  // sieve for q on the v_q columns
  std::array<double, 3> fractions{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  double grid_epsilon = 0.01;
  std::optional<double> grid_proxy;
  std::optional<int> grid_m;
  std::optional<double> ridge;
  int iterations = 2;
  FitMethod method = FitMethod::debiased;
  double hessian_floor = 0.0;
  std::uint64_t seed = 0;
};

struct FunctionalFold {
  Index n_eval = 0;
  double psi = 0.0;       // integrand mean over this fold's held-out rows
  double lambda_h = 0.0;  // CV picks of the two inner pipelines
  double lambda_q = 0.0;
};

struct FunctionalPipelineResult {
  FunctionalEstimate estimate;
  std::vector<FunctionalFold> folds;
  std::uint64_t seed = 0;
};

// Two-fold cross-fit: on each half, run the full CV pipeline for the
// h-equation and the q-equation, then evaluate the integrand on the other
// half. psi_hat pools all held-out integrand values; the variance is the
// pooled sample variance of those values.
FunctionalPipelineResult full_pipeline_functional(const Dataset& data,
                                                  const MomentFunctional& f,
                                                  const FunctionalPipelineConfig& config);

// Indicator-basis config inferred from observed category counts in the Z, W
// and A columns (uniform weights), for counterfactual-mean estimation.
FunctionalPipelineConfig proximal_pipeline_config(const Dataset& data,
                                                  std::uint64_t seed);

}  // namespace dipr
