#pragma once

#include <optional>
#include <vector>

#include "dipr/dataset.hpp"
#include "dipr/nuisance.hpp"
#include "dipr/operators.hpp"
#include "dipr/types.hpp"

namespace dipr {

enum class FitMethod { baseline, debiased };
FitMethod fit_method_from_string(const std::string& s);
std::string to_string(FitMethod m);

struct FitConfig {
  double lambda = 0.0;
  int iterations = 2;
  std::optional<FunctionHandle> initial;  // zero when absent
  double hessian_floor = 0.0;
  FitMethod method = FitMethod::debiased;
};

struct FitResult {
  FunctionHandle h_hat;
  double objective_value;   // risk + smoothing penalty at the final iterate
  double hessian_min_eig;   // of H + lambda S
  std::vector<Vec> trajectory;  // iterate coefficients, one entry per iteration
};

// The empirical risks are exact quadratics in the sieve coefficients:
// risk(c) = c'Hc + ell'c + k0. With P = Psi A_hat, M = diag(g1) Phi and
// rvec = Psi r_hat the debiased risk has
//   H = (P'M + M'P - P'P) / n,
//   ell = 2 (-P'g0 - M'rvec + P'rvec) / n,
// and the plug-in (baseline) risk has H = P'P / n, ell = -2 P'g0 / n.
// S = Phi'Phi / n is the Gram of the smoothing penalty.
struct RiskQuadratic {
  Mat H;
  Mat S;
  Vec ell;
  double k0;
  BasisSpec basis;  // sieve basis the coefficients live on
};

RiskQuadratic assemble_debiased_risk(const Dataset& data, const SieveOperator& t_hat,
                                     const FunctionHandle& r_hat);
RiskQuadratic assemble_plugin_risk(const Dataset& data, const SieveOperator& t_hat);

// Iterated ridge recursion on an assembled quadratic: each iteration solves
//   (H + lambda S) c_t = -ell/2 + lambda S c_{t-1}
// exactly and certifies the gradient norm of its objective at the solution.
// Fails (never jitters) when min eig(H + lambda S) <= hessian_floor.
FitResult solve_iterated(const RiskQuadratic& q, const FitConfig& config);

// End-to-end fit from data and fitted nuisances.
FitResult fit(const Dataset& data, const NuisanceFit& nuisances, const FitConfig& config);

// E_n[((T_hat h)(V_q) - g0)^2].
double projected_risk_plugin(const FunctionHandle& h, const Dataset& data,
                             const SieveOperator& t_hat);

// E_n of the debiased risk integrand; may legitimately be negative.
double debiased_risk(const FunctionHandle& h, const Dataset& data,
                     const SieveOperator& t_hat, const FunctionHandle& r_hat);

// Influence value of the debiased risk at one observation:
//   (th - g0)^2 + 2 (th - r) (g1 h - th) - psi_of_h,
// where th and r are the conditional-mean nuisances at V_q and h is
// evaluated at V_h.
double influence_value(double g0, double g1, double h_at_vh, double th_at_vq,
                       double r_at_vq, double psi_of_h);

// Row-wise influence values over a dataset.
Vec influence_values(const Dataset& data, const FunctionHandle& h,
                     const SieveOperator& t_hat, const FunctionHandle& r_hat,
                     double psi_of_h);

}  // namespace dipr
