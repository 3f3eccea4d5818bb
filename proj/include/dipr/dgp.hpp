#pragma once

#include <cstdint>
#include <functional>

#include "dipr/basis.hpp"
#include "dipr/dataset.hpp"
#include "dipr/operators.hpp"
#include "dipr/types.hpp"

namespace dipr {

// Joint density on [0,1]^2 with a known cosine singular expansion:
//   p(w, z) = 1 + sum_i sigma_i phi_{i+1}(w) phi_{i+1}(z),
// so W and Z are uniform marginally, E[phi_{i+1}(W) | Z] = sigma_i phi_{i+1}(Z),
// and the conditional-expectation operator is diagonal on the cosine basis
// with singular values (1, sigma_1, sigma_2, ...). Observations are
//   Y = h0(W) + eps,  eps = endogeneity * sqrt(12) * (F(W|Z) - 1/2) + noise_sd * N(0,1),
// which keeps E[eps | Z] = 0 exactly while correlating eps with W.
struct SeriesNpivDgp {
  SeriesNpivDgp(Vec sigmas_in, FunctionHandle h0_in, double noise_sd_in,
                double endogeneity_in);

  double density(double w, double z) const;
  double conditional_cdf(double w, double z) const;  // F(w | z)

  Vec sigmas;
  FunctionHandle h0;
  double noise_sd;
  double endogeneity;
};

// Columns W, Z, Y, g1 (constant one); roles bind v_h = {W}, v_q = {Z},
// g0 = Y, g1 = g1. Draws (W, Z) by rejection under the envelope 1 + 2*sum sigmas.
Dataset sample_npiv(const SeriesNpivDgp& dgp, Index n, std::uint64_t seed);

FunctionHandle true_solution_npiv(const SeriesNpivDgp& dgp);
// Singular system (1, sigma_1, ..., sigma_m) on cosine bases of size dim.
SingularSystem true_operator_npiv(const SeriesNpivDgp& dgp, Index dim);

// h with <h, phi_i> = sigma_i^beta * <w, phi_i>: the image of w under
// (T*T)^(beta/2), so its source-condition norm at exponent beta is ||w||.
FunctionHandle make_source_solution(const SingularSystem& sys, double beta,
                                    const FunctionHandle& w);

// Finite proximal-inference model with hidden confounder U and discrete
// proxies: U ~ p_u; Z, W, A drawn independently given U; Y = y_mean(A, U) +
// y_sd * N(0,1). Completeness holds when p(W|U) and p(Z|U) have full column
// rank. a_level is the treatment arm of the counterfactual mean.
struct DiscreteProximalDgp {
  DiscreteProximalDgp(Vec p_u_in, Mat p_z_given_u_in, Mat p_w_given_u_in,
                      Mat p_a_given_u_in, Mat y_mean_in, double y_sd_in,
                      int a_level_in);

  // Well-conditioned |U|=3, |Z|=4, |W|=4 instance used by tests and the CLI.
  static DiscreteProximalDgp canonical();

  Index n_u() const { return p_u.size(); }
  Index n_z() const { return p_z_given_u.rows(); }
  Index n_w() const { return p_w_given_u.rows(); }

  Vec marginal_w() const;
  Vec marginal_z() const;
  Vec marginal_za() const;  // joint over (z, a), index z * 2 + a
  // g-formula value of the counterfactual mean E[Y(a_level)].
  double gformula() const;

  Vec p_u;          // |U|
  Mat p_z_given_u;  // |Z| x |U|, columns sum to one
  Mat p_w_given_u;  // |W| x |U|
  Mat p_a_given_u;  // 2 x |U|
  Mat y_mean;       // 2 x |U|
  double y_sd;
  int a_level;
};

// Columns U (kept for diagnostics only), Z, W, A, Y; roles are attached
// later by the functional adapter.
Dataset sample_proximal(const DiscreteProximalDgp& dgp, Index n, std::uint64_t seed);

// Exact expectation over the finite model. The integrand receives
// (z, w, a, y) and must be a polynomial of degree at most two in y; it is
// integrated against the exact conditional mean and variance of Y.
double enumerate_mean(const DiscreteProximalDgp& dgp,
                      const std::function<double(int z, int w, int a, double y)>& f);

enum class BridgeEquation { outcome, treatment };  // h-equation vs q-equation

// Uniform-weight bases used for estimation and for representing the truths:
// indicator on W, and indicator(Z) x indicator(A).
BasisSpec proximal_w_basis(const DiscreteProximalDgp& dgp);
BasisSpec proximal_za_basis(const DiscreteProximalDgp& dgp);

// Exact conditional-expectation operator of the bridge equation in sieve
// form, using the moment-function sign convention g1 = -1{A = a_level}:
//   outcome:   (T h)(z, a) = E[g1 * h(W) | Z = z, A = a]
//   treatment: (T q)(w)    = E[g1 * q(Z, A) | W = w]
SieveOperator exact_operator(const DiscreteProximalDgp& dgp, BridgeEquation eq);
// Exact r0 = E[g0 | conditioning side] with g0 = -1{A=a} Y (outcome) or
// g0 = -1 (treatment).
FunctionHandle exact_r(const DiscreteProximalDgp& dgp, BridgeEquation eq);

struct Bridges {
  FunctionHandle h0;  // on proximal_w_basis
  FunctionHandle q0;  // on proximal_za_basis
};

// Minimum-L2(P) solutions of the two bridge equations, solved exactly from
// the model tables by a weighted pseudoinverse.
Bridges true_bridges(const DiscreteProximalDgp& dgp);

}  // namespace dipr
