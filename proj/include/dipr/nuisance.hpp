#pragma once

#include <cstdint>
#include <optional>

#include "dipr/dataset.hpp"
#include "dipr/operators.hpp"
#include "dipr/types.hpp"

namespace dipr {

// Ridge-stabilized sieve least squares of g1 * phi_j(V_h) on the V_q basis:
//   A_hat = (Psi'Psi/n + ridge I)^(-1) (Psi' diag(g1) Phi / n),
// so column j holds the regression coefficients of the j-th input element.
SieveOperator fit_operator(const Dataset& data, const BasisSpec& basis_h,
                           const BasisSpec& basis_q, double ridge);

// Same regression for r0 = E[g0 | V_q].
FunctionHandle fit_r(const Dataset& data, const BasisSpec& basis_q, double ridge);

// Default ridge: 1e-8 * trace(Psi'Psi/n) / K.
double default_ridge(const Mat& psi_gram);

struct NuisanceFit {
  SieveOperator t_hat;
  FunctionHandle r_hat;
  double ridge;
  Index n_used;
  double condition_number;  // of the ridged normal matrix
};

NuisanceFit fit_nuisances(const Dataset& data, const BasisSpec& basis_h,
                          const BasisSpec& basis_q,
                          std::optional<double> ridge = std::nullopt);

enum class CorruptionMode { spectral, random, rank_one };
CorruptionMode corruption_mode_from_string(const std::string& s);

// Adds a perturbation rescaled so that the spectral norm of the difference
// from the original operator is exactly epsilon. spectral perturbs along the
// top singular pair of t; random draws a dense Gaussian direction; rank_one
// draws a random unit pair.
SieveOperator corrupt_operator(const SieveOperator& t, double epsilon,
                               CorruptionMode mode, std::uint64_t seed);

}  // namespace dipr
