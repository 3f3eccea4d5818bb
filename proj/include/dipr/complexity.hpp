#pragma once

#include <cstdint>

#include "dipr/basis.hpp"
#include "dipr/types.hpp"

namespace dipr {

// Monte Carlo estimate of kappa = E_eps || S^(-1/2) Phi' eps / n ||_2 with
// Rademacher signs eps, where S is the empirical Gram of the basis at the
// points. Over the empirical-norm ball {h : ||h||_n <= delta} the localized
// Rademacher complexity is exactly delta * kappa, so the complexity is linear
// in delta and the critical radius of R(delta) <= delta^2 is kappa itself.
// Each draw runs on its own substream of (seed, draw index).
double rademacher_kappa(const BasisSpec& basis, const Mat& points, int draws,
                        std::uint64_t seed);

double local_rademacher(const BasisSpec& basis, const Mat& points, double delta,
                        int draws, std::uint64_t seed);

double critical_radius(const BasisSpec& basis, const Mat& points, int draws,
                       std::uint64_t seed);

}  // namespace dipr
