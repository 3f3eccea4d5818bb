#include "dipr/complexity.hpp"

#include <cmath>

#include "dipr/rng.hpp"

namespace dipr {

namespace {

Mat gram_inverse_sqrt(const Mat& g) {
  Eigen::SelfAdjointEigenSolver<Mat> es(g);
  if (es.info() != Eigen::Success)
    throw NumericalError("eigendecomposition failed for the empirical Gram");
  const Vec& ev = es.eigenvalues();
  const double floor = 1e-12 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  Vec inv(ev.size());
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev[i] <= floor) throw NumericalError("singular Gram: basis is degenerate at the points");
    inv[i] = 1.0 / std::sqrt(ev[i]);
  }
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double rademacher_kappa(const BasisSpec& basis, const Mat& points, int draws,
                        std::uint64_t seed) {
  if (draws < 1) throw ConfigError("rademacher_kappa: draws must be positive");
  const Index n = points.rows();
  if (n < 1) throw ConfigError("rademacher_kappa: empty point set");
  const Mat phi = basis.design(points);
  const Mat whiten = gram_inverse_sqrt(phi.transpose() * phi / static_cast<double>(n));
  double acc = 0.0;
  Vec eps(n);
  for (int d = 0; d < draws; ++d) {
    Rng rng = substream(seed, {static_cast<std::uint64_t>(d)});
    for (Index i = 0; i < n; ++i) eps[i] = rng.rademacher();
    const Vec v = phi.transpose() * eps / static_cast<double>(n);
    acc += (whiten * v).norm();
  }
  return acc / draws;
}

double local_rademacher(const BasisSpec& basis, const Mat& points, double delta,
                        int draws, std::uint64_t seed) {
  if (!(delta >= 0.0)) throw ConfigError("local_rademacher: delta must be nonnegative");
  return delta * rademacher_kappa(basis, points, draws, seed);
}

double critical_radius(const BasisSpec& basis, const Mat& points, int draws,
                       std::uint64_t seed) {
  return rademacher_kappa(basis, points, draws, seed);
}

}  // namespace dipr
