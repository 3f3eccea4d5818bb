#include "dipr/nuisance.hpp"

#include <cmath>

#include "dipr/rng.hpp"

namespace dipr {

namespace {

struct RidgedNormal {
  Mat inverse;  // (Psi'Psi/n + ridge I)^(-1)
  double condition_number;
};

RidgedNormal ridged_normal_inverse(const Mat& psi, double ridge) {
  const double n = static_cast<double>(psi.rows());
  Mat m = psi.transpose() * psi / n;
  m.diagonal().array() += ridge;
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  if (es.info() != Eigen::Success)
    throw NumericalError("eigendecomposition of the normal matrix failed");
  const Vec& ev = es.eigenvalues();
  const double floor = 1e-14 * std::max(ev.maxCoeff(), 1e-300);
  if (ev.minCoeff() <= floor)
    throw NumericalError("rank-deficient design; increase ridge");
  const Mat inv = es.eigenvectors() * ev.cwiseInverse().asDiagonal() *
                  es.eigenvectors().transpose();
  return {inv, ev.maxCoeff() / ev.minCoeff()};
}

}  // namespace

double default_ridge(const Mat& psi_gram) {
  return 1e-8 * psi_gram.trace() / static_cast<double>(psi_gram.rows());
}

SieveOperator fit_operator(const Dataset& data, const BasisSpec& basis_h,
                           const BasisSpec& basis_q, double ridge) {
  if (!(ridge >= 0.0)) throw ConfigError("ridge must be nonnegative");
  const Mat phi = basis_h.design(data.v_h_points());
  const Mat psi = basis_q.design(data.v_q_points());
  const double n = static_cast<double>(data.n());
  const auto normal = ridged_normal_inverse(psi, ridge);
  const Mat cross = psi.transpose() * data.g1().asDiagonal() * phi / n;
  return SieveOperator(normal.inverse * cross, basis_h, basis_q);
}

FunctionHandle fit_r(const Dataset& data, const BasisSpec& basis_q, double ridge) {
  if (!(ridge >= 0.0)) throw ConfigError("ridge must be nonnegative");
  const Mat psi = basis_q.design(data.v_q_points());
  const double n = static_cast<double>(data.n());
  const auto normal = ridged_normal_inverse(psi, ridge);
  return FunctionHandle(basis_q, normal.inverse * (psi.transpose() * data.g0() / n));
}

NuisanceFit fit_nuisances(const Dataset& data, const BasisSpec& basis_h,
                          const BasisSpec& basis_q, std::optional<double> ridge) {
  const Mat psi = basis_q.design(data.v_q_points());
  const double n = static_cast<double>(data.n());
  const double rid = ridge ? *ridge : default_ridge(psi.transpose() * psi / n);
  const auto normal = ridged_normal_inverse(psi, rid);
  const Mat phi = basis_h.design(data.v_h_points());
  const Mat cross = psi.transpose() * data.g1().asDiagonal() * phi / n;
  return NuisanceFit{
      SieveOperator(normal.inverse * cross, basis_h, basis_q),
      FunctionHandle(basis_q, normal.inverse * (psi.transpose() * data.g0() / n)),
      rid, data.n(), normal.condition_number};
}

CorruptionMode corruption_mode_from_string(const std::string& s) {
  if (s == "spectral") return CorruptionMode::spectral;
  if (s == "random") return CorruptionMode::random;
  if (s == "rank-one" || s == "rank_one") return CorruptionMode::rank_one;
  throw ConfigError("unknown corruption mode: " + s);
}

SieveOperator corrupt_operator(const SieveOperator& t, double epsilon,
                               CorruptionMode mode, std::uint64_t seed) {
  if (!(epsilon >= 0.0)) throw ConfigError("corruption epsilon must be nonnegative");
  if (epsilon == 0.0) return t;
  const Index rows = t.matrix.rows(), cols = t.matrix.cols();
  Mat direction(rows, cols);
  switch (mode) {
    case CorruptionMode::spectral: {
      Eigen::JacobiSVD<Mat> svd(t.matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
      direction = svd.matrixU().col(0) * svd.matrixV().col(0).transpose();
      break;
    }
    case CorruptionMode::random: {
      Rng rng = substream(seed, {3});
      for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) direction(i, j) = rng.normal();
      break;
    }
    case CorruptionMode::rank_one: {
      Rng rng = substream(seed, {4});
      Vec u(rows), v(cols);
      for (Index i = 0; i < rows; ++i) u[i] = rng.normal();
      for (Index j = 0; j < cols; ++j) v[j] = rng.normal();
      direction = (u / u.norm()) * (v / v.norm()).transpose();
      break;
    }
  }
  const double norm = direction.jacobiSvd().singularValues()[0];
  if (!(norm > 0.0)) throw NumericalError("degenerate corruption direction");
  return SieveOperator(t.matrix + (epsilon / norm) * direction, t.input_basis,
                       t.output_basis);
}

}  // namespace dipr
