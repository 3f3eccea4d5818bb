#include "dipr/estimators.hpp"

#include <cmath>

namespace dipr {

FitMethod fit_method_from_string(const std::string& s) {
  if (s == "baseline") return FitMethod::baseline;
  if (s == "debiased") return FitMethod::debiased;
  throw ConfigError("unknown fit method: " + s);
}

std::string to_string(FitMethod m) {
  return m == FitMethod::baseline ? "baseline" : "debiased";
}

namespace {

struct DesignParts {
  Mat phi;   // n x J at V_h
  Mat p;     // n x J, (T_hat basis_j)(V_q)
  Vec g0;
  Vec g1;
  double n;
};

DesignParts build_designs(const Dataset& data, const SieveOperator& t_hat) {
  if (data.n() < 1) throw ConfigError("empty dataset");
  DesignParts d{t_hat.input_basis.design(data.v_h_points()),
                Mat(), data.g0(), data.g1(), static_cast<double>(data.n())};
  const Mat psi = t_hat.output_basis.design(data.v_q_points());
  d.p = psi * t_hat.matrix;
  return d;
}

}  // namespace

RiskQuadratic assemble_debiased_risk(const Dataset& data, const SieveOperator& t_hat,
                                     const FunctionHandle& r_hat) {
  if (r_hat.basis() != t_hat.output_basis)
    throw ConfigError("r_hat must live on the operator output basis");
  const DesignParts d = build_designs(data, t_hat);
  const Mat m = d.g1.asDiagonal() * d.phi;
  const Vec rvec = t_hat.output_basis.design(data.v_q_points()) * r_hat.coeffs();
  RiskQuadratic q{Mat(), Mat(), Vec(), 0.0, t_hat.input_basis};
  q.H = (d.p.transpose() * m + m.transpose() * d.p - d.p.transpose() * d.p) / d.n;
  q.ell = 2.0 * (-d.p.transpose() * d.g0 - m.transpose() * rvec + d.p.transpose() * rvec) / d.n;
  q.k0 = d.g0.squaredNorm() / d.n;
  q.S = d.phi.transpose() * d.phi / d.n;
  return q;
}

RiskQuadratic assemble_plugin_risk(const Dataset& data, const SieveOperator& t_hat) {
  const DesignParts d = build_designs(data, t_hat);
  RiskQuadratic q{Mat(), Mat(), Vec(), 0.0, t_hat.input_basis};
  q.H = d.p.transpose() * d.p / d.n;
  q.ell = -2.0 * d.p.transpose() * d.g0 / d.n;
  q.k0 = d.g0.squaredNorm() / d.n;
  q.S = d.phi.transpose() * d.phi / d.n;
  return q;
}

FitResult solve_iterated(const RiskQuadratic& q, const FitConfig& config) {
  if (!(config.lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (config.iterations < 1) throw ConfigError("iterations must be at least one");
  const Index j = q.H.rows();
  if (q.S.rows() != j || q.ell.size() != j)
    throw ConfigError("risk quadratic has inconsistent shapes");

  Vec prev = Vec::Zero(j);
  if (config.initial) {
    if (config.initial->basis() != q.basis)
      throw ConfigError("initial iterate lives on a different basis");
    prev = config.initial->coeffs();
  }

  const Mat k = q.H + config.lambda * q.S;
  Eigen::SelfAdjointEigenSolver<Mat> es(k);
  if (es.info() != Eigen::Success)
    throw NumericalError("eigendecomposition of the regularized Hessian failed");
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig <= config.hessian_floor)
    throw NonConvexObjective(
        "non-convex empirical objective; increase lambda or sieve ridge "
        "(min eigenvalue " + std::to_string(min_eig) + ")",
        min_eig);

  Eigen::LDLT<Mat> ldlt(k);
  std::vector<Vec> trajectory;
  double objective = 0.0;
  Vec c = prev;
  for (int it = 0; it < config.iterations; ++it) {
    const Vec rhs = -0.5 * q.ell + config.lambda * (q.S * prev);
    c = ldlt.solve(rhs);
    c += ldlt.solve(rhs - k * c);  // one refinement step for the certificate
    const Vec grad = 2.0 * (k * c - rhs);
    if (grad.norm() > 1e-8 * (1.0 + c.norm()))
      throw NumericalError("optimality certificate failed: |grad| = " +
                           std::to_string(grad.norm()));
    const Vec dc = c - prev;
    objective = c.dot(q.H * c) + q.ell.dot(c) + q.k0 +
                config.lambda * dc.dot(q.S * dc);
    trajectory.push_back(c);
    prev = c;
  }
  return FitResult{FunctionHandle(q.basis, c), objective, min_eig, std::move(trajectory)};
}

FitResult fit(const Dataset& data, const NuisanceFit& nuisances, const FitConfig& config) {
  const RiskQuadratic q =
      config.method == FitMethod::debiased
          ? assemble_debiased_risk(data, nuisances.t_hat, nuisances.r_hat)
          : assemble_plugin_risk(data, nuisances.t_hat);
  return solve_iterated(q, config);
}

double projected_risk_plugin(const FunctionHandle& h, const Dataset& data,
                             const SieveOperator& t_hat) {
  if (h.basis() != t_hat.input_basis)
    throw ConfigError("h must live on the operator input basis");
  const Vec th = t_hat.output_basis.design(data.v_q_points()) * (t_hat.matrix * h.coeffs());
  return (th - data.g0()).squaredNorm() / static_cast<double>(data.n());
}

double debiased_risk(const FunctionHandle& h, const Dataset& data,
                     const SieveOperator& t_hat, const FunctionHandle& r_hat) {
  if (h.basis() != t_hat.input_basis)
    throw ConfigError("h must live on the operator input basis");
  if (r_hat.basis() != t_hat.output_basis)
    throw ConfigError("r_hat must live on the operator output basis");
  const Mat psi = t_hat.output_basis.design(data.v_q_points());
  const Vec th = psi * (t_hat.matrix * h.coeffs());
  const Vec rvec = psi * r_hat.coeffs();
  const Vec hv = t_hat.input_basis.design(data.v_h_points()) * h.coeffs();
  const Vec v1 = th - data.g0();
  const Vec v3 = data.g1().cwiseProduct(hv) - th;
  return (v1.squaredNorm() + 2.0 * (th - rvec).dot(v3)) / static_cast<double>(data.n());
}

double influence_value(double g0, double g1, double h_at_vh, double th_at_vq,
                       double r_at_vq, double psi_of_h) {
  const double a = th_at_vq - g0;
  return a * a + 2.0 * (th_at_vq - r_at_vq) * (g1 * h_at_vh - th_at_vq) - psi_of_h;
}

Vec influence_values(const Dataset& data, const FunctionHandle& h,
                     const SieveOperator& t_hat, const FunctionHandle& r_hat,
                     double psi_of_h) {
  const Mat psi = t_hat.output_basis.design(data.v_q_points());
  const Vec th = psi * (t_hat.matrix * h.coeffs());
  const Vec rvec = psi * r_hat.coeffs();
  const Vec hv = t_hat.input_basis.design(data.v_h_points()) * h.coeffs();
  const Vec g0 = data.g0(), g1 = data.g1();
  Vec out(data.n());
  for (Index i = 0; i < data.n(); ++i)
    out[i] = influence_value(g0[i], g1[i], hv[i], th[i], rvec[i], psi_of_h);
  return out;
}

}  // namespace dipr
