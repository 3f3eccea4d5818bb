#include "dipr/dgp.hpp"

#include <cmath>
#include <numbers>

#include "dipr/rng.hpp"

namespace dipr {

namespace {

constexpr double kPi = std::numbers::pi;

// Per-category weights of an indicator or tensor-of-indicator basis, indexed
// like the basis elements.
Vec category_weights(const BasisSpec& b) {
  switch (b.family()) {
    case BasisFamily::indicator:
      return b.weights();
    case BasisFamily::tensor: {
      const Vec w1 = category_weights(b.factor(0));
      const Vec w2 = category_weights(b.factor(1));
      Vec w(w1.size() * w2.size());
      for (Index i = 0; i < w1.size(); ++i)
        for (Index j = 0; j < w2.size(); ++j) w[i * w2.size() + j] = w1[i] * w2[j];
      return w;
    }
    default:
      throw ConfigError("category weights are only defined for indicator bases");
  }
}

void check_probability_vector(const Vec& p, const char* what) {
  // 1.0 is allowed so a degenerate one-category confounder stays expressible
  if ((p.array() <= 0.0).any() || (p.array() > 1.0).any())
    throw ConfigError(std::string(what) + ": probabilities must lie in (0, 1]");
  if (std::abs(p.sum() - 1.0) > 1e-10)
    throw ConfigError(std::string(what) + ": probabilities must sum to one");
}

void check_full_column_rank(const Mat& m, const char* what) {
  Eigen::ColPivHouseholderQR<Mat> qr(m);
  qr.setThreshold(1e-10);
  if (qr.rank() < m.cols())
    throw ConfigError(std::string("completeness surrogate fails: ") + what +
                      " does not have full column rank");
}

}  // namespace

SeriesNpivDgp::SeriesNpivDgp(Vec sigmas_in, FunctionHandle h0_in, double noise_sd_in,
                             double endogeneity_in)
    : sigmas(std::move(sigmas_in)),
      h0(std::move(h0_in)),
      noise_sd(noise_sd_in),
      endogeneity(endogeneity_in) {
  if (sigmas.size() < 1) throw ConfigError("series model needs at least one sigma");
  for (Index i = 0; i < sigmas.size(); ++i) {
    if (!(sigmas[i] >= 0.0 && sigmas[i] <= 1.0))
      throw ConfigError("series sigmas must lie in [0, 1]");
    if (i > 0 && sigmas[i] > sigmas[i - 1])
      throw ConfigError("series sigmas must be nonincreasing");
  }
  if (h0.basis().family() != BasisFamily::cosine)
    throw ConfigError("series model requires h0 on the cosine basis");
  for (Index j = sigmas.size() + 1; j < h0.coeffs().size(); ++j)
    if (h0.coeffs()[j] != 0.0)
      throw ConfigError("h0 has mass outside the operator range; it would not be "
                        "the minimal-norm solution");
  if (!(noise_sd >= 0.0)) throw ConfigError("noise_sd must be nonnegative");
  if (!(endogeneity >= -1.0 && endogeneity <= 1.0))
    throw ConfigError("endogeneity must lie in [-1, 1]");
  // 2 * sum sigma < 1 guarantees positivity; otherwise verify on a fine grid.
  if (2.0 * sigmas.sum() >= 1.0) {
    double lo = 1.0;
    for (int i = 0; i <= 500; ++i)
      for (int j = 0; j <= 500; ++j)
        lo = std::min(lo, density(i / 500.0, j / 500.0));
    if (lo <= 1e-6)
      throw ConfigError("series density is not positive for these sigmas");
  }
}

double SeriesNpivDgp::density(double w, double z) const {
  double p = 1.0;
  for (Index i = 0; i < sigmas.size(); ++i) {
    const double k = static_cast<double>(i + 1);
    p += 2.0 * sigmas[i] * std::cos(k * kPi * w) * std::cos(k * kPi * z);
  }
  return p;
}

double SeriesNpivDgp::conditional_cdf(double w, double z) const {
  double f = w;
  for (Index i = 0; i < sigmas.size(); ++i) {
    const double k = static_cast<double>(i + 1);
    f += 2.0 * sigmas[i] * std::cos(k * kPi * z) * std::sin(k * kPi * w) / (k * kPi);
  }
  return f;
}

Dataset sample_npiv(const SeriesNpivDgp& dgp, Index n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("sample size must be positive");
  Rng rng = substream(seed, {1});
  const double envelope = 1.0 + 2.0 * dgp.sigmas.sum();
  Mat values(n, 4);
  std::uint64_t attempts = 0;
  for (Index i = 0; i < n; ++i) {
    double w, z;
    for (;;) {
      ++attempts;
      if (attempts > 1000 && attempts > 100 * static_cast<std::uint64_t>(i + 1))
        throw NumericalError("rejection sampler acceptance below 1%: sigma "
                             "configuration is inconsistent");
      w = rng.uniform();
      z = rng.uniform();
      if (rng.uniform() * envelope <= dgp.density(w, z)) break;
    }
    const double f = dgp.conditional_cdf(w, z);
    const double eps = dgp.endogeneity * std::sqrt(12.0) * (f - 0.5) +
                       dgp.noise_sd * rng.normal();
    values(i, 0) = w;
    values(i, 1) = z;
    values(i, 2) = dgp.h0(w) + eps;
    values(i, 3) = 1.0;
  }
  RoleMap roles;
  roles.v_h = {"W"};
  roles.v_q = {"Z"};
  roles.g0 = "Y";
  roles.g1 = "g1";
  return Dataset({"W", "Z", "Y", "g1"}, std::move(values), std::move(roles));
}

FunctionHandle true_solution_npiv(const SeriesNpivDgp& dgp) { return dgp.h0; }

SingularSystem true_operator_npiv(const SeriesNpivDgp& dgp, Index dim) {
  if (dim < 1) throw ConfigError("operator dimension must be positive");
  // zero sigmas belong to the kernel, not the singular system
  Index positive = 0;
  while (positive < dgp.sigmas.size() && dgp.sigmas[positive] > 0.0) ++positive;
  const Index rank = std::min(positive + 1, dim);
  Vec s(rank);
  s[0] = 1.0;
  for (Index i = 1; i < rank; ++i) s[i] = dgp.sigmas[i - 1];
  return SingularSystem(std::move(s), BasisSpec::cosine(dim), BasisSpec::cosine(dim));
}

FunctionHandle make_source_solution(const SingularSystem& sys, double beta,
                                    const FunctionHandle& w) {
  if (w.basis() != sys.input_basis)
    throw ConfigError("make_source_solution: representer basis mismatch");
  if (!(beta >= 0.0)) throw ConfigError("make_source_solution: beta must be nonnegative");
  Vec c = Vec::Zero(w.coeffs().size());
  for (Index i = 0; i < std::min(sys.rank(), c.size()); ++i)
    c[i] = std::pow(sys.sigmas[i], beta) * w.coeffs()[i];
  return FunctionHandle(sys.input_basis, std::move(c));
}

DiscreteProximalDgp::DiscreteProximalDgp(Vec p_u_in, Mat p_z_given_u_in,
                                         Mat p_w_given_u_in, Mat p_a_given_u_in,
                                         Mat y_mean_in, double y_sd_in, int a_level_in)
    : p_u(std::move(p_u_in)),
      p_z_given_u(std::move(p_z_given_u_in)),
      p_w_given_u(std::move(p_w_given_u_in)),
      p_a_given_u(std::move(p_a_given_u_in)),
      y_mean(std::move(y_mean_in)),
      y_sd(y_sd_in),
      a_level(a_level_in) {
  const Index nu = p_u.size();
  check_probability_vector(p_u, "p(U)");
  if (p_z_given_u.cols() != nu || p_w_given_u.cols() != nu || p_a_given_u.cols() != nu)
    throw ConfigError("conditional tables must have one column per U category");
  if (p_a_given_u.rows() != 2 || y_mean.rows() != 2 || y_mean.cols() != nu)
    throw ConfigError("A is binary: p(A|U) and y_mean need exactly two rows");
  for (Index u = 0; u < nu; ++u) {
    check_probability_vector(p_z_given_u.col(u), "p(Z|U)");
    check_probability_vector(p_w_given_u.col(u), "p(W|U)");
    check_probability_vector(p_a_given_u.col(u), "p(A|U)");
  }
  if (p_z_given_u.rows() < nu || p_w_given_u.rows() < nu)
    throw ConfigError("completeness needs |Z| >= |U| and |W| >= |U|");
  check_full_column_rank(p_z_given_u, "p(Z|U)");
  check_full_column_rank(p_w_given_u, "p(W|U)");
  if (!(y_sd >= 0.0)) throw ConfigError("y_sd must be nonnegative");
  if (a_level != 0 && a_level != 1) throw ConfigError("a_level must be 0 or 1");
}

DiscreteProximalDgp DiscreteProximalDgp::canonical() {
  Vec pu(3);
  pu << 0.3, 0.4, 0.3;
  // Sharp proxies: the composite conditioning operator keeps its nonzero
  // singular values well away from zero, so moderate smoothing levels barely
  // bias the bridge fits.
  Mat pz(4, 3);
  pz << 0.85, 0.05, 0.05,
        0.05, 0.85, 0.05,
        0.05, 0.05, 0.85,
        0.05, 0.05, 0.05;
  Mat pw(4, 3);
  pw << 0.85, 0.05, 0.05,
        0.05, 0.85, 0.05,
        0.05, 0.05, 0.85,
        0.05, 0.05, 0.05;
  Mat pa(2, 3);
  pa << 0.65, 0.50, 0.35,
        0.35, 0.50, 0.65;
  Mat ym(2, 3);
  ym << 0.5, 1.0, 1.5,
        1.0, 2.0, 2.5;
  return DiscreteProximalDgp(std::move(pu), std::move(pz), std::move(pw),
                             std::move(pa), std::move(ym), 0.5, 1);
}

Vec DiscreteProximalDgp::marginal_w() const { return p_w_given_u * p_u; }

Vec DiscreteProximalDgp::marginal_z() const { return p_z_given_u * p_u; }

Vec DiscreteProximalDgp::marginal_za() const {
  Vec out = Vec::Zero(n_z() * 2);
  for (Index z = 0; z < n_z(); ++z)
    for (Index a = 0; a < 2; ++a)
      for (Index u = 0; u < n_u(); ++u)
        out[z * 2 + a] += p_u[u] * p_z_given_u(z, u) * p_a_given_u(a, u);
  return out;
}

double DiscreteProximalDgp::gformula() const {
  return y_mean.row(a_level) * p_u;
}

Dataset sample_proximal(const DiscreteProximalDgp& dgp, Index n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("sample size must be positive");
  Rng rng = substream(seed, {2});
  Mat values(n, 5);
  for (Index i = 0; i < n; ++i) {
    const int u = rng.categorical(dgp.p_u);
    const int z = rng.categorical(dgp.p_z_given_u.col(u));
    const int w = rng.categorical(dgp.p_w_given_u.col(u));
    const int a = rng.categorical(dgp.p_a_given_u.col(u));
    const double y = dgp.y_mean(a, u) + dgp.y_sd * rng.normal();
    values(i, 0) = u;
    values(i, 1) = z;
    values(i, 2) = w;
    values(i, 3) = a;
    values(i, 4) = y;
  }
  return Dataset({"U", "Z", "W", "A", "Y"}, std::move(values), RoleMap{});
}

double enumerate_mean(const DiscreteProximalDgp& dgp,
                      const std::function<double(int z, int w, int a, double y)>& f) {
  double acc = 0.0;
  const double var = dgp.y_sd * dgp.y_sd;
  for (Index u = 0; u < dgp.n_u(); ++u)
    for (Index z = 0; z < dgp.n_z(); ++z)
      for (Index w = 0; w < dgp.n_w(); ++w)
        for (Index a = 0; a < 2; ++a) {
          const double p = dgp.p_u[u] * dgp.p_z_given_u(z, u) * dgp.p_w_given_u(w, u) *
                           dgp.p_a_given_u(a, u);
          const int zi = static_cast<int>(z), wi = static_cast<int>(w),
                    ai = static_cast<int>(a);
          // Exact integration of a quadratic-in-y integrand against the
          // conditional law of Y: recover its y-coefficients from three
          // evaluations.
          const double f0 = f(zi, wi, ai, 0.0);
          const double fp = f(zi, wi, ai, 1.0);
          const double fm = f(zi, wi, ai, -1.0);
          const double quad = 0.5 * (fp + fm) - f0;
          const double lin = 0.5 * (fp - fm);
          const double m = dgp.y_mean(a, u);
          acc += p * (f0 + lin * m + quad * (m * m + var));
        }
  return acc;
}

BasisSpec proximal_w_basis(const DiscreteProximalDgp& dgp) {
  return BasisSpec::indicator(Vec::Constant(dgp.n_w(), 1.0 / static_cast<double>(dgp.n_w())));
}

BasisSpec proximal_za_basis(const DiscreteProximalDgp& dgp) {
  return BasisSpec::tensor(
      BasisSpec::indicator(Vec::Constant(dgp.n_z(), 1.0 / static_cast<double>(dgp.n_z()))),
      BasisSpec::indicator(Vec::Constant(2, 0.5)));
}

namespace {

// Kernel of the outcome equation on raw category values:
// K[(z, a), w] = -1{a = a_level} p(w | z, a).
Mat outcome_kernel(const DiscreteProximalDgp& dgp) {
  Mat k = Mat::Zero(dgp.n_z() * 2, dgp.n_w());
  for (Index z = 0; z < dgp.n_z(); ++z)
    for (Index a = 0; a < 2; ++a) {
      if (static_cast<int>(a) != dgp.a_level) continue;
      Vec pu_cond(dgp.n_u());
      for (Index u = 0; u < dgp.n_u(); ++u)
        pu_cond[u] = dgp.p_u[u] * dgp.p_z_given_u(z, u) * dgp.p_a_given_u(a, u);
      pu_cond /= pu_cond.sum();
      for (Index w = 0; w < dgp.n_w(); ++w) {
        double pw = 0.0;
        for (Index u = 0; u < dgp.n_u(); ++u) pw += pu_cond[u] * dgp.p_w_given_u(w, u);
        k(z * 2 + a, w) = -pw;
      }
    }
  return k;
}

// Kernel of the treatment equation: K[w, (z, a)] = -1{a = a_level} p(z, a | w).
Mat treatment_kernel(const DiscreteProximalDgp& dgp) {
  Mat k = Mat::Zero(dgp.n_w(), dgp.n_z() * 2);
  const Vec pw = dgp.marginal_w();
  for (Index w = 0; w < dgp.n_w(); ++w) {
    Vec pu_cond(dgp.n_u());
    for (Index u = 0; u < dgp.n_u(); ++u)
      pu_cond[u] = dgp.p_u[u] * dgp.p_w_given_u(w, u);
    pu_cond /= pw[w];
    for (Index z = 0; z < dgp.n_z(); ++z)
      for (Index a = 0; a < 2; ++a) {
        if (static_cast<int>(a) != dgp.a_level) continue;
        double pza = 0.0;
        for (Index u = 0; u < dgp.n_u(); ++u)
          pza += pu_cond[u] * dgp.p_z_given_u(z, u) * dgp.p_a_given_u(a, u);
        k(w, z * 2 + a) = -pza;
      }
  }
  return k;
}

// Values of r0 on the conditioning categories.
Vec outcome_r_values(const DiscreteProximalDgp& dgp) {
  Vec r = Vec::Zero(dgp.n_z() * 2);
  for (Index z = 0; z < dgp.n_z(); ++z) {
    const Index a = dgp.a_level;
    Vec pu_cond(dgp.n_u());
    for (Index u = 0; u < dgp.n_u(); ++u)
      pu_cond[u] = dgp.p_u[u] * dgp.p_z_given_u(z, u) * dgp.p_a_given_u(a, u);
    pu_cond /= pu_cond.sum();
    double ey = 0.0;
    for (Index u = 0; u < dgp.n_u(); ++u) ey += pu_cond[u] * dgp.y_mean(a, u);
    r[z * 2 + a] = -ey;
  }
  return r;
}

// Coefficients on an indicator-family basis of the function with the given
// category values.
FunctionHandle values_to_function(const BasisSpec& basis, const Vec& values) {
  return FunctionHandle(basis, category_weights(basis).cwiseSqrt().cwiseProduct(values));
}

// Sieve matrix of a value-space kernel between indicator-family bases.
SieveOperator kernel_to_sieve(const Mat& kernel, const BasisSpec& in, const BasisSpec& out) {
  const Vec win = category_weights(in);
  const Vec wout = category_weights(out);
  const Mat m = wout.cwiseSqrt().asDiagonal() * kernel *
                win.cwiseSqrt().cwiseInverse().asDiagonal();
  return SieveOperator(m, in, out);
}

// Minimum-norm solution of kernel * f = r in the L2(weights) geometry.
Vec weighted_min_norm_solve(const Mat& kernel, const Vec& r, const Vec& weights) {
  const Vec root = weights.cwiseSqrt();
  const Mat scaled = kernel * root.cwiseInverse().asDiagonal();
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(scaled);
  cod.setThreshold(1e-10);
  const Vec g = cod.solve(r);
  if ((scaled * g - r).cwiseAbs().maxCoeff() > 1e-9)
    throw NumericalError("identification failure: bridge equation has no solution");
  return root.cwiseInverse().cwiseProduct(g);
}

}  // namespace

SieveOperator exact_operator(const DiscreteProximalDgp& dgp, BridgeEquation eq) {
  if (eq == BridgeEquation::outcome)
    return kernel_to_sieve(outcome_kernel(dgp), proximal_w_basis(dgp),
                           proximal_za_basis(dgp));
  return kernel_to_sieve(treatment_kernel(dgp), proximal_za_basis(dgp),
                         proximal_w_basis(dgp));
}

FunctionHandle exact_r(const DiscreteProximalDgp& dgp, BridgeEquation eq) {
  if (eq == BridgeEquation::outcome)
    return values_to_function(proximal_za_basis(dgp), outcome_r_values(dgp));
  return values_to_function(proximal_w_basis(dgp), Vec::Constant(dgp.n_w(), -1.0));
}

Bridges true_bridges(const DiscreteProximalDgp& dgp) {
  const Vec h_values =
      weighted_min_norm_solve(outcome_kernel(dgp), outcome_r_values(dgp), dgp.marginal_w());
  const Vec q_values = weighted_min_norm_solve(
      treatment_kernel(dgp), Vec::Constant(dgp.n_w(), -1.0), dgp.marginal_za());
  return Bridges{values_to_function(proximal_w_basis(dgp), h_values),
                 values_to_function(proximal_za_basis(dgp), q_values)};
}

}  // namespace dipr
