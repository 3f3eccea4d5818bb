#include "dipr/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dipr/rng.hpp"

namespace dipr {

namespace {

long long category_of(double x, const char* what) {
  const double r = std::round(x);
  if (std::abs(x - r) > 1e-9) {
    throw ConfigError(std::string(what) + " column must hold integer categories");
  }
  return static_cast<long long>(r);
}

Vec term_values(const MomentTerm& term, const Dataset& data, const char* name) {
  if (!term) throw ConfigError(std::string("moment functional is missing ") + name);
  Vec out(data.n());
  for (Index i = 0; i < data.n(); ++i) out[i] = term(data, i);
  if (!out.allFinite()) {
    throw NumericalError(std::string(name) + " produced a non-finite value");
  }
  return out;
}

// E_n-ready integrand values s1 q h + s2 q + s3 h + s4, row by row.
Vec integrand_values(const Dataset& data, const FunctionHandle& h,
                     const FunctionHandle& q, const MomentFunctional& f) {
  const Vec s1 = term_values(f.s1, data, "s1");
  const Vec s2 = term_values(f.s2, data, "s2");
  const Vec s3 = term_values(f.s3, data, "s3");
  const Vec s4 = term_values(f.s4, data, "s4");
  const Vec hv = evaluate(h, data.matrix_of(f.v_h));
  const Vec qv = evaluate(q, data.matrix_of(f.v_q));
  return (s1.array() * qv.array() * hv.array() + s2.array() * qv.array() +
          s3.array() * hv.array() + s4.array())
      .matrix();
}

FunctionalEstimate summarize(const Vec& values) {
  FunctionalEstimate est;
  est.n = values.size();
  est.psi_hat = values.mean();
  double sd = 0.0;
  if (est.n > 1) {
    sd = std::sqrt((values.array() - est.psi_hat).square().sum() /
                   static_cast<double>(est.n - 1));
  }
  est.standard_error = sd / std::sqrt(static_cast<double>(est.n));
  est.ci_lo = est.psi_hat - 1.96 * est.standard_error;
  est.ci_hi = est.psi_hat + 1.96 * est.standard_error;
  return est;
}

// Evaluates an enumeration integrand through a one-row scratch dataset so the
// same MomentTerm evaluators serve sampled data and exact expectations.
class ScratchRow {
 public:
  ScratchRow()
      : data_({"Z", "W", "A", "Y"}, Mat::Zero(1, 4), RoleMap{}) {}

  const Dataset& set(int z, int w, int a, double y) {
    data_.values()(0, 0) = static_cast<double>(z);
    data_.values()(0, 1) = static_cast<double>(w);
    data_.values()(0, 2) = static_cast<double>(a);
    data_.values()(0, 3) = y;
    return data_;
  }

 private:
  Dataset data_;
};

double coordinate_of(const std::string& name, int z, int w, int a, double y) {
  if (name == "Z") return static_cast<double>(z);
  if (name == "W") return static_cast<double>(w);
  if (name == "A") return static_cast<double>(a);
  if (name == "Y") return y;
  throw ConfigError("enumeration only covers columns Z, W, A, Y; got " + name);
}

double eval_at(const FunctionHandle& fn, const std::vector<std::string>& cols,
               int z, int w, int a, double y) {
  std::vector<double> x(cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) {
    x[i] = coordinate_of(cols[i], z, w, a, y);
  }
  return fn(x.data());
}

}  // namespace

MomentFunctional proximal_functional(int a_level) {
  if (a_level != 0 && a_level != 1) {
    throw ConfigError("treatment level must be 0 or 1");
  }
  MomentFunctional f;
  const double a = static_cast<double>(a_level);
  f.s1 = [a](const Dataset& d, Index i) {
    return -(category_of(d.values()(i, d.column_index("A")), "A") ==
                     static_cast<long long>(a)
                 ? 1.0
                 : 0.0);
  };
  f.s2 = [a](const Dataset& d, Index i) {
    const bool hit = category_of(d.values()(i, d.column_index("A")), "A") ==
                     static_cast<long long>(a);
    return hit ? d.values()(i, d.column_index("Y")) : 0.0;
  };
  f.s3 = [](const Dataset&, Index) { return 1.0; };
  f.s4 = [](const Dataset&, Index) { return 0.0; };
  f.v_h = {"W"};
  f.v_q = {"Z", "A"};
  return f;
}

Dataset h_equation(const MomentFunctional& f, const Dataset& data) {
  const Vec g1 = term_values(f.s1, data, "s1");
  const Vec g0 = -term_values(f.s2, data, "s2");
  RoleMap roles;
  roles.v_h = f.v_h;
  roles.v_q = f.v_q;
  roles.g0 = "eq_g0";
  roles.g1 = "eq_g1";
  return data.with_column("eq_g0", g0).with_column("eq_g1", g1).with_roles(roles);
}

Dataset q_equation(const MomentFunctional& f, const Dataset& data) {
  const Vec g1 = term_values(f.s1, data, "s1");
  const Vec g0 = -term_values(f.s3, data, "s3");
  RoleMap roles;
  roles.v_h = f.v_q;  // the unknown q is a function of V_q
  roles.v_q = f.v_h;  // ... and the restriction conditions on V_h
  roles.g0 = "eq_g0";
  roles.g1 = "eq_g1";
  return data.with_column("eq_g0", g0).with_column("eq_g1", g1).with_roles(roles);
}

FunctionalEstimate if_estimate(const Dataset& data, const FunctionHandle& h_hat,
                               const FunctionHandle& q_hat,
                               const MomentFunctional& f) {
  if (data.n() == 0) throw ConfigError("if_estimate needs at least one row");
  return summarize(integrand_values(data, h_hat, q_hat, f));
}

double enumerate_functional(const DiscreteProximalDgp& dgp,
                            const MomentFunctional& f, const FunctionHandle& h,
                            const FunctionHandle& q) {
  ScratchRow scratch;
  return enumerate_mean(dgp, [&](int z, int w, int a, double y) {
    const Dataset& row = scratch.set(z, w, a, y);
    const double hv = eval_at(h, f.v_h, z, w, a, y);
    const double qv = eval_at(q, f.v_q, z, w, a, y);
    return f.s1(row, 0) * qv * hv + f.s2(row, 0) * qv + f.s3(row, 0) * hv +
           f.s4(row, 0);
  });
}

MixedBiasResult mixed_bias(const DiscreteProximalDgp& dgp,
                           const FunctionHandle& h_hat, const FunctionHandle& q_hat,
                           const FunctionHandle& h0, const FunctionHandle& q0,
                           const MomentFunctional& f) {
  MixedBiasResult out;
  const double psi0 = enumerate_functional(dgp, f, h0, q0);
  out.bias = psi0 - enumerate_functional(dgp, f, h_hat, q_hat);

  ScratchRow scratch;
  out.product = enumerate_mean(dgp, [&](int z, int w, int a, double y) {
    const Dataset& row = scratch.set(z, w, a, y);
    const double dq = eval_at(q0, f.v_q, z, w, a, y) - eval_at(q_hat, f.v_q, z, w, a, y);
    const double dh = eval_at(h_hat, f.v_h, z, w, a, y) - eval_at(h0, f.v_h, z, w, a, y);
    return f.s1(row, 0) * dq * dh;
  });

  if (std::abs(out.bias - out.product) > 1e-9 * (1.0 + std::abs(out.bias))) {
    throw NumericalError("mixed-bias identity violated: bias " +
                         std::to_string(out.bias) + " vs product " +
                         std::to_string(out.product));
  }
  return out;
}

RateRegime rate_regime_from_string(const std::string& s) {
  if (s == "source-projected" || s == "source_projected") {
    return RateRegime::source_projected;
  }
  if (s == "alpha-conversion" || s == "alpha_conversion") {
    return RateRegime::alpha_conversion;
  }
  if (s == "no-debias" || s == "no_debias") return RateRegime::no_debias;
  throw ConfigError("unknown rate regime: " + s);
}

std::string to_string(RateRegime r) {
  switch (r) {
    case RateRegime::source_projected:
      return "source-projected";
    case RateRegime::alpha_conversion:
      return "alpha-conversion";
    case RateRegime::no_debias:
      return "no-debias";
  }
  throw ConfigError("unknown rate regime");
}

namespace {

// Exponent bookkeeping for one bridge, everything expressed as the power of
// the common sieve-rate knob rho_n. The coupling is
//   ||T - T_hat|| = ||r_hat - r|| = rho^c with c = min{4, beta+1}/min{5, beta+2},
//   critical radius = rho.
struct BridgeExponents {
  Rational m3, m4, m5;  // min{3, beta}, min{4, beta+1}, min{5, beta+2}
  Rational c;           // projected-rate exponent of the operator/r errors
  Rational g;           // rho-exponent of Delta = max{op^4, op^2 r^2, radius^2}
  Rational theta;       // rho-exponent of Theta (debiased estimator errors)
  Rational theta_plain; // same without the debiasing correction (op enters linearly)
};

BridgeExponents bridge_exponents(const Rational& beta) {
  if (!(Rational(0) < beta)) throw ConfigError("beta must be positive");
  BridgeExponents b;
  b.m3 = rational_min(Rational(3), beta);
  b.m4 = rational_min(Rational(4), beta + Rational(1));
  b.m5 = rational_min(Rational(5), beta + Rational(2));
  b.c = b.m4 / b.m5;
  b.g = rational_min(Rational(4) * b.c, Rational(2));
  b.theta = rational_min(Rational(2) * b.c, b.g * b.c);
  b.theta_plain = rational_min(b.c, b.g * b.c);
  return b;
}

}  // namespace

RateRequirement rate_requirement(const Rational& beta_h, const Rational& beta_q,
                                 const Rational& alpha_h, const Rational& alpha_q,
                                 RateRegime regime) {
  const BridgeExponents h = bridge_exponents(beta_h);
  const BridgeExponents q = bridge_exponents(beta_q);
  if (regime != RateRegime::source_projected) {
    if (!(Rational(0) < alpha_h) || !(Rational(0) < alpha_q)) {
      throw ConfigError("alpha must be positive");
    }
  }

  // E = rho-exponent of one branch of the product bound; the branch is
  // satisfied when rho = o(n^{-1/(2E)}).
  Rational e_qh, e_hq;
  switch (regime) {
    case RateRegime::source_projected:
      // source error of one bridge (exponent m3/(2 m5) in its Delta) times
      // projected error of the other (exponent m4/(2 m5)).
      e_qh = q.g * q.m3 / (Rational(2) * q.m5) + h.g * h.m4 / (Rational(2) * h.m5);
      e_hq = h.g * h.m3 / (Rational(2) * h.m5) + q.g * q.m4 / (Rational(2) * q.m5);
      break;
    case RateRegime::alpha_conversion:
      // source error recovered from the projected rate via 1/(2+2 alpha).
      e_qh = q.theta / (Rational(2) + Rational(2) * alpha_q) + h.theta / Rational(2);
      e_hq = h.theta / (Rational(2) + Rational(2) * alpha_h) + q.theta / Rational(2);
      break;
    case RateRegime::no_debias:
      e_qh = q.theta_plain / (Rational(2) + Rational(2) * alpha_q) +
             h.theta_plain / Rational(2);
      e_hq = h.theta_plain / (Rational(2) + Rational(2) * alpha_h) +
             q.theta_plain / Rational(2);
      break;
  }

  RateRequirement out;
  out.branch_qh = Rational(1) / (Rational(2) * e_qh);
  out.branch_hq = Rational(1) / (Rational(2) * e_hq);
  // The bound takes the smaller of the two branch products, so the weaker
  // (smaller) exponent requirement suffices.
  out.exponent = rational_min(out.branch_qh, out.branch_hq);
  out.feasible = out.exponent <= Rational(1, 2);
  return out;
}

FunctionalPipelineResult full_pipeline_functional(const Dataset& data,
                                                  const MomentFunctional& f,
                                                  const FunctionalPipelineConfig& config) {
  const Index n = data.n();
  if (n < 12) throw ConfigError("cross-fitting needs at least 12 rows");

  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng = substream(config.seed, {6});
  for (Index i = n - 1; i > 0; --i) {
    const Index j = static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  const std::vector<Index> half0(perm.begin(), perm.begin() + n / 2);
  const std::vector<Index> half1(perm.begin() + n / 2, perm.end());

  FunctionalPipelineResult out;
  out.seed = config.seed;
  Vec pooled(n);
  Index filled = 0;
  for (int k = 0; k < 2; ++k) {
    const Dataset train = data.subset(k == 0 ? half1 : half0);
    const Dataset eval = data.subset(k == 0 ? half0 : half1);

    PipelineConfig inner;
    inner.fractions = config.fractions;
    inner.grid_epsilon = config.grid_epsilon;
    inner.grid_proxy = config.grid_proxy;
    inner.grid_m = config.grid_m;
    inner.ridge = config.ridge;
    inner.iterations = config.iterations;
    inner.method = config.method;
    inner.hessian_floor = config.hessian_floor;

    inner.basis_h = config.basis_h;
    inner.basis_q = config.basis_q;
    inner.seed = substream_seed(config.seed, {7, static_cast<std::uint64_t>(k), 0});
    const PipelineResult h_fit = fit_cv_pipeline(h_equation(f, train), inner);

    inner.basis_h = config.basis_q;  // the unknown q lives on the v_q sieve
    inner.basis_q = config.basis_h;
    inner.seed = substream_seed(config.seed, {7, static_cast<std::uint64_t>(k), 1});
    const PipelineResult q_fit = fit_cv_pipeline(q_equation(f, train), inner);

    const Vec vals = integrand_values(eval, h_fit.h_hat, q_fit.h_hat, f);
    FunctionalFold fold;
    fold.n_eval = eval.n();
    fold.psi = vals.mean();
    fold.lambda_h = h_fit.selected_lambda;
    fold.lambda_q = q_fit.selected_lambda;
    out.folds.push_back(fold);
    pooled.segment(filled, vals.size()) = vals;
    filled += vals.size();
  }

  out.estimate = summarize(pooled);
  return out;
}

FunctionalPipelineConfig proximal_pipeline_config(const Dataset& data,
                                                  std::uint64_t seed) {
  for (const char* name : {"Z", "W", "A", "Y"}) {
    if (!data.has_column(name)) {
      throw ConfigError(std::string("proximal data must have column ") + name);
    }
  }
  auto categories = [&](const char* name) {
    const Vec col = data.column(name);
    long long top = 0;
    for (Index i = 0; i < col.size(); ++i) {
      const long long c = category_of(col[i], name);
      if (c < 0) throw ConfigError(std::string(name) + " categories must be >= 0");
      top = std::max(top, c);
    }
    return static_cast<Index>(top + 1);
  };
  const Index n_z = categories("Z");
  const Index n_w = categories("W");
  const Index n_a = categories("A");
  if (n_a > 2) throw ConfigError("A must be binary");

  FunctionalPipelineConfig config;
  config.basis_h = BasisSpec::indicator(
      Vec::Constant(n_w, 1.0 / static_cast<double>(n_w)));
  config.basis_q = BasisSpec::tensor(
      BasisSpec::indicator(Vec::Constant(n_z, 1.0 / static_cast<double>(n_z))),
      BasisSpec::indicator(Vec::Constant(2, 0.5)));
  config.seed = seed;
  return config;
}

}  // namespace dipr
