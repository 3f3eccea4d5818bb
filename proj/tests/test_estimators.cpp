#include <doctest.h>

#include <cmath>

#include "dipr/dgp.hpp"
#include "dipr/estimators.hpp"
#include "dipr/operators.hpp"

using namespace dipr;

namespace {

SeriesNpivDgp series3() {
  Vec s(3);
  s << 0.4, 0.2, 0.1;
  Vec h(4);
  h << 1.0, 0.5, -0.25, 0.125;
  return SeriesNpivDgp(s, FunctionHandle(BasisSpec::cosine(4), h), 0.1, 0.5);
}

// Direct dense solve of the recursion (H + lambda S) c_t = -ell/2 + lambda S c_{t-1}.
Vec recursion_oracle(const Mat& h, const Mat& s, const Vec& ell, double lambda, int t) {
  Vec c = Vec::Zero(ell.size());
  const Mat lhs = h + lambda * s;
  for (int k = 0; k < t; ++k) c = lhs.ldlt().solve(-0.5 * ell + lambda * s * c);
  return c;
}

}  // namespace

TEST_CASE("iterated solve matches the spectral filter on a diagonal quadratic") {
  // H = diag(s^2), S = I, ell = -2 diag(s^2) c0: the minimizer chain equals
  // the iterated Tikhonov filter applied to c0 component-wise.
  Vec s(4);
  s << 1.0, 0.5, 0.1, 0.02;
  Vec c0(4);
  c0 << 1.0, -2.0, 3.0, -4.0;
  RiskQuadratic q;
  q.H = s.array().square().matrix().asDiagonal();
  q.S = Mat::Identity(4, 4);
  q.ell = -2.0 * (s.array().square() * c0.array()).matrix();
  q.k0 = 0.0;
  q.basis = BasisSpec::cosine(4);
  for (const double lambda : {0.3, 0.01}) {
    for (const int t : {1, 2, 5}) {
      FitConfig cfg;
      cfg.lambda = lambda;
      cfg.iterations = t;
      const FitResult fr = solve_iterated(q, cfg);
      const Vec filt = tikhonov_filter_factors(s, lambda, t);
      const Vec expect = (filt.array() * c0.array()).matrix();
      CHECK((fr.h_hat.coeffs() - expect).norm() <= 1e-12);
      CHECK(int(fr.trajectory.size()) == t);
      CHECK((fr.trajectory.back() - fr.h_hat.coeffs()).norm() == 0.0);
      CHECK((fr.h_hat.coeffs() - recursion_oracle(q.H, q.S, q.ell, lambda, t)).norm() <=
            1e-12);
    }
  }
}

TEST_CASE("indefinite quadratics are rejected, not jittered") {
  RiskQuadratic q;
  q.H = Mat::Identity(3, 3);
  q.H(2, 2) = -0.5;
  q.S = Mat::Identity(3, 3);
  q.ell = Vec::Zero(3);
  q.k0 = 0.0;
  q.basis = BasisSpec::cosine(3);
  FitConfig cfg;
  cfg.lambda = 0.1;
  cfg.iterations = 2;
  bool threw = false;
  try {
    solve_iterated(q, cfg);
  } catch (const NonConvexObjective& e) {
    threw = true;
    CHECK(e.min_eigenvalue == doctest::Approx(-0.4));
  }
  CHECK(threw);
  // raising the floor rejects borderline-convex problems too
  q.H(2, 2) = 0.5;
  cfg.hessian_floor = 0.7;
  CHECK_THROWS_AS(solve_iterated(q, cfg), NonConvexObjective);
  cfg.hessian_floor = 0.0;
  CHECK_NOTHROW(solve_iterated(q, cfg));
}

TEST_CASE("iteration and lambda validation") {
  RiskQuadratic q;
  q.H = Mat::Identity(2, 2);
  q.S = Mat::Identity(2, 2);
  q.ell = Vec::Zero(2);
  q.k0 = 0.0;
  q.basis = BasisSpec::cosine(2);
  FitConfig cfg;
  cfg.lambda = 0.0;
  CHECK_THROWS_AS(solve_iterated(q, cfg), ConfigError);
  cfg.lambda = 0.1;
  cfg.iterations = 0;
  CHECK_THROWS_AS(solve_iterated(q, cfg), ConfigError);
}

TEST_CASE("baseline fit equals explicit penalized least squares") {
  const SeriesNpivDgp dgp = series3();
  const Dataset d = sample_npiv(dgp, 3000, 29);
  const BasisSpec cb = BasisSpec::cosine(4);
  const NuisanceFit nf = fit_nuisances(d, cb, cb);
  FitConfig cfg;
  cfg.lambda = 0.05;
  cfg.iterations = 3;
  cfg.method = FitMethod::baseline;
  const FitResult fr = fit(d, nf, cfg);

  // independent assembly: P = Psi A_hat, S = Phi'Phi/n, iterate directly
  const Mat phi = cb.design(d.v_h_points());
  const Mat psi = cb.design(d.v_q_points());
  const Mat p = psi * nf.t_hat.matrix;
  const double n = double(d.n());
  const Mat h = p.transpose() * p / n;
  const Mat s = phi.transpose() * phi / n;
  const Vec ell = -2.0 * p.transpose() * d.g0() / n;
  CHECK((fr.h_hat.coeffs() - recursion_oracle(h, s, ell, cfg.lambda, 3)).norm() <= 1e-10);
}

TEST_CASE("debiased fit with exact nuisances recovers the truth as lambda shrinks") {
  const SeriesNpivDgp dgp = series3();
  const Dataset d = sample_npiv(dgp, 6000, 37);
  const SingularSystem sys = true_operator_npiv(dgp, 4);
  const NuisanceFit nf{to_sieve(sys), apply(sys, dgp.h0), 0.0, d.n(), 1.0};
  double prev = 1e9;
  for (const double lambda : {0.5, 0.1, 0.02}) {
    FitConfig cfg;
    cfg.lambda = lambda;
    cfg.iterations = 2;
    const FitResult fr = fit(d, nf, cfg);
    const double err = (fr.h_hat.coeffs() - dgp.h0.coeffs()).norm();
    CHECK(err < prev + 0.02);
    prev = err;
  }
  CHECK(prev < 0.05);
}

TEST_CASE("risk assemblies agree when the operator annihilates the debias term") {
  // With M = P the extra debiased terms cancel against the plug-in quadratic
  // once r_hat = 0: H_deb = (P'M + M'P - P'P)/n = P'P/n and ell matches.
  const SeriesNpivDgp dgp = series3();
  const Dataset d = sample_npiv(dgp, 400, 3);
  const BasisSpec cb = BasisSpec::cosine(4);
  const SieveOperator identity(Mat::Identity(4, 4), cb, cb);
  // identity operator makes P = Psi; pick v_q = v_h so M = Psi = P as well
  RoleMap roles = d.roles();
  roles.v_q = roles.v_h;
  const Dataset dd = d.with_roles(roles);
  const RiskQuadratic deb = assemble_debiased_risk(dd, identity, zero_function(cb));
  const RiskQuadratic plug = assemble_plugin_risk(dd, identity);
  CHECK((deb.H - plug.H).norm() <= 1e-12);
  CHECK((deb.ell - plug.ell).norm() <= 1e-12);
}

TEST_CASE("influence value is the stated arithmetic") {
  const double g0 = 0.7, g1 = -1.0, h = 2.0, th = 0.4, r = 0.3, psi = 0.05;
  const double expect = (th - g0) * (th - g0) + 2.0 * (th - r) * (g1 * h - th) - psi;
  CHECK(influence_value(g0, g1, h, th, r, psi) == expect);
  CHECK(influence_value(1.0, 1.0, 1.0, 1.0, 1.0, 0.0) == 0.0);
}

TEST_CASE("rowwise influence values match the scalar form") {
  const SeriesNpivDgp dgp = series3();
  const Dataset d = sample_npiv(dgp, 50, 61);
  const SingularSystem sys = true_operator_npiv(dgp, 4);
  const SieveOperator t = to_sieve(sys);
  const FunctionHandle r = apply(sys, dgp.h0);
  const Vec vals = influence_values(d, dgp.h0, t, r, 0.3);
  REQUIRE(vals.size() == 50);
  const FunctionHandle th = apply(sys, dgp.h0);
  const Vec wc = d.column("W"), zc = d.column("Z");
  for (Index i = 0; i < 5; ++i) {
    const double expect = influence_value(d.g0()[i], d.g1()[i], dgp.h0(wc[i]),
                                          th(zc[i]), r(zc[i]), 0.3);
    CHECK(vals[i] == doctest::Approx(expect));
  }
}

TEST_CASE("debiased risk of the truth estimates zero under exact nuisances") {
  const SeriesNpivDgp dgp = series3();
  const Dataset d = sample_npiv(dgp, 50000, 43);
  const SingularSystem sys = true_operator_npiv(dgp, 4);
  const SieveOperator t = to_sieve(sys);
  const FunctionHandle r = apply(sys, dgp.h0);
  // E[(Th - g0)^2] - sigma_eps^2 + 2 E[(Th - r)(h - Th)] = 0 at h = h0 up to
  // the irreducible noise level, which the centered version removes:
  const double at_truth = debiased_risk(dgp.h0, d, t, r);
  const double elsewhere = debiased_risk(zero_function(BasisSpec::cosine(4)), d, t, r);
  CHECK(elsewhere > at_truth);
  const double plug = projected_risk_plugin(dgp.h0, d, t);
  CHECK(plug == doctest::Approx(at_truth).epsilon(0.05));  // debias term ~ 0 at truth
}

TEST_CASE("fit method names round trip") {
  CHECK(fit_method_from_string("baseline") == FitMethod::baseline);
  CHECK(fit_method_from_string("debiased") == FitMethod::debiased);
  CHECK(to_string(FitMethod::baseline) == "baseline");
  CHECK(to_string(FitMethod::debiased) == "debiased");
  CHECK_THROWS_AS(fit_method_from_string("ols"), ConfigError);
}
