#include <doctest.h>

#include <cmath>

#include "dipr/dgp.hpp"
#include "dipr/functionals.hpp"
#include "dipr/nuisance.hpp"

using namespace dipr;

namespace {

// Adds `delta` to the function value at one point of an indicator-style basis
// (exactly one active element per point) and leaves it unchanged elsewhere.
FunctionHandle bump_at(const FunctionHandle& fn, const double* x, double delta) {
  const Vec vals = fn.basis().evaluate_point(x);
  Index active = -1;
  for (Index j = 0; j < vals.size(); ++j) {
    if (vals[j] != 0.0) {
      REQUIRE(active == -1);
      active = j;
    }
  }
  REQUIRE(active >= 0);
  Vec c = fn.coeffs();
  c[active] += delta / vals[active];
  return FunctionHandle(fn.basis(), c);
}

}  // namespace

TEST_CASE("the counterfactual-mean adapter materializes both bridge equations") {
  const DiscreteProximalDgp dgp = DiscreteProximalDgp::canonical();
  const Dataset raw = sample_proximal(dgp, 200, 8);
  const MomentFunctional f = proximal_functional(1);

  const Dataset h_eq = h_equation(f, raw);
  CHECK(h_eq.roles().v_h == std::vector<std::string>{"W"});
  CHECK(h_eq.roles().v_q == std::vector<std::string>{"Z", "A"});
  const Dataset q_eq = q_equation(f, raw);
  CHECK(q_eq.roles().v_h == std::vector<std::string>{"Z", "A"});
  CHECK(q_eq.roles().v_q == std::vector<std::string>{"W"});

  const Vec a = raw.column("A"), y = raw.column("Y");
  for (Index i = 0; i < raw.n(); ++i) {
    const bool hit = a[i] == 1.0;
    CHECK(h_eq.g1()[i] == (hit ? -1.0 : 0.0));
    CHECK(h_eq.g0()[i] == (hit ? -y[i] : 0.0));
    CHECK(q_eq.g1()[i] == (hit ? -1.0 : 0.0));
    CHECK(q_eq.g0()[i] == -1.0);
  }
  CHECK_THROWS_AS(proximal_functional(2), ConfigError);
}

TEST_CASE("jointly negating g0 and g1 leaves the fitted bridge unchanged") {
  const DiscreteProximalDgp dgp = DiscreteProximalDgp::canonical();
  const Dataset raw = sample_proximal(dgp, 4000, 15);
  const Dataset d = h_equation(proximal_functional(1), raw);
  const Dataset flipped = d.with_column("eq_g0", Vec(-d.g0()))
                              .with_column("eq_g1", Vec(-d.g1()));
  const BasisSpec bw = proximal_w_basis(dgp);
  const BasisSpec bza = proximal_za_basis(dgp);
  FitConfig fc;
  fc.lambda = 0.05;
  fc.iterations = 2;
  const FitResult a = fit(d, fit_nuisances(d, bw, bza), fc);
  const FitResult b = fit(flipped, fit_nuisances(flipped, bw, bza), fc);
  CHECK((a.h_hat.coeffs() - b.h_hat.coeffs()).norm() <= 1e-12);
}

TEST_CASE("enumerated functional hits the g-formula when either bridge is exact") {
  const DiscreteProximalDgp dgp = DiscreteProximalDgp::canonical();
  const MomentFunctional f = proximal_functional(dgp.a_level);
  const Bridges br = true_bridges(dgp);
  const double psi = dgp.gformula();

  CHECK(std::abs(enumerate_functional(dgp, f, br.h0, br.q0) - psi) <= 1e-10);

  // exact h beats a wrong q, and vice versa: double robustness point by point
  const double z_cell[2] = {1.0, 1.0};
  const FunctionHandle q_wrong = bump_at(br.q0, z_cell, 0.7);
  CHECK(std::abs(enumerate_functional(dgp, f, br.h0, q_wrong) - psi) <= 1e-10);
  const double w_cell[1] = {2.0};
  const FunctionHandle h_wrong = bump_at(br.h0, w_cell, -0.4);
  CHECK(std::abs(enumerate_functional(dgp, f, h_wrong, br.q0) - psi) <= 1e-10);
}

TEST_CASE("sampled influence-function estimate is consistent at the truth") {
  const DiscreteProximalDgp dgp = DiscreteProximalDgp::canonical();
  const MomentFunctional f = proximal_functional(dgp.a_level);
  const Bridges br = true_bridges(dgp);
  const Dataset d = sample_proximal(dgp, 100000, 91);
  const FunctionalEstimate est = if_estimate(d, br.h0, br.q0, f);
  CHECK(est.n == 100000);
  CHECK(est.standard_error > 0.0);
  CHECK(std::abs(est.psi_hat - dgp.gformula()) <= 4.0 * est.standard_error);
  CHECK(est.ci_lo == doctest::Approx(est.psi_hat - 1.96 * est.standard_error));
  CHECK(est.ci_hi == doctest::Approx(est.psi_hat + 1.96 * est.standard_error));
}

TEST_CASE("mixed bias equals the error product, cell by cell") {
  const DiscreteProximalDgp dgp = DiscreteProximalDgp::canonical();
  const MomentFunctional f = proximal_functional(dgp.a_level);
  const Bridges br = true_bridges(dgp);

  const double c = 0.6, d = -0.8;
  const int z0 = 2, w0 = 1;
  const double z_cell[2] = {double(z0), 1.0};
  const double w_cell[1] = {double(w0)};
  const FunctionHandle q_hat = bump_at(br.q0, z_cell, c);
  const FunctionHandle h_hat = bump_at(br.h0, w_cell, d);

  const MixedBiasResult mb = mixed_bias(dgp, h_hat, q_hat, br.h0, br.q0, f);
  CHECK(std::abs(mb.bias - mb.product) <= 1e-9 * (1.0 + std::abs(mb.bias)));

  // product = c * d * P(W = w0, Z = z0, A = a_level) for single-cell bumps
  const double cell_mass = enumerate_mean(dgp, [&](int z, int w, int a, double) {
    return (z == z0 && w == w0 && a == dgp.a_level) ? 1.0 : 0.0;
  });
  CHECK(cell_mass > 0.0);
  CHECK(mb.product == doctest::Approx(c * d * cell_mass));

  // one-sided exactness kills the bias entirely
  const MixedBiasResult q_only = mixed_bias(dgp, br.h0, q_hat, br.h0, br.q0, f);
  CHECK(std::abs(q_only.bias) <= 1e-12);
  const MixedBiasResult h_only = mixed_bias(dgp, h_hat, br.q0, br.h0, br.q0, f);
  CHECK(std::abs(h_only.bias) <= 1e-12);
}

TEST_CASE("rate requirements reproduce the worked smooth-series numbers") {
  const Rational beta(3), alpha(2, 3);
  const RateRequirement sp =
      rate_requirement(beta, beta, alpha, alpha, RateRegime::source_projected);
  CHECK(sp.exponent == Rational(5, 14));
  CHECK(sp.exponent.to_string() == "5/14");
  CHECK(sp.feasible);
  CHECK(sp.branch_qh == sp.branch_hq);  // symmetric bridges

  const RateRequirement ac =
      rate_requirement(beta, beta, alpha, alpha, RateRegime::alpha_conversion);
  CHECK(ac.exponent == Rational(25, 64));
  CHECK(ac.feasible);

  const RateRequirement nd =
      rate_requirement(beta, beta, alpha, alpha, RateRegime::no_debias);
  CHECK(nd.exponent == Rational(25, 32));
  CHECK(!nd.feasible);  // faster than root-n is impossible
}

TEST_CASE("rate branches are asymmetric for unequal smoothness") {
  const RateRequirement rr = rate_requirement(Rational(2), Rational(4), Rational(1),
                                              Rational(1), RateRegime::source_projected);
  CHECK(!(rr.branch_qh == rr.branch_hq));
  CHECK(rr.exponent == rational_min(rr.branch_qh, rr.branch_hq));
  CHECK_THROWS_AS(rate_requirement(Rational(0), Rational(3), Rational(1), Rational(1),
                                   RateRegime::source_projected),
                  ConfigError);
  CHECK_THROWS_AS(rate_requirement(Rational(3), Rational(3), Rational(-1), Rational(1),
                                   RateRegime::alpha_conversion),
                  ConfigError);
}

TEST_CASE("rate regime names round trip") {
  for (const RateRegime r : {RateRegime::source_projected, RateRegime::alpha_conversion,
                             RateRegime::no_debias}) {
    CHECK(rate_regime_from_string(to_string(r)) == r);
  }
  CHECK(rate_regime_from_string("source_projected") == RateRegime::source_projected);
  CHECK_THROWS_AS(rate_regime_from_string("corollary-7"), ConfigError);
}

TEST_CASE("rational arithmetic stays normalized") {
  CHECK(Rational(4, 8) == Rational(1, 2));
  CHECK(Rational(-3, -6) == Rational(1, 2));
  CHECK(Rational(3, -6).num == -1);
  CHECK((Rational(1, 3) + Rational(1, 6)) == Rational(1, 2));
  CHECK((Rational(3, 4) * Rational(2, 3)) == Rational(1, 2));
  CHECK((Rational(1, 2) / Rational(3, 2)) == Rational(1, 3));
  CHECK(Rational(7).to_string() == "7");
  CHECK(rational_from_double(0.390625, 64) == Rational(25, 64));
  CHECK(rational_from_double(0.6666666666, 64) == Rational(2, 3));
  CHECK_THROWS_AS(Rational(1, 0), std::invalid_argument);
}

TEST_CASE("cross-fit functional pipeline is deterministic and well formed") {
  const DiscreteProximalDgp dgp = DiscreteProximalDgp::canonical();
  const Dataset d = sample_proximal(dgp, 3000, 19);
  const MomentFunctional f = proximal_functional(dgp.a_level);
  const FunctionalPipelineConfig cfg = proximal_pipeline_config(d, 101);

  const FunctionalPipelineResult a = full_pipeline_functional(d, f, cfg);
  const FunctionalPipelineResult b = full_pipeline_functional(d, f, cfg);
  CHECK(a.estimate.psi_hat == b.estimate.psi_hat);
  CHECK(a.estimate.standard_error == b.estimate.standard_error);
  CHECK(a.seed == 101);
  REQUIRE(a.folds.size() == 2);
  CHECK(a.folds[0].n_eval + a.folds[1].n_eval == d.n());
  CHECK(std::abs(a.folds[0].n_eval - a.folds[1].n_eval) <= 1);
  for (const auto& fold : a.folds) {
    CHECK(fold.lambda_h > 0.0);
    CHECK(fold.lambda_q > 0.0);
  }
  // pooled estimate lies between (or at) the two fold means
  const double lo = std::min(a.folds[0].psi, a.folds[1].psi);
  const double hi = std::max(a.folds[0].psi, a.folds[1].psi);
  CHECK(a.estimate.psi_hat >= lo - 1e-12);
  CHECK(a.estimate.psi_hat <= hi + 1e-12);

  const Dataset tiny = sample_proximal(dgp, 11, 5);
  CHECK_THROWS_AS(full_pipeline_functional(tiny, f, cfg), ConfigError);
}

TEST_CASE("pipeline config inference rejects malformed category data") {
  const DiscreteProximalDgp dgp = DiscreteProximalDgp::canonical();
  const Dataset d = sample_proximal(dgp, 100, 23);
  const FunctionalPipelineConfig cfg = proximal_pipeline_config(d, 3);
  CHECK(cfg.basis_h.dimension() == dgp.n_w());
  CHECK(cfg.basis_q.dimension() == dgp.n_z() * 2);
  CHECK(cfg.seed == 3);

  Dataset bad = d.with_column("A", Vec::Constant(d.n(), 2.5));
  CHECK_THROWS_AS(proximal_pipeline_config(bad, 3), ConfigError);
  Dataset no_y = Dataset({"Z", "W", "A"}, d.matrix_of({"Z", "W", "A"}), RoleMap{});
  CHECK_THROWS_AS(proximal_pipeline_config(no_y, 3), ConfigError);
}
