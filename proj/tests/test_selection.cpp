#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "dipr/dgp.hpp"
#include "dipr/selection.hpp"

using namespace dipr;

namespace {

SeriesNpivDgp series3() {
  Vec s(3);
  s << 0.4, 0.2, 0.1;
  Vec h(4);
  h << 1.0, 0.5, -0.25, 0.125;
  return SeriesNpivDgp(s, FunctionHandle(BasisSpec::cosine(4), h), 0.1, 0.5);
}

PipelineConfig series_config(std::uint64_t seed) {
  PipelineConfig cfg;
  cfg.basis_h = BasisSpec::cosine(4);
  cfg.basis_q = BasisSpec::cosine(4);
  cfg.seed = seed;
  return cfg;
}

// Perturb the listed rows while keeping them in-domain and non-degenerate.
Dataset scramble_rows(const Dataset& d, const std::vector<Index>& rows) {
  Dataset out = d;
  for (Index r : rows) {
    auto& w = out.values()(r, d.column_index("W"));
    auto& z = out.values()(r, d.column_index("Z"));
    w = std::fmod(w + 0.37, 1.0);
    z = std::fmod(z + 0.11, 1.0);
    out.values()(r, d.column_index("Y")) += 0.5;
  }
  return out;
}

bool same_candidates(const PipelineResult& a, const PipelineResult& b) {
  if (a.candidates.size() != b.candidates.size()) return false;
  for (std::size_t i = 0; i < a.candidates.size(); ++i)
    if ((a.candidates[i].coeffs() - b.candidates[i].coeffs()).norm() != 0.0)
      return false;
  return true;
}

}  // namespace

TEST_CASE("split produces a deterministic disjoint partition") {
  const FoldPlan p = split(100, {0.5, 0.3, 0.2}, 11);
  CHECK(p.candidate_train.size() == 50);
  CHECK(p.nuisance_train.size() == 30);
  CHECK(p.validation.size() == 20);
  std::set<Index> all;
  for (const auto* part : {&p.candidate_train, &p.nuisance_train, &p.validation})
    all.insert(part->begin(), part->end());
  CHECK(all.size() == 100);
  CHECK(*all.begin() == 0);
  CHECK(*all.rbegin() == 99);

  const FoldPlan q = split(100, {0.5, 0.3, 0.2}, 11);
  CHECK(p.candidate_train == q.candidate_train);
  CHECK(p.validation == q.validation);
  const FoldPlan r = split(100, {0.5, 0.3, 0.2}, 12);
  CHECK(p.candidate_train != r.candidate_train);
}

TEST_CASE("split validates its inputs") {
  CHECK_THROWS_AS(split(100, {0.5, 0.5, 0.0}, 1), ConfigError);
  CHECK_THROWS_AS(split(100, {0.5, 0.3, 0.3}, 1), ConfigError);
  CHECK_THROWS_AS(split(2, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 1), ConfigError);
  CHECK_THROWS_AS(split(10, {0.98, 0.01, 0.01}, 1), ConfigError);  // empty fold
}

TEST_CASE("lambda grid follows the proxy powers") {
  const double proxy = 0.25;
  const LambdaGrid g = make_grid(1000, proxy);
  CHECK(g.b == doctest::Approx(std::pow(proxy, 0.99)));
  CHECK(g.big_b == doctest::Approx(std::pow(proxy, 1.0 / 3.0)));
  REQUIRE(g.values.size() == 64);  // min(n, 64)
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    CHECK(g.values[i] ==
          doctest::Approx(g.b + (double(i + 1) / 64.0) * g.big_b));
    if (i > 0) CHECK(g.values[i] > g.values[i - 1]);
  }
  CHECK(make_grid(10, proxy).values.size() == 10);
  CHECK(make_grid(1000, proxy, 0.01, 5).values.size() == 5);
  CHECK_THROWS_AS(make_grid(1000, 1.5), ConfigError);
  CHECK_THROWS_AS(make_grid(1000, 0.25, 2.0), ConfigError);
  CHECK_THROWS_AS(make_grid(1000, 0.25, 0.01, 0), ConfigError);
}

TEST_CASE("validation risk picks the best candidate; ties go to the first") {
  const SeriesNpivDgp dgp = series3();
  const Dataset d = sample_npiv(dgp, 5000, 47);
  const SingularSystem sys = true_operator_npiv(dgp, 4);
  const SieveOperator t = to_sieve(sys);
  const FunctionHandle r = apply(sys, dgp.h0);
  Vec bad = dgp.h0.coeffs();
  bad[1] += 1.0;
  const std::vector<FunctionHandle> candidates{FunctionHandle(dgp.h0.basis(), bad),
                                               dgp.h0, dgp.h0};
  const SelectionResult sel = cv_select(candidates, d, t, r);
  REQUIRE(sel.risks.size() == 3);
  CHECK(sel.risks[1] < sel.risks[0]);
  CHECK(sel.risks[1] == sel.risks[2]);
  CHECK(sel.index == 1);
  CHECK_THROWS_AS(cv_select({}, d, t, r), ConfigError);
}

TEST_CASE("pipeline output is internally consistent and deterministic") {
  const SeriesNpivDgp dgp = series3();
  const Dataset d = sample_npiv(dgp, 900, 3);
  const PipelineConfig cfg = series_config(21);
  const PipelineResult res = fit_cv_pipeline(d, cfg);

  const FoldPlan plan = split(d.n(), cfg.fractions, cfg.seed);
  CHECK(res.fold_sizes[0] == Index(plan.candidate_train.size()));
  CHECK(res.fold_sizes[1] == Index(plan.nuisance_train.size()));
  CHECK(res.fold_sizes[2] == Index(plan.validation.size()));
  CHECK(res.seed == 21);
  CHECK(res.grid.values.size() == 64);
  CHECK(res.candidates.size() == res.grid.values.size());
  CHECK(res.failures.size() == res.candidates.size());
  CHECK(res.risks.size() == res.candidates.size());
  REQUIRE(res.selected_index >= 0);
  CHECK(res.selected_lambda == res.grid.values[std::size_t(res.selected_index)]);
  CHECK((res.h_hat.coeffs() -
         res.candidates[std::size_t(res.selected_index)].coeffs())
            .norm() == 0.0);
  for (std::size_t i = 0; i < res.risks.size(); ++i)
    if (res.failures[i].empty())
      CHECK(res.risks[std::size_t(res.selected_index)] <= res.risks[i]);

  const PipelineResult again = fit_cv_pipeline(d, cfg);
  CHECK(same_candidates(res, again));
  CHECK(res.selected_index == again.selected_index);
}

TEST_CASE("candidate fits cannot see validation rows") {
  const SeriesNpivDgp dgp = series3();
  const Dataset d = sample_npiv(dgp, 900, 5);
  const PipelineConfig cfg = series_config(33);
  const FoldPlan plan = split(d.n(), cfg.fractions, cfg.seed);

  const PipelineResult base = fit_cv_pipeline(d, cfg);
  const PipelineResult poked_val =
      fit_cv_pipeline(scramble_rows(d, plan.validation), cfg);
  CHECK(same_candidates(base, poked_val));  // training untouched
  CHECK((base.nuisances.t_hat.matrix - poked_val.nuisances.t_hat.matrix).norm() == 0.0);
  bool some_risk_changed = false;
  for (std::size_t i = 0; i < base.risks.size(); ++i)
    if (base.risks[i] != poked_val.risks[i]) some_risk_changed = true;
  CHECK(some_risk_changed);

  const PipelineResult poked_cand =
      fit_cv_pipeline(scramble_rows(d, plan.candidate_train), cfg);
  CHECK(!same_candidates(base, poked_cand));

  const PipelineResult poked_nuis =
      fit_cv_pipeline(scramble_rows(d, plan.nuisance_train), cfg);
  CHECK((base.nuisances.t_hat.matrix - poked_nuis.nuisances.t_hat.matrix).norm() > 0.0);
}

TEST_CASE("oracle errors are the exact distances to the supplied truth") {
  const SeriesNpivDgp dgp = series3();
  const Dataset d = sample_npiv(dgp, 900, 13);
  PipelineConfig cfg = series_config(55);
  cfg.grid_m = 7;
  cfg.truth = TruthInfo{dgp.h0, true_operator_npiv(dgp, 4)};
  const PipelineResult res = fit_cv_pipeline(d, cfg);
  REQUIRE(res.oracle.has_value());
  REQUIRE(res.oracle->source_err.size() == res.candidates.size());
  REQUIRE(res.oracle->proj_err.size() == res.candidates.size());
  const Vec sig = cfg.truth->sys.sigmas;
  for (std::size_t i = 0; i < res.candidates.size(); ++i) {
    const Vec diff = res.candidates[i].coeffs() - dgp.h0.coeffs();
    CHECK(res.oracle->source_err[i] == doctest::Approx(diff.norm()));
    CHECK(res.oracle->proj_err[i] ==
          doctest::Approx((sig.array() * diff.array()).matrix().norm()));
    CHECK(res.oracle->proj_err[i] <= res.oracle->source_err[i] + 1e-12);
  }

  PipelineConfig bad = cfg;
  bad.truth = TruthInfo{FunctionHandle(BasisSpec::cosine(3), Vec::Zero(3)),
                        true_operator_npiv(dgp, 4)};
  CHECK_THROWS_AS(fit_cv_pipeline(d, bad), ConfigError);
}

TEST_CASE("an impossible hessian floor fails every candidate loudly") {
  const SeriesNpivDgp dgp = series3();
  const Dataset d = sample_npiv(dgp, 300, 71);
  PipelineConfig cfg = series_config(7);
  cfg.grid_m = 4;
  cfg.hessian_floor = 1e9;
  CHECK_THROWS_AS(fit_cv_pipeline(d, cfg), NumericalError);

  // with a sane floor the same setup succeeds and reports no failures
  cfg.hessian_floor = 0.0;
  const PipelineResult res = fit_cv_pipeline(d, cfg);
  for (const auto& f : res.failures) CHECK(f.empty());
}
