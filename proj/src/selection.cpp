#include "dipr/selection.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "dipr/rng.hpp"

namespace dipr {

FoldPlan split(Index n, const std::array<double, 3>& fractions, std::uint64_t seed) {
  double sum = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0)) throw ConfigError("fold fractions must be positive");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("fold fractions must sum to one");
  if (n < 3) throw ConfigError("need at least three rows to split");

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng = substream(seed, {5});
  for (Index i = n - 1; i > 0; --i)
    std::swap(order[static_cast<std::size_t>(i)],
              order[rng.uniform_int(static_cast<std::uint64_t>(i + 1))]);

  const auto c1 = static_cast<std::size_t>(std::llround(fractions[0] * n));
  const auto c2 = static_cast<std::size_t>(std::llround((fractions[0] + fractions[1]) * n));
  FoldPlan plan;
  plan.seed = seed;
  plan.candidate_train.assign(order.begin(), order.begin() + c1);
  plan.nuisance_train.assign(order.begin() + c1, order.begin() + c2);
  plan.validation.assign(order.begin() + c2, order.end());
  if (plan.candidate_train.empty() || plan.nuisance_train.empty() ||
      plan.validation.empty())
    throw ConfigError("a fold is empty; adjust fractions or sample size");
  return plan;
}

LambdaGrid make_grid(Index n, double proxy, double eps, std::optional<int> m_override) {
  if (!(proxy > 0.0 && proxy < 1.0))
    throw ConfigError("grid proxy must lie in (0, 1)");
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("grid epsilon must lie in (0, 1)");
  const int m = m_override ? *m_override
                           : static_cast<int>(std::min<Index>(n, 64));
  if (m < 1) throw ConfigError("grid size must be positive");
  LambdaGrid grid;
  grid.b = std::pow(proxy, 1.0 - eps);
  grid.big_b = std::pow(proxy, 1.0 / 3.0);
  grid.values.resize(static_cast<std::size_t>(m));
  for (int i = 1; i <= m; ++i)
    grid.values[static_cast<std::size_t>(i - 1)] =
        grid.b + (static_cast<double>(i) / m) * grid.big_b;
  return grid;
}

SelectionResult cv_select(const std::vector<FunctionHandle>& candidates,
                          const Dataset& validation, const SieveOperator& t_hat,
                          const FunctionHandle& r_hat) {
  if (candidates.empty()) throw ConfigError("cv_select: no candidates");
  SelectionResult res;
  res.risks.reserve(candidates.size());
  for (const auto& h : candidates)
    res.risks.push_back(debiased_risk(h, validation, t_hat, r_hat));
  res.index = 0;
  for (std::size_t i = 1; i < res.risks.size(); ++i)
    if (res.risks[i] < res.risks[static_cast<std::size_t>(res.index)])
      res.index = static_cast<int>(i);
  return res;
}

PipelineResult fit_cv_pipeline(const Dataset& data, const PipelineConfig& config) {
  const FoldPlan plan = split(data.n(), config.fractions, config.seed);
  const Dataset cand_data = data.subset(plan.candidate_train);
  const Dataset nuis_data = data.subset(plan.nuisance_train);
  const Dataset val_data = data.subset(plan.validation);

  NuisanceFit nuisances =
      fit_nuisances(nuis_data, config.basis_h, config.basis_q, config.ridge);

  const double proxy =
      config.grid_proxy
          ? *config.grid_proxy
          : std::sqrt(static_cast<double>(config.basis_h.dimension()) /
                      static_cast<double>(cand_data.n()));
  const LambdaGrid grid =
      make_grid(cand_data.n(), proxy, config.grid_epsilon, config.grid_m);

  const RiskQuadratic train_q =
      config.method == FitMethod::debiased
          ? assemble_debiased_risk(cand_data, nuisances.t_hat, nuisances.r_hat)
          : assemble_plugin_risk(cand_data, nuisances.t_hat);

  std::vector<FunctionHandle> candidates;
  std::vector<std::string> failures;
  for (double lambda : grid.values) {
    FitConfig fc;
    fc.lambda = lambda;
    fc.iterations = config.iterations;
    fc.hessian_floor = config.hessian_floor;
    fc.method = config.method;
    try {
      candidates.push_back(solve_iterated(train_q, fc).h_hat);
      failures.emplace_back();
    } catch (const NumericalError& e) {
      candidates.push_back(zero_function(config.basis_h));
      failures.emplace_back(e.what());
    }
  }

  // Validation risk through the assembled quadratic; failed candidates are
  // inadmissible.
  const RiskQuadratic val_q =
      assemble_debiased_risk(val_data, nuisances.t_hat, nuisances.r_hat);
  std::vector<double> risks(candidates.size(),
                            std::numeric_limits<double>::infinity());
  int best = -1;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!failures[i].empty()) continue;
    const Vec& c = candidates[i].coeffs();
    risks[i] = c.dot(val_q.H * c) + val_q.ell.dot(c) + val_q.k0;
    if (best < 0 || risks[i] < risks[static_cast<std::size_t>(best)])
      best = static_cast<int>(i);
  }
  if (best < 0) throw NumericalError("no admissible candidate on the lambda grid");

  PipelineResult result{candidates[static_cast<std::size_t>(best)],
                        grid,
                        std::move(risks),
                        std::move(candidates),
                        std::move(failures),
                        best,
                        grid.values[static_cast<std::size_t>(best)],
                        {static_cast<Index>(plan.candidate_train.size()),
                         static_cast<Index>(plan.nuisance_train.size()),
                         static_cast<Index>(plan.validation.size())},
                        config.seed,
                        std::move(nuisances),
                        std::nullopt};

  if (config.truth) {
    if (config.truth->h0.basis() != config.basis_h)
      throw ConfigError("truth h0 must live on the candidate basis");
    OracleErrors oracle;
    for (const auto& h : result.candidates) {
      const FunctionHandle diff(config.basis_h, h.coeffs() - config.truth->h0.coeffs());
      oracle.source_err.push_back(diff.l2_norm());
      oracle.proj_err.push_back(apply(config.truth->sys, diff).l2_norm());
    }
    result.oracle = std::move(oracle);
  }
  return result;
}

}  // namespace dipr
