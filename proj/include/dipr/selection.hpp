#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dipr/dataset.hpp"
#include "dipr/estimators.hpp"
#include "dipr/nuisance.hpp"
#include "dipr/operators.hpp"
#include "dipr/types.hpp"

namespace dipr {

// Disjoint index sets for candidate training, nuisance training and
// validation, drawn by a seeded shuffle.
struct FoldPlan {
  std::vector<Index> candidate_train;
  std::vector<Index> nuisance_train;
  std::vector<Index> validation;
  std::uint64_t seed = 0;
};

FoldPlan split(Index n, const std::array<double, 3>& fractions, std::uint64_t seed);

// lambda_i = b + (i/M) B for i = 1..M with b = proxy^(1-eps), B = proxy^(1/3).
struct LambdaGrid {
  double b = 0.0;
  double big_b = 0.0;
  std::vector<double> values;
};

// M defaults to min(n, 64).
LambdaGrid make_grid(Index n, double proxy, double eps = 0.01,
                     std::optional<int> m_override = std::nullopt);

struct SelectionResult {
  int index = -1;
  std::vector<double> risks;
};

// Argmin of the debiased validation risk; ties resolve to the smallest index.
SelectionResult cv_select(const std::vector<FunctionHandle>& candidates,
                          const Dataset& validation, const SieveOperator& t_hat,
                          const FunctionHandle& r_hat);

// Optional ground truth carried through the pipeline for oracle diagnostics.
struct TruthInfo {
  FunctionHandle h0;
  SingularSystem sys;
};

struct PipelineConfig {
  BasisSpec basis_h;
  BasisSpec basis_q;
  std::array<double, 3> fractions{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  double grid_epsilon = 0.01;
  std::optional<double> grid_proxy;  // default sqrt(J / candidate fold size)
  std::optional<int> grid_m;
  std::optional<double> ridge;
  int iterations = 2;
  FitMethod method = FitMethod::debiased;
  double hessian_floor = 0.0;
  std::uint64_t seed = 0;
  std::optional<TruthInfo> truth;
};

struct OracleErrors {
  std::vector<double> source_err;  // ||h_i - h0||
  std::vector<double> proj_err;    // ||T (h_i - h0)||
};

struct PipelineResult {
  FunctionHandle h_hat;
  LambdaGrid grid;
  std::vector<double> risks;  // validation risk per candidate; +inf if failed
  std::vector<FunctionHandle> candidates;
  std::vector<std::string> failures;  // empty string when the fit succeeded
  int selected_index = -1;
  double selected_lambda = 0.0;
  std::array<Index, 3> fold_sizes{0, 0, 0};
  std::uint64_t seed = 0;
  NuisanceFit nuisances;
  std::optional<OracleErrors> oracle;
};

// Full split -> nuisance fit -> per-lambda candidate fits -> validation
// selection pipeline. Nuisances come from the nuisance fold only; candidates
// never see validation rows.
PipelineResult fit_cv_pipeline(const Dataset& data, const PipelineConfig& config);

}  // namespace dipr
