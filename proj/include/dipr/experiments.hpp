#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dipr/dgp.hpp"
#include "dipr/estimators.hpp"
#include "dipr/nuisance.hpp"
#include "dipr/operators.hpp"
#include "dipr/selection.hpp"
#include "dipr/types.hpp"

namespace dipr {

// --- small numerics used across the harness -------------------------------

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Ordinary least squares of log(y) on log(x); inputs must be positive.
SlopeFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> v);

// Composite-Simpson L2 norm over [0, 1] for one-dimensional bases; used to
// cross-check coefficient norms against direct integration.
double l2_norm_quadrature(const FunctionHandle& h, int points = 2001);

// Runs task(0..count-1) on `threads` workers. Tasks must write only to
// preallocated slots so the merged result is order-independent; the first
// exception, if any, is rethrown after all workers join.
void parallel_for(Index count, int threads, const std::function<void(Index)>& task);

// --- bias-structure probe ---------------------------------------------------

enum class RiskKind { debiased, plugin };
RiskKind risk_kind_from_string(const std::string& s);
std::string to_string(RiskKind k);

struct BiasProbePoint {
  double epsilon = 0.0;
  double bias = 0.0;       // population risk bias at this corruption level,
                           // computed term by term from moments of the model
  double structure = 0.0;  // closed-form value of the same bias:
                           //   debiased: ||(T - T_hat) h||^2 + 2 <(T - T_hat) h, r_hat - r0>
                           //   plugin:   2 <(T - T_hat) h, T h - r0> - ||(T - T_hat) h||^2
};

struct BiasProbeReport {
  std::vector<BiasProbePoint> points;
  int excluded = 0;  // nonpositive biases left out of the log-log fit
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double orientation = 1.0;  // sign applied to the corruption direction so the
                             // leading bias term is nonnegative
};

// Exact population bias of the estimated risk at a fixed h when the operator
// nuisance is corrupted by epsilon along a fixed unit-spectral-norm direction,
// with r_hat either exact (nullopt) or a supplied misspecified function.
// The series model makes every moment a finite inner product, so both the
// direct expectation and the closed form are enumerated without sampling.
BiasProbeReport bias_probe(const SeriesNpivDgp& dgp, const FunctionHandle& h,
                           const std::vector<double>& eps_grid, RiskKind risk,
                           const std::optional<FunctionHandle>& r_hat,
                           CorruptionMode mode, std::uint64_t seed);

// --- rate sweep -------------------------------------------------------------

enum class LambdaRule { oracle, cv, fixed };
LambdaRule lambda_rule_from_string(const std::string& s);
std::string to_string(LambdaRule r);

struct SweepConfig {
  Index dim_h = 8;  // cosine sieve size for h
  Index dim_q = 8;  // cosine sieve size for the conditioning side
  std::vector<Index> n_grid;
  int replications = 1;
  std::vector<FitMethod> methods{FitMethod::baseline, FitMethod::debiased};
  LambdaRule lambda_rule = LambdaRule::oracle;
  double lambda_fixed = 0.1;  // used by LambdaRule::fixed
  double oracle_c = 1.0;      // lambda = oracle_c * Delta^{1/min{5, beta+2}}
  double beta = 2.0;          // source exponent entering the oracle rule
  int iterations = 2;
  // Nuisance handling: fitted on the nuisance fold by default; exact uses the
  // model operator and r0 directly so corruption effects can be isolated.
  bool exact_nuisances = false;
  double corruption_c = 0.0;  // epsilon(n) = corruption_c * n^{-corruption_gamma}
  double corruption_gamma = 0.0;
  CorruptionMode corruption_mode = CorruptionMode::spectral;
  std::optional<double> ridge;
  std::array<double, 3> fractions{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  double grid_epsilon = 0.01;
  std::optional<int> grid_m;
  std::optional<double> grid_proxy;
  double hessian_floor = 0.0;
  int threads = 1;
  bool record_timings = false;  // runtime_ms stays 0 unless set, keeping
                                // outputs byte-reproducible
  std::uint64_t seed = 0;
};

struct SweepRecord {
  Index n = 0;
  int rep = 0;
  std::string method;
  double lambda = 0.0;
  double source_err = 0.0;  // ||h_hat - h0||, exact in basis coefficients
  double proj_err = 0.0;    // ||T (h_hat - h0)|| under the true operator
  double op_err = 0.0;      // ||T_hat - T|| spectral
  double r_err = 0.0;       // ||r_hat - r0||
  double runtime_ms = 0.0;
  // A failed replication keeps its row with NaN in the error fields.
};

struct MethodSlopes {
  std::string method;
  std::vector<double> median_source;  // per n-grid entry, NaN if all reps failed
  std::vector<double> median_proj;
  double source_slope = std::numeric_limits<double>::quiet_NaN();
  double proj_slope = std::numeric_limits<double>::quiet_NaN();
};

struct RateSweepReport {
  std::vector<SweepRecord> records;
  std::vector<MethodSlopes> slopes;
  int failures = 0;
  std::vector<std::string> failure_notes;
};

// Monte Carlo sweep across the n grid: per replication, sample, fit nuisances
// (or take them exactly), optionally corrupt the operator, fit the estimator
// at the rule-selected lambda, and record errors against the attached truth.
// Replication seeds derive from (seed, n, rep), so records are independent of
// scheduling; medians are used for slope fits (heavy right tails near
// convexity failures).
RateSweepReport rate_sweep(const SeriesNpivDgp& dgp, const SweepConfig& config);

void write_sweep_csv(const std::string& path, const std::vector<SweepRecord>& records);
std::vector<SweepRecord> read_sweep_csv(const std::string& path);

// JSON mirror of the CSV schema (array of objects, same field names).
nlohmann::json sweep_to_json(const std::vector<SweepRecord>& records);
std::vector<SweepRecord> sweep_from_json(const nlohmann::json& j);

// --- alpha-error-condition probes -------------------------------------------

struct AlphaProbeResult {
  double alpha = std::numeric_limits<double>::quiet_NaN();
  bool feasible = false;
  std::vector<double> margins;  // ||Te||^2 - sum_i tilde\sigma_i^{alpha beta} <e, phi_i>^2
  std::string note;             // set when no grid value works
};

// Smallest alpha >= 2/beta on the grid such that, for every supplied error
// function e (coefficients on the singular basis),
//   sum_i tilde\sigma_i^{alpha beta} <e, phi_i>^2 <= ||Te||^2,
// where tilde\sigma are the singular values normalized by the largest. With
// that normalization alpha = 2/beta is always sufficient when the top
// component carries error mass, which is why the search starts there.
AlphaProbeResult alpha_probe(const std::vector<FunctionHandle>& errors,
                             const SingularSystem& sys, double beta,
                             const std::vector<double>& alpha_grid);

// General mu-sequence version: feasibility of
//   sum_i mu_i^alpha <e_k, phi_i>^2 <= projected_sq[k]   for all k,
// with a per-error mu vector (positive, at most one, nonincreasing).
AlphaProbeResult alpha_probe_mu(const std::vector<Vec>& error_coeffs,
                                const std::vector<Vec>& mu,
                                const std::vector<double>& projected_sq,
                                const std::vector<double>& alpha_grid);

}  // namespace dipr
