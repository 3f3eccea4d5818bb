// Command-line front end: simulate / fit / cv / functional / sweep / rates.
// stdout carries only the result (a path, or the rate lines); logs go to
// stderr. Exit codes: 0 success, 2 configuration, 3 I/O, 4 numerical failure.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dipr/dgp.hpp"
#include "dipr/experiments.hpp"
#include "dipr/functionals.hpp"
#include "dipr/io.hpp"
#include "dipr/rational.hpp"
#include "dipr/selection.hpp"
#include "dipr/types.hpp"

namespace {

using dipr::json;

dipr::Vec vec_from_json(const json& a, const std::string& key) {
  if (!a.is_array() || a.empty()) {
    throw dipr::ConfigError("config key '" + key + "' must be a nonempty array");
  }
  dipr::Vec v(static_cast<dipr::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    v[static_cast<dipr::Index>(i)] = a[i].get<double>();
  }
  return v;
}

dipr::Mat mat_from_json(const json& a, const std::string& key) {
  if (!a.is_array() || a.empty() || !a[0].is_array()) {
    throw dipr::ConfigError("config key '" + key + "' must be an array of rows");
  }
  const auto rows = static_cast<dipr::Index>(a.size());
  const auto cols = static_cast<dipr::Index>(a[0].size());
  dipr::Mat m(rows, cols);
  for (dipr::Index r = 0; r < rows; ++r) {
    const json& row = a[static_cast<std::size_t>(r)];
    if (static_cast<dipr::Index>(row.size()) != cols) {
      throw dipr::ConfigError("config key '" + key + "' has ragged rows");
    }
    for (dipr::Index c = 0; c < cols; ++c) {
      m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

std::vector<double> to_std(const dipr::Vec& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

dipr::SeriesNpivDgp series_from_json(const json& j) {
  const dipr::Vec sigmas = vec_from_json(j.at("sigmas"), "sigmas");
  const double noise_sd = j.value("noise_sd", 0.1);
  const double endogeneity = j.value("endogeneity", 0.5);
  const json& h = j.at("h0");
  if (h.contains("coeffs")) {
    const dipr::Vec c = vec_from_json(h.at("coeffs"), "h0.coeffs");
    return dipr::SeriesNpivDgp(
        sigmas, dipr::FunctionHandle(dipr::BasisSpec::cosine(c.size()), c),
        noise_sd, endogeneity);
  }
  const double beta = h.at("beta").get<double>();
  const dipr::Vec w = vec_from_json(h.at("w"), "h0.w");
  if (w.size() > sigmas.size() + 1) {
    throw dipr::ConfigError("h0.w is longer than the operator rank");
  }
  dipr::Vec s(w.size());
  s[0] = 1.0;
  for (dipr::Index i = 1; i < w.size(); ++i) s[i] = sigmas[i - 1];
  const dipr::BasisSpec basis = dipr::BasisSpec::cosine(w.size());
  const dipr::SingularSystem sys(s, basis, basis);
  const dipr::FunctionHandle h0 =
      dipr::make_source_solution(sys, beta, dipr::FunctionHandle(basis, w));
  return dipr::SeriesNpivDgp(sigmas, h0, noise_sd, endogeneity);
}

dipr::SeriesNpivDgp default_series() {
  const dipr::Index m = 11;
  dipr::Vec sigmas(m);
  double v = 0.2;
  for (dipr::Index i = 0; i < m; ++i) {
    sigmas[i] = v;
    v *= 0.45;
  }
  dipr::Vec w(m + 1);
  for (dipr::Index j = 0; j < w.size(); ++j) w[j] = std::pow(0.8, double(j));
  w /= w.norm();
  dipr::Vec s(m + 1);
  s[0] = 1.0;
  s.tail(m) = sigmas;
  const dipr::BasisSpec basis = dipr::BasisSpec::cosine(m + 1);
  const dipr::SingularSystem sys(s, basis, basis);
  const dipr::FunctionHandle h0 =
      dipr::make_source_solution(sys, 2.0, dipr::FunctionHandle(basis, w));
  return dipr::SeriesNpivDgp(sigmas, h0, 0.1, 0.5);
}

dipr::DiscreteProximalDgp proximal_from_json(const json& j) {
  return dipr::DiscreteProximalDgp(
      vec_from_json(j.at("p_u"), "p_u"),
      mat_from_json(j.at("p_z_given_u"), "p_z_given_u"),
      mat_from_json(j.at("p_w_given_u"), "p_w_given_u"),
      mat_from_json(j.at("p_a_given_u"), "p_a_given_u"),
      mat_from_json(j.at("y_mean"), "y_mean"), j.value("y_sd", 0.5),
      j.value("a_level", 1));
}

dipr::BasisSpec make_basis(const std::string& family, dipr::Index dim) {
  if (family == "cosine") return dipr::BasisSpec::cosine(dim);
  if (family == "legendre") return dipr::BasisSpec::legendre(dim);
  throw dipr::ConfigError("basis must be cosine or legendre, got " + family);
}

std::array<double, 3> fractions_from(const std::vector<double>& f) {
  if (f.size() != 3) throw dipr::ConfigError("folds need exactly 3 fractions");
  return {f[0], f[1], f[2]};
}

dipr::Rational parse_rational(const std::string& text, const std::string& name) {
  try {
    const auto slash = text.find('/');
    if (slash != std::string::npos) {
      const long long num = std::stoll(text.substr(0, slash));
      const long long den = std::stoll(text.substr(slash + 1));
      return dipr::Rational(num, den);
    }
    const double x = std::stod(text);
    return dipr::rational_from_double(x, 64);
  } catch (const std::invalid_argument&) {
    throw dipr::ConfigError(name + " must be a number or a fraction, got " + text);
  } catch (const std::out_of_range&) {
    throw dipr::ConfigError(name + " is out of range: " + text);
  }
}

// --- subcommand payloads ----------------------------------------------------

struct SimulateArgs {
  std::string dgp = "series-npiv";
  long long n = 0;
  std::uint64_t seed = 0;
  std::string config_path;
  std::string out_path;
  std::string roles_path;
  std::string truth_path;
};

int run_simulate(const SimulateArgs& a) {
  const std::string truth_path =
      a.truth_path.empty() ? a.out_path + ".truth.json" : a.truth_path;
  json config;
  if (!a.config_path.empty()) config = dipr::read_json_file(a.config_path);

  if (a.dgp == "series-npiv") {
    const dipr::SeriesNpivDgp dgp =
        config.is_null() ? default_series() : series_from_json(config);
    const dipr::Dataset data = dipr::sample_npiv(dgp, a.n, a.seed);
    dipr::write_csv(data, a.out_path);
    dipr::write_roles(data.roles(), a.roles_path);
    json truth;
    truth["schema_version"] = 1;
    truth["dgp"] = "series-npiv";
    truth["sigmas"] = to_std(dgp.sigmas);
    truth["h0"] = dipr::function_to_json(dgp.h0);
    truth["noise_sd"] = dgp.noise_sd;
    truth["endogeneity"] = dgp.endogeneity;
    dipr::write_json_file(truth, truth_path);
  } else if (a.dgp == "discrete-proximal") {
    const dipr::DiscreteProximalDgp dgp = config.is_null()
                                              ? dipr::DiscreteProximalDgp::canonical()
                                              : proximal_from_json(config);
    const dipr::Dataset data = dipr::sample_proximal(dgp, a.n, a.seed);
    dipr::write_csv(data, a.out_path);
    dipr::write_roles(data.roles(), a.roles_path);
    const dipr::Bridges bridges = dipr::true_bridges(dgp);
    json truth;
    truth["schema_version"] = 1;
    truth["dgp"] = "discrete-proximal";
    truth["a_level"] = dgp.a_level;
    truth["psi0"] = dgp.gformula();
    truth["h0"] = dipr::function_to_json(bridges.h0);
    truth["q0"] = dipr::function_to_json(bridges.q0);
    dipr::write_json_file(truth, truth_path);
  } else {
    throw dipr::ConfigError("dgp must be series-npiv or discrete-proximal, got " +
                            a.dgp);
  }
  std::cout << a.out_path << "\n";
  return 0;
}

struct FitArgs {
  std::string data_path, roles_path, out_path;
  std::string method = "debiased";
  std::string basis = "cosine";
  double lambda = 0.0;
  int iterations = 2;
  long long dim_h = 8, dim_q = 8;
  std::vector<double> folds{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  double ridge = -1.0;  // negative = default rule
  double hessian_floor = 0.0;
  std::uint64_t seed = 0;
};

int run_fit(const FitArgs& a) {
  const dipr::Dataset data = dipr::load_dataset(a.data_path, a.roles_path);
  const dipr::BasisSpec basis_h = make_basis(a.basis, a.dim_h);
  const dipr::BasisSpec basis_q = make_basis(a.basis, a.dim_q);
  const dipr::FoldPlan plan = dipr::split(data.n(), fractions_from(a.folds), a.seed);
  const std::optional<double> ridge =
      a.ridge < 0.0 ? std::nullopt : std::optional<double>(a.ridge);
  const dipr::NuisanceFit nuisances =
      dipr::fit_nuisances(data.subset(plan.nuisance_train), basis_h, basis_q, ridge);

  dipr::FitConfig fc;
  fc.lambda = a.lambda;
  fc.iterations = a.iterations;
  fc.method = dipr::fit_method_from_string(a.method);
  fc.hessian_floor = a.hessian_floor;
  const dipr::FitResult fit =
      dipr::fit(data.subset(plan.candidate_train), nuisances, fc);

  json out;
  out["schema_version"] = 1;
  out["method"] = a.method;
  out["lambda"] = a.lambda;
  out["iterations"] = a.iterations;
  out["seed"] = a.seed;
  out["fold_sizes"] = {plan.candidate_train.size(), plan.nuisance_train.size(),
                       plan.validation.size()};
  out["basis"] = dipr::basis_to_json(fit.h_hat.basis());
  out["coefficients"] = to_std(fit.h_hat.coeffs());
  out["objective_value"] = fit.objective_value;
  out["hessian_min_eig"] = fit.hessian_min_eig;
  json traj = json::array();
  for (const dipr::Vec& c : fit.trajectory) traj.push_back(to_std(c));
  out["trajectory"] = traj;
  out["nuisance"] = {{"ridge", nuisances.ridge},
                     {"condition_number", nuisances.condition_number}};
  dipr::write_json_file(out, a.out_path);
  std::cout << a.out_path << "\n";
  return 0;
}

struct CvArgs {
  std::string data_path, roles_path, grid_config_path, out_path;
  std::uint64_t seed = 0;
};

int run_cv(const CvArgs& a) {
  const dipr::Dataset data = dipr::load_dataset(a.data_path, a.roles_path);
  const json cfg = dipr::read_json_file(a.grid_config_path);

  dipr::PipelineConfig pc;
  const std::string family = cfg.value("basis", std::string("cosine"));
  pc.basis_h = make_basis(family, cfg.value("dim_h", 8));
  pc.basis_q = make_basis(family, cfg.value("dim_q", 8));
  if (cfg.contains("fractions")) {
    const auto f = cfg.at("fractions").get<std::vector<double>>();
    pc.fractions = fractions_from(f);
  }
  pc.grid_epsilon = cfg.value("grid_epsilon", 0.01);
  if (cfg.contains("grid_proxy")) pc.grid_proxy = cfg.at("grid_proxy").get<double>();
  if (cfg.contains("grid_m")) pc.grid_m = cfg.at("grid_m").get<int>();
  if (cfg.contains("ridge")) pc.ridge = cfg.at("ridge").get<double>();
  pc.iterations = cfg.value("iterations", 2);
  pc.method = dipr::fit_method_from_string(cfg.value("method", std::string("debiased")));
  pc.hessian_floor = cfg.value("hessian_floor", 0.0);
  pc.seed = cfg.value("seed", a.seed);

  const dipr::PipelineResult res = dipr::fit_cv_pipeline(data, pc);

  json out;
  out["schema_version"] = 1;
  out["seed"] = res.seed;
  out["fold_sizes"] = {res.fold_sizes[0], res.fold_sizes[1], res.fold_sizes[2]};
  out["grid"] = {{"b", res.grid.b}, {"B", res.grid.big_b}, {"values", res.grid.values}};
  out["risks"] = res.risks;
  out["failures"] = res.failures;
  out["selected_index"] = res.selected_index;
  out["selected_lambda"] = res.selected_lambda;
  out["basis"] = dipr::basis_to_json(res.h_hat.basis());
  out["coefficients"] = to_std(res.h_hat.coeffs());
  json cands = json::array();
  for (const dipr::FunctionHandle& c : res.candidates) cands.push_back(to_std(c.coeffs()));
  out["candidates"] = cands;
  out["nuisance"] = {{"ridge", res.nuisances.ridge},
                     {"condition_number", res.nuisances.condition_number}};
  if (res.oracle) {
    out["oracle"] = {{"source_err", res.oracle->source_err},
                     {"proj_err", res.oracle->proj_err}};
  }
  dipr::write_json_file(out, a.out_path);
  std::cout << a.out_path << "\n";
  return 0;
}

struct FunctionalArgs {
  std::string data_path, out_path;
  std::string design = "proximal";
  int a_level = 1;
  std::uint64_t seed = 0;
};

int run_functional(const FunctionalArgs& a) {
  if (a.design != "proximal") {
    throw dipr::ConfigError("design must be proximal, got " + a.design);
  }
  const dipr::Dataset data = dipr::read_csv(a.data_path);
  const dipr::MomentFunctional f = dipr::proximal_functional(a.a_level);
  const dipr::FunctionalPipelineConfig config =
      dipr::proximal_pipeline_config(data, a.seed);
  const dipr::FunctionalPipelineResult res =
      dipr::full_pipeline_functional(data, f, config);

  json out;
  out["schema_version"] = 1;
  out["design"] = a.design;
  out["a"] = a.a_level;
  out["psi_hat"] = res.estimate.psi_hat;
  out["se"] = res.estimate.standard_error;
  out["ci95"] = {res.estimate.ci_lo, res.estimate.ci_hi};
  out["n"] = static_cast<long long>(res.estimate.n);
  json folds = json::array();
  for (std::size_t k = 0; k < res.folds.size(); ++k) {
    folds.push_back({{"fold", k},
                     {"n_eval", static_cast<long long>(res.folds[k].n_eval)},
                     {"psi", res.folds[k].psi},
                     {"lambda_h", res.folds[k].lambda_h},
                     {"lambda_q", res.folds[k].lambda_q}});
  }
  out["per_fold"] = folds;
  out["seed"] = res.seed;
  dipr::write_json_file(out, a.out_path);
  std::cout << a.out_path << "\n";
  return 0;
}

struct SweepArgs {
  std::string config_path, out_path;
  int threads = 0;  // 0 = take from config
};

int run_sweep(const SweepArgs& a) {
  const json cfg = dipr::read_json_file(a.config_path);
  const dipr::SeriesNpivDgp dgp = series_from_json(cfg.at("dgp"));

  dipr::SweepConfig sc;
  sc.dim_h = cfg.value("dim_h", 8);
  sc.dim_q = cfg.value("dim_q", 8);
  for (const auto& n : cfg.at("n_grid")) {
    sc.n_grid.push_back(n.get<long long>());
  }
  sc.replications = cfg.value("replications", 1);
  if (cfg.contains("methods")) {
    sc.methods.clear();
    for (const auto& m : cfg.at("methods")) {
      sc.methods.push_back(dipr::fit_method_from_string(m.get<std::string>()));
    }
  }
  sc.lambda_rule = dipr::lambda_rule_from_string(cfg.value("lambda_rule", std::string("oracle")));
  sc.lambda_fixed = cfg.value("lambda_fixed", 0.1);
  sc.oracle_c = cfg.value("oracle_c", 1.0);
  sc.beta = cfg.value("beta", 2.0);
  sc.iterations = cfg.value("iterations", 2);
  sc.exact_nuisances = cfg.value("exact_nuisances", false);
  sc.corruption_c = cfg.value("corruption_c", 0.0);
  sc.corruption_gamma = cfg.value("corruption_gamma", 0.0);
  sc.corruption_mode =
      dipr::corruption_mode_from_string(cfg.value("corruption_mode", std::string("spectral")));
  if (cfg.contains("ridge")) sc.ridge = cfg.at("ridge").get<double>();
  if (cfg.contains("fractions")) {
    sc.fractions = fractions_from(cfg.at("fractions").get<std::vector<double>>());
  }
  sc.grid_epsilon = cfg.value("grid_epsilon", 0.01);
  if (cfg.contains("grid_m")) sc.grid_m = cfg.at("grid_m").get<int>();
  if (cfg.contains("grid_proxy")) sc.grid_proxy = cfg.at("grid_proxy").get<double>();
  sc.hessian_floor = cfg.value("hessian_floor", 0.0);
  sc.threads = a.threads > 0 ? a.threads : cfg.value("threads", 1);
  sc.record_timings = cfg.value("record_timings", false);
  sc.seed = cfg.value("seed", 0);

  const dipr::RateSweepReport report = dipr::rate_sweep(dgp, sc);
  dipr::write_sweep_csv(a.out_path, report.records);
  for (const dipr::MethodSlopes& ms : report.slopes) {
    std::cerr << "method=" << ms.method << " source_slope=" << ms.source_slope
              << " proj_slope=" << ms.proj_slope << "\n";
  }
  if (report.failures > 0) {
    std::cerr << report.failures << " replication(s) failed\n";
    for (const std::string& note : report.failure_notes) std::cerr << "  " << note << "\n";
  }
  std::cout << a.out_path << "\n";
  return 0;
}

struct RatesArgs {
  std::string beta_h, beta_q;
  std::string alpha_h = "1", alpha_q = "1";
  std::string regime;  // empty = all three
};

int run_rates(const RatesArgs& a) {
  const dipr::Rational beta_h = parse_rational(a.beta_h, "beta-h");
  const dipr::Rational beta_q = parse_rational(a.beta_q, "beta-q");
  const dipr::Rational alpha_h = parse_rational(a.alpha_h, "alpha-h");
  const dipr::Rational alpha_q = parse_rational(a.alpha_q, "alpha-q");
  std::cerr << "beta_h = " << beta_h.to_string() << ", beta_q = " << beta_q.to_string()
            << ", alpha_h = " << alpha_h.to_string()
            << ", alpha_q = " << alpha_q.to_string() << "\n";

  std::vector<dipr::RateRegime> regimes;
  if (a.regime.empty()) {
    regimes = {dipr::RateRegime::source_projected, dipr::RateRegime::alpha_conversion,
               dipr::RateRegime::no_debias};
  } else {
    regimes = {dipr::rate_regime_from_string(a.regime)};
  }
  for (const dipr::RateRegime regime : regimes) {
    const dipr::RateRequirement req =
        dipr::rate_requirement(beta_h, beta_q, alpha_h, alpha_q, regime);
    std::cout << dipr::to_string(regime) << ": rho_n = o(n^-" << req.exponent.to_string()
              << ") = o(n^-" << dipr::format_double(req.exponent.to_double())
              << "), branches [" << req.branch_qh.to_string() << ", "
              << req.branch_hq.to_string() << "]"
              << (req.feasible ? "" : " -- exceeds parametric rate: infeasible")
              << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"debiased ill-posed regression toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* c_sim = app.add_subcommand("simulate", "draw a synthetic dataset");
  c_sim->add_option("--dgp", sim.dgp, "series-npiv or discrete-proximal");
  c_sim->add_option("--n", sim.n, "sample size")->required();
  c_sim->add_option("--seed", sim.seed, "RNG seed");
  c_sim->add_option("--config", sim.config_path, "DGP parameter JSON");
  c_sim->add_option("--out", sim.out_path, "output CSV path")->required();
  c_sim->add_option("--roles", sim.roles_path, "role-map JSON path")->required();
  c_sim->add_option("--truth", sim.truth_path, "truth sidecar path (default <out>.truth.json)");

  FitArgs fit;
  CLI::App* c_fit = app.add_subcommand("fit", "one estimator fit at a fixed lambda");
  c_fit->add_option("--data", fit.data_path)->required();
  c_fit->add_option("--roles", fit.roles_path)->required();
  c_fit->add_option("--method", fit.method, "baseline or debiased");
  c_fit->add_option("--lambda", fit.lambda, "smoothing level")->required();
  c_fit->add_option("--iters", fit.iterations, "recursion depth");
  c_fit->add_option("--folds", fit.folds, "three fold fractions")->expected(3);
  c_fit->add_option("--basis", fit.basis, "cosine or legendre");
  c_fit->add_option("--dim-h", fit.dim_h, "sieve size for h");
  c_fit->add_option("--dim-q", fit.dim_q, "sieve size for the conditioning side");
  c_fit->add_option("--ridge", fit.ridge, "nuisance ridge (negative = default)");
  c_fit->add_option("--hessian-floor", fit.hessian_floor);
  c_fit->add_option("--seed", fit.seed);
  c_fit->add_option("--out", fit.out_path, "result JSON path")->required();

  CvArgs cv;
  CLI::App* c_cv = app.add_subcommand("cv", "cross-validated lambda selection");
  c_cv->add_option("--data", cv.data_path)->required();
  c_cv->add_option("--roles", cv.roles_path)->required();
  c_cv->add_option("--grid-config", cv.grid_config_path)->required();
  c_cv->add_option("--seed", cv.seed, "seed fallback when the config has none");
  c_cv->add_option("--out", cv.out_path, "report JSON path")->required();

  FunctionalArgs fn;
  CLI::App* c_fn = app.add_subcommand("functional", "doubly robust functional estimate");
  c_fn->add_option("--data", fn.data_path)->required();
  c_fn->add_option("--design", fn.design, "functional family (proximal)");
  c_fn->add_option("--a", fn.a_level, "treatment level");
  c_fn->add_option("--seed", fn.seed);
  c_fn->add_option("--out", fn.out_path, "estimate JSON path")->required();

  SweepArgs sweep;
  CLI::App* c_sweep = app.add_subcommand("sweep", "Monte Carlo rate sweep");
  c_sweep->add_option("--config", sweep.config_path)->required();
  c_sweep->add_option("--threads", sweep.threads, "worker cap (overrides config)");
  c_sweep->add_option("--out", sweep.out_path, "records CSV path")->required();

  RatesArgs rates;
  CLI::App* c_rates = app.add_subcommand("rates", "root-n rate requirement calculator");
  c_rates->add_option("--beta-h", rates.beta_h)->required();
  c_rates->add_option("--beta-q", rates.beta_q)->required();
  c_rates->add_option("--alpha-h", rates.alpha_h);
  c_rates->add_option("--alpha-q", rates.alpha_q);
  c_rates->add_option("--regime", rates.regime,
                      "source-projected, alpha-conversion or no-debias (default: all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_sim->parsed()) return run_simulate(sim);
    if (c_fit->parsed()) return run_fit(fit);
    if (c_cv->parsed()) return run_cv(cv);
    if (c_fn->parsed()) return run_functional(fn);
    if (c_sweep->parsed()) return run_sweep(sweep);
    if (c_rates->parsed()) return run_rates(rates);
    std::cerr << "no subcommand\n";
    return 2;
  } catch (const dipr::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const dipr::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 3;
  } catch (const dipr::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const json::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  }
}
