#include "dipr/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "dipr/io.hpp"
#include "dipr/rng.hpp"

namespace dipr {

namespace {

Vec pad_to(const Vec& v, Index dim) {
  if (v.size() > dim) throw ConfigError("coefficient vector longer than target dimension");
  Vec out = Vec::Zero(dim);
  out.head(v.size()) = v;
  return out;
}

double parse_strict_double(const std::string& field) {
  if (field.empty()) throw IoError("empty numeric field");
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size()) {
    throw IoError("malformed numeric field: " + field);
  }
  return v;
}

long long parse_strict_int(const std::string& field) {
  if (field.empty()) throw IoError("empty integer field");
  char* end = nullptr;
  const long long v = std::strtoll(field.c_str(), &end, 10);
  if (end != field.c_str() + field.size()) {
    throw IoError("malformed integer field: " + field);
  }
  return v;
}

}  // namespace

SlopeFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ConfigError("slope fit: size mismatch");
  if (x.size() < 2) throw ConfigError("slope fit needs at least two points");
  const auto n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw ConfigError("slope fit needs positive coordinates");
    }
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-12 * (1.0 + sxx * n)) {
    throw ConfigError("slope fit: x values are degenerate");
  }
  SlopeFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

double median(std::vector<double> v) {
  if (v.empty()) throw ConfigError("median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  if (v.size() % 2 == 1) return v[mid];
  return 0.5 * (v[mid - 1] + v[mid]);
}

double l2_norm_quadrature(const FunctionHandle& h, int points) {
  if (h.basis().arity() != 1) {
    throw ConfigError("quadrature norm needs a one-dimensional basis");
  }
  if (h.basis().family() == BasisFamily::indicator) {
    throw ConfigError("quadrature norm is for continuous bases");
  }
  if (points < 3 || points % 2 == 0) {
    throw ConfigError("Simpson quadrature needs an odd point count >= 3");
  }
  const double step = 1.0 / static_cast<double>(points - 1);
  double acc = 0.0;
  for (int i = 0; i < points; ++i) {
    const double x = static_cast<double>(i) * step;
    const double v = h(x);
    const double w = (i == 0 || i == points - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * v * v;
  }
  return std::sqrt(acc * step / 3.0);
}

void parallel_for(Index count, int threads, const std::function<void(Index)>& task) {
  if (count <= 0) return;
  if (threads < 1) throw ConfigError("threads must be >= 1");
  const int workers = static_cast<int>(std::min<Index>(threads, count));
  if (workers == 1) {
    for (Index i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<Index> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        const Index i = next.fetch_add(1);
        if (i >= count) return;
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

RiskKind risk_kind_from_string(const std::string& s) {
  if (s == "debiased") return RiskKind::debiased;
  if (s == "plugin" || s == "plug-in") return RiskKind::plugin;
  throw ConfigError("unknown risk kind: " + s);
}

std::string to_string(RiskKind k) {
  return k == RiskKind::debiased ? "debiased" : "plugin";
}

BiasProbeReport bias_probe(const SeriesNpivDgp& dgp, const FunctionHandle& h,
                           const std::vector<double>& eps_grid, RiskKind risk,
                           const std::optional<FunctionHandle>& r_hat,
                           CorruptionMode mode, std::uint64_t seed) {
  if (eps_grid.empty()) throw ConfigError("bias probe needs a nonempty epsilon grid");
  const Index dim = dgp.sigmas.size() + 1;
  const SingularSystem sys = true_operator_npiv(dgp, dim);
  if (h.basis().family() != BasisFamily::cosine || h.basis().dimension() > dim) {
    throw ConfigError("probe function must live on a cosine basis within the operator rank");
  }
  const Vec s = sys.sigmas;
  const Vec c = pad_to(h.coeffs(), dim);
  const Vec c0 = pad_to(dgp.h0.coeffs(), dim);
  const Vec r0 = s.cwiseProduct(c0);
  Vec rh = r0;
  if (r_hat) {
    if (r_hat->basis().family() != BasisFamily::cosine ||
        r_hat->basis().dimension() > dim) {
      throw ConfigError("misspecified r must live on a cosine basis within the operator rank");
    }
    rh = pad_to(r_hat->coeffs(), dim);
  }

  const SieveOperator base(Mat(s.asDiagonal()), sys.input_basis, sys.output_basis);
  Mat direction = corrupt_operator(base, 1.0, mode, seed).matrix - base.matrix;

  BiasProbeReport report;
  // With T_hat = T + eps * direction, the leading bias term is
  //   debiased: -2 eps <direction h, r_hat - r0> (+ eps^2 ||direction h||^2)
  //   plugin:   -2 eps <direction h, T(h - h0)> (- eps^2 ||direction h||^2),
  // so orient the direction to make that coefficient nonnegative and the
  // log-log slope readable.
  {
    const Vec dc = direction * c;
    const double leading = (risk == RiskKind::debiased)
                               ? -2.0 * dc.dot(rh - r0)
                               : -2.0 * dc.dot(s.cwiseProduct(c - c0));
    if (leading < 0.0) {
      report.orientation = -1.0;
      direction = -direction;
    }
  }

  const Vec tc = s.cwiseProduct(c);
  std::vector<double> xs, ys;
  for (const double eps : eps_grid) {
    if (eps < 0.0) throw ConfigError("epsilon must be nonnegative");
    const Mat that = base.matrix + eps * direction;
    const Vec p = that * c;
    // Population expectations, term by term; E[Y^2] appears once in both the
    // true and the estimated risk and cancels from the bias.
    const double psi_true = tc.squaredNorm() - 2.0 * tc.dot(r0);
    double psi_est;
    if (risk == RiskKind::debiased) {
      const double correction =
          p.dot(tc) - p.squaredNorm() - rh.dot(tc) + rh.dot(p);
      psi_est = p.squaredNorm() - 2.0 * p.dot(r0) + 2.0 * correction;
    } else {
      psi_est = p.squaredNorm() - 2.0 * p.dot(r0);
    }
    BiasProbePoint point;
    point.epsilon = eps;
    point.bias = psi_true - psi_est;
    const Vec delta = tc - p;  // (T - T_hat) h
    point.structure = (risk == RiskKind::debiased)
                          ? delta.squaredNorm() + 2.0 * delta.dot(rh - r0)
                          : 2.0 * delta.dot(tc - r0) - delta.squaredNorm();
    report.points.push_back(point);
    if (point.bias > 0.0 && eps > 0.0) {
      xs.push_back(eps);
      ys.push_back(point.bias);
    } else {
      ++report.excluded;
    }
  }
  if (xs.size() >= 2) {
    const SlopeFit fit = fit_loglog_slope(xs, ys);
    report.slope = fit.slope;
    report.intercept = fit.intercept;
  }
  return report;
}

LambdaRule lambda_rule_from_string(const std::string& s) {
  if (s == "oracle") return LambdaRule::oracle;
  if (s == "cv") return LambdaRule::cv;
  if (s == "fixed") return LambdaRule::fixed;
  throw ConfigError("unknown lambda rule: " + s);
}

std::string to_string(LambdaRule r) {
  switch (r) {
    case LambdaRule::oracle:
      return "oracle";
    case LambdaRule::cv:
      return "cv";
    case LambdaRule::fixed:
      return "fixed";
  }
  throw ConfigError("unknown lambda rule");
}

namespace {

void validate_sweep(const SweepConfig& config, Index full_dim) {
  if (config.n_grid.empty()) throw ConfigError("sweep needs a nonempty n grid");
  for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
    if (config.n_grid[i] < 3) throw ConfigError("sweep n values must be >= 3");
    if (i > 0 && config.n_grid[i] <= config.n_grid[i - 1]) {
      throw ConfigError("sweep n grid must be strictly increasing");
    }
  }
  if (config.replications < 1) throw ConfigError("replications must be >= 1");
  if (config.methods.empty()) throw ConfigError("sweep needs at least one method");
  if (config.dim_h < 1 || config.dim_q < 1 || config.dim_h > full_dim ||
      config.dim_q > full_dim) {
    throw ConfigError("sieve dimensions must lie in [1, operator rank]");
  }
  if (config.lambda_rule == LambdaRule::cv &&
      (config.corruption_c != 0.0 || config.exact_nuisances)) {
    throw ConfigError(
        "the cv rule fits its own nuisances; corruption and exact nuisances "
        "apply to the oracle/fixed rules only");
  }
  if (config.lambda_rule == LambdaRule::fixed && !(config.lambda_fixed > 0.0)) {
    throw ConfigError("fixed lambda must be positive");
  }
  if (!(config.beta > 0.0)) throw ConfigError("beta must be positive");
  if (config.corruption_c < 0.0) throw ConfigError("corruption scale must be >= 0");
}

}  // namespace

RateSweepReport rate_sweep(const SeriesNpivDgp& dgp, const SweepConfig& config) {
  const Index full_dim = dgp.sigmas.size() + 1;
  validate_sweep(config, full_dim);
  const SingularSystem sys = true_operator_npiv(dgp, full_dim);
  const Vec s = sys.sigmas;
  const Vec c0 = pad_to(dgp.h0.coeffs(), full_dim);
  const Vec r0_full = s.cwiseProduct(c0);
  const BasisSpec basis_h = BasisSpec::cosine(config.dim_h);
  const BasisSpec basis_q = BasisSpec::cosine(config.dim_q);

  Mat true_matrix = Mat::Zero(config.dim_q, config.dim_h);
  for (Index j = 0; j < std::min(config.dim_q, config.dim_h); ++j) {
    true_matrix(j, j) = s[j];
  }
  const SieveOperator true_sieve(true_matrix, basis_h, basis_q);

  const int n_methods = static_cast<int>(config.methods.size());
  const Index tasks = static_cast<Index>(config.n_grid.size()) * config.replications;
  RateSweepReport report;
  report.records.assign(static_cast<std::size_t>(tasks * n_methods), SweepRecord{});
  std::vector<std::string> notes(report.records.size());

  parallel_for(tasks, config.threads, [&](Index task) {
    const Index ni = task / config.replications;
    const int rep = static_cast<int>(task % config.replications);
    const Index n = config.n_grid[static_cast<std::size_t>(ni)];
    const std::uint64_t seed_r = substream_seed(
        config.seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep)});

    for (int mi = 0; mi < n_methods; ++mi) {
      SweepRecord& rec =
          report.records[static_cast<std::size_t>(task) * n_methods + mi];
      rec.n = n;
      rec.rep = rep;
      rec.method = to_string(config.methods[static_cast<std::size_t>(mi)]);
      const double nan = std::numeric_limits<double>::quiet_NaN();
      rec.lambda = nan;
      rec.source_err = nan;
      rec.proj_err = nan;
      rec.op_err = nan;
      rec.r_err = nan;
    }

    Dataset data = sample_npiv(dgp, n, seed_r);

    for (int mi = 0; mi < n_methods; ++mi) {
      const FitMethod method = config.methods[static_cast<std::size_t>(mi)];
      SweepRecord& rec =
          report.records[static_cast<std::size_t>(task) * n_methods + mi];
      std::string& note = notes[static_cast<std::size_t>(task) * n_methods + mi];
      const auto t0 = std::chrono::steady_clock::now();
      try {
        FunctionHandle h_hat = zero_function(basis_h);
        double lambda = 0.0, op_err = 0.0, r_err = 0.0;
        if (config.lambda_rule == LambdaRule::cv) {
          PipelineConfig pc;
          pc.basis_h = basis_h;
          pc.basis_q = basis_q;
          pc.fractions = config.fractions;
          pc.grid_epsilon = config.grid_epsilon;
          pc.grid_proxy = config.grid_proxy;
          pc.grid_m = config.grid_m;
          pc.ridge = config.ridge;
          pc.iterations = config.iterations;
          pc.method = method;
          pc.hessian_floor = config.hessian_floor;
          pc.seed = seed_r;
          const PipelineResult res = fit_cv_pipeline(data, pc);
          h_hat = res.h_hat;
          lambda = res.selected_lambda;
          op_err = operator_norm_diff(res.nuisances.t_hat, true_sieve);
          r_err = (pad_to(res.nuisances.r_hat.coeffs(), full_dim) - r0_full).norm();
        } else {
          const FoldPlan plan = split(n, config.fractions, seed_r);
          const Dataset candidate = data.subset(plan.candidate_train);
          NuisanceFit nf =
              config.exact_nuisances
                  ? NuisanceFit{true_sieve,
                                FunctionHandle(basis_q, r0_full.head(config.dim_q)),
                                0.0, 0, 1.0}
                  : fit_nuisances(data.subset(plan.nuisance_train), basis_h,
                                  basis_q, config.ridge);
          if (config.corruption_c > 0.0) {
            const double eps_n =
                config.corruption_c *
                std::pow(static_cast<double>(n), -config.corruption_gamma);
            nf.t_hat = corrupt_operator(nf.t_hat, eps_n, config.corruption_mode,
                                        seed_r);
          }
          op_err = operator_norm_diff(nf.t_hat, true_sieve);
          r_err = (pad_to(nf.r_hat.coeffs(), full_dim) - r0_full).norm();
          if (config.lambda_rule == LambdaRule::fixed) {
            lambda = config.lambda_fixed;
          } else {
            // Oracle rule: Delta from the measured nuisance errors plus the
            // sqrt(J/n) radius proxy, then lambda = c * Delta^{1/min{5, beta+2}}.
            const double kappa2 = static_cast<double>(config.dim_h) /
                                  static_cast<double>(candidate.n());
            const double delta =
                std::max({std::pow(op_err, 4.0), op_err * op_err * r_err * r_err,
                          kappa2});
            lambda = config.oracle_c *
                     std::pow(delta, 1.0 / std::min(5.0, config.beta + 2.0));
            lambda = std::max(lambda, 1e-12);
          }
          FitConfig fc;
          fc.lambda = lambda;
          fc.iterations = config.iterations;
          fc.method = method;
          fc.hessian_floor = config.hessian_floor;
          h_hat = fit(candidate, nf, fc).h_hat;
        }
        const Vec diff = pad_to(h_hat.coeffs(), full_dim) - c0;
        rec.lambda = lambda;
        rec.source_err = diff.norm();
        rec.proj_err = s.cwiseProduct(diff).norm();
        rec.op_err = op_err;
        rec.r_err = r_err;
      } catch (const std::exception& e) {
        note = "n=" + std::to_string(n) + " rep=" + std::to_string(rep) +
               " method=" + rec.method + ": " + e.what();
      }
      if (config.record_timings) {
        const auto t1 = std::chrono::steady_clock::now();
        rec.runtime_ms =
            std::chrono::duration<double, std::milli>(t1 - t0).count();
      }
    }
  });

  for (const std::string& note : notes) {
    if (!note.empty()) {
      ++report.failures;
      report.failure_notes.push_back(note);
    }
  }

  for (const FitMethod method : config.methods) {
    MethodSlopes ms;
    ms.method = to_string(method);
    std::vector<double> xs, src, prj;
    for (std::size_t ni = 0; ni < config.n_grid.size(); ++ni) {
      std::vector<double> source, proj;
      for (const SweepRecord& rec : report.records) {
        if (rec.method == ms.method && rec.n == config.n_grid[ni] &&
            std::isfinite(rec.source_err)) {
          source.push_back(rec.source_err);
          proj.push_back(rec.proj_err);
        }
      }
      const double nan = std::numeric_limits<double>::quiet_NaN();
      ms.median_source.push_back(source.empty() ? nan : median(source));
      ms.median_proj.push_back(proj.empty() ? nan : median(proj));
      if (!source.empty() && ms.median_source.back() > 0.0 &&
          ms.median_proj.back() > 0.0) {
        xs.push_back(static_cast<double>(config.n_grid[ni]));
        src.push_back(ms.median_source.back());
        prj.push_back(ms.median_proj.back());
      }
    }
    if (xs.size() >= 2) {
      ms.source_slope = fit_loglog_slope(xs, src).slope;
      ms.proj_slope = fit_loglog_slope(xs, prj).slope;
    }
    report.slopes.push_back(ms);
  }
  return report;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "n,rep,method,lambda,source_err,proj_err,op_err,r_err,runtime_ms\n";
  for (const SweepRecord& r : records) {
    out << r.n << ',' << r.rep << ',' << r.method << ',' << format_double(r.lambda)
        << ',' << format_double(r.source_err) << ',' << format_double(r.proj_err)
        << ',' << format_double(r.op_err) << ',' << format_double(r.r_err) << ','
        << format_double(r.runtime_ms) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<SweepRecord> read_sweep_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty sweep file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "n,rep,method,lambda,source_err,proj_err,op_err,r_err,runtime_ms") {
    throw IoError("unexpected sweep header: " + line);
  }
  std::vector<SweepRecord> records;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 9) throw IoError("sweep row needs 9 fields: " + line);
    SweepRecord r;
    r.n = static_cast<Index>(parse_strict_int(fields[0]));
    r.rep = static_cast<int>(parse_strict_int(fields[1]));
    r.method = fields[2];
    r.lambda = parse_strict_double(fields[3]);
    r.source_err = parse_strict_double(fields[4]);
    r.proj_err = parse_strict_double(fields[5]);
    r.op_err = parse_strict_double(fields[6]);
    r.r_err = parse_strict_double(fields[7]);
    r.runtime_ms = parse_strict_double(fields[8]);
    records.push_back(std::move(r));
  }
  return records;
}

namespace {

AlphaProbeResult alpha_search(
    const std::vector<Vec>& weights_pow_base,  // per error: the mu vector
    const std::vector<Vec>& error_sq,          // per error: squared coefficients
    const std::vector<double>& projected_sq,
    const std::vector<double>& alpha_grid, double alpha_floor) {
  std::vector<double> grid = alpha_grid;
  std::sort(grid.begin(), grid.end());
  AlphaProbeResult result;
  for (const double alpha : grid) {
    if (!(alpha > 0.0)) throw ConfigError("alpha grid entries must be positive");
    if (alpha < alpha_floor - 1e-12) continue;
    bool ok = true;
    std::vector<double> margins;
    for (std::size_t k = 0; k < error_sq.size(); ++k) {
      double lhs = 0.0;
      const Vec& mu = weights_pow_base[k];
      const Vec& esq = error_sq[k];
      for (Index i = 0; i < esq.size(); ++i) {
        if (esq[i] == 0.0) continue;
        lhs += std::pow(mu[i], alpha) * esq[i];
      }
      const double rhs = projected_sq[k];
      margins.push_back(rhs - lhs);
      if (lhs > rhs * (1.0 + 1e-9) + 1e-12) {
        ok = false;
        break;
      }
    }
    if (ok) {
      result.alpha = alpha;
      result.feasible = true;
      result.margins = std::move(margins);
      return result;
    }
  }
  result.note = "alpha-condition not satisfied on tested grid";
  return result;
}

}  // namespace

AlphaProbeResult alpha_probe(const std::vector<FunctionHandle>& errors,
                             const SingularSystem& sys, double beta,
                             const std::vector<double>& alpha_grid) {
  if (errors.empty()) throw ConfigError("alpha probe needs error functions");
  if (!(beta > 0.0)) throw ConfigError("beta must be positive");
  if (alpha_grid.empty()) throw ConfigError("alpha grid is empty");
  const Vec& s = sys.sigmas;
  const double top = s[0];
  std::vector<Vec> mu, esq;
  std::vector<double> projected_sq;
  for (const FunctionHandle& e : errors) {
    if (e.basis().family() != sys.input_basis.family() ||
        e.basis().dimension() > sys.input_basis.dimension()) {
      throw ConfigError("error function must live on the operator's input basis");
    }
    const Vec c = pad_to(e.coeffs(), sys.input_basis.dimension());
    Vec m = Vec::Zero(c.size());
    Vec sq(c.size());
    double rhs = 0.0;
    for (Index i = 0; i < c.size(); ++i) {
      const double sigma = i < sys.rank() ? s[i] : 0.0;
      m[i] = std::pow(sigma / top, beta);  // mu_i = tilde sigma_i^beta
      sq[i] = c[i] * c[i];
      rhs += sigma * sigma * sq[i];
    }
    mu.push_back(std::move(m));
    esq.push_back(std::move(sq));
    projected_sq.push_back(rhs);
  }
  return alpha_search(mu, esq, projected_sq, alpha_grid, 2.0 / beta);
}

nlohmann::json sweep_to_json(const std::vector<SweepRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const SweepRecord& r : records) {
    nlohmann::json row;
    row["n"] = static_cast<long long>(r.n);
    row["rep"] = r.rep;
    row["method"] = r.method;
    row["lambda"] = r.lambda;
    row["source_err"] = r.source_err;
    row["proj_err"] = r.proj_err;
    row["op_err"] = r.op_err;
    row["r_err"] = r.r_err;
    row["runtime_ms"] = r.runtime_ms;
    arr.push_back(std::move(row));
  }
  return arr;
}

std::vector<SweepRecord> sweep_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw IoError("sweep JSON must be an array");
  // NaN fields of failed replications serialize as null.
  const auto num = [](const nlohmann::json& row, const char* key) {
    const auto& v = row.at(key);
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN()
                       : v.get<double>();
  };
  std::vector<SweepRecord> records;
  for (const auto& row : j) {
    SweepRecord r;
    r.n = row.at("n").get<long long>();
    r.rep = row.at("rep").get<int>();
    r.method = row.at("method").get<std::string>();
    r.lambda = num(row, "lambda");
    r.source_err = num(row, "source_err");
    r.proj_err = num(row, "proj_err");
    r.op_err = num(row, "op_err");
    r.r_err = num(row, "r_err");
    r.runtime_ms = num(row, "runtime_ms");
    records.push_back(std::move(r));
  }
  return records;
}

AlphaProbeResult alpha_probe_mu(const std::vector<Vec>& error_coeffs,
                                const std::vector<Vec>& mu,
                                const std::vector<double>& projected_sq,
                                const std::vector<double>& alpha_grid) {
  if (error_coeffs.empty()) throw ConfigError("alpha probe needs error functions");
  if (error_coeffs.size() != mu.size() ||
      error_coeffs.size() != projected_sq.size()) {
    throw ConfigError("alpha probe: inputs must have matching lengths");
  }
  if (alpha_grid.empty()) throw ConfigError("alpha grid is empty");
  std::vector<Vec> esq;
  for (std::size_t k = 0; k < error_coeffs.size(); ++k) {
    if (mu[k].size() != error_coeffs[k].size()) {
      throw ConfigError("alpha probe: mu and coefficients must align");
    }
    for (Index i = 0; i < mu[k].size(); ++i) {
      if (!(mu[k][i] > 0.0) || mu[k][i] > 1.0) {
        throw ConfigError("mu entries must lie in (0, 1]");
      }
      if (i > 0 && mu[k][i] > mu[k][i - 1] + 1e-15) {
        throw ConfigError("mu must be nonincreasing");
      }
    }
    if (!(projected_sq[k] >= 0.0)) {
      throw ConfigError("projected norms must be nonnegative");
    }
    esq.push_back(error_coeffs[k].cwiseProduct(error_coeffs[k]));
  }
  return alpha_search(mu, esq, projected_sq, alpha_grid, 0.0);
}

}  // namespace dipr
