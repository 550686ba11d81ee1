#include "shamopt/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace shamopt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void require_keys(const json& obj, const char* where,
                  std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

double exponent_field(const json& v, const char* name) {
  if (v.is_string()) {
    if (v.get<std::string>() == "inf") return kInf;
    throw ConfigError(std::string(name) + ": expected a number or \"inf\"");
  }
  return v.get<double>();
}

ExponentPair parse_pq(const json& obj, const ExponentPair& fallback) {
  const double p = obj.contains("p") ? exponent_field(obj["p"], "p") : fallback.p;
  const double q = obj.contains("q") ? exponent_field(obj["q"], "q") : fallback.q;
  return ExponentPair(p, q);
}

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Mat initial_point_for(const ExperimentConfig& config,
                      const GradOracle& oracle) {
  if (config.problem == "toy_paper") {
    return static_cast<const ToyProblem&>(oracle).initial_point();
  }
  // Deterministic start, shared across sweep members.
  Rng rng(config.seed, 0xA11CE);
  Mat x1(oracle.rows(), oracle.cols());
  for (Index i = 0; i < x1.rows(); ++i)
    for (Index j = 0; j < x1.cols(); ++j) x1(i, j) = rng.normal();
  return x1;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object");
  require_keys(j, "config",
               {"problem", "steps", "record_interval", "seed", "hyper",
                "schedule", "sweep", "out_dir", "m", "n", "condition",
                "noise"});

  ExperimentConfig c;
  try {
    if (j.contains("problem")) c.problem = j["problem"].get<std::string>();
    if (c.problem != "toy_paper" && c.problem != "quadratic" &&
        c.problem != "matrix_factorization") {
      throw ConfigError("unknown problem '" + c.problem + "'");
    }
    if (!j.contains("steps")) throw ConfigError("config: 'steps' is required");
    c.steps = j["steps"].get<std::int64_t>();
    if (c.steps < 1) throw ConfigError("config: steps must be >= 1");
    if (j.contains("record_interval")) {
      c.record_interval = j["record_interval"].get<std::int64_t>();
      if (c.record_interval < 1) {
        throw ConfigError("config: record_interval must be >= 1");
      }
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("m")) c.m = j["m"].get<Index>();
    if (j.contains("n")) c.n = j["n"].get<Index>();
    if (j.contains("condition")) c.condition = j["condition"].get<double>();
    if (j.contains("noise")) c.noise = j["noise"].get<double>();
    if (c.m < 1 || c.n < 1) throw ConfigError("config: m, n must be >= 1");

    if (j.contains("sweep")) {
      for (const auto& v : j["sweep"]) {
        const double lam = v.get<double>();
        if (lam < 0.0) throw ConfigError("config: sweep entries must be >= 0");
        c.sweep.push_back(lam);
      }
    }

    if (j.contains("hyper") == j.contains("schedule")) {
      throw ConfigError("config: exactly one of 'hyper'/'schedule' required");
    }
    if (j.contains("hyper")) {
      const json& h = j["hyper"];
      require_keys(h, "hyper",
                   {"eta", "theta", "beta", "lambda", "eps", "p", "q"});
      Hyperparams hp{};
      hp.eta = h.at("eta").get<double>();
      hp.theta = h.at("theta").get<double>();
      hp.beta = h.at("beta").get<double>();
      hp.lambda = h.contains("lambda") ? h["lambda"].get<double>() : 0.0;
      hp.eps = h.at("eps").get<double>();
      hp.pq = parse_pq(h, ExponentPair::shampoo());
      hp.validate();
      c.hyper = hp;
    } else {
      const json& s = j["schedule"];
      require_keys(s, "schedule",
                   {"L", "gap", "sigma2", "gamma", "tau", "eps_hat", "p", "q"});
      ScheduleInput in;
      in.steps = c.steps;
      in.smoothness = s.at("L").get<double>();
      in.gap = s.at("gap").get<double>();
      in.sigma_sq = s.at("sigma2").get<double>();
      if (s.contains("gamma")) in.gamma = s["gamma"].get<double>();
      if (s.contains("tau")) in.tau = s["tau"].get<double>();
      if (s.contains("eps_hat")) in.eps_hat = s["eps_hat"].get<double>();
      in.m = c.m;
      in.n = c.n;
      in.pq = parse_pq(s, ExponentPair::shampoo());
      c.schedule = in;
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::unique_ptr<GradOracle> make_oracle(const ExperimentConfig& config) {
  if (config.problem == "toy_paper") return std::make_unique<ToyProblem>();
  if (config.problem == "quadratic") {
    return quadratic_oracle(config.m, config.n, config.condition, config.noise,
                            config.seed);
  }
  if (config.problem == "matrix_factorization") {
    return matrix_factorization_oracle(config.m, config.n, config.noise,
                                       config.seed);
  }
  throw ConfigError("unknown problem '" + config.problem + "'");
}

Hyperparams resolve_hyper(const ExperimentConfig& config) {
  if (config.hyper.has_value() == config.schedule.has_value()) {
    throw ConfigError("exactly one of hyper/schedule must be set");
  }
  if (config.hyper) return *config.hyper;
  ScheduleInput in = *config.schedule;
  in.steps = config.steps;
  return derive(in).hyper;
}

RunResult run_experiment(const ExperimentConfig& config,
                         std::optional<double> lambda_override,
                         std::uint64_t stream_index) {
  const auto oracle = make_oracle(config);
  Hyperparams hyper = resolve_hyper(config);
  if (lambda_override) hyper.lambda = *lambda_override;

  const Mat x1 = initial_point_for(config, *oracle);
  Rng base(config.seed, 1);
  const Rng stream = base.split(stream_index);

  RunResult result;
  result.hyper = hyper;
  result.summary =
      run(*oracle, x1, hyper, config.steps, config.effective_record_interval(),
          stream, [&](const TraceRecord& r) { result.trace.push_back(r); });
  return result;
}

namespace {

SweepSummary sweep_impl(const ExperimentConfig& config,
                        std::vector<std::vector<TraceRecord>>* traces_out) {
  if (config.sweep.empty()) {
    throw ConfigError("sweep requires a non-empty lambda list");
  }
  fs::create_directories(config.out_dir);

  const std::size_t count = config.sweep.size();
  SweepSummary summary;
  summary.entries.resize(count);
  if (traces_out) traces_out->resize(count);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      SweepEntry& entry = summary.entries[i];
      entry.lambda = config.sweep[i];
      entry.trace_path = (fs::path(config.out_dir) /
                          ("trace_lambda_" + fmt_g(entry.lambda) + ".csv"))
                             .string();
      try {
        RunResult r = run_experiment(config, entry.lambda,
                                     static_cast<std::uint64_t>(i));
        write_trace_csv(r.trace, entry.trace_path);
        entry.final_dist_to_opt = r.summary.final_dist_to_opt;
        entry.final_run_avg_grad_fro = r.summary.final_run_avg_grad_fro;
        if (r.summary.incomplete) {
          entry.failed = true;
          entry.error = "run aborted before completing all steps";
        }
        if (traces_out) (*traces_out)[i] = std::move(r.trace);
      } catch (const std::exception& e) {
        entry.failed = true;
        entry.error = e.what();
      }
    }
  };

  const std::size_t threads = std::min<std::size_t>(
      count, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t + 1 < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (const auto& e : summary.entries) summary.any_failed |= e.failed;

  {
    std::ofstream out(fs::path(config.out_dir) / "sweep_summary.csv");
    if (!out) throw IoError("cannot write sweep summary in " + config.out_dir);
    out << "lambda,final_dist_to_opt,final_run_avg_grad_fro\n";
    for (const auto& e : summary.entries) {
      if (e.failed) continue;
      out << fmt17(e.lambda) << ',' << fmt17(e.final_dist_to_opt) << ','
          << fmt17(e.final_run_avg_grad_fro) << '\n';
    }
  }
  if (summary.any_failed) {
    json manifest = json::array();
    for (const auto& e : summary.entries) {
      if (!e.failed) continue;
      manifest.push_back({{"lambda", e.lambda}, {"error", e.error}});
    }
    std::ofstream out(fs::path(config.out_dir) / "failures.json");
    out << manifest.dump(2) << '\n';
  }
  return summary;
}

}  // namespace

SweepSummary run_sweep(const ExperimentConfig& config) {
  return sweep_impl(config, nullptr);
}

SweepSummary repro_fig5(const std::string& out_dir, bool full,
                        std::uint64_t seed) {
  const std::int64_t steps = full ? 1000000000LL : 1000000LL;
  const double sqrt_k = std::sqrt(static_cast<double>(steps));
  const double theta = 1.0 - 1.0 / sqrt_k;

  ExperimentConfig config;
  config.problem = "toy_paper";
  config.steps = steps;
  config.seed = seed;
  config.out_dir = out_dir;
  config.hyper = Hyperparams{1.0 / sqrt_k, theta, std::sqrt(theta), 0.0,
                             1e-12, ExponentPair::shampoo()};
  config.sweep = {1e-1, 1e-2, 1e-3, 1e-4, 0.0};

  std::vector<std::vector<TraceRecord>> traces;
  SweepSummary summary = sweep_impl(config, &traces);

  std::vector<PlotSeries> grad_series, dist_series;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const std::string label = "lambda=" + fmt_g(config.sweep[i]);
    PlotSeries gs{label, {}}, ds{label, {}};
    for (const auto& r : traces[i]) {
      gs.points.push_back({static_cast<double>(r.k), r.run_avg_grad_fro});
      ds.points.push_back({static_cast<double>(r.k), r.dist_to_opt});
    }
    grad_series.push_back(std::move(gs));
    dist_series.push_back(std::move(ds));
  }
  emit_plot_svg(grad_series,
                {"Running-average gradient Frobenius norm", "step k",
                 "(1/k) sum ||grad f(X_t)||_F", true, true},
                (fs::path(out_dir) / "fig5_grad.svg").string());
  emit_plot_svg(dist_series,
                {"Distance to optimum", "step k", "||X_k - X*||_F", true, true},
                (fs::path(out_dir) / "fig5_dist.svg").string());
  return summary;
}

}  // namespace shamopt
