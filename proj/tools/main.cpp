#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "shamopt/experiment.hpp"
#include "shamopt/theory.hpp"

namespace {

using namespace shamopt;

double parse_exponent(const std::string& s) {
  if (s == "inf") return kInf;
  return std::stod(s);
}

void print_summary_line(const char* name, double v) {
  std::printf("%s = %.10g\n", name, v);
}

struct CommonOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> steps;  // accepts 1e6-style values
  std::optional<std::string> out;
  std::vector<double> lambdas;
  std::optional<std::string> p, q;
};

void apply_overrides(ExperimentConfig& config, const CommonOverrides& o) {
  if (o.seed) config.seed = *o.seed;
  if (o.steps) config.steps = static_cast<std::int64_t>(*o.steps);
  if (o.out) config.out_dir = *o.out;
  if (!o.lambdas.empty()) config.sweep = o.lambdas;
  if (o.p || o.q) {
    Hyperparams hyper = resolve_hyper(config);
    const double p = o.p ? parse_exponent(*o.p) : hyper.pq.p;
    const double q = o.q ? parse_exponent(*o.q) : hyper.pq.q;
    hyper.pq = ExponentPair(p, q);
    config.hyper = hyper;
    config.schedule.reset();
  }
}

int cmd_run(const std::string& config_path, const CommonOverrides& o) {
  ExperimentConfig config = load_config(config_path);
  apply_overrides(config, o);
  std::optional<double> lambda;
  if (!o.lambdas.empty()) lambda = o.lambdas.front();

  const RunResult result = run_experiment(config, lambda, 0);
  std::filesystem::create_directories(config.out_dir);
  const std::string trace_path =
      (std::filesystem::path(config.out_dir) / "trace.csv").string();
  write_trace_csv(result.trace, trace_path);

  std::printf("trace = %s\n", trace_path.c_str());
  print_summary_line("steps_done",
                     static_cast<double>(result.summary.steps_done));
  print_summary_line("final_run_avg_grad_fro",
                     result.summary.final_run_avg_grad_fro);
  print_summary_line("final_dist_to_opt", result.summary.final_dist_to_opt);
  print_summary_line("max_update_op_norm", result.summary.max_update_op_norm);
  return result.summary.incomplete ? 1 : 0;
}

int cmd_sweep(const std::string& config_path, const CommonOverrides& o) {
  ExperimentConfig config = load_config(config_path);
  apply_overrides(config, o);

  const SweepSummary summary = run_sweep(config);
  std::printf("lambda,final_dist_to_opt,final_run_avg_grad_fro\n");
  for (const auto& e : summary.entries) {
    if (e.failed) {
      std::printf("%g,FAILED,%s\n", e.lambda, e.error.c_str());
    } else {
      std::printf("%g,%.10g,%.10g\n", e.lambda, e.final_dist_to_opt,
                  e.final_run_avg_grad_fro);
    }
  }
  return summary.any_failed ? 1 : 0;
}

int cmd_verify(long trials, std::uint64_t seed, const std::string& out) {
  const std::vector<PropertyReport> reports = verify_all(trials, seed);
  long violations = 0;
  std::string joined = "[";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const std::string line = reports[i].to_json();
    std::printf("%s\n", line.c_str());
    joined += (i ? ",\n " : "") + line;
    violations += reports[i].violations;
  }
  joined += "]\n";
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw IoError("cannot write report: " + out);
    f << joined;
  }
  std::printf("total_violations = %ld\n", violations);
  return violations > 0 ? 1 : 0;
}

int cmd_schedule(double k, double l, double gap, double sigma2, double gamma,
                 double tau, std::int64_t m, std::int64_t n,
                 std::optional<double> eps_hat, const std::string& p,
                 const std::string& q) {
  ScheduleInput in;
  in.steps = static_cast<std::int64_t>(k);
  in.smoothness = l;
  in.gap = gap;
  in.sigma_sq = sigma2;
  in.gamma = gamma;
  in.tau = tau;
  in.eps_hat = eps_hat;
  in.m = m;
  in.n = n;
  in.pq = ExponentPair(parse_exponent(p), parse_exponent(q));

  const ScheduleOutput out = derive(in);
  print_summary_line("sigma_hat_sq", out.sigma_hat_sq);
  print_summary_line("theta", out.hyper.theta);
  print_summary_line("beta", out.hyper.beta);
  print_summary_line("eps", out.hyper.eps);
  print_summary_line("eta", out.hyper.eta);
  print_summary_line("lambda_max", out.lambda_max);
  print_summary_line("eps_hat", out.eps_hat);
  print_summary_line("nu", out.nu);
  print_summary_line("x1_op_bound", out.x1_op_bound);
  print_summary_line("rate_bound", out.rate_bound);
  return 0;
}

int cmd_repro_fig5(const std::string& out, bool full, std::uint64_t seed) {
  const SweepSummary summary = repro_fig5(out, full, seed);
  std::printf("lambda,final_dist_to_opt,final_run_avg_grad_fro\n");
  for (const auto& e : summary.entries) {
    if (e.failed) {
      std::printf("%g,FAILED,%s\n", e.lambda, e.error.c_str());
    } else {
      std::printf("%g,%.10g,%.10g\n", e.lambda, e.final_dist_to_opt,
                  e.final_run_avg_grad_fro);
    }
  }
  std::printf("plots = %s/fig5_grad.svg %s/fig5_dist.svg\n", out.c_str(),
              out.c_str());
  return summary.any_failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix-preconditioned optimizer with decoupled weight decay: "
               "experiments, hyperparameter plug-in, and property checks"};
  app.require_subcommand(1);

  CommonOverrides o;
  std::string config_path;

  CLI::App* run = app.add_subcommand("run", "one experiment from a config");
  run->add_option("--config", config_path, "config JSON path")->required();
  run->add_option("--seed", o.seed);
  run->add_option("--steps", o.steps);
  run->add_option("--out", o.out, "output directory");
  run->add_option("--lambda", o.lambdas, "weight decay override");
  run->add_option("--p", o.p, "left exponent (number or inf)");
  run->add_option("--q", o.q, "right exponent (number or inf)");

  CLI::App* sweep = app.add_subcommand("sweep", "lambda sweep, parallel runs");
  sweep->add_option("--config", config_path, "config JSON path")->required();
  sweep->add_option("--seed", o.seed);
  sweep->add_option("--steps", o.steps);
  sweep->add_option("--out", o.out, "output directory");
  sweep->add_option("--lambda", o.lambdas, "lambda values (repeatable)");
  sweep->add_option("--p", o.p);
  sweep->add_option("--q", o.q);

  long trials = 500;
  std::uint64_t vseed = 42;
  std::string report_out;
  CLI::App* verify = app.add_subcommand("verify", "run all property suites");
  verify->add_option("--trials", trials);
  verify->add_option("--seed", vseed);
  verify->add_option("--out", report_out, "also write the JSON report here");

  double sk = 0, sl = 0, sgap = 0, ssigma2 = 0, sgamma = 1.0, stau = 1.0;
  std::int64_t sm = 2, sn = 2;
  std::optional<double> seps_hat;
  std::string sp = "2", sq = "2";
  CLI::App* sched = app.add_subcommand(
      "schedule", "derive hyperparameters from problem constants");
  sched->add_option("--K", sk, "step budget")->required();
  sched->add_option("--L", sl, "smoothness")->required();
  sched->add_option("--gap", sgap, "f(X1) - f*")->required();
  sched->add_option("--sigma2", ssigma2, "gradient noise variance")->required();
  sched->add_option("--gamma", sgamma);
  sched->add_option("--tau", stau);
  sched->add_option("--m", sm);
  sched->add_option("--n", sn);
  sched->add_option("--eps-hat", seps_hat);
  sched->add_option("--p", sp);
  sched->add_option("--q", sq);

  std::string fig5_out = "fig5";
  std::uint64_t fseed = 41;
  bool full = false;
  CLI::App* fig5 = app.add_subcommand(
      "repro-fig5", "scaled toy-problem lambda sweep with plots");
  fig5->add_option("--out", fig5_out, "output directory");
  fig5->add_option("--seed", fseed);
  fig5->add_flag("--full", full, "use the full 10^9-step budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return 2;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, o);
    if (sweep->parsed()) return cmd_sweep(config_path, o);
    if (verify->parsed()) return cmd_verify(trials, vseed, report_out);
    if (sched->parsed()) {
      return cmd_schedule(sk, sl, sgap, ssigma2, sgamma, stau, sm, sn,
                          seps_hat, sp, sq);
    }
    if (fig5->parsed()) return cmd_repro_fig5(fig5_out, full, fseed);
  } catch (const InfeasibleScheduleError& e) {
    std::cerr << "infeasible schedule: " << e.what() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
