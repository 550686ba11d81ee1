#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "shamopt/optimizer.hpp"
#include "shamopt/schedule.hpp"

namespace shamopt {

/// One experiment description, normally loaded from a JSON file. Exactly
/// one of `hyper` / `schedule` must be present; unknown JSON keys are
/// configuration errors.
struct ExperimentConfig {
  std::string problem = "toy_paper";  // toy_paper | quadratic | matrix_factorization
  std::int64_t steps = 0;
  std::int64_t record_interval = 0;  // 0 -> max(1, steps / 10^4)
  std::uint64_t seed = 0;
  std::optional<Hyperparams> hyper;
  std::optional<ScheduleInput> schedule;
  std::vector<double> sweep;  // lambda values; empty means single run
  std::string out_dir = ".";

  // Problem-family parameters (ignored by toy_paper).
  Index m = 2;
  Index n = 2;
  double condition = 10.0;
  double noise = 0.1;

  std::int64_t effective_record_interval() const {
    return record_interval > 0 ? record_interval
                               : std::max<std::int64_t>(1, steps / 10000);
  }
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

std::unique_ptr<GradOracle> make_oracle(const ExperimentConfig& config);

/// Resolved hyperparameters for a config: explicit values, or derive() from
/// the schedule block (steps taken from the config).
Hyperparams resolve_hyper(const ExperimentConfig& config);

struct RunResult {
  Hyperparams hyper;
  RunSummary summary;
  std::vector<TraceRecord> trace;
};

/// One run; the RNG stream is split from (seed, stream_index) so sweep
/// members are independent and order-insensitive.
RunResult run_experiment(const ExperimentConfig& config,
                         std::optional<double> lambda_override,
                         std::uint64_t stream_index);

struct SweepEntry {
  double lambda = 0.0;
  std::string trace_path;
  double final_dist_to_opt = 0.0;
  double final_run_avg_grad_fro = 0.0;
  bool failed = false;
  std::string error;
};

struct SweepSummary {
  std::vector<SweepEntry> entries;
  bool any_failed = false;
};

/// Runs every sweep lambda (in parallel), writes one trace CSV per lambda
/// plus sweep_summary.csv into config.out_dir; failures are recorded in
/// failures.json and do not abort the other runs.
SweepSummary run_sweep(const ExperimentConfig& config);

/// The scaled toy-problem lambda sweep behind Figure 5: K defaults to 10^6
/// (full = 10^9), theta = 1 - 1/sqrt(K), beta = sqrt(theta),
/// eta = 1/sqrt(K), eps = 1e-12, lambda in {1e-1,...,1e-4, 0}. Writes the
/// per-lambda traces and the two log-log SVG panels (running-average
/// gradient norm, distance to optimum).
SweepSummary repro_fig5(const std::string& out_dir, bool full,
                        std::uint64_t seed);

}  // namespace shamopt
