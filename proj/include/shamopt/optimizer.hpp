#pragma once

#include <cstdint>
#include <functional>
#include <utility>

#include "shamopt/matfun.hpp"
#include "shamopt/oracles.hpp"
#include "shamopt/trace.hpp"

namespace shamopt {

struct Hyperparams {
  double eta;             // step size
  double theta;           // first-moment EMA
  double beta;            // preconditioner EMA
  double lambda;          // decoupled weight decay
  double eps;             // diagonal shift, must be > 0
  ExponentPair pq = ExponentPair::shampoo();

  void validate() const;

  /// theta <= beta <= sqrt(theta) < 1; recorded, not enforced — the update
  /// bound (op norm <= 2) only holds inside this band.
  bool theorem_regime() const;
};

/// Full optimizer state after k steps. Plain value; never mutated in place.
struct OptimizerState {
  Mat x;       // m x n parameters X_k
  Mat m_mom;   // first moment M_k
  SymPsd l;    // left preconditioner L_k (m x m)
  SymPsd r;    // right preconditioner R_k (n x n)
  std::int64_t k = 0;
};

struct StepDiagnostics {
  double update_op_norm = 0.0;  // ||L_eps^{-1/2p} M R_eps^{-1/2q}||_op
  double x_op_norm = 0.0;       // ||X_{k+1}||_op
  double trace_l_sqrt = 0.0;    // tr(L_eps^{1/2})
  double trace_r_sqrt = 0.0;    // tr(R_eps^{1/2})
};

OptimizerState init(const Mat& x1, const Hyperparams& hyper);

std::pair<OptimizerState, StepDiagnostics> step(const OptimizerState& state,
                                                const Mat& g,
                                                const Hyperparams& hyper);

using TraceSink = std::function<void(const TraceRecord&)>;

struct RunSummary {
  OptimizerState final_state;
  std::int64_t steps_done = 0;
  double min_grad_fro = 0.0;   // over recorded exact-gradient norms
  double mean_grad_fro = 0.0;
  double final_run_avg_grad_fro = 0.0;
  double max_update_op_norm = 0.0;
  double max_lambda_x_op = 0.0;  // max over steps of lambda * ||X_{k+1}||_op
  double final_dist_to_opt = 0.0;  // NaN when the optimum is unknown
  bool incomplete = false;
};

/// Drives Algorithm steps against an oracle; one TraceRecord per
/// record_interval steps (plus the final step) is pushed to the sink.
/// Running averages are over every step, not just recorded ones.
RunSummary run(const GradOracle& oracle, const Mat& x1,
               const Hyperparams& hyper, std::int64_t steps,
               std::int64_t record_interval, const Rng& rng,
               const TraceSink& sink);

}  // namespace shamopt
