#include "shamopt/optimizer.hpp"

#include <cmath>
#include <limits>

namespace shamopt {

void Hyperparams::validate() const {
  if (!(eta > 0.0)) throw InvalidParameterError("Hyperparams: eta must be > 0");
  if (!(theta >= 0.0 && theta < 1.0)) {
    throw InvalidParameterError("Hyperparams: theta must be in [0, 1)");
  }
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw InvalidParameterError("Hyperparams: beta must be in [0, 1)");
  }
  if (!(lambda >= 0.0)) {
    throw InvalidParameterError("Hyperparams: lambda must be >= 0");
  }
  if (!(eps > 0.0)) {
    // eps = 0 would leave negative powers of a possibly singular L_k
    // undefined at the first steps.
    throw InvalidParameterError("Hyperparams: eps must be > 0");
  }
}

bool Hyperparams::theorem_regime() const {
  return theta <= beta && beta <= std::sqrt(theta) && beta < 1.0;
}

OptimizerState init(const Mat& x1, const Hyperparams& hyper) {
  hyper.validate();
  require_finite(x1, "init");
  return OptimizerState{
      x1,
      Mat::Zero(x1.rows(), x1.cols()),
      SymPsd::zero(x1.rows()),
      SymPsd::zero(x1.cols()),
      0,
  };
}

std::pair<OptimizerState, StepDiagnostics> step(const OptimizerState& state,
                                                const Mat& g,
                                                const Hyperparams& hyper) {
  require_same_shape(state.x, g, "step");
  require_finite(g, "step");

  const Mat m_mom = hyper.theta * state.m_mom + (1.0 - hyper.theta) * g;
  const SymPsd l = state.l.ema(hyper.beta, g * g.transpose());
  const SymPsd r = state.r.ema(hyper.beta, g.transpose() * g);
  const SymPsd l_eps = l.shifted(hyper.eps);
  const SymPsd r_eps = r.shifted(hyper.eps);

  // The analytic spectra satisfy L_k + eps*I >= eps*I, but at large
  // gradient magnitudes the eigensolver's absolute error can swamp eps;
  // flooring restores the guaranteed lower bound before negative powers.
  EigenDecomp l_eig = sym_eig(l_eps);
  EigenDecomp r_eig = sym_eig(r_eps);
  l_eig.eigenvalues = l_eig.eigenvalues.cwiseMax(hyper.eps);
  r_eig.eigenvalues = r_eig.eigenvalues.cwiseMax(hyper.eps);

  Mat update = m_mom;
  if (hyper.pq.left_active()) {
    update = psd_power_from_eig(l_eig, -0.5 / hyper.pq.p) * update;
  }
  if (hyper.pq.right_active()) {
    update = update * psd_power_from_eig(r_eig, -0.5 / hyper.pq.q);
  }

  Mat x_next = (1.0 - hyper.lambda * hyper.eta) * state.x - hyper.eta * update;

  StepDiagnostics diag;
  diag.update_op_norm = spectral_norm(update);
  diag.x_op_norm = spectral_norm(x_next);
  diag.trace_l_sqrt = l_eig.eigenvalues.array().max(0.0).sqrt().sum();
  diag.trace_r_sqrt = r_eig.eigenvalues.array().max(0.0).sqrt().sum();

  return {OptimizerState{std::move(x_next), m_mom, l, r, state.k + 1}, diag};
}

RunSummary run(const GradOracle& oracle, const Mat& x1,
               const Hyperparams& hyper, std::int64_t steps,
               std::int64_t record_interval, const Rng& rng,
               const TraceSink& sink) {
  if (steps < 1) throw InvalidParameterError("run: steps must be >= 1");
  if (record_interval < 1) {
    throw InvalidParameterError("run: record_interval must be >= 1");
  }

  constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
  const bool exact = oracle.has_exact_grad();
  const bool valued = oracle.has_value();
  const std::optional<Mat> opt = oracle.optimum();

  OptimizerState state = init(x1, hyper);
  Rng stream = rng;

  RunSummary summary;
  summary.min_grad_fro = std::numeric_limits<double>::infinity();
  summary.final_dist_to_opt = kNan;
  double sum_grad_fro = 0.0;
  double sum_grad_nuc = 0.0;
  double rec_grad_sum = 0.0;
  std::int64_t rec_count = 0;

  for (std::int64_t k = 1; k <= steps; ++k) {
    double grad_fro = kNan, grad_nuc = kNan;
    if (exact) {
      const Mat gexact = oracle.exact_grad(state.x);
      grad_fro = fro_norm(gexact);
      grad_nuc = nuclear_norm(gexact);
      sum_grad_fro += grad_fro;
      sum_grad_nuc += grad_nuc;
    }

    TraceRecord rec;
    const bool record = (k % record_interval == 0) || k == steps;
    if (record) {
      rec.k = k;
      rec.f_value = valued ? oracle.value(state.x) : kNan;
      rec.grad_fro = grad_fro;
      rec.grad_nuclear = grad_nuc;
      rec.run_avg_grad_fro = exact ? sum_grad_fro / k : kNan;
      rec.run_avg_grad_nuclear = exact ? sum_grad_nuc / k : kNan;
      rec.dist_to_opt = opt ? fro_norm(state.x - *opt) : kNan;
    }

    StepDiagnostics diag;
    try {
      const Mat g = oracle.sample_grad(state.x, stream);
      auto [next, d] = step(state, g, hyper);
      state = std::move(next);
      diag = d;
    } catch (const std::exception&) {
      summary.incomplete = true;
      break;
    }

    summary.steps_done = k;
    summary.max_update_op_norm =
        std::max(summary.max_update_op_norm, diag.update_op_norm);
    summary.max_lambda_x_op =
        std::max(summary.max_lambda_x_op, hyper.lambda * diag.x_op_norm);

    if (record) {
      rec.update_op_norm = diag.update_op_norm;
      rec.x_op_norm = diag.x_op_norm;
      rec.trace_l_sqrt = diag.trace_l_sqrt;
      rec.trace_r_sqrt = diag.trace_r_sqrt;
      if (sink) sink(rec);
      if (exact) {
        rec_grad_sum += grad_fro;
        ++rec_count;
        summary.min_grad_fro = std::min(summary.min_grad_fro, grad_fro);
        summary.final_run_avg_grad_fro = rec.run_avg_grad_fro;
      }
      if (opt) summary.final_dist_to_opt = rec.dist_to_opt;
    }
  }

  summary.mean_grad_fro = rec_count > 0 ? rec_grad_sum / rec_count : kNan;
  if (rec_count == 0) summary.min_grad_fro = kNan;
  summary.final_state = std::move(state);
  return summary;
}

}  // namespace shamopt
