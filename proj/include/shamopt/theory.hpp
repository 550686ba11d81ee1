#pragma once

#include <span>
#include <string>
#include <vector>

#include "shamopt/optimizer.hpp"
#include "shamopt/trace.hpp"

namespace shamopt {

/// Result of one randomized inequality suite. A trial counts as a
/// violation when its margin (RHS - LHS) falls below -tolerance * scale,
/// where scale is the RHS magnitude (1 when the RHS is 0).
struct PropertyReport {
  std::string name;
  long trials = 0;
  long violations = 0;
  double worst_slack = 0.0;  // most negative relative margin observed
  std::uint64_t seed = 0;
  double tolerance = 0.0;
  std::string config;

  std::string to_json() const;
};

// Schatten-Holder: ||A1 A2 A3||_S1 <= prod ||Ai||_S{pi}, sum 1/pi = 1.
PropertyReport verify_schatten_holder(long trials, int max_dim,
                                      std::uint64_t seed);

// ||L^a M R^{1-a}||_op <= ||LM||_op^a ||MR||_op^{1-a} for PD L, R.
PropertyReport verify_matrix_cauchy_schwarz(long trials, int max_dim,
                                            std::uint64_t seed);

// Preconditioned-update spectral norm <= 2 whenever theta <= beta <=
// sqrt(theta) < 1, over random gradient streams and exponent pairs.
PropertyReport verify_update_bound(long trials, int max_dim, int steps,
                                   std::uint64_t seed);

// lambda ||X_k||_op <= 3 sqrt(nu) / K^{1/4} under the confinement
// hypotheses; also checks ||X_k||_op < 1/lambda throughout.
PropertyReport verify_weight_confinement(long trials, std::uint64_t seed);

// tr((X+Y)^{1/2}) <= tr(X^{1/2}) + tr(Y^{1/2}) for PD X, Y.
PropertyReport verify_trace_root_subadd(long trials, int max_dim,
                                        std::uint64_t seed);

// X <= Y implies X^t <= Y^t for t in [0, 1].
PropertyReport verify_operator_monotone(long trials, int max_dim,
                                        std::uint64_t seed);

// x^a y^b <= a x + b y for a + b = 1.
PropertyReport verify_agmg(long trials, std::uint64_t seed);

// ||A||_F <= ||A||_* <= sqrt(r) ||A||_F, ||A||_* <= r ||A||_op, and
// nuclear == trace for PSD inputs.
PropertyReport verify_norm_chain(long trials, std::uint64_t seed);

// Monte Carlo check that E[G G^T] >= (xi^2/(m(xi^2+mu^2))) E||G||_F^2 I
// and matches the closed form n mu^2 11^T + n xi^2 I within 5 SE.
PropertyReport verify_gaussian_covariance(Index m, Index n, double mu,
                                          double xi, long samples,
                                          std::uint64_t seed);

/// Runs every suite at its default configuration.
std::vector<PropertyReport> verify_all(long trials, std::uint64_t seed);

/// OLS slope of log(run_avg_grad_nuclear) vs log(k) over the latter half
/// of the trace. Returns (slope, r_squared).
std::pair<double, double> fit_rate_slope(std::span<const TraceRecord> trace);

}  // namespace shamopt
