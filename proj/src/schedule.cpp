#include "shamopt/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace shamopt {

ScheduleOutput derive(const ScheduleInput& in) {
  if (in.steps < 1) throw InfeasibleScheduleError("derive: K must be >= 1");
  if (!(in.smoothness > 0.0)) {
    throw InfeasibleScheduleError("derive: L must be > 0");
  }
  if (!(in.gap > 0.0)) {
    throw InfeasibleScheduleError("derive: gap f(X1)-f* must be > 0");
  }
  if (!(in.sigma_sq >= 0.0)) {
    throw InfeasibleScheduleError("derive: sigma^2 must be >= 0");
  }
  if (!(in.gamma > 0.0 && in.gamma <= 1.0)) {
    throw InfeasibleScheduleError("derive: gamma must be in (0, 1]");
  }
  if (!(in.tau > 0.0 && in.tau <= 1.0)) {
    throw InfeasibleScheduleError("derive: tau must be in (0, 1]");
  }

  const double k = static_cast<double>(in.steps);
  const double l = in.smoothness;
  const double gap = in.gap;
  const double sigma_hat_sq =
      std::max(in.sigma_sq, l * gap / (k * in.gamma * in.gamma));

  const double one_minus_theta = std::sqrt(l * gap / (k * sigma_hat_sq));
  if (!(one_minus_theta > 0.0 && one_minus_theta <= 1.0)) {
    throw InfeasibleScheduleError(
        "derive: 1-theta = " + std::to_string(one_minus_theta) +
        " leaves theta outside [0, 1); increase K or sigma^2");
  }
  const double theta = 1.0 - one_minus_theta;
  const double beta = std::sqrt(theta);

  const double eps = in.tau * sigma_hat_sq / static_cast<double>(in.m + in.n);
  const double eps_hat = in.eps_hat.value_or(eps);
  if (!(eps_hat >= eps)) {
    throw InfeasibleScheduleError("derive: eps_hat must be >= eps");
  }

  const double eta = std::sqrt(eps_hat * gap / (4.0 * l * k * sigma_hat_sq));
  const double lambda_max = std::pow(k, -0.75) / std::sqrt(1152.0 * eps_hat) *
                            std::pow(l * l * l * sigma_hat_sq / gap, 0.25);
  const double nu = std::sqrt(l * gap / sigma_hat_sq) / 1152.0;
  const double x1_op_bound = std::sqrt(eps_hat * k * gap / (l * sigma_hat_sq));

  const double rate_bound =
      (8.0 * std::sqrt(static_cast<double>(in.m + in.n)) +
       119.0 * std::sqrt(sigma_hat_sq / eps_hat)) *
      std::max(std::pow(in.sigma_sq * l * gap / k, 0.25),
               std::sqrt(l * gap / (k * in.gamma)));

  ScheduleOutput out;
  out.hyper = Hyperparams{eta, theta, beta, lambda_max, eps, in.pq};
  out.hyper.validate();
  out.sigma_hat_sq = sigma_hat_sq;
  out.lambda_max = lambda_max;
  out.eps_hat = eps_hat;
  out.nu = nu;
  out.x1_op_bound = x1_op_bound;
  out.rate_bound = rate_bound;
  return out;
}

bool RegimeReport::all_pass() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

namespace {

// Derived settings hit some hypotheses with exact analytic equality
// (eta*lambda_max equals its cap), so comparisons get relative slack.
bool le_tol(double lhs, double rhs) {
  return lhs <= rhs + 1e-9 * std::abs(rhs);
}

}  // namespace

RegimeReport check_regime(const Hyperparams& hyper, std::int64_t steps,
                          double nu, const Mat& x1) {
  const double k = static_cast<double>(steps);
  const double sqrt_nu = std::sqrt(nu);
  const double x1_op = spectral_norm(x1);

  RegimeReport report;
  report.checks.push_back({"eta*lambda <= sqrt(nu)/(2K^{5/4})",
                           hyper.eta * hyper.lambda,
                           sqrt_nu / (2.0 * std::pow(k, 1.25)),
                           le_tol(hyper.eta * hyper.lambda,
                                  sqrt_nu / (2.0 * std::pow(k, 1.25)))});
  // lambda = 0 makes the X1 bound vacuous.
  const double x1_bound = hyper.lambda > 0.0
                              ? sqrt_nu / (std::pow(k, 0.25) * hyper.lambda)
                              : std::numeric_limits<double>::infinity();
  report.checks.push_back(
      {"||X1||_op <= sqrt(nu)/(K^{1/4} lambda)", x1_op, x1_bound,
       le_tol(x1_op, x1_bound)});
  report.checks.push_back({"sqrt(nu)/K^{1/4} <= 1",
                           sqrt_nu / std::pow(k, 0.25), 1.0,
                           le_tol(sqrt_nu / std::pow(k, 0.25), 1.0)});
  report.checks.push_back({"theta <= beta", hyper.theta, hyper.beta,
                           hyper.theta <= hyper.beta});
  report.checks.push_back({"beta <= sqrt(theta) < 1", hyper.beta,
                           std::sqrt(hyper.theta),
                           le_tol(hyper.beta, std::sqrt(hyper.theta)) &&
                               hyper.beta < 1.0});
  return report;
}

}  // namespace shamopt
