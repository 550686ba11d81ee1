#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shamopt/optimizer.hpp"

namespace shamopt {

struct ScheduleInput {
  std::int64_t steps;          // K
  double smoothness;           // L
  double gap;                  // f(X1) - f*
  double sigma_sq;             // sigma^2
  double gamma = 1.0;          // in (0, 1]
  double tau = 1.0;            // in (0, 1]
  std::optional<double> eps_hat;  // defaults to the derived eps
  Index m = 2;
  Index n = 2;
  ExponentPair pq = ExponentPair::shampoo();
};

struct ScheduleOutput {
  Hyperparams hyper;      // lambda set to lambda_max
  double sigma_hat_sq;
  double lambda_max;
  double eps_hat;
  double nu;
  double x1_op_bound;
  double rate_bound;
};

/// Hyperparameter plug-in from problem constants:
///   sigma_hat^2 = max{sigma^2, L*gap/(K*gamma^2)}
///   1 - theta   = sqrt(L*gap/(K*sigma_hat^2)),  beta = sqrt(theta)
///   eps         = tau*sigma_hat^2/(m+n)
///   eta         = sqrt(eps_hat*gap/(4*L*K*sigma_hat^2))
///   lambda_max  = K^{-3/4}/sqrt(1152*eps_hat) * (L^3*sigma_hat^2/gap)^{1/4}
ScheduleOutput derive(const ScheduleInput& input);

struct RegimeCheck {
  std::string name;
  double lhs;
  double rhs;
  bool pass;
};

struct RegimeReport {
  std::vector<RegimeCheck> checks;
  bool all_pass() const;
};

/// Hypotheses of the iterate-confinement bound: eta*lambda <= sqrt(nu)/(2K^{5/4}),
/// ||X1||_op <= sqrt(nu)/(K^{1/4} lambda), sqrt(nu)/K^{1/4} <= 1, and the
/// EMA band theta <= beta <= sqrt(theta) < 1.
RegimeReport check_regime(const Hyperparams& hyper, std::int64_t steps,
                          double nu, const Mat& x1);

}  // namespace shamopt
