#pragma once

#include <memory>
#include <optional>

#include "shamopt/mat.hpp"
#include "shamopt/rng.hpp"

namespace shamopt {

struct OracleConstants {
  std::optional<double> smoothness;  // Lipschitz constant of the gradient
  std::optional<double> sigma_sq;    // bound on E||G - grad f||_F^2
  std::optional<double> f_star;      // lower bound of f
};

/// Stochastic gradient oracle over an m x n matrix parameter. Immutable
/// after construction; sample_grad is safe concurrently as long as each
/// caller owns its Rng stream.
class GradOracle {
 public:
  virtual ~GradOracle() = default;

  virtual Index rows() const = 0;
  virtual Index cols() const = 0;

  virtual Mat sample_grad(const Mat& x, Rng& rng) const = 0;

  virtual bool has_exact_grad() const { return false; }
  virtual Mat exact_grad(const Mat& x) const;

  virtual bool has_value() const { return false; }
  virtual double value(const Mat& x) const;

  virtual const OracleConstants& constants() const { return no_constants_; }

  /// Known minimizer, when the problem has one in closed form.
  virtual std::optional<Mat> optimum() const { return std::nullopt; }

 private:
  static const OracleConstants no_constants_;
};

/// The 2x2 stochastic convex test problem f(X) = ||X - X*||_F^2 / 200 with
/// a two-branch gradient sampler: X - X* - A with probability 0.1, and
/// -(X - X* - (10/9)A)/10 otherwise. The sample mean is (X - X*)/100.
class ToyProblem final : public GradOracle {
 public:
  ToyProblem();

  Index rows() const override { return 2; }
  Index cols() const override { return 2; }
  Mat sample_grad(const Mat& x, Rng& rng) const override;
  bool has_exact_grad() const override { return true; }
  Mat exact_grad(const Mat& x) const override;
  bool has_value() const override { return true; }
  double value(const Mat& x) const override;
  const OracleConstants& constants() const override { return constants_; }
  std::optional<Mat> optimum() const override { return x_star_; }

  const Mat& x_star() const { return x_star_; }
  const Mat& a() const { return a_; }
  double branch_prob() const { return 0.1; }

  /// The paper's initial point X* + [[-1,-2],[2,1]].
  Mat initial_point() const;

 private:
  Mat x_star_;
  Mat a_;
  OracleConstants constants_;
};

/// f(X) = 0.5 <X - X0, H_L (X - X0) H_R> with PD factors of the given
/// condition number and additive Gaussian gradient noise.
std::unique_ptr<GradOracle> quadratic_oracle(Index m, Index n, double condition,
                                             double noise, std::uint64_t seed);

/// Nonconvex symmetric factorization f(X) = 0.25 ||X X^T - S||_F^2 for a
/// random PSD target S of the given rank, with additive gradient noise.
std::unique_ptr<GradOracle> matrix_factorization_oracle(Index m, Index n,
                                                        double noise,
                                                        std::uint64_t seed);

/// m x n matrix of independent N(mu, xi^2) draws (xi is a standard
/// deviation; entry variance is xi^2).
Mat gaussian_grad(Index m, Index n, double mu, double xi, Rng& rng);

/// Central differences of oracle.value() entry-wise.
Mat finite_diff_grad(const GradOracle& oracle, const Mat& x, double h);

}  // namespace shamopt
