#include "shamopt/oracles.hpp"

#include <cmath>

#include "shamopt/matfun.hpp"

namespace shamopt {

const OracleConstants GradOracle::no_constants_{};

Mat GradOracle::exact_grad(const Mat&) const {
  throw InvalidParameterError("oracle does not expose exact_grad");
}

double GradOracle::value(const Mat&) const {
  throw InvalidParameterError("oracle does not expose value");
}

ToyProblem::ToyProblem() {
  x_star_ = Mat::Constant(2, 2, 4.0);
  a_ = Mat::Constant(2, 2, 1.0);
  constants_.smoothness = 0.01;
  constants_.f_star = 0.0;
  // E||g - grad||_F^2 = 0.1||D-A-D/100||^2 + 0.9||-(D-10A/9)/10-D/100||^2
  // depends on D = X - X*, so no uniform sigma_sq is declared.
}

Mat ToyProblem::sample_grad(const Mat& x, Rng& rng) const {
  require_same_shape(x, x_star_, "ToyProblem::sample_grad");
  const Mat d = x - x_star_;
  if (rng.bernoulli(branch_prob())) {
    return d - a_;
  }
  return -0.1 * (d - (10.0 / 9.0) * a_);
}

Mat ToyProblem::exact_grad(const Mat& x) const {
  require_same_shape(x, x_star_, "ToyProblem::exact_grad");
  return (x - x_star_) / 100.0;
}

double ToyProblem::value(const Mat& x) const {
  require_same_shape(x, x_star_, "ToyProblem::value");
  return (x - x_star_).squaredNorm() / 200.0;
}

Mat ToyProblem::initial_point() const {
  Mat perturb(2, 2);
  perturb << -1.0, -2.0, 2.0, 1.0;
  return x_star_ + perturb;
}

namespace {

// Random orthogonal matrix via Gram-Schmidt on Gaussian columns.
Mat random_orthogonal(Index n, Rng& rng) {
  Mat g(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  // Fix signs so the factorization is unique for a given draw.
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < n; ++i) {
    if (r(i, i) < 0) q.col(i) = -q.col(i);
  }
  return q;
}

// PD matrix with eigenvalues spanning [1, condition].
Mat conditioned_pd(Index n, double condition, Rng& rng) {
  const Mat q = random_orthogonal(n, rng);
  Vec eigs(n);
  for (Index i = 0; i < n; ++i) {
    const double t = (n == 1) ? 0.0 : static_cast<double>(i) / (n - 1);
    eigs(i) = std::pow(condition, t);
  }
  return q * eigs.asDiagonal() * q.transpose();
}

class QuadraticOracle final : public GradOracle {
 public:
  QuadraticOracle(Index m, Index n, double condition, double noise,
                  std::uint64_t seed)
      : noise_(noise) {
    Rng rng(seed, /*stream=*/0x51ad);
    hl_ = conditioned_pd(m, condition, rng);
    hr_ = conditioned_pd(n, condition, rng);
    x0_ = Mat(m, n);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < n; ++j) x0_(i, j) = rng.normal();
    constants_.smoothness = spectral_norm(hl_) * spectral_norm(hr_);
    constants_.f_star = 0.0;
    constants_.sigma_sq = noise * noise * static_cast<double>(m * n);
  }

  Index rows() const override { return x0_.rows(); }
  Index cols() const override { return x0_.cols(); }

  Mat sample_grad(const Mat& x, Rng& rng) const override {
    Mat g = exact_grad(x);
    if (noise_ > 0.0) {
      for (Index i = 0; i < g.rows(); ++i)
        for (Index j = 0; j < g.cols(); ++j) g(i, j) += noise_ * rng.normal();
    }
    return g;
  }

  bool has_exact_grad() const override { return true; }
  Mat exact_grad(const Mat& x) const override {
    require_same_shape(x, x0_, "QuadraticOracle::exact_grad");
    return hl_ * (x - x0_) * hr_;
  }

  bool has_value() const override { return true; }
  double value(const Mat& x) const override {
    require_same_shape(x, x0_, "QuadraticOracle::value");
    const Mat d = x - x0_;
    return 0.5 * (d.transpose() * hl_ * d * hr_).trace();
  }

  const OracleConstants& constants() const override { return constants_; }
  std::optional<Mat> optimum() const override { return x0_; }

 private:
  Mat hl_, hr_, x0_;
  double noise_;
  OracleConstants constants_;
};

class FactorizationOracle final : public GradOracle {
 public:
  FactorizationOracle(Index m, Index n, double noise, std::uint64_t seed)
      : m_(m), n_(n), noise_(noise) {
    Rng rng(seed, /*stream=*/0xfac7);
    Mat b(m, n);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < n; ++j) b(i, j) = rng.normal();
    target_ = b * b.transpose();
    constants_.f_star = 0.0;
  }

  Index rows() const override { return m_; }
  Index cols() const override { return n_; }

  Mat sample_grad(const Mat& x, Rng& rng) const override {
    Mat g = exact_grad(x);
    if (noise_ > 0.0) {
      for (Index i = 0; i < g.rows(); ++i)
        for (Index j = 0; j < g.cols(); ++j) g(i, j) += noise_ * rng.normal();
    }
    return g;
  }

  bool has_exact_grad() const override { return true; }
  Mat exact_grad(const Mat& x) const override {
    if (x.rows() != m_ || x.cols() != n_) {
      throw ShapeError("FactorizationOracle::exact_grad: shape mismatch");
    }
    return (x * x.transpose() - target_) * x;
  }

  bool has_value() const override { return true; }
  double value(const Mat& x) const override {
    return 0.25 * (x * x.transpose() - target_).squaredNorm();
  }

  const OracleConstants& constants() const override { return constants_; }

 private:
  Index m_, n_;
  Mat target_;
  double noise_;
  OracleConstants constants_;
};

}  // namespace

std::unique_ptr<GradOracle> quadratic_oracle(Index m, Index n, double condition,
                                             double noise,
                                             std::uint64_t seed) {
  if (condition < 1.0 || noise < 0.0) {
    throw InvalidParameterError(
        "quadratic_oracle: need condition >= 1 and noise >= 0");
  }
  return std::make_unique<QuadraticOracle>(m, n, condition, noise, seed);
}

std::unique_ptr<GradOracle> matrix_factorization_oracle(Index m, Index n,
                                                        double noise,
                                                        std::uint64_t seed) {
  if (noise < 0.0) throw InvalidParameterError("noise must be >= 0");
  return std::make_unique<FactorizationOracle>(m, n, noise, seed);
}

Mat gaussian_grad(Index m, Index n, double mu, double xi, Rng& rng) {
  if (xi <= 0.0) throw InvalidParameterError("gaussian_grad: xi must be > 0");
  Mat g(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) g(i, j) = rng.normal(mu, xi);
  return g;
}

Mat finite_diff_grad(const GradOracle& oracle, const Mat& x, double h) {
  if (!oracle.has_value()) {
    throw InvalidParameterError("finite_diff_grad: oracle has no value()");
  }
  if (h <= 0.0) throw InvalidParameterError("finite_diff_grad: h must be > 0");
  Mat g(x.rows(), x.cols());
  Mat probe = x;
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) {
      probe(i, j) = x(i, j) + h;
      const double fp = oracle.value(probe);
      probe(i, j) = x(i, j) - h;
      const double fm = oracle.value(probe);
      probe(i, j) = x(i, j);
      g(i, j) = (fp - fm) / (2.0 * h);
    }
  }
  return g;
}

}  // namespace shamopt
