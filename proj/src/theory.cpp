#include "shamopt/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "shamopt/oracles.hpp"
#include "shamopt/schedule.hpp"

namespace shamopt {

namespace {

constexpr double kTol = 1e-9;

/// Margin accumulator for one suite; margin is relative to the RHS scale.
struct Margins {
  long trials = 0;
  long violations = 0;
  double worst = std::numeric_limits<double>::infinity();
  double tol = kTol;

  void add(double margin, double scale) {
    const double s = std::abs(scale) > 0.0 ? std::abs(scale) : 1.0;
    const double rel = margin / s;
    worst = std::min(worst, rel);
    if (rel < -tol) ++violations;
  }
  void trial() { ++trials; }

  PropertyReport report(std::string name, std::uint64_t seed,
                        std::string config) const {
    PropertyReport r;
    r.name = std::move(name);
    r.trials = trials;
    r.violations = violations;
    r.worst_slack = std::isfinite(worst) ? worst : 0.0;
    r.seed = seed;
    r.tolerance = tol;
    r.config = std::move(config);
    return r;
  }
};

const int kDims[] = {1, 2, 3, 6, 8};

int pick_dim(Rng& rng, int max_dim) {
  int d;
  do {
    d = kDims[rng.below(5)];
  } while (d > max_dim);
  return d;
}

Mat random_mat(Index m, Index n, Rng& rng) {
  Mat a(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = rng.normal();
  return a;
}

Mat random_orthogonal(Index n, Rng& rng) {
  Mat g = random_mat(n, n, rng);
  Eigen::HouseholderQR<Mat> qr(g);
  return qr.householderQ();
}

// PSD with controllable conditioning; rank_deficient drops ~half the
// eigenvalues to exactly zero.
Mat random_psd(Index n, Rng& rng, bool ill_conditioned, bool rank_deficient) {
  const Mat q = random_orthogonal(n, rng);
  Vec eigs(n);
  const double span = ill_conditioned ? 6.0 : 2.0;  // decades of spread
  for (Index i = 0; i < n; ++i) {
    eigs(i) = std::pow(10.0, rng.uniform(-span, 0.0));
  }
  if (rank_deficient && n > 1) {
    for (Index i = 0; i < n; ++i) {
      if (rng.bernoulli(0.5)) eigs(i) = 0.0;
    }
  }
  return q * eigs.asDiagonal() * q.transpose();
}

SymPsd random_pd(Index n, Rng& rng, bool ill_conditioned) {
  return SymPsd(random_psd(n, rng, ill_conditioned, false));
}

double heavy_tailed(Rng& rng) {
  // Student-t with 3 degrees of freedom.
  const double z = rng.normal();
  const double chi = rng.normal() * rng.normal() + rng.normal() * rng.normal() +
                     rng.normal() * rng.normal();
  return z / std::sqrt(std::max(chi / 3.0, 1e-12));
}

}  // namespace

std::string PropertyReport::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["trials"] = trials;
  j["violations"] = violations;
  j["worst_slack"] = worst_slack;
  j["seed"] = seed;
  j["tolerance"] = tolerance;
  j["config"] = config;
  return j.dump();
}

PropertyReport verify_schatten_holder(long trials, int max_dim,
                                      std::uint64_t seed) {
  Rng base(seed, 0x5c47);
  Margins m;
  for (long t = 0; t < trials; ++t) {
    Rng rng = base.split(t);
    m.trial();
    const int dim = pick_dim(rng, max_dim);
    const int count = rng.bernoulli(0.5) ? 2 : 3;
    // Conjugate exponent tuple via normalized positive weights.
    std::vector<double> w(count), p(count);
    double wsum = 0.0;
    for (auto& wi : w) {
      wi = rng.uniform(0.1, 1.0);
      wsum += wi;
    }
    for (int i = 0; i < count; ++i) p[i] = wsum / w[i];

    Mat prod = Mat::Identity(dim, dim);
    double rhs = 1.0;
    for (int i = 0; i < count; ++i) {
      const Mat a = random_mat(dim, dim, rng);
      prod = prod * a;
      rhs *= schatten_norm(a, p[i]);
    }
    const double lhs = schatten_norm(prod, 1.0);
    m.add(rhs - lhs, rhs);
  }
  return m.report("schatten_holder", seed,
                  "max_dim=" + std::to_string(max_dim));
}

PropertyReport verify_matrix_cauchy_schwarz(long trials, int max_dim,
                                            std::uint64_t seed) {
  Rng base(seed, 0xc5c5);
  Margins margins;
  for (long t = 0; t < trials; ++t) {
    Rng rng = base.split(t);
    margins.trial();
    const int m = pick_dim(rng, max_dim);
    const int n = pick_dim(rng, max_dim);
    const SymPsd l = random_pd(m, rng, rng.bernoulli(0.3));
    const SymPsd r = random_pd(n, rng, rng.bernoulli(0.3));
    const Mat mid = random_mat(m, n, rng);
    double alpha;
    switch (rng.below(3)) {
      case 0: alpha = 0.0; break;
      case 1: alpha = 1.0; break;
      default: alpha = rng.uniform();
    }
    const Mat lhs_mat = psd_power(l, alpha).matrix() * mid *
                        psd_power(r, 1.0 - alpha).matrix();
    const double lhs = spectral_norm(lhs_mat);
    const double rhs = std::pow(spectral_norm(l.matrix() * mid), alpha) *
                       std::pow(spectral_norm(mid * r.matrix()), 1.0 - alpha);
    margins.add(rhs - lhs, rhs);
  }
  return margins.report("matrix_cauchy_schwarz", seed,
                        "max_dim=" + std::to_string(max_dim));
}

PropertyReport verify_update_bound(long trials, int max_dim, int steps,
                                   std::uint64_t seed) {
  Rng base(seed, 0x0bd2);
  Margins margins;
  const ExponentPair fixed_pairs[] = {
      ExponentPair(2.0, 2.0), ExponentPair(4.0, 4.0 / 3.0),
      ExponentPair(1.0, kInf), ExponentPair(kInf, 1.0)};
  for (long t = 0; t < trials; ++t) {
    Rng rng = base.split(t);
    margins.trial();
    const int m = pick_dim(rng, max_dim);
    const int n = pick_dim(rng, max_dim);
    const double theta = rng.uniform(0.0, 0.999);
    const double beta = rng.uniform(theta, std::sqrt(theta));
    ExponentPair pq = fixed_pairs[t % 4];
    if (rng.bernoulli(0.2)) {
      const double u = rng.uniform(0.05, 0.95);
      pq = ExponentPair(1.0 / u, 1.0 / (1.0 - u));
    }
    Hyperparams hyper{0.01, theta, beta, 0.0,
                      std::pow(10.0, rng.uniform(-12.0, -2.0)), pq};
    const int stream_kind = static_cast<int>(rng.below(3));
    const Mat constant_g = random_mat(m, n, rng) * 10.0;

    OptimizerState state = init(Mat::Zero(m, n), hyper);
    for (int k = 0; k < steps; ++k) {
      Mat g;
      switch (stream_kind) {
        case 0: g = random_mat(m, n, rng); break;
        case 1: {
          g = Mat(m, n);
          for (Index i = 0; i < m; ++i)
            for (Index j = 0; j < n; ++j) g(i, j) = heavy_tailed(rng);
          break;
        }
        default: g = constant_g;
      }
      auto [next, diag] = step(state, g, hyper);
      state = std::move(next);
      margins.add(2.0 - diag.update_op_norm, 2.0);
    }
  }
  return margins.report("update_bound", seed,
                        "max_dim=" + std::to_string(max_dim) +
                            ",steps=" + std::to_string(steps));
}

PropertyReport verify_weight_confinement(long trials, std::uint64_t seed) {
  Rng base(seed, 0xb1b1);
  Margins margins;
  long skipped = 0;
  for (long t = 0; t < trials + skipped && margins.trials < trials; ++t) {
    Rng rng = base.split(t);
    const std::int64_t k_steps = 50 + static_cast<std::int64_t>(rng.below(350));
    const double kd = static_cast<double>(k_steps);
    // Keep 3 sqrt(nu)/K^{1/4} < 1 so ||X|| < 1/lambda is also implied.
    const double nu = rng.uniform(0.01, std::sqrt(kd) / 10.0);
    const double lambda = std::pow(10.0, rng.uniform(-3.0, 0.0));
    const double eta_cap = std::sqrt(nu) / (2.0 * std::pow(kd, 1.25) * lambda);
    const double eta = eta_cap * rng.uniform(0.1, 1.0);
    const double theta = rng.uniform(0.0, 0.999);
    const double beta = rng.uniform(theta, std::sqrt(theta));
    const int m = pick_dim(rng, 3);
    const int n = pick_dim(rng, 3);
    Hyperparams hyper{eta, theta, beta, lambda,
                      std::pow(10.0, rng.uniform(-12.0, -4.0)),
                      ExponentPair::shampoo()};

    Mat x1 = random_mat(m, n, rng);
    const double cap = std::sqrt(nu) / (std::pow(kd, 0.25) * lambda);
    const double x1_op = spectral_norm(x1);
    if (x1_op > 0.0) x1 *= rng.uniform(0.0, 1.0) * cap / x1_op;

    if (!check_regime(hyper, k_steps, nu, x1).all_pass()) {
      ++skipped;  // hypothesis not met; excluded, not a violation
      continue;
    }

    margins.trial();
    const double bound = 3.0 * std::sqrt(nu) / std::pow(kd, 0.25);
    margins.add(bound - lambda * spectral_norm(x1), bound);
    OptimizerState state = init(x1, hyper);
    for (std::int64_t k = 0; k < k_steps; ++k) {
      const Mat g = random_mat(m, n, rng) * std::pow(10.0, rng.uniform(-1, 1));
      auto [next, diag] = step(state, g, hyper);
      state = std::move(next);
      margins.add(bound - lambda * diag.x_op_norm, bound);
      margins.add(1.0 / lambda - diag.x_op_norm, 1.0 / lambda);
    }
  }
  return margins.report("weight_confinement", seed, "dims<=3");
}

PropertyReport verify_trace_root_subadd(long trials, int max_dim,
                                        std::uint64_t seed) {
  Rng base(seed, 0x7a5b);
  Margins m;
  for (long t = 0; t < trials; ++t) {
    Rng rng = base.split(t);
    m.trial();
    const int dim = pick_dim(rng, max_dim);
    const SymPsd x = random_pd(dim, rng, rng.bernoulli(0.3));
    const SymPsd y = rng.bernoulli(0.1)
                         ? SymPsd::zero(dim)
                         : random_pd(dim, rng, rng.bernoulli(0.3));
    const SymPsd sum(x.matrix() + y.matrix());
    const double rhs = psd_power(x, 0.5).matrix().trace() +
                       psd_power(y, 0.5).matrix().trace();
    const double lhs = psd_power(sum, 0.5).matrix().trace();
    m.add(rhs - lhs, rhs);
  }
  return m.report("trace_root_subadd", seed,
                  "max_dim=" + std::to_string(max_dim));
}

PropertyReport verify_operator_monotone(long trials, int max_dim,
                                        std::uint64_t seed) {
  Rng base(seed, 0x0903);
  Margins m;
  for (long t = 0; t < trials; ++t) {
    Rng rng = base.split(t);
    m.trial();
    const int dim = pick_dim(rng, max_dim);
    const SymPsd x = random_pd(dim, rng, rng.bernoulli(0.3));
    const Mat p = random_psd(dim, rng, false, rng.bernoulli(0.5));
    const SymPsd y(x.matrix() + p);
    double tt;
    switch (rng.below(3)) {
      case 0: tt = 0.0; break;
      case 1: tt = 1.0; break;
      default: tt = rng.uniform();
    }
    const Mat diff = psd_power(y, tt).matrix() - psd_power(x, tt).matrix();
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (diff + diff.transpose()));
    const double scale = spectral_norm(psd_power(y, tt).matrix());
    m.add(es.eigenvalues()(0), scale);
  }
  return m.report("operator_monotone", seed,
                  "max_dim=" + std::to_string(max_dim));
}

PropertyReport verify_agmg(long trials, std::uint64_t seed) {
  Rng base(seed, 0xa333);
  Margins m;
  for (long t = 0; t < trials; ++t) {
    Rng rng = base.split(t);
    m.trial();
    double x = std::abs(rng.normal()) * std::pow(10.0, rng.uniform(-3, 3));
    double y = std::abs(rng.normal()) * std::pow(10.0, rng.uniform(-3, 3));
    double a = rng.uniform();
    if (rng.bernoulli(0.05)) y = x;   // equality case
    if (rng.bernoulli(0.05)) a = 1.0; // endpoint
    const double b = 1.0 - a;
    const double lhs = std::pow(x, a) * std::pow(y, b);
    const double rhs = a * x + b * y;
    m.add(rhs - lhs, rhs);
  }
  return m.report("agmg", seed, "scalar");
}

PropertyReport verify_norm_chain(long trials, std::uint64_t seed) {
  Rng base(seed, 0x4c4c);
  Margins margins;
  margins.tol = 1e-9;
  for (long t = 0; t < trials; ++t) {
    Rng rng = base.split(t);
    margins.trial();
    const int m = pick_dim(rng, 8);
    const int n = pick_dim(rng, 8);
    Mat a;
    switch (rng.below(4)) {
      case 0: a = random_mat(m, 1, rng) * random_mat(1, n, rng); break;  // rank 1
      case 1: a = Mat::Identity(m, n); break;
      default: a = random_mat(m, n, rng);
    }
    const double r = static_cast<double>(std::min(m, n));
    const double fro = fro_norm(a);
    const double nuc = nuclear_norm(a);
    const double op = spectral_norm(a);
    margins.add(nuc - fro, nuc);
    margins.add(std::sqrt(r) * fro - nuc, std::sqrt(r) * fro);
    margins.add(r * op - nuc, r * op);
    // PSD matrices: nuclear norm equals the trace. Singular values are
    // computed through the Gram matrix (squared spectrum), which halves
    // the attainable precision, hence the wider 1e-7 allowance.
    const Mat s = random_psd(std::max(m, 2), rng, false, rng.bernoulli(0.3));
    const double tr = s.trace();
    margins.add(1e-7 * tr - std::abs(nuclear_norm(s) - tr),
                std::max(tr, 1.0));
  }
  return margins.report("norm_chain", seed, "dims<=8");
}

PropertyReport verify_gaussian_covariance(Index m, Index n, double mu,
                                          double xi, long samples,
                                          std::uint64_t seed) {
  Rng rng(seed, 0x6a55 + static_cast<std::uint64_t>(m * 131 + n) +
                    static_cast<std::uint64_t>(mu * 7 + xi * 13));
  Mat sum_l = Mat::Zero(m, m);
  Mat sumsq_l = Mat::Zero(m, m);
  Mat sum_r = Mat::Zero(n, n);
  Mat sumsq_r = Mat::Zero(n, n);
  double sum_f = 0.0, sumsq_f = 0.0;
  for (long s = 0; s < samples; ++s) {
    const Mat g = gaussian_grad(m, n, mu, xi, rng);
    const Mat ggt = g * g.transpose();
    const Mat gtg = g.transpose() * g;
    sum_l += ggt;
    sumsq_l += ggt.cwiseProduct(ggt);
    sum_r += gtg;
    sumsq_r += gtg.cwiseProduct(gtg);
    const double f2 = g.squaredNorm();
    sum_f += f2;
    sumsq_f += f2 * f2;
  }
  const double ns = static_cast<double>(samples);
  const double mean_f = sum_f / ns;
  const double se_f =
      std::sqrt(std::max(sumsq_f / ns - mean_f * mean_f, 0.0) / ns);

  Margins margins;
  margins.tol = 0.0;  // slack is carried by the 5-SE allowances directly
  auto check_side = [&](const Mat& sum, const Mat& sumsq, Index rows,
                        Index cols_other) {
    const double dim = static_cast<double>(rows);
    const Mat emp = sum / ns;
    Mat se(rows, rows);
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < rows; ++j) {
        const double var =
            std::max(sumsq(i, j) / ns - emp(i, j) * emp(i, j), 0.0);
        se(i, j) = std::sqrt(var / ns);
      }
    }
    const double coef = xi * xi / (dim * (xi * xi + mu * mu));
    const double bound = coef * mean_f;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (emp + emp.transpose()));
    const double lam_min = es.eigenvalues()(0);
    const double allowance = 5.0 * (se.norm() + coef * se_f);
    margins.trial();
    margins.add(lam_min - bound + allowance, std::max(bound, 1.0));
    // Closed form: cols_other*(mu^2 11^T + xi^2 I) entry-wise within 5 SE.
    const double nd = static_cast<double>(cols_other);
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < rows; ++j) {
        const double closed =
            nd * mu * mu + (i == j ? nd * xi * xi : 0.0);
        margins.add(5.0 * se(i, j) - std::abs(emp(i, j) - closed),
                    std::max(std::abs(closed), 1.0));
      }
    }
  };
  check_side(sum_l, sumsq_l, m, n);
  check_side(sum_r, sumsq_r, n, m);

  std::ostringstream cfg;
  cfg << "m=" << m << ",n=" << n << ",mu=" << mu << ",xi=" << xi
      << ",samples=" << samples;
  auto rep = margins.report("gaussian_covariance", seed, cfg.str());
  rep.trials = samples;
  return rep;
}

std::vector<PropertyReport> verify_all(long trials, std::uint64_t seed) {
  std::vector<PropertyReport> reports;
  reports.push_back(verify_schatten_holder(trials, 8, seed));
  reports.push_back(verify_matrix_cauchy_schwarz(trials, 8, seed));
  reports.push_back(verify_update_bound(100, 8, 200, seed));
  reports.push_back(verify_weight_confinement(50, seed));
  reports.push_back(verify_trace_root_subadd(trials, 8, seed));
  reports.push_back(verify_operator_monotone(trials, 8, seed));
  reports.push_back(verify_agmg(std::max(trials, 1000L), seed));
  reports.push_back(verify_norm_chain(trials, seed));
  for (Index dim : {2, 4, 8}) {
    for (auto [mu, xi] : {std::pair{0.0, 1.0}, {1.0, 1.0}, {2.0, 0.5}}) {
      reports.push_back(
          verify_gaussian_covariance(dim, dim, mu, xi, 100000, seed));
    }
  }
  return reports;
}

std::pair<double, double> fit_rate_slope(std::span<const TraceRecord> trace) {
  if (trace.size() < 10) {
    throw InvalidParameterError("fit_rate_slope: need at least 10 records");
  }
  const std::size_t start = trace.size() / 2;
  std::vector<double> xs, ys;
  for (std::size_t i = start; i < trace.size(); ++i) {
    const double y = trace[i].run_avg_grad_nuclear;
    if (trace[i].k > 0 && std::isfinite(y) && y > 0.0) {
      xs.push_back(std::log(static_cast<double>(trace[i].k)));
      ys.push_back(std::log(y));
    }
  }
  if (xs.size() < 2) {
    throw NumericError("fit_rate_slope: degenerate trace");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0 || syy <= 1e-20 * n * std::max(my * my, 1e-300)) {
    throw NumericError("fit_rate_slope: degenerate (constant) trace");
  }
  const double slope = sxy / sxx;
  const double r2 = (sxy * sxy) / (sxx * syy);
  return {slope, r2};
}

}  // namespace shamopt
