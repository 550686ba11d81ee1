#include "shamopt/matfun.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>

namespace shamopt {

namespace {

// Eigen's computeDirect is accurate for the tiny symmetric matrices that
// dominate here; fall back to the iterative solver above dim 3.
EigenDecomp eig_of(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> solver;
  if (m.rows() <= 3) {
    solver.computeDirect(m);
  } else {
    solver.compute(m);
  }
  if (solver.info() != Eigen::Success) {
    throw NumericError("sym_eig: eigen solver failed on " +
                       std::to_string(m.rows()) + "x" +
                       std::to_string(m.cols()) + " input");
  }
  return EigenDecomp{solver.eigenvalues(), solver.eigenvectors()};
}

}  // namespace

SymPsd::SymPsd(const Mat& s) {
  if (s.rows() != s.cols()) {
    throw ShapeError("SymPsd: input is " + std::to_string(s.rows()) + "x" +
                     std::to_string(s.cols()) + ", expected square");
  }
  require_finite(s, "SymPsd");
  m_ = 0.5 * (s + s.transpose());
  const EigenDecomp d = eig_of(m_);
  const double lmax = d.eigenvalues(d.eigenvalues.size() - 1);
  const double lmin = d.eigenvalues(0);
  if (lmax < 0.0 || lmin < -1e-10 * lmax) {
    throw InvalidParameterError(
        "SymPsd: matrix is not PSD within tolerance (lambda_min=" +
        std::to_string(lmin) + ", lambda_max=" + std::to_string(lmax) + ")");
  }
}

SymPsd SymPsd::ema(double beta, const Mat& term) const {
  require_same_shape(m_, term, "SymPsd::ema");
  Mat out = beta * m_ + (1.0 - beta) * term;
  out = 0.5 * (out + out.transpose());
  return SymPsd(std::move(out), Unchecked{});
}

ExponentPair::ExponentPair(double p_in, double q_in) : p(p_in), q(q_in) {
  const bool p_ok = (std::isinf(p) && p > 0) || p >= 1.0;
  const bool q_ok = (std::isinf(q) && q > 0) || q >= 1.0;
  if (!p_ok || !q_ok) {
    throw InvalidParameterError("ExponentPair: exponents must be >= 1 or inf");
  }
  if (std::abs(inv_or_zero(p) + inv_or_zero(q) - 1.0) > 1e-12) {
    throw InvalidParameterError("ExponentPair: 1/p + 1/q must equal 1");
  }
}

EigenDecomp sym_eig(const SymPsd& s) { return eig_of(s.matrix()); }

Mat psd_power_from_eig(const EigenDecomp& d, double t) {
  const Index n = d.eigenvalues.size();
  if (t == 0.0) return Mat::Identity(n, n);
  const double lmax = d.eigenvalues(n - 1);
  Vec powered(n);
  for (Index i = 0; i < n; ++i) {
    double lam = d.eigenvalues(i);
    if (lam < 0.0) lam = 0.0;  // within the -1e-10*lmax construction band
    if (lam == 0.0) {
      if (t < 0.0) {
        throw SingularityError(
            "psd_power: negative power of a singular matrix (lambda_max=" +
            std::to_string(lmax) + ")");
      }
      powered(i) = 0.0;
    } else {
      powered(i) = std::pow(lam, t);
    }
  }
  return d.eigenvectors * powered.asDiagonal() * d.eigenvectors.transpose();
}

SymPsd psd_power(const SymPsd& s, double t) {
  Mat m = psd_power_from_eig(sym_eig(s), t);
  m = 0.5 * (m + m.transpose());
  return SymPsd(std::move(m), SymPsd::Unchecked{});
}

Vec singular_values(const Mat& a) {
  // Eigenvalues of the smaller Gram matrix; sigma_i = sqrt(lambda_i).
  const bool wide = a.cols() > a.rows();
  const Mat gram = wide ? Mat(a * a.transpose()) : Mat(a.transpose() * a);
  const EigenDecomp d = eig_of(0.5 * (gram + gram.transpose()));
  const Index r = d.eigenvalues.size();
  Vec sv(r);
  for (Index i = 0; i < r; ++i) {
    sv(i) = std::sqrt(std::max(d.eigenvalues(r - 1 - i), 0.0));
  }
  return sv;
}

double schatten_norm(const Mat& a, double p) {
  if (!(p >= 1.0)) {
    throw InvalidParameterError("schatten_norm: p must be >= 1 or inf");
  }
  const Vec sv = singular_values(a);
  if (std::isinf(p)) return sv.size() > 0 ? sv(0) : 0.0;
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  if (smax == 0.0) return 0.0;
  // Factor out the largest singular value to avoid overflow at large p.
  double acc = 0.0;
  for (Index i = 0; i < sv.size(); ++i) acc += std::pow(sv(i) / smax, p);
  return smax * std::pow(acc, 1.0 / p);
}

double nuclear_norm(const Mat& a) { return singular_values(a).sum(); }

double spectral_norm(const Mat& a) {
  const Vec sv = singular_values(a);
  return sv.size() > 0 ? sv(0) : 0.0;
}

double fro_norm(const Mat& a) { return a.norm(); }

Mat precondition(const SymPsd& l_eps, const Mat& m, const SymPsd& r_eps,
                 const ExponentPair& pq) {
  if (l_eps.dim() != m.rows() || r_eps.dim() != m.cols()) {
    throw ShapeError("precondition: preconditioner dims " +
                     std::to_string(l_eps.dim()) + "/" +
                     std::to_string(r_eps.dim()) + " do not match " +
                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  Mat out = m;
  if (pq.left_active()) {
    out = psd_power(l_eps, -0.5 / pq.p).matrix() * out;
  }
  if (pq.right_active()) {
    out = out * psd_power(r_eps, -0.5 / pq.q).matrix();
  }
  return out;
}

}  // namespace shamopt
