#pragma once

#include <cmath>
#include <limits>

#include "shamopt/mat.hpp"

namespace shamopt {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Conjugate exponents (p, q) with 1/p + 1/q = 1, either possibly infinite.
/// 1/inf is taken as 0, so (inf, 1) and (1, inf) select one-sided
/// preconditioning; (2, 2) is the classical two-sided split.
struct ExponentPair {
  double p;
  double q;

  ExponentPair(double p_in, double q_in);

  static ExponentPair shampoo() { return ExponentPair(2.0, 2.0); }
  static ExponentPair right_only() { return ExponentPair(kInf, 1.0); }
  static ExponentPair left_only() { return ExponentPair(1.0, kInf); }

  bool left_active() const { return std::isfinite(p); }
  bool right_active() const { return std::isfinite(q); }
};

inline double inv_or_zero(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

/// Eigendecomposition of a SymPsd; eigenvalues ascending.
EigenDecomp sym_eig(const SymPsd& s);

/// U diag(max(lambda,0)^t) U^T. Eigenvalues in [-1e-10*lambda_max, 0) are
/// clamped to 0 before powering; t < 0 with a clamped-zero eigenvalue throws.
SymPsd psd_power(const SymPsd& s, double t);

/// Same power applied to a precomputed decomposition.
Mat psd_power_from_eig(const EigenDecomp& d, double t);

/// (sum sigma_i^p)^{1/p} for finite p >= 1; sigma_1 for p = inf.
double schatten_norm(const Mat& a, double p);

double nuclear_norm(const Mat& a);
double spectral_norm(const Mat& a);
double fro_norm(const Mat& a);

/// Singular values of a, descending. Computed from the smaller Gram matrix.
Vec singular_values(const Mat& a);

/// l_eps^{-1/(2p)} * m * r_eps^{-1/(2q)}; an infinite exponent skips that
/// side entirely (no eigendecomposition).
Mat precondition(const SymPsd& l_eps, const Mat& m, const SymPsd& r_eps,
                 const ExponentPair& pq);

}  // namespace shamopt
