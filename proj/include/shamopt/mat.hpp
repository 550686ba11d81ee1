#pragma once

#include <Eigen/Dense>

#include "shamopt/errors.hpp"

namespace shamopt {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

inline void require_finite(const Mat& a, const char* what) {
  if (!a.allFinite()) {
    throw NumericError(std::string(what) + ": non-finite entries");
  }
}

inline void require_same_shape(const Mat& a, const Mat& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(what) + ": shape mismatch (" +
                     std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                     " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()) + ")");
  }
}

/// Symmetric positive semidefinite matrix. Construction symmetrizes the
/// input and rejects eigenvalues below -1e-10 * lambda_max.
class SymPsd {
 public:
  SymPsd() : m_(0, 0) {}
  explicit SymPsd(const Mat& s);

  static SymPsd zero(Index dim) { return SymPsd(Mat::Zero(dim, dim), Unchecked{}); }
  static SymPsd identity(Index dim) {
    return SymPsd(Mat::Identity(dim, dim), Unchecked{});
  }

  Index dim() const { return m_.rows(); }
  const Mat& matrix() const { return m_; }

  /// EMA-style affine update beta*this + (1-beta)*term; term must be an
  /// exactly PSD product (e.g. G G^T), so the result skips the eigen check.
  SymPsd ema(double beta, const Mat& term) const;

  /// this + shift * I.
  SymPsd shifted(double shift) const {
    Mat out = m_;
    out.diagonal().array() += shift;
    return SymPsd(out, Unchecked{});
  }

  struct Unchecked {};
  SymPsd(Mat m, Unchecked) : m_(std::move(m)) {}

 private:
  Mat m_;
};

struct EigenDecomp {
  Vec eigenvalues;   // ascending
  Mat eigenvectors;  // orthonormal columns
};

}  // namespace shamopt
