#pragma once

#include <Eigen/Dense>

#include "dgopt/digraph.hpp"

namespace dgopt {

/// Column-stochastic, nonnegative n x n mixing matrix. Entry (i, j) is the
/// weight agent j puts on the message it pushes to agent i.
class WeightMatrix {
 public:
  /// Validates nonnegativity and unit column sums (within `tolerance`).
  explicit WeightMatrix(Eigen::MatrixXd entries, double tolerance = 1e-12);

  const Eigen::MatrixXd& matrix() const { return entries_; }
  int size() const { return static_cast<int>(entries_.rows()); }
  double operator()(int i, int j) const { return entries_(i, j); }

 private:
  Eigen::MatrixXd entries_;
};

/// a_ij = 1/|N_out(j)| for i in N_out(j). Throws if `g` is not strongly
/// connected.
WeightMatrix uniform_weights(const Digraph& g);

/// Convex combination theta*I + (1-theta)*A, still column-stochastic.
WeightMatrix lazy_weights(const WeightMatrix& a, double theta);

struct PerronOptions {
  int max_iterations = 100000;
  double tolerance = 1e-14;
};

/// Right Perron vector and the limit A^k -> pi 1^T.
struct PerronLimit {
  Eigen::VectorXd pi;
  Eigen::MatrixXd limit;
};

/// Power iteration from the uniform vector; falls back to a dense
/// eigensolver when the iteration stalls. Throws std::runtime_error if
/// neither produces a positive eigenvector.
PerronLimit perron_limit(const WeightMatrix& w, const PerronOptions& options = {});

/// Vector norm ||v||_S = ||S^{-1} v||_2 under which A - A_inf contracts.
/// Acts on stacked agent states (n x p, one row per agent) through S ⊗ I_p,
/// so ||X||_S = ||S^{-1} X||_F.
class ContractionNorm {
 public:
  ContractionNorm() = default;
  ContractionNorm(Eigen::MatrixXcd transform, double sigma, double spectral_radius);

  double operator()(const Eigen::MatrixXd& stacked) const;
  double operator()(const Eigen::VectorXd& v) const;

  /// ||M||_S = ||S^{-1} M S||_2.
  double induced(const Eigen::MatrixXd& m) const;

  const Eigen::MatrixXcd& transform() const { return transform_; }
  const Eigen::MatrixXcd& inverse() const { return inverse_; }
  /// ||A - A_inf||_S.
  double sigma() const { return sigma_; }
  double spectral_radius() const { return rho_; }
  /// ||v||_2 <= c ||v||_S with c = ||S||_2.
  double c() const { return c_; }
  /// ||v||_S <= d ||v||_2 with d = ||S^{-1}||_2.
  double d() const { return d_; }

 private:
  Eigen::MatrixXcd transform_;
  Eigen::MatrixXcd inverse_;
  double sigma_ = 0.0;
  double rho_ = 0.0;
  double c_ = 1.0;
  double d_ = 1.0;
};

/// Builds S from a complex Schur factorisation A - A_inf = U T U^* and a
/// geometric scaling D = diag(1, t, t^2, ...), S = U D, with the largest t
/// that gives ||D^{-1} T D||_2 <= rho(A - A_inf) + slack. Uses S = I when
/// the plain 2-norm already meets the target.
ContractionNorm contraction_norm(const WeightMatrix& w, const PerronLimit& limit, double slack);

/// Largest |eigenvalue| of a dense square matrix.
double spectral_radius(const Eigen::MatrixXd& m);

/// Largest singular value.
double norm2(const Eigen::MatrixXd& m);

struct TauEps {
  double tau = 0.0;  ///< ||A - I||_2
  double eps = 0.0;  ///< ||I - A_inf||_2
};

TauEps tau_eps(const WeightMatrix& w, const PerronLimit& limit);

/// Everything the convergence analysis needs from the weight matrix.
struct SpectralData {
  Eigen::VectorXd pi;
  Eigen::MatrixXd limit;
  double tau = 0.0;
  double eps = 0.0;
  double sigma = 0.0;
  double rho = 0.0;  ///< rho(A - A_inf)
  ContractionNorm norm;
};

/// Default slack: half the spectral gap, 0.5 * (1 - rho(A - A_inf)).
SpectralData spectral_data(const WeightMatrix& w, double slack = -1.0);

}  // namespace dgopt
