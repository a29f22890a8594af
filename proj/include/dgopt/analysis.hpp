#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <span>
#include <vector>

#include "dgopt/algorithms.hpp"
#include "dgopt/objectives.hpp"
#include "dgopt/spectral.hpp"

namespace dgopt {

/// Scalar constants of a (graph, objective) pair that drive the linear
/// convergence bound.
struct ConvergenceProfile {
  double sigma = 0.0;    ///< ||A - A_inf||_S
  double tau = 0.0;      ///< ||A - I||_2
  double eps = 0.0;      ///< ||I - A_inf||_2
  double l = 0.0;        ///< per-agent Lipschitz constant
  double s = 0.0;        ///< per-agent strong-convexity constant
  int n = 0;             ///< agents
  double y = 1.0;        ///< sup_k ||Y_k||_2
  double y_minus = 1.0;  ///< sup_k ||Y_k^{-1}||_2
  double c = 1.0;        ///< ||v||_2 <= c ||v||_S
  double d = 1.0;        ///< ||v||_S <= d ||v||_2

  /// Throws std::invalid_argument on a violated field invariant.
  void validate() const;
};

/// Push-sum weights y_{k+1} = A y_k from y_0 = 1, followed until they settle.
struct PushSumEnvelope {
  double y_sup = 1.0;        ///< max(sup_k max_i y_k^i, max_i n pi_i)
  double y_minus_sup = 1.0;  ///< max(sup_k max_i 1/y_k^i, max_i 1/(n pi_i))
  std::vector<double> deviation;  ///< ||Y_k - Y_inf||_2 for k = 0, 1, ...
};

/// Iterates until ||y_k - n pi||_inf <= tolerance (or max_iterations).
PushSumEnvelope push_sum_envelope(const WeightMatrix& w, const Eigen::VectorXd& pi,
                                  long max_iterations = 100000, double tolerance = 1e-12);

ConvergenceProfile make_profile(const SpectralData& spectral, const PushSumEnvelope& envelope,
                                double l, double s);

/// Profile for weights `w` with the network constants l = max l_i and
/// s = min s_i of `objs`.
ConvergenceProfile make_profile(const WeightMatrix& w, const SpectralData& spectral,
                                const ObjectiveSet& objs);

/// max(|1 - n alpha l|, |1 - n alpha s|).
double eta(double alpha, int n, double l, double s);

/// The 3x3 matrix G_alpha bounding one step of the error vector t_k.
Eigen::Matrix3d build_G(const ConvergenceProfile& p, double alpha);

/// H_k: only the first column is nonzero, decaying like gamma1^k.
Eigen::Matrix3d build_H(const ConvergenceProfile& p, double alpha, double gamma1, double T,
                        long k);

std::array<std::complex<double>, 3> eigenvalues3(const Eigen::Matrix3d& m);
double spectral_radius3(const Eigen::Matrix3d& m);
/// Largest real part among the eigenvalues (the Perron root for G >= 0).
double largest_real_eigenvalue(const Eigen::Matrix3d& m);

/// det(qI - G_alpha) evaluated in factored form.
double characteristic(const ConvergenceProfile& p, double alpha, double q);

/// Positive root of det(I - G_alpha) on the branch eta = 1 - n alpha s (no
/// cap). It is the unit-eigenvalue crossing whenever it is <= 1/(n l).
double alpha_root(const ConvergenceProfile& p);
/// min(alpha_root, 1/(n l)).
double alpha_upper_bound(const ConvergenceProfile& p);
/// Large-gap approximation sqrt(ns (1-sigma)^2 / (cd eps y y_-^2 (l+ns) l^2)).
double alpha_upper_bound_estimate(const ConvergenceProfile& p);

struct OptimalAlpha {
  double alpha = 0.0;
  double rho = 0.0;
};

/// Grid argmin of rho(G_alpha), ties to the smaller alpha.
OptimalAlpha optimal_alpha(const ConvergenceProfile& p, std::span<const double> grid);

/// Envelope ||Y_k - Y_inf||_2 <= T gamma1^k.
struct DecayEnvelope {
  double gamma1 = 0.5;
  double T = 0.0;
};

/// Least-squares fit of log deviation over samples above `floor`, then T
/// raised until the envelope dominates every such sample. An all-zero
/// sequence (doubly-stochastic weights) gives T = 0.
DecayEnvelope fit_decay_envelope(std::span<const double> deviation, double floor = 1e-13);

/// [ ||x - Y_inf xbar||_S, ||xbar - z*||_2, ||w - Y_inf g||_S ].
Eigen::Vector3d t_vector(const AgentSwarm& s, const SpectralData& spectral,
                         const Eigen::VectorXd& z_star);

struct KeyRelationReport {
  int steps = 0;
  int violations = 0;
  std::array<int, 3> row_violations{};
  /// min over k and rows of (rhs - lhs) / max(rhs, 1e-300); negative means
  /// a violation.
  double worst_margin = 0.0;
};

/// Checks t_k <= G t_{k-1} + H_{k-1} s_{k-1} elementwise along an ADD-OPT
/// trajectory, with s_k = [||x_k||_2, 0, 0]. A row counts as violated when
/// lhs exceeds rhs by more than `rel_tol` * rhs plus a rounding floor
/// proportional to machine epsilon times the state magnitude.
KeyRelationReport verify_key_relation(const std::vector<AgentSwarm>& states,
                                      const ConvergenceProfile& profile,
                                      const SpectralData& spectral,
                                      const Eigen::VectorXd& z_star, double alpha,
                                      const DecayEnvelope& envelope, double rel_tol = 1e-10);

}  // namespace dgopt
