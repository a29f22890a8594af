#include "dgopt/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dgopt {

void ConvergenceProfile::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("convergence profile: ") + what);
  };
  require(n >= 1, "n must be >= 1");
  require(sigma >= 0.0 && sigma < 1.0, "sigma must lie in [0, 1)");
  require(tau >= 0.0 && eps >= 0.0, "tau and eps must be nonnegative");
  require(l > 0.0 && s > 0.0, "l and s must be positive");
  require(s <= l, "s must not exceed l");
  require(y >= 1.0 && y_minus >= 1.0, "y and y_minus must be >= 1");
  require(c > 0.0 && d > 0.0, "c and d must be positive");
}

PushSumEnvelope push_sum_envelope(const WeightMatrix& w, const Eigen::VectorXd& pi,
                                  long max_iterations, double tolerance) {
  const auto n = w.size();
  const Eigen::VectorXd limit = static_cast<double>(n) * pi;
  PushSumEnvelope env;
  env.y_sup = std::max(1.0, limit.maxCoeff());
  env.y_minus_sup = std::max(1.0, limit.cwiseInverse().maxCoeff());
  Eigen::VectorXd y = Eigen::VectorXd::Ones(n);
  for (long k = 0;; ++k) {
    env.y_sup = std::max(env.y_sup, y.maxCoeff());
    env.y_minus_sup = std::max(env.y_minus_sup, y.cwiseInverse().maxCoeff());
    const double dev = (y - limit).cwiseAbs().maxCoeff();
    env.deviation.push_back(dev);
    if (dev <= tolerance || k >= max_iterations) break;
    y = w.matrix() * y;
  }
  return env;
}

ConvergenceProfile make_profile(const SpectralData& spectral, const PushSumEnvelope& envelope,
                                double l, double s) {
  ConvergenceProfile p;
  p.sigma = spectral.sigma;
  p.tau = spectral.tau;
  p.eps = spectral.eps;
  p.l = l;
  p.s = s;
  p.n = static_cast<int>(spectral.pi.size());
  p.y = envelope.y_sup;
  p.y_minus = envelope.y_minus_sup;
  p.c = spectral.norm.c();
  p.d = spectral.norm.d();
  p.validate();
  return p;
}

ConvergenceProfile make_profile(const WeightMatrix& w, const SpectralData& spectral,
                                const ObjectiveSet& objs) {
  if (static_cast<int>(objs.size()) != w.size()) {
    throw std::invalid_argument("objective count differs from weight matrix size");
  }
  return make_profile(spectral, push_sum_envelope(w, spectral.pi), network_lipschitz(objs),
                      network_strong_convexity(objs));
}

double eta(double alpha, int n, double l, double s) {
  return std::max(std::abs(1.0 - n * alpha * l), std::abs(1.0 - n * alpha * s));
}

namespace {

// Shorthand for the products that recur in G.
struct Coefficients {
  double a;  // c l y_-
  double b;  // c d eps l tau y_-
  double e;  // c d eps l^2 y y_-^2
  double f;  // d eps l^2 y y_-
  double g;  // c d eps l y_-
};

Coefficients coefficients(const ConvergenceProfile& p) {
  const double cdel = p.c * p.d * p.eps * p.l;
  return {p.c * p.l * p.y_minus, cdel * p.tau * p.y_minus, cdel * p.l * p.y * p.y_minus * p.y_minus,
          p.d * p.eps * p.l * p.l * p.y * p.y_minus, cdel * p.y_minus};
}

}  // namespace

Eigen::Matrix3d build_G(const ConvergenceProfile& p, double alpha) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be nonnegative");
  const Coefficients k = coefficients(p);
  Eigen::Matrix3d G;
  G << p.sigma, 0.0, alpha,
       alpha * k.a, eta(alpha, p.n, p.l, p.s), 0.0,
       k.b + alpha * k.e, alpha * k.f, p.sigma + alpha * k.g;
  return G;
}

Eigen::Matrix3d build_H(const ConvergenceProfile& p, double alpha, double gamma1, double T,
                        long k) {
  const double decay = T * std::pow(gamma1, static_cast<double>(k));
  Eigen::Matrix3d H = Eigen::Matrix3d::Zero();
  H(1, 0) = alpha * p.l * p.y_minus * decay;
  H(2, 0) = (alpha * p.l * p.y + 2.0) * p.d * p.eps * p.l * p.y_minus * p.y_minus * decay;
  return H;
}

std::array<std::complex<double>, 3> eigenvalues3(const Eigen::Matrix3d& m) {
  Eigen::EigenSolver<Eigen::Matrix3d> es(m, false);
  if (es.info() != Eigen::Success) throw std::runtime_error("3x3 eigensolver failed");
  const auto& ev = es.eigenvalues();
  return {ev(0), ev(1), ev(2)};
}

double spectral_radius3(const Eigen::Matrix3d& m) {
  double rho = 0.0;
  for (const auto& v : eigenvalues3(m)) rho = std::max(rho, std::abs(v));
  return rho;
}

double largest_real_eigenvalue(const Eigen::Matrix3d& m) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& v : eigenvalues3(m)) best = std::max(best, v.real());
  return best;
}

double characteristic(const ConvergenceProfile& p, double alpha, double q) {
  const Coefficients k = coefficients(p);
  const double h = eta(alpha, p.n, p.l, p.s);
  const double shifted = q - p.sigma;
  return (q - h) * (shifted * (shifted - alpha * k.g) - alpha * (k.b + alpha * k.e)) -
         alpha * alpha * alpha * k.a * k.f;
}

double alpha_root(const ConvergenceProfile& p) {
  p.validate();
  const double ns = p.n * p.s;
  const double cdel = p.c * p.d * p.eps * p.l;
  const double quad = cdel * p.l * p.y * p.y_minus * p.y_minus * (p.l + ns);
  const double delta = ns * cdel * p.y_minus * (1.0 - p.sigma + p.tau);
  const double constant = ns * (1.0 - p.sigma) * (1.0 - p.sigma);
  // (sqrt(delta^2 + 4 quad constant) - delta) / (2 quad), rationalised.
  return 2.0 * constant / (delta + std::sqrt(delta * delta + 4.0 * quad * constant));
}

double alpha_upper_bound(const ConvergenceProfile& p) {
  return std::min(alpha_root(p), 1.0 / (p.n * p.l));
}

double alpha_upper_bound_estimate(const ConvergenceProfile& p) {
  p.validate();
  const double ns = p.n * p.s;
  return std::sqrt(ns * (1.0 - p.sigma) * (1.0 - p.sigma) /
                   (p.c * p.d * p.eps * p.y * p.y_minus * p.y_minus * (p.l + ns) * p.l * p.l));
}

OptimalAlpha optimal_alpha(const ConvergenceProfile& p, std::span<const double> grid) {
  if (grid.empty()) throw std::invalid_argument("optimal_alpha: empty grid");
  OptimalAlpha best{0.0, std::numeric_limits<double>::infinity()};
  for (double alpha : grid) {
    const double rho = spectral_radius3(build_G(p, alpha));
    if (rho < best.rho || (rho == best.rho && alpha < best.alpha)) best = {alpha, rho};
  }
  return best;
}

DecayEnvelope fit_decay_envelope(std::span<const double> deviation, double floor) {
  std::vector<double> ks, values;
  for (std::size_t k = 0; k < deviation.size(); ++k) {
    if (deviation[k] > floor) {
      ks.push_back(static_cast<double>(k));
      values.push_back(deviation[k]);
    }
  }
  DecayEnvelope env;
  if (ks.empty()) return env;  // Y_k = Y_inf throughout
  if (ks.size() >= 2) {
    const LogLinearFit fit = fit_log_linear(ks, values);
    env.gamma1 = std::clamp(fit.rate(), 1e-300, 1.0 - 1e-12);
  }
  for (std::size_t i = 0; i < ks.size(); ++i) {
    env.T = std::max(env.T, values[i] / std::pow(env.gamma1, ks[i]));
  }
  return env;
}

Eigen::Vector3d t_vector(const AgentSwarm& s, const SpectralData& spectral,
                         const Eigen::VectorXd& z_star) {
  const double n = static_cast<double>(s.agents());
  const Eigen::VectorXd y_limit = n * spectral.pi;
  const Eigen::RowVectorXd x_avg = s.x.colwise().sum() / n;
  const Eigen::RowVectorXd g_avg = s.gradient.colwise().sum() / n;
  Eigen::Vector3d t;
  t(0) = spectral.norm(Eigen::MatrixXd(s.x - y_limit * x_avg));
  t(1) = std::sqrt(n) * (x_avg - z_star.transpose()).norm();
  t(2) = spectral.norm(Eigen::MatrixXd(s.w - y_limit * g_avg));
  return t;
}

namespace {
constexpr double kRoundingFactor = 1024.0;
}  // namespace

KeyRelationReport verify_key_relation(const std::vector<AgentSwarm>& states,
                                      const ConvergenceProfile& profile,
                                      const SpectralData& spectral,
                                      const Eigen::VectorXd& z_star, double alpha,
                                      const DecayEnvelope& envelope, double rel_tol) {
  KeyRelationReport report;
  report.worst_margin = std::numeric_limits<double>::infinity();
  if (states.size() < 2) return report;
  const Eigen::Matrix3d G = build_G(profile, alpha);
  Eigen::Vector3d previous = t_vector(states.front(), spectral, z_star);
  for (std::size_t k = 1; k < states.size(); ++k) {
    const Eigen::Vector3d current = t_vector(states[k], spectral, z_star);
    const Eigen::Matrix3d H =
        build_H(profile, alpha, envelope.gamma1, envelope.T, static_cast<long>(k) - 1);
    const Eigen::Vector3d forcing(states[k - 1].x.norm(), 0.0, 0.0);
    const Eigen::Vector3d bound = G * previous + H * forcing;
    // Differences of O(1) states cannot resolve errors below roughly
    // eps * ||state||; rows at that level are rounding noise.
    const double scale = states[k].x.norm() + states[k].w.norm() +
                         std::sqrt(static_cast<double>(profile.n)) * z_star.norm();
    const double noise = kRoundingFactor * std::numeric_limits<double>::epsilon() *
                         profile.d * scale;
    bool violated = false;
    for (int row = 0; row < 3; ++row) {
      if (bound(row) > noise) {
        const double margin = (bound(row) - current(row)) / bound(row);
        report.worst_margin = std::min(report.worst_margin, margin);
      }
      if (current(row) - bound(row) > rel_tol * bound(row) + noise) {
        ++report.row_violations[row];
        violated = true;
      }
    }
    if (violated) ++report.violations;
    ++report.steps;
    previous = current;
  }
  return report;
}

}  // namespace dgopt
