#include "dgopt/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace dgopt {

WeightMatrix::WeightMatrix(Eigen::MatrixXd entries, double tolerance)
    : entries_(std::move(entries)) {
  if (entries_.rows() == 0 || entries_.rows() != entries_.cols()) {
    throw std::invalid_argument("weight matrix must be square and nonempty");
  }
  if ((entries_.array() < 0.0).any()) {
    throw std::invalid_argument("weight matrix has negative entries");
  }
  for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
    double sum = entries_.col(j).sum();
    if (std::abs(sum - 1.0) > tolerance) {
      throw std::invalid_argument("column " + std::to_string(j) + " sums to " +
                                  std::to_string(sum) + ", not 1");
    }
  }
}

WeightMatrix uniform_weights(const Digraph& g) {
  if (!is_strongly_connected(g)) {
    throw std::invalid_argument("uniform weights require a strongly-connected digraph");
  }
  const int n = g.size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    const double share = 1.0 / g.out_degree(j);
    for (int i : g.out_neighbors(j)) a(i, j) = share;
  }
  return WeightMatrix(std::move(a));
}

WeightMatrix lazy_weights(const WeightMatrix& a, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in [0, 1]");
  const auto n = a.size();
  return WeightMatrix(theta * Eigen::MatrixXd::Identity(n, n) + (1.0 - theta) * a.matrix());
}

double norm2(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

namespace {

double norm2(const Eigen::MatrixXcd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

}  // namespace

double spectral_radius(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

PerronLimit perron_limit(const WeightMatrix& w, const PerronOptions& options) {
  const Eigen::MatrixXd& a = w.matrix();
  const auto n = a.rows();
  Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  bool converged = false;
  for (int it = 0; it < options.max_iterations; ++it) {
    Eigen::VectorXd next = a * v;
    next /= next.sum();
    double change = (next - v).lpNorm<Eigen::Infinity>();
    v = std::move(next);
    if (change <= options.tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(a);
    if (es.info() != Eigen::Success) {
      throw std::runtime_error("Perron vector: power iteration and eigensolver both failed");
    }
    Eigen::Index best = 0;
    (es.eigenvalues().array() - 1.0).abs().minCoeff(&best);
    v = es.eigenvectors().col(best).real();
    v /= v.sum();
  }
  if ((v.array() <= 0.0).any() || !v.allFinite()) {
    throw std::runtime_error("Perron vector is not strictly positive; matrix not irreducible?");
  }
  PerronLimit out;
  out.limit = v * Eigen::RowVectorXd::Ones(n);
  out.pi = std::move(v);
  return out;
}

ContractionNorm::ContractionNorm(Eigen::MatrixXcd transform, double sigma,
                                 double spectral_radius)
    : transform_(std::move(transform)), sigma_(sigma), rho_(spectral_radius) {
  inverse_ = transform_.inverse();
  c_ = norm2(transform_);
  d_ = norm2(inverse_);
}

double ContractionNorm::operator()(const Eigen::MatrixXd& stacked) const {
  return (inverse_ * stacked.cast<std::complex<double>>()).norm();
}

double ContractionNorm::operator()(const Eigen::VectorXd& v) const {
  return (inverse_ * v.cast<std::complex<double>>()).norm();
}

double ContractionNorm::induced(const Eigen::MatrixXd& m) const {
  return norm2(Eigen::MatrixXcd(inverse_ * m.cast<std::complex<double>>() * transform_));
}

ContractionNorm contraction_norm(const WeightMatrix& w, const PerronLimit& limit, double slack) {
  if (!(slack > 0.0)) throw std::invalid_argument("contraction slack must be positive");
  using Complex = std::complex<double>;
  const Eigen::MatrixXd m = w.matrix() - limit.limit;
  const auto n = m.rows();

  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(m.cast<Complex>());
  if (schur.info() != Eigen::Success) throw std::runtime_error("Schur factorisation failed");
  const Eigen::MatrixXcd& t = schur.matrixT();
  const Eigen::MatrixXcd& u = schur.matrixU();
  const double rho = t.diagonal().cwiseAbs().maxCoeff();
  const double target = rho + slack;
  if (target >= 1.0) {
    throw std::invalid_argument("rho(A - A_inf) + slack must stay below 1");
  }

  const Eigen::MatrixXcd identity = Eigen::MatrixXcd::Identity(n, n);
  if (norm2(m) <= target) return ContractionNorm(identity, norm2(m), rho);

  // ||D^{-1} T D||_2 with D = diag(1, s, s^2, ...)
  auto scaled_norm = [&](double s) {
    Eigen::MatrixXcd scaled = t;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) scaled(i, j) *= std::pow(s, double(j - i));
    }
    return norm2(scaled);
  };

  constexpr double kMinScale = 1e-150;
  double good = 0.5;
  double bad = 1.0;
  while (scaled_norm(good) > target) {
    bad = good;
    good *= 0.5;
    if (std::pow(good, double(n - 1)) < kMinScale) {
      throw std::runtime_error("contraction norm scaling left the representable range; "
                               "increase slack");
    }
  }
  for (int it = 0; it < 60 && bad / good > 1.0 + 1e-6; ++it) {
    double mid = std::sqrt(good * bad);
    if (scaled_norm(mid) <= target) {
      good = mid;
    } else {
      bad = mid;
    }
  }

  Eigen::MatrixXcd transform = u;
  for (Eigen::Index j = 0; j < n; ++j) transform.col(j) *= std::pow(good, double(j));
  ContractionNorm norm(std::move(transform), 0.0, rho);
  return ContractionNorm(norm.transform(), norm.induced(m), rho);
}

TauEps tau_eps(const WeightMatrix& w, const PerronLimit& limit) {
  const auto n = w.size();
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
  return {norm2(Eigen::MatrixXd(w.matrix() - identity)), norm2(Eigen::MatrixXd(identity - limit.limit))};
}

SpectralData spectral_data(const WeightMatrix& w, double slack) {
  PerronLimit limit = perron_limit(w);
  if (slack <= 0.0) {
    double rho = spectral_radius(w.matrix() - limit.limit);
    slack = 0.5 * (1.0 - rho);
    if (!(slack > 0.0)) throw std::runtime_error("rho(A - A_inf) is not below 1");
  }
  SpectralData out;
  auto [tau, eps] = tau_eps(w, limit);
  out.tau = tau;
  out.eps = eps;
  out.norm = contraction_norm(w, limit, slack);
  out.sigma = out.norm.sigma();
  out.rho = out.norm.spectral_radius();
  out.pi = std::move(limit.pi);
  out.limit = std::move(limit.limit);
  return out;
}

}  // namespace dgopt
