#include "dgopt/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace dgopt {

QuadraticObjective::QuadraticObjective(Eigen::VectorXd center, Eigen::VectorXd curvature)
    : center_(std::move(center)), curvature_(std::move(curvature)) {
  if (center_.size() == 0 || center_.size() != curvature_.size()) {
    throw std::invalid_argument("quadratic objective: center and curvature sizes differ");
  }
  if (!((curvature_.array() > 0.0).all())) {
    throw std::invalid_argument("quadratic objective: curvature entries must be positive");
  }
}

double QuadraticObjective::value(const Eigen::VectorXd& z) const {
  Eigen::VectorXd r = z - center_;
  return 0.5 * r.dot(curvature_.cwiseProduct(r));
}

Eigen::VectorXd QuadraticObjective::gradient(const Eigen::VectorXd& z) const {
  return curvature_.cwiseProduct(z - center_);
}

ObjectivePtr quadratic_objective(Eigen::VectorXd center, Eigen::VectorXd curvature) {
  return std::make_shared<QuadraticObjective>(std::move(center), std::move(curvature));
}

void LogisticData::validate() const {
  if (features.empty()) throw std::invalid_argument("logistic data has no agents");
  if (features.size() != labels.size()) {
    throw std::invalid_argument("logistic data: features/labels agent counts differ");
  }
  if (!(beta > 0.0)) throw std::invalid_argument("logistic data: beta must be positive");
  const auto p = features[0].cols();
  if (p < 1) throw std::invalid_argument("logistic data: zero feature dimension");
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].rows() < 1) {
      throw std::invalid_argument("logistic data: agent " + std::to_string(i) +
                                  " has no examples");
    }
    if (features[i].cols() != p || labels[i].size() != features[i].rows()) {
      throw std::invalid_argument("logistic data: inconsistent shapes for agent " +
                                  std::to_string(i));
    }
    for (double b : labels[i]) {
      if (b != 1.0 && b != -1.0) throw std::invalid_argument("logistic labels must be +1 or -1");
    }
  }
}

namespace {

// log(1 + exp(t)) without overflow.
double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

// 1 / (1 + exp(-t)) without overflow.
double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

LogisticObjective::LogisticObjective(Eigen::MatrixXd features, Eigen::VectorXd labels,
                                     double beta, int agents)
    : features_(std::move(features)), labels_(std::move(labels)) {
  if (agents < 1) throw std::invalid_argument("agent count must be positive");
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (features_.rows() != labels_.size() || features_.rows() < 1) {
    throw std::invalid_argument("logistic objective: features/labels mismatch");
  }
  ridge_ = beta / agents;
  lipschitz_ = ridge_ + 0.25 * features_.rowwise().squaredNorm().sum();
}

double LogisticObjective::value(const Eigen::VectorXd& z) const {
  Eigen::VectorXd margins = labels_.cwiseProduct(features_ * z);
  double loss = 0.0;
  for (double m : margins) loss += softplus(-m);
  return 0.5 * ridge_ * z.squaredNorm() + loss;
}

Eigen::VectorXd LogisticObjective::gradient(const Eigen::VectorXd& z) const {
  Eigen::VectorXd margins = labels_.cwiseProduct(features_ * z);
  Eigen::VectorXd weights(margins.size());
  for (Eigen::Index j = 0; j < margins.size(); ++j) weights(j) = -labels_(j) * logistic(-margins(j));
  return ridge_ * z + features_.transpose() * weights;
}

ObjectiveSet logistic_objectives(const LogisticData& data) {
  data.validate();
  ObjectiveSet out;
  for (int i = 0; i < data.agents(); ++i) {
    out.push_back(std::make_shared<LogisticObjective>(data.features[i], data.labels[i],
                                                      data.beta, data.agents()));
  }
  return out;
}

LogisticData generate_dataset(int n, int m, int p, std::uint64_t seed, double beta,
                              double flip_prob, double feature_std) {
  if (n < 1 || m < 1 || p < 1) throw std::invalid_argument("dataset sizes must be >= 1");
  if (!(feature_std > 0.0)) throw std::invalid_argument("feature_std must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution flip(flip_prob);

  LogisticData data;
  data.beta = beta;
  data.planted.resize(p);
  for (auto& v : data.planted) v = normal(rng);
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd c(m, p);
    Eigen::VectorXd b(m);
    for (int j = 0; j < m; ++j) {
      for (int k = 0; k < p; ++k) c(j, k) = normal(rng);
      double label = c.row(j).dot(data.planted) >= 0.0 ? 1.0 : -1.0;
      b(j) = flip(rng) ? -label : label;
    }
    data.features.push_back(feature_std * c);
    data.labels.push_back(std::move(b));
  }
  return data;
}

double unit_lipschitz_feature_std(int m, int p) {
  if (m < 1 || p < 1) throw std::invalid_argument("dataset sizes must be >= 1");
  return 2.0 / std::sqrt(static_cast<double>(m) * p);
}

void write_dataset_csv(std::ostream& out, const LogisticData& data) {
  const int p = data.dimension();
  out << "agent,label";
  for (int k = 1; k <= p; ++k) out << ",f" << k;
  out << '\n';
  out.precision(17);
  for (int i = 0; i < data.agents(); ++i) {
    for (Eigen::Index j = 0; j < data.features[i].rows(); ++j) {
      out << i << ',' << static_cast<int>(data.labels[i](j));
      for (int k = 0; k < p; ++k) out << ',' << data.features[i](j, k);
      out << '\n';
    }
  }
}

LogisticData read_dataset_csv(std::istream& in, double beta) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("dataset CSV is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 3 || header[0] != "agent" || header[1] != "label") {
    throw std::invalid_argument("dataset CSV header must be agent,label,f1..fp");
  }
  const std::size_t p = header.size() - 2;
  for (std::size_t k = 0; k < p; ++k) {
    if (header[k + 2] != "f" + std::to_string(k + 1)) {
      throw std::invalid_argument("dataset CSV header column '" + header[k + 2] + "'");
    }
  }

  std::map<int, std::vector<std::pair<double, std::vector<double>>>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != p + 2) {
      throw std::invalid_argument("dataset CSV line " + std::to_string(line_no) +
                                  ": expected " + std::to_string(p + 2) + " fields");
    }
    std::vector<double> x(p);
    try {
      for (std::size_t k = 0; k < p; ++k) x[k] = std::stod(cells[k + 2]);
      rows[std::stoi(cells[0])].emplace_back(std::stod(cells[1]), std::move(x));
    } catch (const std::logic_error&) {
      throw std::invalid_argument("dataset CSV line " + std::to_string(line_no) +
                                  ": malformed number");
    }
  }

  LogisticData data;
  data.beta = beta;
  int expected = 0;
  for (auto& [agent, examples] : rows) {
    if (agent != expected++) {
      throw std::invalid_argument("dataset CSV agents must be numbered 0..n-1 without gaps");
    }
    Eigen::MatrixXd c(static_cast<Eigen::Index>(examples.size()), static_cast<Eigen::Index>(p));
    Eigen::VectorXd b(static_cast<Eigen::Index>(examples.size()));
    for (std::size_t j = 0; j < examples.size(); ++j) {
      b(j) = examples[j].first;
      for (std::size_t k = 0; k < p; ++k) c(j, k) = examples[j].second[k];
    }
    data.features.push_back(std::move(c));
    data.labels.push_back(std::move(b));
  }
  data.validate();
  return data;
}

LogisticData load_dataset(const std::filesystem::path& path, double beta) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset " + path.string());
  return read_dataset_csv(in, beta);
}

double network_lipschitz(const ObjectiveSet& objs) {
  double l = 0.0;
  for (const auto& f : objs) l = std::max(l, f->lipschitz());
  return l;
}

double network_strong_convexity(const ObjectiveSet& objs) {
  double s = std::numeric_limits<double>::infinity();
  for (const auto& f : objs) s = std::min(s, f->strong_convexity());
  return s;
}

double total_value(const ObjectiveSet& objs, const Eigen::VectorXd& z) {
  double v = 0.0;
  for (const auto& f : objs) v += f->value(z);
  return v;
}

Eigen::VectorXd total_gradient(const ObjectiveSet& objs, const Eigen::VectorXd& z) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(z.size());
  for (const auto& f : objs) g += f->gradient(z);
  return g;
}

Optimum centralized_solve(const ObjectiveSet& objs, const SolveOptions& options) {
  if (objs.empty()) throw std::invalid_argument("centralized_solve: no objectives");
  const int p = objs.front()->dimension();
  for (const auto& f : objs) {
    if (f->dimension() != p) throw std::invalid_argument("objective dimensions differ");
  }
  const double step = 1.0 / (static_cast<double>(objs.size()) * network_lipschitz(objs));

  Eigen::VectorXd z = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd best = z;
  double best_residual = std::numeric_limits<double>::infinity();
  Optimum out;
  out.method = "gradient-descent(step=1/(n*l))";
  for (long it = 0; it <= options.max_iterations; ++it) {
    Eigen::VectorXd g = total_gradient(objs, z);
    double residual = g.norm();
    if (residual < best_residual) {
      best_residual = residual;
      best = z;
    }
    out.iterations = it;
    if (residual <= options.tolerance * std::max(1.0, z.norm())) {
      out.converged = true;
      break;
    }
    z -= step * g;
  }
  out.z_star = best;
  out.residual_norm = best_residual;
  out.f_star = total_value(objs, best);
  return out;
}

}  // namespace dgopt
