#include "dgopt/algorithms.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace dgopt {

std::string_view engine_name(Engine e) {
  switch (e) {
    case Engine::addopt:
      return "addopt";
    case Engine::dextra:
      return "dextra";
    case Engine::gradient_push:
      return "gp";
  }
  return "unknown";
}

Engine parse_engine(std::string_view name) {
  if (name == "addopt" || name == "add-opt") return Engine::addopt;
  if (name == "dextra") return Engine::dextra;
  if (name == "gp" || name == "gradient_push" || name == "gradient-push") {
    return Engine::gradient_push;
  }
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

Eigen::MatrixXd stacked_gradient(const ObjectiveSet& objs, const Eigen::MatrixXd& z) {
  Eigen::MatrixXd g(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    g.row(i) = objs[i]->gradient(z.row(i).transpose()).transpose();
  }
  return g;
}

namespace {

void check_shapes(const ObjectiveSet& objs, const Eigen::MatrixXd& z0) {
  if (objs.empty()) throw std::invalid_argument("no objectives");
  if (static_cast<Eigen::Index>(objs.size()) != z0.rows()) {
    throw std::invalid_argument("initial state has " + std::to_string(z0.rows()) +
                                " rows for " + std::to_string(objs.size()) + " agents");
  }
  for (const auto& f : objs) {
    if (f->dimension() != z0.cols()) {
      throw std::invalid_argument("objective dimension does not match initial state");
    }
  }
}

void check_weights(const AgentSwarm& s, const WeightMatrix& a) {
  if (a.size() != s.agents()) throw std::invalid_argument("weight matrix size != agent count");
}

Eigen::MatrixXd divide_rows(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return y.cwiseInverse().asDiagonal() * x;
}

void guard(const AgentSwarm& s) {
  const bool ok = s.x.allFinite() && s.z.allFinite() &&
                  s.x.cwiseAbs().maxCoeff() <= kOverflowGuard &&
                  s.z.cwiseAbs().maxCoeff() <= kOverflowGuard;
  if (!ok) {
    throw DivergenceError(s.k, "iterates diverged at k=" + std::to_string(s.k));
  }
}

}  // namespace

AgentSwarm addopt_init(const ObjectiveSet& objs, const Eigen::MatrixXd& z0) {
  check_shapes(objs, z0);
  AgentSwarm s;
  s.x = z0;
  s.y = Eigen::VectorXd::Ones(z0.rows());
  s.z = z0;
  s.gradient = stacked_gradient(objs, z0);
  s.w = s.gradient;
  s.k = 0;
  return s;
}

AgentSwarm addopt_step(const AgentSwarm& s, const WeightMatrix& a, double alpha,
                       const ObjectiveSet& objs) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("step size must be nonnegative");
  check_weights(s, a);
  const Eigen::MatrixXd& A = a.matrix();
  AgentSwarm next;
  next.x = A * s.x - alpha * s.w;
  next.y = A * s.y;
  next.z = divide_rows(next.x, next.y);
  next.gradient = stacked_gradient(objs, next.z);
  next.w = A * s.w + next.gradient - s.gradient;
  next.k = s.k + 1;
  guard(next);
  return next;
}

AgentSwarm dextra_step(const AgentSwarm& s, const WeightMatrix& a, const WeightMatrix& a_tilde,
                       double alpha, const ObjectiveSet& objs) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("step size must be nonnegative");
  check_weights(s, a);
  check_weights(s, a_tilde);
  const Eigen::MatrixXd& A = a.matrix();
  AgentSwarm next;
  if (s.x_prev.size() == 0) {
    next.x = A * s.x - alpha * s.gradient;
  } else {
    next.x = s.x + A * s.x - a_tilde.matrix() * s.x_prev - alpha * (s.gradient - s.gradient_prev);
  }
  next.y = A * s.y;
  next.z = divide_rows(next.x, next.y);
  next.gradient = stacked_gradient(objs, next.z);
  next.x_prev = s.x;
  next.gradient_prev = s.gradient;
  next.k = s.k + 1;
  guard(next);
  return next;
}

AgentSwarm gradient_push_step(const AgentSwarm& s, const WeightMatrix& a, double alpha_k,
                              const ObjectiveSet& objs) {
  if (!(alpha_k >= 0.0)) throw std::invalid_argument("step size must be nonnegative");
  check_weights(s, a);
  const Eigen::MatrixXd& A = a.matrix();
  AgentSwarm next;
  Eigen::MatrixXd mixed = A * s.x;
  next.y = A * s.y;
  next.z = divide_rows(mixed, next.y);
  next.gradient = stacked_gradient(objs, next.z);
  next.x = mixed - alpha_k * next.gradient;
  next.k = s.k + 1;
  guard(next);
  return next;
}

double StepSize::at(long k) const {
  if (kind == Kind::constant) return value;
  return value / std::sqrt(static_cast<double>(k + 1));
}

namespace {

TraceRecord measure(const AgentSwarm& s, const Eigen::VectorXd& y_limit,
                    const Eigen::RowVectorXd& z_star, double initial_distance) {
  const double n = static_cast<double>(s.agents());
  TraceRecord r;
  r.k = s.k;
  const double dist = (s.z.rowwise() - z_star).norm();
  r.residual = initial_distance > 0.0 ? dist / initial_distance : dist;
  const Eigen::RowVectorXd x_avg = s.x.colwise().sum() / n;
  r.consensus_err = (s.x - y_limit * x_avg).norm();
  if (s.w.size() > 0) {
    const Eigen::RowVectorXd g_avg = s.gradient.colwise().sum() / n;
    r.tracking_err = (s.w - y_limit * g_avg).norm();
  } else {
    r.tracking_err = std::numeric_limits<double>::quiet_NaN();
  }
  r.gap = std::sqrt(n) * (x_avg - z_star).norm();
  return r;
}

}  // namespace

Trace run(Engine engine, const WeightMatrix& a, const ObjectiveSet& objs, const StepSize& step,
          const Eigen::MatrixXd& z0, const Eigen::VectorXd& z_star, const RunOptions& options) {
  if (options.stop_tol < 0.0) throw std::invalid_argument("stop_tol must be >= 0");
  if (options.max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
  if (z_star.size() != z0.cols()) throw std::invalid_argument("z* dimension mismatch");
  if (a.size() != z0.rows()) throw std::invalid_argument("weight matrix size != agent count");

  const Eigen::VectorXd y_limit = static_cast<double>(a.size()) * perron_limit(a).pi;
  const Eigen::RowVectorXd target = z_star.transpose();
  const WeightMatrix a_tilde = lazy_weights(a, options.theta);
  if (engine == Engine::dextra && !(options.theta > 0.0 && options.theta <= 0.5)) {
    throw std::invalid_argument("DEXTRA needs theta in (0, 1/2]");
  }

  Trace trace;
  trace.engine = engine;
  AgentSwarm s = addopt_init(objs, z0);
  if (engine != Engine::addopt) s.w.resize(0, 0);
  const double initial_distance = (s.z.rowwise() - target).norm();

  auto record = [&](const AgentSwarm& state) {
    trace.records.push_back(measure(state, y_limit, target, initial_distance));
    if (options.keep_states) trace.states.push_back(state);
  };
  record(s);

  for (long k = 0; k < options.max_iters; ++k) {
    if (trace.records.back().residual <= options.stop_tol) break;
    const double alpha = step.at(k);
    try {
      switch (engine) {
        case Engine::addopt:
          s = addopt_step(s, a, alpha, objs);
          break;
        case Engine::dextra:
          s = dextra_step(s, a, a_tilde, alpha, objs);
          break;
        case Engine::gradient_push:
          s = gradient_push_step(s, a, alpha, objs);
          break;
      }
    } catch (const DivergenceError& e) {
      if (!options.catch_divergence) throw;
      trace.diverged_at = e.iteration();
      break;
    }
    record(s);
  }
  return trace;
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << "k,residual,consensus_err,tracking_err,gap\n";
  out.precision(17);
  for (const auto& r : trace.records) {
    out << r.k << ',' << r.residual << ',' << r.consensus_err << ',' << r.tracking_err << ','
        << r.gap << '\n';
  }
}

double LogLinearFit::rate() const { return std::exp(slope); }

LogLinearFit fit_log_linear(const std::vector<double>& ks, const std::vector<double>& values) {
  LogLinearFit fit;
  fit.points = static_cast<int>(ks.size());
  if (ks.size() < 2) return fit;
  const double m = static_cast<double>(ks.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    sx += ks[i];
    sy += std::log(values[i]);
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double dx = ks[i] - mx, dy = std::log(values[i]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

LogLinearFit fit_log_residual(const Trace& trace, double lo, double hi) {
  std::vector<double> ks, values;
  for (const auto& r : trace.records) {
    if (r.residual >= lo && r.residual <= hi) {
      ks.push_back(static_cast<double>(r.k));
      values.push_back(r.residual);
    }
  }
  return fit_log_linear(ks, values);
}

TrajectoryAudit audit_addopt(const std::vector<AgentSwarm>& states, const WeightMatrix& a,
                             double alpha) {
  TrajectoryAudit audit;
  if (states.empty()) return audit;
  const Eigen::MatrixXd& A = a.matrix();
  const double n = static_cast<double>(states.front().agents());
  audit.min_y = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < states.size(); ++k) {
    const AgentSwarm& s = states[k];
    audit.tracking_sum = std::max(
        audit.tracking_sum, (s.w.colwise().sum() - s.gradient.colwise().sum()).norm());
    audit.y_sum = std::max(audit.y_sum, std::abs(s.y.sum() - n));
    audit.min_y = std::min(audit.min_y, s.y.minCoeff());
    if (k + 1 < states.size()) {
      const AgentSwarm& next = states[k + 1];
      Eigen::RowVectorXd drift = next.x.colwise().sum() / n - s.x.colwise().sum() / n +
                                 alpha * s.gradient.colwise().sum() / n;
      audit.average_step = std::max(audit.average_step, drift.norm());
      ++audit.steps;
    }
    if (k >= 1 && k + 1 < states.size()) {
      const AgentSwarm& prev = states[k - 1];
      const AgentSwarm& next = states[k + 1];
      Eigen::MatrixXd r = next.x - 2.0 * A * s.x + A * (A * prev.x) +
                          alpha * (s.gradient - prev.gradient);
      audit.two_step = std::max(audit.two_step, r.cwiseAbs().maxCoeff());
    }
  }
  return audit;
}

}  // namespace dgopt
