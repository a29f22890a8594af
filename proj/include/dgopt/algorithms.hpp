#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dgopt/objectives.hpp"
#include "dgopt/spectral.hpp"

namespace dgopt {

enum class Engine { addopt, dextra, gradient_push };

std::string_view engine_name(Engine e);
/// Accepts `addopt`, `dextra`, `gp` / `gradient_push`.
Engine parse_engine(std::string_view name);

/// Stacked state of all agents. Matrices are n x p with one row per agent.
struct AgentSwarm {
  Eigen::MatrixXd x;         ///< primal iterates
  Eigen::VectorXd y;         ///< push-sum weights
  Eigen::MatrixXd z;         ///< de-biased estimates x_i / y_i
  Eigen::MatrixXd w;         ///< gradient trackers (ADD-OPT only)
  Eigen::MatrixXd gradient;  ///< rows grad f_i(z_i) at the current z
  Eigen::MatrixXd x_prev;    ///< previous x, two-step methods only
  Eigen::MatrixXd gradient_prev;
  long k = 0;

  int agents() const { return static_cast<int>(x.rows()); }
  int dimension() const { return static_cast<int>(x.cols()); }
};

/// Raised when an iterate leaves the overflow guard.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(long iteration, const std::string& what)
      : std::runtime_error(what), iteration_(iteration) {}
  long iteration() const { return iteration_; }

 private:
  long iteration_;
};

inline constexpr double kOverflowGuard = 1e150;

/// Rows of grad f_i evaluated at rows of z.
Eigen::MatrixXd stacked_gradient(const ObjectiveSet& objs, const Eigen::MatrixXd& z);

/// x_0 = z_0, y_0 = 1, w_0 = grad f(z_0).
AgentSwarm addopt_init(const ObjectiveSet& objs, const Eigen::MatrixXd& z0);

/// One synchronous ADD-OPT round; every right-hand side uses pre-step values.
AgentSwarm addopt_step(const AgentSwarm& s, const WeightMatrix& a, double alpha,
                       const ObjectiveSet& objs);

/// One DEXTRA round with A_tilde = theta I + (1 - theta) A. At k = 0 the
/// missing x_{-1} is replaced by the start-up step x_1 = A x_0 - alpha grad f_0.
AgentSwarm dextra_step(const AgentSwarm& s, const WeightMatrix& a, const WeightMatrix& a_tilde,
                       double alpha, const ObjectiveSet& objs);

/// Subgradient-push round: u = A x, y <- A y, z = u / y,
/// x <- u - alpha_k grad f(z).
AgentSwarm gradient_push_step(const AgentSwarm& s, const WeightMatrix& a, double alpha_k,
                              const ObjectiveSet& objs);

/// Step-size schedule: constant alpha, or scale / sqrt(k) for k >= 1.
struct StepSize {
  enum class Kind { constant, inverse_sqrt };
  Kind kind = Kind::constant;
  double value = 0.0;

  static StepSize constant(double alpha) { return {Kind::constant, alpha}; }
  static StepSize inverse_sqrt(double scale = 1.0) { return {Kind::inverse_sqrt, scale}; }

  /// Step used in round k -> k + 1.
  double at(long k) const;
};

struct TraceRecord {
  long k = 0;
  double residual = 0.0;       ///< ||z_k - z*|| / ||z_0 - z*||
  double consensus_err = 0.0;  ///< ||x_k - Y_inf xbar_k||_2
  double tracking_err = 0.0;   ///< ||w_k - Y_inf g_k||_2, NaN without trackers
  double gap = 0.0;            ///< ||xbar_k - z*||_2 (stacked)
};

struct Trace {
  Engine engine = Engine::addopt;
  std::vector<TraceRecord> records;
  std::vector<AgentSwarm> states;  ///< filled when RunOptions::keep_states
  std::optional<long> diverged_at;
};

struct RunOptions {
  long max_iters = 1000;
  double stop_tol = 0.0;
  bool keep_states = false;
  double theta = 0.5;  ///< DEXTRA lazy weight
  /// With `catch_divergence`, a divergence ends the run and is recorded in
  /// Trace::diverged_at instead of propagating as DivergenceError.
  bool catch_divergence = false;
};

/// Simulates `engine` from z0 until the residual drops to stop_tol or
/// max_iters rounds have run. Deterministic in its inputs.
Trace run(Engine engine, const WeightMatrix& a, const ObjectiveSet& objs, const StepSize& step,
          const Eigen::MatrixXd& z0, const Eigen::VectorXd& z_star, const RunOptions& options);

/// Header `k,residual,consensus_err,tracking_err,gap`.
void write_trace_csv(std::ostream& out, const Trace& trace);

/// Least-squares line through (k, ln residual) over records whose residual
/// lies in [lo, hi].
struct LogLinearFit {
  double slope = 0.0;  ///< per-iteration, natural log
  double intercept = 0.0;
  double r2 = 0.0;
  int points = 0;

  double rate() const;  ///< exp(slope)
};

LogLinearFit fit_log_residual(const Trace& trace, double lo = 1e-12, double hi = 1e-1);
LogLinearFit fit_log_linear(const std::vector<double>& ks, const std::vector<double>& values);

/// Largest deviations from the exact identities that hold along every
/// ADD-OPT trajectory.
struct TrajectoryAudit {
  double tracking_sum = 0.0;     ///< max_k ||sum_i w_i - sum_i grad f_i(z_i)||
  double average_step = 0.0;     ///< max_k ||xbar_{k+1} - xbar_k + alpha g_k||
  double y_sum = 0.0;            ///< max_k |sum_i y_i - n|
  double min_y = 0.0;            ///< min_k min_i y_i
  double two_step = 0.0;         ///< max_k of the two-step recursion residual
  int steps = 0;
};

TrajectoryAudit audit_addopt(const std::vector<AgentSwarm>& states, const WeightMatrix& a,
                             double alpha);

}  // namespace dgopt
