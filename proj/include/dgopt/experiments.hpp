#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dgopt/algorithms.hpp"
#include "dgopt/analysis.hpp"
#include "dgopt/digraph.hpp"
#include "dgopt/objectives.hpp"
#include "dgopt/spectral.hpp"

namespace dgopt {

/// `steps` evenly spaced values from lo to hi inclusive.
struct SweepSpec {
  double lo = 0.0;
  double hi = 0.0;
  int steps = 0;

  /// Parses `lo:hi:steps`.
  static SweepSpec parse(std::string_view text);
  std::vector<double> grid() const;
  void validate() const;
};

enum class ObjectiveKind { logistic, quadratic };
ObjectiveKind parse_objective_kind(std::string_view name);

/// A run that did not trip the overflow guard still counts as diverged when
/// its final residual exceeds this, i.e. it ended farther from z* than it
/// started. Logistic gradients are bounded, so unstable step sizes often
/// oscillate instead of overflowing.
inline constexpr double kDivergedResidual = 1.0;

struct ExperimentConfig {
  std::string graph = "fig1";
  std::vector<Engine> algorithms{Engine::addopt, Engine::dextra, Engine::gradient_push};

  double alpha = 0.3;        ///< constant step for ADD-OPT and DEXTRA
  bool diminishing = false;  ///< use alpha / sqrt(k) for ADD-OPT and DEXTRA as well
  double gp_scale = 1.0;     ///< gradient-push always uses gp_scale / sqrt(k)
  std::optional<SweepSpec> sweep;

  ObjectiveKind objective = ObjectiveKind::logistic;
  double beta = 1.0;
  int m = 10;
  int p = 3;
  double flip = 0.1;
  /// Unset: unit_lipschitz_feature_std(m, p).
  std::optional<double> feature_std;
  std::string dataset;  ///< CSV path; replaces generated data when set
  std::uint64_t seed = 1;

  long iters = 1000;
  double stop_tol = 0.0;
  double theta = 0.5;
  std::string z0 = "zero";  ///< `zero` or `random` (seeded)

  long checkpoint = 200;         ///< stepsize study: residual reported at this k
  double converge_tol = 1e-8;    ///< stepsize study: final residual counted as converged

  int agents = 10;                      ///< sparsity study: nodes per graph
  std::vector<int> chain_extra{10, 1000};  ///< sparsity study: edges added per level
  bool strict = false;                  ///< sparsity study: reject non-nested chains

  /// Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
};

/// Graph, weights, objectives and ground truth shared by every run of an
/// experiment.
struct Instance {
  Digraph graph;
  WeightMatrix weights;
  ObjectiveSet objectives;
  Optimum optimum;
  Eigen::MatrixXd z0;
};

Instance build_instance(const ExperimentConfig& config);
/// Same objectives and start point as build_instance, on a supplied graph.
Instance build_instance(const ExperimentConfig& config, const Digraph& graph);

ObjectiveSet make_objectives(const ExperimentConfig& config, int agents);

struct RunSummary {
  Engine engine = Engine::addopt;
  long iterations = 0;
  double initial_residual = 1.0;
  double final_residual = 1.0;
  LogLinearFit fit;
  std::optional<long> diverged_at;

  bool diverged() const;
};

RunSummary summarize(const Trace& trace);

struct ComparisonReport {
  std::vector<RunSummary> runs;
  std::vector<Trace> traces;
  ConvergenceProfile profile;
  double alpha_bar = 0.0;
  double rho_g = 0.0;  ///< rho(G) at the configured alpha

  bool all_completed() const;
};

ComparisonReport cmd_compare(const ExperimentConfig& config);
/// Header `alg,iters,initial_residual,final_residual,slope,r2,diverged`.
void write_summary_csv(std::ostream& out, const ComparisonReport& report);
/// `trace_<alg>.csv` per algorithm plus `summary.csv` under `dir`.
void write_comparison(const ComparisonReport& report, const std::filesystem::path& dir);

struct StepsizeRow {
  double alpha = 0.0;
  double rho_g = 0.0;
  bool converged = false;
  bool diverged = false;
  double residual_at_checkpoint = 0.0;  ///< NaN if the run stopped earlier
  double final_residual = 0.0;
};

struct StepsizeStudy {
  long checkpoint = 200;
  ConvergenceProfile profile;
  double alpha_bar = 0.0;
  std::vector<StepsizeRow> rows;

  bool any_diverged() const;
  /// Index of the smallest rho(G) (ties to the smaller alpha).
  std::size_t argmin_rho() const;
  /// Index of the smallest finite checkpoint residual among non-diverged rows.
  std::optional<std::size_t> argmin_residual() const;
};

/// ADD-OPT at every alpha of `config.sweep` for max(iters, checkpoint) rounds.
StepsizeStudy cmd_stepsize_study(const ExperimentConfig& config);
StepsizeStudy stepsize_study(const ExperimentConfig& config, const Instance& instance,
                             const std::vector<double>& grid);
/// Header `alpha,rho_g,converged,diverged,residual_at_<checkpoint>,final_residual`.
void write_stepsize_csv(std::ostream& out, const StepsizeStudy& study);

struct SparsityRow {
  int graph = 0;
  std::size_t edges = 0;
  double slope = 0.0;
  double r2 = 0.0;
  std::optional<long> diverged_at;
};

/// ADD-OPT at `config.alpha` on every graph of a nested chain
/// nested_chain(config.agents, config.chain_extra, config.seed).
std::vector<SparsityRow> cmd_sparsity_study(const ExperimentConfig& config);
/// Runs on a supplied chain; with `config.strict` a chain that is not
/// nested by edge inclusion is rejected.
std::vector<SparsityRow> sparsity_study(const ExperimentConfig& config,
                                        const std::vector<Digraph>& chain);
/// Header `graph,edges,slope,r2,diverged`.
void write_sparsity_csv(std::ostream& out, const std::vector<SparsityRow>& rows);

/// True iff slopes[i+1] <= slopes[i] + tolerance * |slopes[i]| for all i.
bool slopes_monotone(const std::vector<double>& slopes, double tolerance = 0.05);

/// Worker count: hardware concurrency capped by DIRGRAPH_OPT_THREADS.
unsigned worker_count();
/// Calls body(i) for i in [0, count) on up to worker_count() threads. The
/// first exception thrown by any call is rethrown after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace dgopt
