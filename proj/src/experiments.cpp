#include "dgopt/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

namespace dgopt {

namespace {

double parse_double(std::string_view text, const char* what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument(std::string("bad ") + what + " '" + std::string(text) + "'");
  }
  return v;
}

constexpr std::uint64_t kStartSeedOffset = 0x9e3779b97f4a7c15ULL;

}  // namespace

SweepSpec SweepSpec::parse(std::string_view text) {
  const auto a = text.find(':');
  const auto b = a == std::string_view::npos ? a : text.find(':', a + 1);
  if (b == std::string_view::npos) {
    throw std::invalid_argument("sweep must look like lo:hi:steps, got '" + std::string(text) +
                                "'");
  }
  SweepSpec s;
  s.lo = parse_double(text.substr(0, a), "sweep lower bound");
  s.hi = parse_double(text.substr(a + 1, b - a - 1), "sweep upper bound");
  const double steps = parse_double(text.substr(b + 1), "sweep step count");
  if (steps != std::floor(steps)) throw std::invalid_argument("sweep step count must be integral");
  s.steps = static_cast<int>(steps);
  s.validate();
  return s;
}

void SweepSpec::validate() const {
  if (steps < 1) throw std::invalid_argument("sweep needs at least one step");
  if (!(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("sweep needs 0 < lo <= hi");
  if (steps == 1 && hi != lo) throw std::invalid_argument("a one-point sweep needs lo == hi");
}

std::vector<double> SweepSpec::grid() const {
  validate();
  std::vector<double> g(steps);
  for (int i = 0; i < steps; ++i) {
    g[i] = steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1);
  }
  return g;
}

ObjectiveKind parse_objective_kind(std::string_view name) {
  if (name == "logistic") return ObjectiveKind::logistic;
  if (name == "quadratic") return ObjectiveKind::quadratic;
  throw std::invalid_argument("unknown objective '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(!algorithms.empty(), "no algorithms requested");
  for (std::size_t i = 0; i < algorithms.size(); ++i) {
    for (std::size_t j = i + 1; j < algorithms.size(); ++j) {
      require(algorithms[i] != algorithms[j],
              "algorithm '" + std::string(engine_name(algorithms[i])) + "' listed twice");
    }
  }
  require(alpha >= 0.0, "alpha must be nonnegative");
  require(gp_scale >= 0.0, "gradient-push scale must be nonnegative");
  if (sweep) sweep->validate();
  require(beta > 0.0, "beta must be positive");
  require(m >= 1 && p >= 1, "m and p must be >= 1");
  require(flip >= 0.0 && flip <= 1.0, "flip probability must lie in [0, 1]");
  require(!feature_std || *feature_std > 0.0, "feature_std must be positive");
  if (!dataset.empty()) {
    require(objective == ObjectiveKind::logistic, "a dataset file needs the logistic objective");
    require(std::filesystem::exists(dataset), "dataset file '" + dataset + "' does not exist");
  }
  require(iters >= 0, "iteration count must be >= 0");
  require(stop_tol >= 0.0, "stop tolerance must be >= 0");
  require(theta > 0.0 && theta <= 0.5, "theta must lie in (0, 1/2]");
  require(z0 == "zero" || z0 == "random", "z0 must be 'zero' or 'random'");
  require(checkpoint >= 0, "checkpoint must be >= 0");
  require(converge_tol > 0.0, "converge_tol must be positive");
  require(agents >= 2, "sparsity study needs at least 2 agents");
  for (int e : chain_extra) require(e >= 0, "chain edge increments must be >= 0");
}

ObjectiveSet make_objectives(const ExperimentConfig& config, int agents) {
  if (config.objective == ObjectiveKind::quadratic) {
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> curvature(0.5, 2.0);
    ObjectiveSet objs;
    for (int i = 0; i < agents; ++i) {
      Eigen::VectorXd b(config.p), q(config.p);
      for (int k = 0; k < config.p; ++k) b(k) = normal(rng);
      for (int k = 0; k < config.p; ++k) q(k) = curvature(rng);
      objs.push_back(quadratic_objective(std::move(b), std::move(q)));
    }
    return objs;
  }
  LogisticData data;
  if (!config.dataset.empty()) {
    data = load_dataset(config.dataset, config.beta);
    if (data.agents() != agents) {
      throw std::invalid_argument("dataset has " + std::to_string(data.agents()) +
                                  " agents but the graph has " + std::to_string(agents));
    }
  } else {
    const double std_dev = config.feature_std.value_or(unit_lipschitz_feature_std(config.m, config.p));
    data = generate_dataset(agents, config.m, config.p, config.seed, config.beta, config.flip,
                            std_dev);
  }
  return logistic_objectives(data);
}

Instance build_instance(const ExperimentConfig& config, const Digraph& graph) {
  config.validate();
  WeightMatrix weights = uniform_weights(graph);
  ObjectiveSet objs = make_objectives(config, graph.size());
  Optimum optimum = centralized_solve(objs);
  const int p = objs.front()->dimension();
  Eigen::MatrixXd z0 = Eigen::MatrixXd::Zero(graph.size(), p);
  if (config.z0 == "random") {
    std::mt19937_64 rng(config.seed + kStartSeedOffset);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < z0.rows(); ++i) {
      for (Eigen::Index k = 0; k < z0.cols(); ++k) z0(i, k) = normal(rng);
    }
  }
  return Instance{graph, std::move(weights), std::move(objs), std::move(optimum), std::move(z0)};
}

Instance build_instance(const ExperimentConfig& config) {
  return build_instance(config, resolve_graph(config.graph));
}

bool RunSummary::diverged() const {
  return diverged_at.has_value() || !std::isfinite(final_residual) ||
         final_residual > kDivergedResidual;
}

RunSummary summarize(const Trace& trace) {
  RunSummary s;
  s.engine = trace.engine;
  if (!trace.records.empty()) {
    s.iterations = trace.records.back().k;
    s.initial_residual = trace.records.front().residual;
    s.final_residual = trace.records.back().residual;
  }
  s.fit = fit_log_residual(trace);
  s.diverged_at = trace.diverged_at;
  return s;
}

bool ComparisonReport::all_completed() const {
  return std::none_of(runs.begin(), runs.end(), [](const RunSummary& r) { return r.diverged(); });
}

namespace {

RunOptions run_options(const ExperimentConfig& config, long iters) {
  RunOptions o;
  o.max_iters = iters;
  o.stop_tol = config.stop_tol;
  o.theta = config.theta;
  o.catch_divergence = true;
  return o;
}

StepSize step_for(const ExperimentConfig& config, Engine engine) {
  if (engine == Engine::gradient_push) return StepSize::inverse_sqrt(config.gp_scale);
  return config.diminishing ? StepSize::inverse_sqrt(config.alpha)
                            : StepSize::constant(config.alpha);
}

}  // namespace

ComparisonReport cmd_compare(const ExperimentConfig& config) {
  const Instance inst = build_instance(config);
  ComparisonReport report;
  const SpectralData spectral = spectral_data(inst.weights);
  report.profile = make_profile(inst.weights, spectral, inst.objectives);
  report.alpha_bar = alpha_upper_bound(report.profile);
  report.rho_g = spectral_radius3(build_G(report.profile, config.alpha));

  report.traces.resize(config.algorithms.size());
  parallel_for(config.algorithms.size(), [&](std::size_t i) {
    const Engine e = config.algorithms[i];
    report.traces[i] = run(e, inst.weights, inst.objectives, step_for(config, e), inst.z0,
                           inst.optimum.z_star, run_options(config, config.iters));
  });
  for (const auto& t : report.traces) report.runs.push_back(summarize(t));
  return report;
}

void write_summary_csv(std::ostream& out, const ComparisonReport& report) {
  out << "alg,iters,initial_residual,final_residual,slope,r2,diverged\n";
  out.precision(17);
  for (const auto& r : report.runs) {
    out << engine_name(r.engine) << ',' << r.iterations << ',' << r.initial_residual << ','
        << r.final_residual << ',' << r.fit.slope << ',' << r.fit.r2 << ','
        << (r.diverged() ? 1 : 0) << '\n';
  }
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

void write_comparison(const ComparisonReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& t : report.traces) {
    auto out = open_output(dir / ("trace_" + std::string(engine_name(t.engine)) + ".csv"));
    write_trace_csv(out, t);
  }
  auto out = open_output(dir / "summary.csv");
  write_summary_csv(out, report);
}

bool StepsizeStudy::any_diverged() const {
  return std::any_of(rows.begin(), rows.end(), [](const StepsizeRow& r) { return r.diverged; });
}

std::size_t StepsizeStudy::argmin_rho() const {
  if (rows.empty()) throw std::logic_error("empty stepsize study");
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].rho_g < rows[best].rho_g) best = i;
  }
  return best;
}

std::optional<std::size_t> StepsizeStudy::argmin_residual() const {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.diverged || !std::isfinite(r.residual_at_checkpoint)) continue;
    if (!best || r.residual_at_checkpoint < rows[*best].residual_at_checkpoint) best = i;
  }
  return best;
}

StepsizeStudy stepsize_study(const ExperimentConfig& config, const Instance& instance,
                             const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("stepsize study needs a nonempty grid");
  if (!std::is_sorted(grid.begin(), grid.end()) ||
      std::adjacent_find(grid.begin(), grid.end()) != grid.end()) {
    throw std::invalid_argument("stepsize grid must be strictly increasing");
  }
  StepsizeStudy study;
  study.checkpoint = config.checkpoint;
  const SpectralData spectral = spectral_data(instance.weights);
  study.profile = make_profile(instance.weights, spectral, instance.objectives);
  study.alpha_bar = alpha_upper_bound(study.profile);
  study.rows.resize(grid.size());
  const long iters = std::max(config.iters, config.checkpoint);
  parallel_for(grid.size(), [&](std::size_t i) {
    StepsizeRow& row = study.rows[i];
    row.alpha = grid[i];
    row.rho_g = spectral_radius3(build_G(study.profile, row.alpha));
    RunOptions o = run_options(config, iters);
    o.stop_tol = 0.0;
    const Trace t = run(Engine::addopt, instance.weights, instance.objectives,
                        StepSize::constant(row.alpha), instance.z0, instance.optimum.z_star, o);
    const RunSummary s = summarize(t);
    row.diverged = s.diverged();
    row.final_residual = s.final_residual;
    row.residual_at_checkpoint = config.checkpoint < static_cast<long>(t.records.size())
                                     ? t.records[config.checkpoint].residual
                                     : std::numeric_limits<double>::quiet_NaN();
    row.converged = !row.diverged && s.final_residual <= config.converge_tol;
  });
  return study;
}

StepsizeStudy cmd_stepsize_study(const ExperimentConfig& config) {
  if (!config.sweep) throw std::invalid_argument("stepsize study needs a sweep (lo:hi:steps)");
  return stepsize_study(config, build_instance(config), config.sweep->grid());
}

void write_stepsize_csv(std::ostream& out, const StepsizeStudy& study) {
  out << "alpha,rho_g,converged,diverged,residual_at_" << study.checkpoint << ",final_residual\n";
  out.precision(17);
  for (const auto& r : study.rows) {
    out << r.alpha << ',' << r.rho_g << ',' << (r.converged ? 1 : 0) << ','
        << (r.diverged ? 1 : 0) << ',' << r.residual_at_checkpoint << ',' << r.final_residual
        << '\n';
  }
}

std::vector<SparsityRow> sparsity_study(const ExperimentConfig& config,
                                        const std::vector<Digraph>& chain) {
  if (chain.size() < 2) throw std::invalid_argument("sparsity study needs at least 2 graphs");
  if (config.strict) {
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
      if (!is_subgraph(chain[i], chain[i + 1])) {
        throw std::invalid_argument("graph " + std::to_string(i) + " is not a subgraph of graph " +
                                    std::to_string(i + 1));
      }
    }
  }
  std::vector<SparsityRow> rows(chain.size());
  parallel_for(chain.size(), [&](std::size_t i) {
    const Instance inst = build_instance(config, chain[i]);
    const Trace t = run(Engine::addopt, inst.weights, inst.objectives,
                        StepSize::constant(config.alpha), inst.z0, inst.optimum.z_star,
                        run_options(config, config.iters));
    const LogLinearFit fit = fit_log_residual(t);
    rows[i] = {static_cast<int>(i), chain[i].edge_count(), fit.slope, fit.r2, t.diverged_at};
  });
  return rows;
}

std::vector<SparsityRow> cmd_sparsity_study(const ExperimentConfig& config) {
  config.validate();
  return sparsity_study(config, nested_chain(config.agents, config.chain_extra, config.seed));
}

void write_sparsity_csv(std::ostream& out, const std::vector<SparsityRow>& rows) {
  out << "graph,edges,slope,r2,diverged\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.graph << ',' << r.edges << ',' << r.slope << ',' << r.r2 << ','
        << (r.diverged_at ? 1 : 0) << '\n';
  }
}

bool slopes_monotone(const std::vector<double>& slopes, double tolerance) {
  for (std::size_t i = 0; i + 1 < slopes.size(); ++i) {
    if (slopes[i + 1] > slopes[i] + tolerance * std::abs(slopes[i])) return false;
  }
  return true;
}

unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("DIRGRAPH_OPT_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(mu);
        if (next >= count || error) return;
        i = next++;
      }
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace dgopt
