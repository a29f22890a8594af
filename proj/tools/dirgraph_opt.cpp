// dirgraph-opt: command-line front end for the simulator and the analysis.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dgopt/experiments.hpp"

namespace {

using namespace dgopt;

constexpr int kExitDiverged = 1;
constexpr int kExitUsage = 2;

struct ObjectiveOptions {
  std::string objective = "logistic";
  std::string dataset;
  double feature_std = 0.0;  // 0 selects the unit-Lipschitz scale
};

void add_objective_options(CLI::App* cmd, ExperimentConfig& cfg, ObjectiveOptions& obj) {
  cmd->add_option("--objective", obj.objective, "logistic or quadratic")
      ->check(CLI::IsMember({"logistic", "quadratic"}))
      ->capture_default_str();
  cmd->add_option("--data", obj.dataset, "dataset CSV (agent,label,f1..fp)");
  cmd->add_option("--beta", cfg.beta, "ridge weight")->capture_default_str();
  cmd->add_option("--m", cfg.m, "examples per agent")->capture_default_str();
  cmd->add_option("--p", cfg.p, "feature dimension")->capture_default_str();
  cmd->add_option("--flip", cfg.flip, "label flip probability")->capture_default_str();
  cmd->add_option("--feature-std", obj.feature_std,
                  "feature standard deviation (default 2/sqrt(m p), unit Lipschitz scale)");
  cmd->add_option("--seed", cfg.seed, "seed for data and random start")->capture_default_str();
}

void add_run_options(CLI::App* cmd, ExperimentConfig& cfg) {
  cmd->add_option("--graph", cfg.graph, "fig1, ring:N, complete:N, random:N:P:SEED or a file")
      ->capture_default_str();
  cmd->add_option("--iters", cfg.iters, "iteration cap")->capture_default_str();
  cmd->add_option("--stop-tol", cfg.stop_tol, "stop once residual <= this")->capture_default_str();
  cmd->add_option("--theta", cfg.theta, "DEXTRA lazy weight in (0, 1/2]")->capture_default_str();
  cmd->add_option("--z0", cfg.z0, "initial estimates: zero or random")
      ->check(CLI::IsMember({"zero", "random"}))
      ->capture_default_str();
}

void finish_objective(ExperimentConfig& cfg, const ObjectiveOptions& obj) {
  cfg.objective = parse_objective_kind(obj.objective);
  cfg.dataset = obj.dataset;
  if (obj.feature_std > 0.0) cfg.feature_std = obj.feature_std;
}

std::ostream& output(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot write " + path);
  return file;
}

void print_vector(std::ostream& out, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? "," : "") << v(i);
}

int cmd_graph_check(const std::string& source) {
  const Digraph g = resolve_graph(source);
  const bool sc = is_strongly_connected(g);
  std::cout << "nodes=" << g.size() << " edges=" << g.edge_count()
            << " strongly_connected=" << (sc ? "true" : "false") << '\n';
  return sc ? 0 : kExitDiverged;
}

int cmd_graph_spectrum(const std::string& source, double slack) {
  const Digraph g = resolve_graph(source);
  const WeightMatrix w = uniform_weights(g);
  const SpectralData sd = spectral_data(w, slack);
  const PushSumEnvelope env = push_sum_envelope(w, sd.pi);
  std::cout.precision(10);
  std::cout << "tau=" << sd.tau << "\neps=" << sd.eps << "\nsigma=" << sd.sigma
            << "\nrho=" << sd.rho << "\nc=" << sd.norm.c() << "\nd=" << sd.norm.d()
            << "\ny=" << env.y_sup << "\ny_minus=" << env.y_minus_sup << "\npi=";
  print_vector(std::cout, sd.pi);
  std::cout << '\n';
  return 0;
}

LogisticData dataset_for(const ExperimentConfig& cfg, int n, double feature_std) {
  if (!cfg.dataset.empty()) return load_dataset(cfg.dataset, cfg.beta);
  return generate_dataset(n, cfg.m, cfg.p, cfg.seed, cfg.beta, cfg.flip,
                          feature_std > 0.0 ? feature_std
                                            : unit_lipschitz_feature_std(cfg.m, cfg.p));
}

int cmd_run(const ExperimentConfig& cfg, Engine engine, const std::string& out_path) {
  const Instance inst = build_instance(cfg);
  const StepSize step = engine == Engine::gradient_push || cfg.diminishing
                            ? StepSize::inverse_sqrt(cfg.alpha)
                            : StepSize::constant(cfg.alpha);
  RunOptions o;
  o.max_iters = cfg.iters;
  o.stop_tol = cfg.stop_tol;
  o.theta = cfg.theta;
  o.catch_divergence = true;
  const Trace t = run(engine, inst.weights, inst.objectives, step, inst.z0, inst.optimum.z_star, o);
  std::ofstream file;
  write_trace_csv(output(out_path, file), t);
  const RunSummary s = summarize(t);
  if (s.diverged()) {
    std::cerr << "diverged";
    if (s.diverged_at) std::cerr << " at k=" << *s.diverged_at;
    std::cerr << '\n';
    return kExitDiverged;
  }
  return 0;
}

struct AnalyzeOptions {
  double l = 0.0;
  double s = 0.0;
  int n = 0;
  std::vector<double> alphas;
  std::string sweep;
  std::string out;
};

int cmd_analyze(const ExperimentConfig& cfg, const AnalyzeOptions& opt) {
  const Digraph g = resolve_graph(cfg.graph);
  const WeightMatrix w = uniform_weights(g);
  const SpectralData sd = spectral_data(w);
  const PushSumEnvelope env = push_sum_envelope(w, sd.pi);
  double l = opt.l, s = opt.s;
  if (l <= 0.0 || s <= 0.0) {
    const ObjectiveSet objs = make_objectives(cfg, g.size());
    if (l <= 0.0) l = network_lipschitz(objs);
    if (s <= 0.0) s = network_strong_convexity(objs);
  }
  ConvergenceProfile p = make_profile(sd, env, l, s);
  if (opt.n > 0) {
    p.n = opt.n;
    p.validate();
  }
  std::vector<double> grid = opt.alphas;
  if (!opt.sweep.empty()) {
    const auto more = SweepSpec::parse(opt.sweep).grid();
    grid.insert(grid.end(), more.begin(), more.end());
  }
  std::ofstream file;
  std::ostream& out = output(opt.out, file);
  std::ostream& info = opt.out.empty() ? std::cout : std::cerr;
  info.precision(10);
  info << "# sigma=" << p.sigma << " tau=" << p.tau << " eps=" << p.eps << " y=" << p.y
       << " y_minus=" << p.y_minus << " c=" << p.c << " d=" << p.d << " l=" << p.l
       << " s=" << p.s << " n=" << p.n << '\n';
  info << "# alpha_bar=" << alpha_upper_bound(p) << " alpha_root=" << alpha_root(p)
       << " alpha_estimate=" << alpha_upper_bound_estimate(p) << '\n';
  out << "alpha,rho_g\n";
  out.precision(17);
  for (double a : grid) out << a << ',' << spectral_radius3(build_G(p, a)) << '\n';
  return 0;
}

int cmd_compare_main(const ExperimentConfig& cfg, const std::string& dir) {
  const ComparisonReport report = cmd_compare(cfg);
  write_comparison(report, dir);
  write_summary_csv(std::cout, report);
  std::cerr.precision(10);
  std::cerr << "alpha_bar=" << report.alpha_bar << " rho_g(alpha=" << cfg.alpha
            << ")=" << report.rho_g << '\n';
  return report.all_completed() ? 0 : kExitDiverged;
}

int cmd_sweep_main(const ExperimentConfig& cfg, const std::string& out_path) {
  const StepsizeStudy study = cmd_stepsize_study(cfg);
  std::ofstream file;
  write_stepsize_csv(output(out_path, file), study);
  std::cerr.precision(10);
  std::cerr << "alpha_bar=" << study.alpha_bar << '\n';
  return study.any_diverged() ? kExitDiverged : 0;
}

int cmd_sparsity_main(const ExperimentConfig& cfg, const std::string& out_path) {
  const auto rows = cmd_sparsity_study(cfg);
  std::ofstream file;
  write_sparsity_csv(output(out_path, file), rows);
  for (const auto& r : rows) {
    if (r.diverged_at) return kExitDiverged;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed optimization over directed graphs: simulation and analysis"};
  app.set_config("--config", "", "INI file; [section] names select subcommands");
  app.require_subcommand(1);

  // graph
  auto* graph = app.add_subcommand("graph", "inspect a topology");
  graph->require_subcommand(1);
  std::string graph_source;
  double slack = -1.0;
  auto* gcheck = graph->add_subcommand("check", "strong connectivity");
  gcheck->add_option("source", graph_source, "graph file or builtin")->required();
  auto* gspec = graph->add_subcommand("spectrum", "tau, eps, sigma, pi of uniform weights");
  gspec->add_option("source", graph_source, "graph file or builtin")->required();
  gspec->add_option("--slack", slack, "contraction norm slack (default half the gap)");

  // data
  auto* data = app.add_subcommand("data", "logistic datasets");
  data->require_subcommand(1);
  ExperimentConfig data_cfg;
  ObjectiveOptions data_obj;
  int data_n = 10;
  std::string data_out;
  auto* dgen = data->add_subcommand("gen", "generate a planted-hyperplane dataset");
  dgen->add_option("--n", data_n, "agents")->capture_default_str();
  add_objective_options(dgen, data_cfg, data_obj);
  dgen->add_option("--out", data_out, "CSV path (default stdout)");
  auto* dsolve = data->add_subcommand("solve", "centralized optimum");
  dsolve->add_option("--n", data_n, "agents when generating")->capture_default_str();
  add_objective_options(dsolve, data_cfg, data_obj);

  // run
  auto* runc = app.add_subcommand("run", "simulate one algorithm and write its trace");
  ExperimentConfig run_cfg;
  ObjectiveOptions run_obj;
  std::string run_alg = "addopt", run_out;
  runc->add_option("--alg", run_alg, "addopt, dextra or gp")->capture_default_str();
  runc->add_option("--alpha", run_cfg.alpha, "step size (scale of 1/sqrt(k) for gp)")
      ->capture_default_str();
  runc->add_flag("--diminishing", run_cfg.diminishing, "alpha/sqrt(k) for addopt and dextra");
  runc->add_option("--out", run_out, "trace CSV (default stdout)");
  add_run_options(runc, run_cfg);
  add_objective_options(runc, run_cfg, run_obj);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "step-size bound and rho(G) table");
  ExperimentConfig an_cfg;
  ObjectiveOptions an_obj;
  AnalyzeOptions an;
  analyze->add_option("--graph", an_cfg.graph, "graph source")->capture_default_str();
  analyze->add_option("--l", an.l, "Lipschitz constant (default from objectives)");
  analyze->add_option("--s", an.s, "strong convexity (default from objectives)");
  analyze->add_option("--n", an.n, "agent count (default graph size)");
  auto* an_alpha = analyze->add_option("--alpha", an.alphas, "step sizes to tabulate");
  auto* an_sweep = analyze->add_option("--sweep", an.sweep, "lo:hi:steps");
  an_alpha->excludes(an_sweep);
  analyze->add_option("--out", an.out, "CSV path (default stdout)");
  add_objective_options(analyze, an_cfg, an_obj);

  // compare
  auto* compare = app.add_subcommand("compare", "run several algorithms on one instance");
  ExperimentConfig cmp_cfg;
  ObjectiveOptions cmp_obj;
  std::vector<std::string> cmp_algs{"addopt", "dextra", "gp"};
  std::string cmp_out = "compare_out";
  compare->add_option("--alg", cmp_algs, "algorithms (comma separated)")
      ->delimiter(',')
      ->capture_default_str();
  compare->add_option("--alpha", cmp_cfg.alpha, "constant step for addopt and dextra")
      ->capture_default_str();
  compare->add_flag("--diminishing", cmp_cfg.diminishing, "alpha/sqrt(k) for addopt and dextra");
  compare->add_option("--gp-scale", cmp_cfg.gp_scale, "gradient-push step scale/sqrt(k)")
      ->capture_default_str();
  compare->add_option("--out", cmp_out, "output directory")->capture_default_str();
  add_run_options(compare, cmp_cfg);
  add_objective_options(compare, cmp_cfg, cmp_obj);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "ADD-OPT step-size study");
  ExperimentConfig sw_cfg;
  ObjectiveOptions sw_obj;
  std::string sw_spec, sw_out;
  sweep->add_option("--sweep", sw_spec, "lo:hi:steps")->required();
  sweep->add_option("--checkpoint", sw_cfg.checkpoint, "iteration whose residual is reported")
      ->capture_default_str();
  sweep->add_option("--converge-tol", sw_cfg.converge_tol, "final residual counted as converged")
      ->capture_default_str();
  sweep->add_option("--out", sw_out, "CSV path (default stdout)");
  add_run_options(sweep, sw_cfg);
  add_objective_options(sweep, sw_cfg, sw_obj);

  // sparsity
  auto* sparsity = app.add_subcommand("sparsity", "decay rate along a nested graph chain");
  ExperimentConfig sp_cfg;
  sp_cfg.alpha = 0.05;
  sp_cfg.iters = 20000;
  sp_cfg.stop_tol = 1e-12;
  ObjectiveOptions sp_obj;
  std::string sp_out;
  sparsity->add_option("--agents", sp_cfg.agents, "nodes per graph")->capture_default_str();
  sparsity->add_option("--chain", sp_cfg.chain_extra, "edges added per level (comma separated)")
      ->delimiter(',')
      ->capture_default_str();
  sparsity->add_flag("--strict", sp_cfg.strict, "reject chains that are not nested");
  sparsity->add_option("--alpha", sp_cfg.alpha, "ADD-OPT step size")->capture_default_str();
  sparsity->add_option("--iters", sp_cfg.iters, "iteration cap")->capture_default_str();
  sparsity->add_option("--stop-tol", sp_cfg.stop_tol, "stop once residual <= this")
      ->capture_default_str();
  sparsity->add_option("--out", sp_out, "CSV path (default stdout)");
  add_objective_options(sparsity, sp_cfg, sp_obj);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gcheck) return cmd_graph_check(graph_source);
    if (*gspec) return cmd_graph_spectrum(graph_source, slack);
    if (*dgen || *dsolve) {
      finish_objective(data_cfg, data_obj);
      const LogisticData d = dataset_for(data_cfg, data_n, data_obj.feature_std);
      if (*dgen) {
        std::ofstream file;
        write_dataset_csv(output(data_out, file), d);
        return 0;
      }
      const Optimum opt = centralized_solve(data_cfg.objective == ObjectiveKind::quadratic
                                                ? make_objectives(data_cfg, data_n)
                                                : logistic_objectives(d));
      std::cout.precision(17);
      std::cout << "z_star=";
      print_vector(std::cout, opt.z_star);
      std::cout << "\nf_star=" << opt.f_star << "\nresidual_norm=" << opt.residual_norm
                << "\niterations=" << opt.iterations
                << "\nconverged=" << (opt.converged ? "true" : "false")
                << "\nmethod=" << opt.method << '\n';
      return opt.converged ? 0 : kExitDiverged;
    }
    if (*runc) {
      finish_objective(run_cfg, run_obj);
      run_cfg.algorithms = {parse_engine(run_alg)};
      run_cfg.validate();
      return cmd_run(run_cfg, run_cfg.algorithms.front(), run_out);
    }
    if (*analyze) {
      finish_objective(an_cfg, an_obj);
      an_cfg.validate();
      if (an.alphas.empty() && an.sweep.empty()) an.alphas.push_back(an_cfg.alpha);
      return cmd_analyze(an_cfg, an);
    }
    if (*compare) {
      finish_objective(cmp_cfg, cmp_obj);
      cmp_cfg.algorithms.clear();
      for (const auto& a : cmp_algs) cmp_cfg.algorithms.push_back(parse_engine(a));
      cmp_cfg.validate();
      return cmd_compare_main(cmp_cfg, cmp_out);
    }
    if (*sweep) {
      finish_objective(sw_cfg, sw_obj);
      sw_cfg.sweep = SweepSpec::parse(sw_spec);
      sw_cfg.validate();
      return cmd_sweep_main(sw_cfg, sw_out);
    }
    if (*sparsity) {
      finish_objective(sp_cfg, sp_obj);
      sp_cfg.validate();
      return cmd_sparsity_main(sp_cfg, sp_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
