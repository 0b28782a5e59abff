// countergm command-line tool: summarize, fit, simulate, study.
//
// Settings come from built-in defaults, then an optional JSON config (--config), then
// flags; later sources win. The fully resolved configuration, including the seed, is
// written to manifest.json in the output directory of every run.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "config.hpp"
#include "countergm/errors.hpp"
#include "countergm/graph_io.hpp"
#include "countergm/oracle.hpp"
#include "countergm/rng.hpp"

#ifndef COUNTERGM_VERSION
#define COUNTERGM_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using namespace countergm;
using namespace countergm::cli;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNotConverged = 2;

struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out;
  // data
  std::string graph;
  int nodes = 0;
  std::string node_covariates;
  std::vector<std::string> dyad_covariates;
  // model
  std::string terms;
  std::string reference;
  std::int64_t cap = 0;
  // method
  std::string method;
  std::string seed_method;
  std::string window;
  double lambda_global = 0;
  double lambda_edge = 0;
  int knots = 0;
  std::string strategy;
  std::int64_t m_edges = 0;
  int steps = 0;
  int multiplicity = 0;
  int chains = 0;
  int max_rounds = 0;
  std::int64_t interval = 0;
  std::int64_t burnin = 0;
  std::int64_t samples = 0;
  int max_iterations = 0;
  std::string proposal;
  bool oracle = false;
  // simulate
  std::string theta;
  std::string start;
  bool write_graphs = false;
  // study
  int replicates = 0;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string absolute(const std::string& p) { return fs::absolute(p).lexically_normal().string(); }

// Rewrites every path-valued key to an absolute path so the manifest is location independent.
void absolutize(json& doc, const fs::path& base) {
  auto fix = [&](json& v) {
    if (v.is_string() && !fs::path(v.get<std::string>()).is_absolute())
      v = (base / v.get<std::string>()).lexically_normal().string();
  };
  auto fix_map = [&](json& m) {
    if (m.is_object())
      for (auto& [k, v] : m.items()) fix(v);
  };
  if (doc.contains("data") && doc["data"].is_object()) {
    json& d = doc["data"];
    for (const char* key : {"graph", "node_covariates"})
      if (d.contains(key)) fix(d[key]);
    if (d.contains("dyad_covariates")) fix_map(d["dyad_covariates"]);
  }
  for (const char* key : {"start", "node_covariates", "output"})
    if (doc.contains(key)) fix(doc[key]);
  if (doc.contains("dyad_covariates")) fix_map(doc["dyad_covariates"]);
}

json flags_to_patch(const CLI::App& cmd, const Flags& f) {
  json p = json::object();
  auto given = [&](const char* name) {
    try {
      return cmd.get_option(name)->count() > 0;
    } catch (const CLI::OptionNotFound&) {
      return false;
    }
  };
  if (given("--seed")) p["seed"] = f.seed;
  if (given("--workers")) p["workers"] = f.workers;
  if (given("--out")) p["output"] = absolute(f.out);
  if (given("--graph")) p["data"]["graph"] = absolute(f.graph);
  if (given("--nodes")) {
    if (cmd.get_name() == "study") p["nodes"] = f.nodes;
    else p["data"]["nodes"] = f.nodes;
  }
  if (given("--node-covariates")) {
    if (cmd.get_name() == "study") p["node_covariates"] = absolute(f.node_covariates);
    else p["data"]["node_covariates"] = absolute(f.node_covariates);
  }
  for (const std::string& spec : f.dyad_covariates) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw ConfigError("--dyad-covariate expects name=path, got '" + spec + "'");
    const std::string name = spec.substr(0, eq);
    const std::string path = absolute(spec.substr(eq + 1));
    if (cmd.get_name() == "study") p["dyad_covariates"][name] = path;
    else p["data"]["dyad_covariates"][name] = path;
  }
  if (given("--terms")) p["model"]["terms"] = split_list(f.terms);
  if (given("--reference")) p["model"]["reference"] = f.reference;
  if (given("--cap")) p["model"]["cap"] = f.cap;

  if (given("--method")) p["method"]["name"] = f.method;
  if (given("--seed-method")) p["method"]["seed_method"] = f.seed_method;
  if (given("--window")) p["method"]["mple"]["window"] = f.window;
  if (given("--lambda-global")) p["method"]["mple"]["lambda_global"] = f.lambda_global;
  if (given("--lambda-edge")) p["method"]["mple"]["lambda_edge"] = f.lambda_edge;
  if (given("--knots")) p["method"]["mple"]["knots"] = f.knots;
  if (given("--strategy")) p["method"]["mple"]["strategy"] = f.strategy;
  if (given("--m-edges")) p["method"]["mple"]["m_edges"] = f.m_edges;
  if (given("--steps")) p["method"]["cd"]["steps"] = f.steps;
  if (given("--multiplicity")) p["method"]["cd"]["multiplicity"] = f.multiplicity;
  if (given("--chains")) p["method"]["cd"]["chains"] = f.chains;
  if (given("--max-rounds")) p["method"]["cd"]["max_rounds"] = f.max_rounds;

  const bool sim = cmd.get_name() == "simulate";
  if (given("--interval")) (sim ? p["sampler"] : p["method"]["mcmle"])["interval"] = f.interval;
  if (given("--burnin")) (sim ? p["sampler"] : p["method"]["mcmle"])["burnin"] = f.burnin;
  if (given("--samples")) (sim ? p["sampler"] : p["method"]["mcmle"])["samples"] = f.samples;
  if (given("--max-iterations")) p["method"]["mcmle"]["max_iterations"] = f.max_iterations;
  if (given("--proposal")) {
    if (sim) {
      p["sampler"]["proposal"] = f.proposal;
    } else {
      p["method"]["mcmle"]["proposal"] = f.proposal;
      p["method"]["cd"]["proposal"] = f.proposal;
    }
  }
  if (given("--theta")) {
    json th = json::array();
    for (const std::string& v : split_list(f.theta)) {
      try {
        th.push_back(std::stod(v));
      } catch (const std::exception&) {
        throw ConfigError("--theta: '" + v + "' is not a number");
      }
    }
    p["theta"] = th;
  }
  if (given("--start")) p["start"] = absolute(f.start);
  if (f.write_graphs) p["write_graphs"] = true;
  if (given("--replicates")) p["replicates"] = f.replicates;
  return p;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IngestError(path.string() + ": cannot open for writing");
  out << j.dump(2) << '\n';
}

json vec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(std::isfinite(v[i]) ? json(v[i]) : json(nullptr));
  return a;
}

json estimate_json(const Estimate& e, const std::vector<std::string>& labels, std::uint64_t seed) {
  return {{"method_tag", e.method_tag},
          {"terms", labels},
          {"theta", vec(e.theta)},
          {"se", vec(e.se)},
          {"converged", e.converged},
          {"iterations", e.iterations},
          {"wallclock_seconds", e.wallclock_seconds},
          {"warnings", e.warnings},
          {"step_lengths", e.step_lengths},
          {"max_t_ratios", e.max_t_ratios},
          {"seed", seed}};
}

CovariateSet load_covs(const std::optional<DataSettings>& data, int n) {
  if (!data) return {};
  return load_covariates(data->node_covariates, data->dyad_covariates, n);
}

void merge_covariates(CovariateSet& into, const CovariateSet& from) {
  for (const auto& [k, v] : from.node) into.node[k] = v;
  for (const auto& [k, v] : from.dyad) into.dyad[k] = v;
}

struct Run {
  std::string command;
  json doc;
  RunConfig rc;
  std::uint64_t seed = 0;
};

void write_manifest(const Run& run, const std::vector<std::string>& argv) {
  fs::create_directories(run.rc.output);
  write_json(run.rc.output / "manifest.json", {{"tool", "countergm"},
                                              {"version", COUNTERGM_VERSION},
                                              {"command", run.command},
                                              {"argv", argv},
                                              {"seed", run.seed},
                                              {"config", run.doc}});
}

int cmd_summarize(const Run& run) {
  const DataSettings& d = *run.rc.data;
  const CountGraph g = load_graph(d.graph, d.nodes);
  const GraphSummary s = summarize(g);
  const json out = {{"nodes", g.n()},           {"dyads", g.dyad_count()}, {"total", g.total()},
                    {"nonzero", g.nonzero_count()}, {"max_value", s.max_value}, {"mean", s.mean},
                    {"sd", s.sd},                 {"density", s.density}};
  fs::create_directories(run.rc.output);
  write_json(run.rc.output / "summary.json", out);
  std::cout << out.dump(2) << '\n';
  return kExitOk;
}

int cmd_fit(const Run& run, bool oracle) {
  const DataSettings& d = *run.rc.data;
  const CountGraph g = load_graph(d.graph, d.nodes);
  ModelSpec spec = run.rc.model;
  merge_covariates(spec.covariates, load_covs(run.rc.data, d.nodes));
  const Model model(spec, d.nodes);

  MethodSettings m = *run.rc.method;
  m.sample.seed = derive_seed(run.seed, 1);
  m.cd.seed = derive_seed(run.seed, 2);
  m.mcmle.seed = derive_seed(run.seed, 3);
  m.mple.workers = run.rc.workers;
  m.cd.workers = run.rc.workers;

  Estimate est;
  if (oracle) {
    if (!spec.support.cap) throw ConfigError("--oracle needs a capped model (model.cap)");
    const ExactMle mle = exact_mle(g, model, EnumSpec{d.nodes, *spec.support.cap});
    est.theta = mle.theta;
    est.se = mle.fisher_information.inverse().diagonal().cwiseSqrt();
    est.converged = true;
    est.iterations = mle.iterations;
    est.method_tag = "oracle";
  } else {
    switch (m.kind) {
      case MethodKind::Mple:
        est = fit_mple(g, model, m.sample, m.window, m.mple);
        break;
      case MethodKind::Cd:
        est = fit_cd(g, model, m.cd);
        break;
      case MethodKind::Mcmle: {
        PipelineConfig p = m.to_method_config().pipeline;
        p.mple.workers = run.rc.workers;
        p.cd.workers = run.rc.workers;
        est = fit_pipeline(g, model, p);
        break;
      }
      case MethodKind::Oracle:
        throw ConfigError("the oracle is only available through --oracle");
    }
  }
  const json out = estimate_json(est, model.term_labels(), run.seed);
  fs::create_directories(run.rc.output);
  write_json(run.rc.output / "estimate.json", out);
  std::cout << out.dump(2) << '\n';
  if (!est.converged) {
    std::cerr << "warning: estimate did not converge\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

int cmd_simulate(const Run& run) {
  const int n = run.rc.data->nodes;
  ModelSpec spec = run.rc.model;
  merge_covariates(spec.covariates, load_covs(run.rc.data, n));
  const Model model(spec, n);
  SimulateSettings s = *run.rc.simulate;
  if (s.theta.size() != model.k())
    throw ConfigError("theta has " + std::to_string(s.theta.size()) + " entries but the model has " +
                      std::to_string(model.k()) + " terms");
  s.sampler.seed = derive_seed(run.seed, 4);
  const CountGraph start = s.start ? load_graph(*s.start, n) : CountGraph(n);
  const SimulationResult res = simulate(model, s.theta, start, s.sampler, s.write_graphs);

  fs::create_directories(run.rc.output);
  const auto labels = model.term_labels();
  {
    std::ofstream f(run.rc.output / "traces.csv");
    for (std::size_t i = 0; i < labels.size(); ++i) f << (i ? "," : "") << labels[i];
    f << '\n';
    char buf[64];
    for (Eigen::Index r = 0; r < res.stat_traces.rows(); ++r) {
      for (Eigen::Index c = 0; c < res.stat_traces.cols(); ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", res.stat_traces(r, c));
        f << (c ? "," : "") << buf;
      }
      f << '\n';
    }
  }
  json diag = {{"acceptance_rate", res.acceptance_rate}, {"terms", json::array()}};
  if (res.stat_traces.rows() >= 10) {
    const auto d = mcmc_diagnostics(res.stat_traces);
    for (std::size_t i = 0; i < labels.size(); ++i)
      diag["terms"].push_back({{"term", labels[i]},
                               {"lag1_autocorrelation", d[i].lag1_autocorrelation ? json(*d[i].lag1_autocorrelation) : json(nullptr)},
                               {"effective_sample_size", d[i].effective_sample_size ? json(*d[i].effective_sample_size) : json(nullptr)}});
  }
  write_json(run.rc.output / "diagnostics.json", diag);
  if (s.write_graphs) {
    fs::create_directories(run.rc.output / "graphs");
    for (std::size_t i = 0; i < res.samples.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "sample_%05zu.csv", i + 1);
      save_graph(run.rc.output / "graphs" / name, res.samples[i]);
    }
  }
  std::cout << diag.dump(2) << '\n';
  return kExitOk;
}

int cmd_study(const Run& run) {
  StudyConfig sc = *run.rc.study;
  sc.seed = run.seed;
  merge_covariates(sc.model.covariates, load_covs(run.rc.data, sc.n));
  const StudyResult res = run_recovery_study(sc);
  fs::create_directories(run.rc.output);
  write_raw_csv(run.rc.output / "raw.csv", res.raw, res.coefficients);
  write_timings_csv(run.rc.output / "timings.csv", res.raw);
  write_report_csv(run.rc.output / "report.csv", res.report);
  write_report_json(run.rc.output / "report.json", res.report);

  std::printf("%-14s %-16s %9s %9s %9s %9s %8s %9s %s\n", "method", "coefficient", "arb", "se", "rmse",
              "calib", "coverage", "seconds", "failures");
  for (const MetricRow& r : res.report.rows) {
    std::printf("%-14s %-16s %9.4f %9.4f %9.4f %9s %8.3f %9.3f %d%s\n", r.method.c_str(), r.coefficient.c_str(),
                r.arb, r.se, r.rmse, r.calibration ? std::to_string(*r.calibration).substr(0, 8).c_str() : "NA",
                r.coverage, r.mean_seconds, r.failures, r.flagged ? "  (flagged: <80% successful)" : "");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Estimation and recovery studies for count-valued exponential-family random graph models"};
  app.set_version_flag("--version", COUNTERGM_VERSION);
  app.require_subcommand(1);
  Flags f;

  auto common = [&](CLI::App* c) {
    c->add_option("--config", f.config, "JSON config file");
    c->add_option("--out", f.out, "Output directory (default: current directory)");
  };
  auto randomized = [&](CLI::App* c) {
    c->add_option("--seed", f.seed, "Random seed (generated and printed if omitted)");
    c->add_option("--workers", f.workers, "Worker threads")->check(CLI::PositiveNumber);
  };
  auto data = [&](CLI::App* c) {
    c->add_option("--graph", f.graph, "Edgelist CSV with header from,to,value (1-based ids)");
    c->add_option("--nodes", f.nodes, "Number of nodes");
    c->add_option("--node-covariates", f.node_covariates, "Node covariate CSV (header row, one row per node)");
    c->add_option("--dyad-covariate", f.dyad_covariates, "Dyad covariate as name=path to an n x n CSV");
  };
  auto model = [&](CLI::App* c) {
    c->add_option("--terms", f.terms, "Comma-separated terms, e.g. sum,nonzero,nodeocov(x),mutual");
    c->add_option("--reference", f.reference, "Reference measure: poisson or constant");
    c->add_option("--cap", f.cap, "Maximum edge value");
  };

  CLI::App* summarize_cmd = app.add_subcommand("summarize", "Descriptive statistics of a count network");
  common(summarize_cmd);
  data(summarize_cmd);

  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit a model by MPLE, CD or MCMLE");
  common(fit_cmd);
  randomized(fit_cmd);
  data(fit_cmd);
  model(fit_cmd);
  fit_cmd->add_option("--method", f.method, "mple, cd or mcmle");
  fit_cmd->add_option("--seed-method", f.seed_method, "MCMLE starting values: mple, cd or zeros");
  fit_cmd->add_option("--window", f.window, "MPLE support window: global, edgewise or coarsened");
  fit_cmd->add_option("--lambda-global", f.lambda_global, "Global window multiplier");
  fit_cmd->add_option("--lambda-edge", f.lambda_edge, "Edgewise window multiplier");
  fit_cmd->add_option("--knots", f.knots, "Knots for coarsened windows");
  fit_cmd->add_option("--strategy", f.strategy, "Edge sampling: uniform, tnt or flat");
  fit_cmd->add_option("--m-edges", f.m_edges, "Number of dyads to sample (0 = all)");
  fit_cmd->add_option("--steps", f.steps, "CD steps per chain");
  fit_cmd->add_option("--multiplicity", f.multiplicity, "CD proposals per step");
  fit_cmd->add_option("--chains", f.chains, "CD chains per round");
  fit_cmd->add_option("--max-rounds", f.max_rounds, "CD rounds");
  fit_cmd->add_option("--interval", f.interval, "MCMLE thinning interval");
  fit_cmd->add_option("--burnin", f.burnin, "MCMLE burn-in (default 16 x interval)");
  fit_cmd->add_option("--samples", f.samples, "MCMLE draws per iteration");
  fit_cmd->add_option("--max-iterations", f.max_iterations, "MCMLE iterations");
  fit_cmd->add_option("--proposal", f.proposal, "Dyad proposal: random or tnt");
  fit_cmd->add_flag("--oracle", f.oracle, "Exact MLE by enumeration (tiny capped models)")->group("");

  CLI::App* simulate_cmd = app.add_subcommand("simulate", "Draw networks from a model by MCMC");
  common(simulate_cmd);
  randomized(simulate_cmd);
  data(simulate_cmd);
  model(simulate_cmd);
  simulate_cmd->add_option("--theta", f.theta, "Comma-separated coefficients");
  simulate_cmd->add_option("--interval", f.interval, "Thinning interval");
  simulate_cmd->add_option("--burnin", f.burnin, "Burn-in steps");
  simulate_cmd->add_option("--samples", f.samples, "Number of draws");
  simulate_cmd->add_option("--proposal", f.proposal, "Dyad proposal: random or tnt");
  simulate_cmd->add_option("--start", f.start, "Starting network edgelist (default: empty)");
  simulate_cmd->add_flag("--write-graphs", f.write_graphs, "Also write every draw as an edgelist");

  CLI::App* study_cmd = app.add_subcommand("study", "Run a parameter-recovery study");
  common(study_cmd);
  randomized(study_cmd);
  study_cmd->add_option("--nodes", f.nodes, "Number of nodes");
  study_cmd->add_option("--node-covariates", f.node_covariates, "Node covariate CSV");
  study_cmd->add_option("--dyad-covariate", f.dyad_covariates, "Dyad covariate as name=path");
  study_cmd->add_option("--replicates", f.replicates, "Number of simulated networks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitError;
  }

  CLI::App* cmd = app.get_subcommands().front();
  Run run;
  run.command = cmd->get_name();
  try {
    Source source;
    fs::path base = fs::current_path();
    if (!f.config.empty()) {
      run.doc = load_config(f.config, source);
      if (!run.doc.is_object()) throw ConfigError(f.config + ": the config must be a JSON object");
      base = fs::absolute(f.config).parent_path();
      absolutize(run.doc, base);
    } else {
      run.doc = json::object();
    }
    merge(run.doc, flags_to_patch(*cmd, f));

    if (run.command != "summarize") {
      if (run.doc.contains("seed") && !run.doc["seed"].is_null()) {
        if (!run.doc["seed"].is_number_unsigned()) throw ConfigError(source.where("seed") + "'seed' must be a non-negative integer");
        run.seed = run.doc["seed"].get<std::uint64_t>();
      } else {
        run.seed = std::random_device{}() ^ (static_cast<std::uint64_t>(std::random_device{}()) << 32);
        std::cerr << "seed: " << run.seed << '\n';
        run.doc["seed"] = run.seed;
      }
    }
    run.rc = parse_run_config(run.doc, run.command, source, base);

    std::vector<std::string> args(argv, argv + argc);
    write_manifest(run, args);
    if (run.command == "summarize") return cmd_summarize(run);
    if (run.command == "fit") return cmd_fit(run, f.oracle);
    if (run.command == "simulate") return cmd_simulate(run);
    return cmd_study(run);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
}
