#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace countergm::cli {

namespace {

std::string line_prefix(const Source& src, std::size_t offset) {
  if (src.path.empty()) return "config: ";
  const auto line = 1 + std::count(src.text.begin(), src.text.begin() + static_cast<std::ptrdiff_t>(
                                                                       std::min(offset, src.text.size())),
                                   '\n');
  return src.path + ":" + std::to_string(line) + ": ";
}

const char* type_name(const json& j) { return j.type_name(); }

// Strict view of one JSON object: every key must be declared, every value typed.
class Obj {
 public:
  Obj(const json& j, std::string path, const Source& src) : j_(j), path_(std::move(path)), src_(src) {
    if (!j_.is_object()) fail(path_.empty() ? "" : path_.substr(path_.rfind('/') + 1),
                              "'" + display() + "' must be an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }))
        fail(it.key(), "unknown key '" + it.key() + "' in '" + display() + "'");
    }
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  template <class T>
  T get(const char* key, T fallback) const {
    return has(key) ? as<T>(key) : fallback;
  }

  template <class T>
  std::optional<T> opt(const char* key) const {
    if (!has(key)) return std::nullopt;
    return as<T>(key);
  }

  template <class T>
  T require(const char* key) const {
    if (!has(key)) fail(key, "missing required key '" + std::string(key) + "' in '" + display() + "'");
    return as<T>(key);
  }

  Obj child(const char* key) const { return Obj(j_.at(key), path_ + "/" + key, src_); }
  const json& raw(const char* key) const { return j_.at(key); }
  std::string path_of(const char* key) const { return path_ + "/" + key; }

  std::string prefix() const { return src_.where(""); }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ConfigError(src_.where(key) + msg);
  }

 private:
  std::string display() const { return path_.empty() ? "/" : path_; }

  template <class T>
  T as(const char* key) const {
    const json& v = j_.at(key);
    bool ok = false;
    if constexpr (std::is_same_v<T, bool>) ok = v.is_boolean();
    else if constexpr (std::is_integral_v<T>) ok = v.is_number_integer();
    else if constexpr (std::is_floating_point_v<T>) ok = v.is_number();
    else if constexpr (std::is_same_v<T, std::string>) ok = v.is_string();
    else ok = true;
    if (!ok) fail(key, "'" + path_of(key) + "' has the wrong type (" + type_name(v) + ")");
    if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)
        fail(key, "'" + path_of(key) + "' must be non-negative");
    }
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      fail(key, "'" + path_of(key) + "' has the wrong type (" + type_name(v) + ")");
    }
  }

  const json& j_;
  std::string path_;
  const Source& src_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

ProposalKind parse_proposal(const Obj& o, const char* key, ProposalKind fallback) {
  if (!o.has(key)) return fallback;
  const auto s = o.get<std::string>(key, "");
  if (s == "random") return RandomDyad{};
  if (s == "tnt") return TieWeightedDyad{};
  o.fail(key, "'" + o.path_of(key) + "' must be \"random\" or \"tnt\"");
}

ModelSpec parse_model(const Obj& o) {
  o.allow({"terms", "reference", "cap"});
  ModelSpec spec;
  const json& terms = o.raw("terms");
  if (!terms.is_array() || terms.empty()) o.fail("terms", "'/model/terms' must be a non-empty array of strings");
  for (const json& t : terms) {
    if (!t.is_string()) o.fail("terms", "'/model/terms' must contain strings");
    try {
      spec.terms.push_back(TermSpec::parse(t.get<std::string>()));
    } catch (const std::exception& e) {
      o.fail("terms", e.what());
    }
  }
  try {
    spec.reference = parse_reference(o.get<std::string>("reference", "poisson"));
  } catch (const std::exception& e) {
    o.fail("reference", e.what());
  }
  if (auto cap = o.opt<std::int64_t>("cap")) spec.support.cap = *cap;
  return spec;
}

MethodSettings parse_method(const Obj& o, bool study) {
  if (study)
    o.allow({"label", "name", "seed_method", "mple", "cd", "mcmle", "oracle"});
  else
    o.allow({"name", "seed_method", "mple", "cd", "mcmle"});
  MethodSettings m;
  const auto name = o.get<std::string>("name", "mple");
  try {
    m.kind = parse_method_kind(name);
  } catch (const std::exception& e) {
    o.fail("name", e.what());
  }
  if (m.kind == MethodKind::Oracle && !study) o.fail("name", "the oracle is only available through --oracle");

  const auto sm = o.get<std::string>("seed_method", "mple");
  if (sm == "mple") m.seed_method = SeedMethod::Mple;
  else if (sm == "cd") m.seed_method = SeedMethod::Cd;
  else if (sm == "zeros") m.seed_method = SeedMethod::Vector;
  else o.fail("seed_method", "'seed_method' must be one of mple, cd, zeros");

  if (o.has("mple")) {
    const Obj p = o.child("mple");
    p.allow({"window", "lambda_global", "lambda_edge", "keep_low", "knots", "strategy", "m_edges",
             "max_iterations", "memory_budget_mb"});
    const auto window = p.get<std::string>("window", "global");
    const double lg = p.get<double>("lambda_global", GlobalTruncation{}.lambda_global);
    const double le = p.get<double>("lambda_edge", EdgewiseTruncation{}.lambda_edge);
    const auto keep = p.get<std::vector<EdgeValue>>("keep_low", {0, 1});
    if (window == "global") m.window = GlobalTruncation{lg};
    else if (window == "edgewise") m.window = EdgewiseTruncation{le, keep};
    else if (window == "coarsened") m.window = Coarsened{p.get<int>("knots", Coarsened{}.knots), le, keep};
    else p.fail("window", "'window' must be one of global, edgewise, coarsened");
    const auto strategy = p.get<std::string>("strategy", "uniform");
    if (strategy == "uniform") m.sample.strategy = EdgeSampling::Uniform;
    else if (strategy == "tnt") m.sample.strategy = EdgeSampling::TieNoTie;
    else if (strategy == "flat") m.sample.strategy = EdgeSampling::FlatValue;
    else p.fail("strategy", "'strategy' must be one of uniform, tnt, flat");
    m.sample.m_edges = p.get<std::int64_t>("m_edges", 0);
    m.mple.max_iterations = p.get<int>("max_iterations", m.mple.max_iterations);
    if (auto mb = p.opt<std::uint64_t>("memory_budget_mb")) m.mple.memory_budget_bytes = *mb << 20;
  }
  if (o.has("cd")) {
    const Obj c = o.child("cd");
    c.allow({"steps", "multiplicity", "chains", "max_rounds", "tolerance", "trust_radius", "proposal"});
    m.cd.steps = c.get<int>("steps", m.cd.steps);
    m.cd.multiplicity = c.get<int>("multiplicity", m.cd.multiplicity);
    m.cd.n_chains = c.get<int>("chains", m.cd.n_chains);
    m.cd.max_rounds = c.get<int>("max_rounds", m.cd.max_rounds);
    m.cd.tolerance = c.get<double>("tolerance", m.cd.tolerance);
    m.cd.trust_radius = c.get<double>("trust_radius", m.cd.trust_radius);
    m.cd.proposal = parse_proposal(c, "proposal", m.cd.proposal);
  }
  if (o.has("mcmle")) {
    const Obj c = o.child("mcmle");
    c.allow({"interval", "burnin", "samples", "max_iterations", "proposal", "step_length", "retry"});
    m.mcmle.interval = c.get<std::int64_t>("interval", m.mcmle.interval);
    if (auto b = c.opt<std::int64_t>("burnin")) m.mcmle.burnin = *b;
    m.mcmle.n_samples = c.get<std::int64_t>("samples", m.mcmle.n_samples);
    m.mcmle.max_iterations = c.get<int>("max_iterations", m.mcmle.max_iterations);
    m.mcmle.proposal = parse_proposal(c, "proposal", m.mcmle.proposal);
    const auto sl = c.get<std::string>("step_length", "damped");
    if (sl == "damped") m.mcmle.step_length_mode = StepLengthMode::Damped;
    else if (sl == "full") m.mcmle.step_length_mode = StepLengthMode::Full;
    else c.fail("step_length", "'step_length' must be damped or full");
    m.mcmle.retry_on_failure = c.get<bool>("retry", true);
  }
  if (o.has("oracle")) {
    const Obj c = o.child("oracle");
    c.allow({"cap"});
    m.oracle.cap = c.require<EdgeValue>("cap");
  }
  m.label = o.get<std::string>("label", name);
  try {
    validate(m.window);
    m.cd.validate();
    m.mcmle.validate();
  } catch (const std::exception& e) {
    throw ConfigError(o.prefix() + e.what());
  }
  return m;
}

SamplerConfig parse_sampler(const Obj& o, SamplerConfig cfg) {
  if (o.has("interval")) {
    cfg.interval = o.get<std::int64_t>("interval", cfg.interval);
    cfg.burnin = 16 * cfg.interval;
  }
  cfg.burnin = o.get<std::int64_t>("burnin", cfg.burnin);
  cfg.n_samples = o.get<std::int64_t>("samples", cfg.n_samples);
  cfg.proposal = parse_proposal(o, "proposal", cfg.proposal);
  return cfg;
}

Eigen::VectorXd parse_vector(const Obj& o, const char* key) {
  if (!o.has(key)) o.fail(key, "missing required key '" + std::string(key) + "'");
  const json& v = o.raw(key);
  if (!v.is_array()) o.fail(key, "'" + o.path_of(key) + "' must be an array of numbers");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) o.fail(key, "'" + o.path_of(key) + "' must be an array of numbers");
    out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  }
  return out;
}

}  // namespace

std::string Source::where(const std::string& key) const {
  if (path.empty()) return "config: ";
  const std::size_t at = key.empty() ? std::string::npos : text.find("\"" + key + "\"");
  if (at == std::string::npos) return path + ": ";
  return line_prefix(*this, at);
}

json load_config(const std::filesystem::path& path, Source& source) {
  std::ifstream f(path);
  if (!f) throw ConfigError(path.string() + ": cannot open config file");
  std::stringstream ss;
  ss << f.rdbuf();
  source.path = path.string();
  source.text = ss.str();
  try {
    return json::parse(source.text);
  } catch (const json::parse_error& e) {
    throw ConfigError(line_prefix(source, e.byte > 0 ? e.byte - 1 : 0) + "invalid JSON: " + e.what());
  }
}

void merge(json& base, const json& patch) {
  if (!base.is_object() || !patch.is_object()) {
    base = patch;
    return;
  }
  for (auto it = patch.begin(); it != patch.end(); ++it) merge(base[it.key()], it.value());
}

MethodConfig MethodSettings::to_method_config() const {
  MethodConfig m;
  m.label = label;
  m.kind = kind;
  m.mple_sample = sample;
  m.mple_window = window;
  m.mple = mple;
  m.cd = cd;
  m.pipeline.seed_method = seed_method;
  m.pipeline.cd = cd;
  m.pipeline.mple_sample = sample;
  m.pipeline.mple_window = window;
  m.pipeline.mple = mple;
  m.pipeline.mcmle = mcmle;
  m.oracle = oracle;
  return m;
}

RunConfig parse_run_config(const json& doc, const std::string& command, const Source& source,
                           const std::filesystem::path& base_dir) {
  const Obj root(doc, "", source);
  RunConfig rc;
  if (command == "summarize") {
    root.allow({"data", "output"});
  } else if (command == "fit") {
    root.allow({"data", "model", "method", "seed", "workers", "output"});
  } else if (command == "simulate") {
    root.allow({"data", "model", "theta", "sampler", "start", "write_graphs", "seed", "workers", "output"});
  } else if (command == "study") {
    root.allow({"model", "nodes", "covariates", "node_covariates", "dyad_covariates", "theta", "generator",
                "replicates", "methods", "level", "seed", "workers", "output"});
  } else {
    throw ConfigError("unknown command '" + command + "'");
  }
  rc.seed = root.opt<std::uint64_t>("seed");
  rc.workers = root.get<int>("workers", 1);
  if (rc.workers < 1) root.fail("workers", "'workers' must be >= 1");
  if (auto out = root.opt<std::string>("output")) rc.output = resolve(base_dir, *out);

  if (root.has("data")) {
    const Obj d = root.child("data");
    d.allow({"graph", "nodes", "node_covariates", "dyad_covariates"});
    DataSettings ds;
    if (auto g = d.opt<std::string>("graph")) ds.graph = resolve(base_dir, *g);
    ds.nodes = d.get<int>("nodes", 0);
    if (auto nc = d.opt<std::string>("node_covariates")) ds.node_covariates = resolve(base_dir, *nc);
    if (d.has("dyad_covariates")) {
      const auto m = d.get<std::map<std::string, std::string>>("dyad_covariates", {});
      for (const auto& [name, p] : m) ds.dyad_covariates[name] = resolve(base_dir, p);
    }
    rc.data = ds;
  }
  const bool needs_graph = command == "summarize" || command == "fit";
  if (needs_graph && (!rc.data || rc.data->graph.empty()))
    throw ConfigError(source.where("data") + "a graph file is required (data.graph or --graph)");
  if ((needs_graph || command == "simulate") && (!rc.data || rc.data->nodes < 2))
    throw ConfigError(source.where("nodes") + "the node count is required (data.nodes or --nodes, at least 2)");

  if (command != "summarize") {
    if (!root.has("model")) throw ConfigError(source.where("") + "missing 'model' block");
    rc.model = parse_model(root.child("model"));
  }
  if (command == "fit") rc.method = parse_method(root.has("method") ? root.child("method") : Obj(json::object(), "/method", source), false);

  if (command == "simulate") {
    SimulateSettings s;
    s.theta = parse_vector(root, "theta");
    if (root.has("sampler")) {
      const Obj so = root.child("sampler");
      so.allow({"interval", "burnin", "samples", "proposal"});
      s.sampler = parse_sampler(so, s.sampler);
    }
    if (auto st = root.opt<std::string>("start")) s.start = resolve(base_dir, *st);
    s.write_graphs = root.get<bool>("write_graphs", false);
    try {
      s.sampler.validate();
    } catch (const std::exception& e) {
      throw ConfigError(source.where("sampler") + e.what());
    }
    rc.simulate = s;
  }

  if (command == "study") {
    StudyConfig sc;
    sc.model = rc.model;
    sc.n = root.require<int>("nodes");
    if (root.has("covariates")) {
      const Obj c = root.child("covariates");
      c.allow({"node", "dyad"});
      if (c.has("node")) sc.model.covariates.node = c.get<std::map<std::string, std::vector<double>>>("node", {});
      if (c.has("dyad")) {
        const auto dy = c.get<std::map<std::string, std::vector<std::vector<double>>>>("dyad", {});
        for (const auto& [name, rows] : dy) {
          Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
          for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != static_cast<std::size_t>(m.cols())) c.fail("dyad", "ragged dyad covariate '" + name + "'");
            for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
          }
          sc.model.covariates.dyad[name] = m;
        }
      }
    }
    if (auto nc = root.opt<std::string>("node_covariates")) {
      DataSettings ds;
      ds.nodes = sc.n;
      ds.node_covariates = resolve(base_dir, *nc);
      rc.data = ds;
    }
    if (root.has("dyad_covariates")) {
      if (!rc.data) {
        rc.data = DataSettings{};
        rc.data->nodes = sc.n;
      }
      for (const auto& [name, p] : root.get<std::map<std::string, std::string>>("dyad_covariates", {}))
        rc.data->dyad_covariates[name] = resolve(base_dir, p);
    }
    sc.theta_star = parse_vector(root, "theta");
    if (root.has("generator")) {
      const Obj g = root.child("generator");
      g.allow({"interval", "burnin", "proposal"});
      sc.generator = parse_sampler(g, sc.generator);
    }
    sc.replicates = root.get<int>("replicates", sc.replicates);
    sc.level = root.get<double>("level", sc.level);
    sc.workers = rc.workers;
    sc.seed = rc.seed.value_or(0);
    if (!root.has("methods")) root.fail("methods", "missing required key 'methods'");
    const json& methods = root.raw("methods");
    if (!methods.is_array() || methods.empty()) root.fail("methods", "'methods' must be a non-empty array");
    for (std::size_t i = 0; i < methods.size(); ++i)
      sc.methods.push_back(parse_method(Obj(methods[i], "/methods/" + std::to_string(i), source), true).to_method_config());
    try {
      sc.validate();
    } catch (const std::exception& e) {
      throw ConfigError(source.where("") + e.what());
    }
    rc.study = sc;
  }
  return rc;
}

}  // namespace countergm::cli
