#include "countergm/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include "countergm/errors.hpp"
#include "countergm/metrics.hpp"
#include "countergm/numeric.hpp"
#include "countergm/parallel.hpp"
#include "countergm/rng.hpp"

namespace countergm {

std::string to_string(MethodKind kind) {
  switch (kind) {
    case MethodKind::Mple: return "mple";
    case MethodKind::Cd: return "cd";
    case MethodKind::Mcmle: return "mcmle";
    case MethodKind::Oracle: return "oracle";
  }
  return "?";
}

MethodKind parse_method_kind(const std::string& text) {
  if (text == "mple") return MethodKind::Mple;
  if (text == "cd") return MethodKind::Cd;
  if (text == "mcmle") return MethodKind::Mcmle;
  if (text == "oracle") return MethodKind::Oracle;
  throw DomainError("unknown method '" + text + "'");
}

void StudyConfig::validate() const {
  if (replicates < 2) throw DomainError("a study needs at least 2 replicates");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must be in (0, 1)");
  if (methods.empty()) throw DomainError("a study needs at least one method");
  if (workers < 1) throw DomainError("workers must be >= 1");
  std::vector<std::string> labels;
  for (const MethodConfig& m : methods) labels.push_back(m.label);
  std::sort(labels.begin(), labels.end());
  if (std::adjacent_find(labels.begin(), labels.end()) != labels.end())
    throw DomainError("method labels must be unique");
  if (!theta_star.allFinite()) throw DomainError("ground-truth theta must be finite");
}

bool RawRecord::ok() const {
  return error.empty() && converged && theta.allFinite() && se.allFinite() && (se.array() > 0.0).all();
}

RawRecord fit_method(const CountGraph& g, const Model& model, const MethodConfig& method, std::uint64_t seed,
                     int replicate, int method_index) {
  RawRecord rec;
  rec.method = method.label;
  rec.replicate = replicate;
  const auto stream = [&](std::uint64_t part) {
    return derive_seed(seed, static_cast<std::uint64_t>(replicate) + 1,
                       static_cast<std::uint64_t>(method_index) * 16 + part);
  };
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Estimate est;
    switch (method.kind) {
      case MethodKind::Mple: {
        EdgeSampleSpec s = method.mple_sample;
        s.seed = stream(0);
        est = fit_mple(g, model, s, method.mple_window, method.mple);
        break;
      }
      case MethodKind::Cd: {
        CDConfig c = method.cd;
        c.seed = stream(1);
        est = fit_cd(g, model, c);
        break;
      }
      case MethodKind::Mcmle: {
        PipelineConfig p = method.pipeline;
        p.mple_sample.seed = stream(0);
        p.cd.seed = stream(1);
        p.mcmle.seed = stream(2);
        est = fit_pipeline(g, model, p);
        break;
      }
      case MethodKind::Oracle: {
        const ExactMle mle = exact_mle(g, model, method.oracle);
        Eigen::MatrixXd inv;
        if (!invert_spd(mle.fisher_information, inv)) throw EstimationError("exact Fisher information singular");
        est.theta = mle.theta;
        est.se = inv.diagonal().cwiseSqrt();
        est.converged = true;
        est.iterations = mle.iterations;
        break;
      }
    }
    rec.theta = est.theta;
    rec.se = est.se;
    rec.converged = est.converged;
    rec.iterations = est.iterations;
  } catch (const std::exception& e) {
    rec.error = e.what();
    rec.theta = Eigen::VectorXd::Constant(model.k(), std::numeric_limits<double>::quiet_NaN());
    rec.se = rec.theta;
  }
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

StudyResult run_recovery_study(const StudyConfig& cfg) {
  cfg.validate();
  const Model model(cfg.model, cfg.n);
  if (cfg.theta_star.size() != model.k()) throw DomainError("ground-truth theta has the wrong length");

  StudyResult out;
  out.coefficients = model.term_labels();

  SamplerConfig gen = cfg.generator;
  gen.n_samples = cfg.replicates;
  gen.seed = derive_seed(cfg.seed, 0);
  out.networks = simulate(model, cfg.theta_star, CountGraph(cfg.n), gen, true).samples;

  const std::size_t n_methods = cfg.methods.size();
  const std::size_t n_tasks = out.networks.size() * n_methods;
  out.raw.resize(n_tasks);
  parallel_for(n_tasks, cfg.workers, [&](std::size_t task) {
    const int rep = static_cast<int>(task / n_methods);
    const int mi = static_cast<int>(task % n_methods);
    out.raw[task] = fit_method(out.networks[static_cast<std::size_t>(rep)], model, cfg.methods[mi], cfg.seed, rep, mi);
  });

  std::vector<std::string> labels;
  for (const MethodConfig& m : cfg.methods) labels.push_back(m.label);
  out.report = compute_metrics(out.raw, labels, out.coefficients, cfg.theta_star, cfg.level);
  return out;
}

MetricsReport compute_metrics(const std::vector<RawRecord>& raw, const std::vector<std::string>& methods,
                              const std::vector<std::string>& coefficients, const Eigen::VectorXd& theta_star,
                              double level) {
  const auto k = static_cast<Eigen::Index>(coefficients.size());
  if (theta_star.size() != k) throw DomainError("ground-truth theta has the wrong length");
  MetricsReport report;
  for (const std::string& method : methods) {
    std::vector<const RawRecord*> recs;
    for (const RawRecord& r : raw)
      if (r.method == method) recs.push_back(&r);
    std::stable_sort(recs.begin(), recs.end(),
                     [](const RawRecord* a, const RawRecord* b) { return a->replicate < b->replicate; });
    double seconds = 0.0;
    int failures = 0;
    std::vector<const RawRecord*> good;
    for (const RawRecord* r : recs) {
      seconds += r->seconds;
      if (r->ok())
        good.push_back(r);
      else
        ++failures;
    }
    const double mean_seconds = recs.empty() ? 0.0 : seconds / static_cast<double>(recs.size());
    const bool flagged = recs.empty() || static_cast<double>(good.size()) < 0.8 * static_cast<double>(recs.size());

    for (Eigen::Index c = 0; c < k; ++c) {
      MetricRow row;
      row.method = method;
      row.coefficient = coefficients[static_cast<std::size_t>(c)];
      row.mean_seconds = mean_seconds;
      row.failures = failures;
      row.flagged = flagged;
      if (good.empty()) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.arb = row.bias = row.se = row.rmse = row.coverage = nan;
      } else {
        std::vector<double> est, se;
        for (const RawRecord* r : good) {
          est.push_back(r->theta[c]);
          se.push_back(r->se[c]);
        }
        const BiasValue b = arb(est, theta_star[c]);
        row.arb = b.value;
        row.arb_relative = b.relative;
        row.bias = signed_bias(est, theta_star[c]);
        row.se = true_se(est);
        row.rmse = rmse(est, theta_star[c]);
        row.calibration = calibration(se, row.se);
        row.coverage = coverage(est, se, theta_star[c], level);
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

}  // namespace countergm
