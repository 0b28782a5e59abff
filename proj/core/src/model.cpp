#include "countergm/model.hpp"

#include <algorithm>
#include <cctype>

#include "countergm/errors.hpp"
#include "countergm/numeric.hpp"

namespace countergm {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view strip(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

TermSpec TermSpec::parse(std::string_view text) {
  const std::string_view t = strip(text);
  std::string name;
  std::string arg;
  const auto open = t.find('(');
  if (open == std::string_view::npos) {
    name = lower(t);
  } else {
    if (t.back() != ')') throw ModelError("malformed term '" + std::string(t) + "'");
    name = lower(strip(t.substr(0, open)));
    arg = std::string(strip(t.substr(open + 1, t.size() - open - 2)));
    if (arg.empty()) throw ModelError("term '" + std::string(t) + "' needs a covariate name");
  }

  TermSpec spec;
  if (name == "sum") spec.kind = TermKind::Sum;
  else if (name == "nonzero") spec.kind = TermKind::Nonzero;
  else if (name == "nodeocov") spec.kind = TermKind::NodeOCov;
  else if (name == "nodeicov") spec.kind = TermKind::NodeICov;
  else if (name == "edgecov") spec.kind = TermKind::EdgeCov;
  else if (name == "mutual" || name == "mutualmin") spec.kind = TermKind::MutualMin;
  else if (name == "mixed2star" || name == "mixedtwostarmin") spec.kind = TermKind::MixedTwoStarMin;
  else throw ModelError("unknown term '" + std::string(t) + "'");

  if (spec.needs_covariate() != !arg.empty())
    throw ModelError(spec.needs_covariate() ? "term '" + name + "' needs a covariate name"
                                            : "term '" + name + "' takes no argument");
  spec.covariate = arg;
  return spec;
}

bool TermSpec::needs_covariate() const {
  return kind == TermKind::NodeOCov || kind == TermKind::NodeICov || kind == TermKind::EdgeCov;
}

std::string TermSpec::label() const {
  switch (kind) {
    case TermKind::Sum: return "sum";
    case TermKind::Nonzero: return "nonzero";
    case TermKind::NodeOCov: return "nodeocov(" + covariate + ")";
    case TermKind::NodeICov: return "nodeicov(" + covariate + ")";
    case TermKind::EdgeCov: return "edgecov(" + covariate + ")";
    case TermKind::MutualMin: return "mutual";
    case TermKind::MixedTwoStarMin: return "mixed2star";
  }
  return "?";
}

ReferenceMeasure parse_reference(std::string_view text) {
  const std::string t = lower(strip(text));
  if (t == "poisson") return ReferenceMeasure::Poisson;
  if (t == "constant" || t == "constantcapped" || t == "constant_capped")
    return ReferenceMeasure::ConstantCapped;
  throw ModelError("unknown reference measure '" + std::string(text) + "'");
}

std::string to_string(ReferenceMeasure ref) {
  return ref == ReferenceMeasure::Poisson ? "poisson" : "constant";
}

double log_reference_ratio(EdgeValue observed, EdgeValue candidate, ReferenceMeasure ref) {
  if (ref == ReferenceMeasure::ConstantCapped || observed == candidate) return 0.0;
  return log_factorial(observed) - log_factorial(candidate);
}

Model::Model(ModelSpec spec, int n) : spec_(std::move(spec)), n_(n) {
  if (n < 2) throw ModelError("model needs at least 2 nodes");
  if (spec_.terms.empty()) throw ModelError("model has no terms");
  spec_.support.validate();
  if (spec_.reference == ReferenceMeasure::ConstantCapped && !spec_.support.cap)
    throw ModelError("constant reference measure requires a finite support cap");
  spec_.covariates.validate(n);

  for (std::size_t t = 0; t < spec_.terms.size(); ++t)
    for (std::size_t u = 0; u < t; ++u)
      if (spec_.terms[t] == spec_.terms[u])
        throw ModelError("duplicate term '" + spec_.terms[t].label() + "'");

  for (const TermSpec& ts : spec_.terms) {
    Term term{ts.kind, {}, {}};
    if (ts.kind == TermKind::NodeOCov || ts.kind == TermKind::NodeICov) {
      const auto it = spec_.covariates.node.find(ts.covariate);
      if (it == spec_.covariates.node.end())
        throw ModelError("unresolved covariate '" + ts.covariate + "' in term " + ts.label());
      term.node = it->second;
    } else if (ts.kind == TermKind::EdgeCov) {
      const auto it = spec_.covariates.dyad.find(ts.covariate);
      if (it == spec_.covariates.dyad.end())
        throw ModelError("unresolved covariate '" + ts.covariate + "' in term " + ts.label());
      term.dyad.resize(static_cast<std::size_t>(n) * n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) term.dyad[static_cast<std::size_t>(i) * n + j] = it->second(i, j);
    }
    terms_.push_back(std::move(term));
  }
}

std::vector<std::string> Model::term_labels() const {
  std::vector<std::string> out;
  for (const auto& t : spec_.terms) out.push_back(t.label());
  return out;
}

int Model::sum_term_index() const {
  for (int t = 0; t < k(); ++t)
    if (terms_[t].kind == TermKind::Sum) return t;
  return -1;
}

void Model::check_dimensions(const CountGraph& g) const {
  if (g.n() != n_)
    throw DomainError("graph has " + std::to_string(g.n()) + " nodes but model expects " +
                      std::to_string(n_));
}

Eigen::VectorXd Model::suff_stats(const CountGraph& g) const {
  check_dimensions(g);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(k());
  for (int t = 0; t < k(); ++t) {
    const Term& term = terms_[t];
    double s = 0.0;
    switch (term.kind) {
      case TermKind::Sum:
        s = static_cast<double>(g.total());
        break;
      case TermKind::Nonzero:
        s = static_cast<double>(g.nonzero_count());
        break;
      case TermKind::NodeOCov:
        for (int i = 0; i < n_; ++i) s += static_cast<double>(g.out_sum(i)) * term.node[i];
        break;
      case TermKind::NodeICov:
        for (int j = 0; j < n_; ++j) s += static_cast<double>(g.in_sum(j)) * term.node[j];
        break;
      case TermKind::EdgeCov:
        for (int i = 0; i < n_; ++i)
          for (int j = 0; j < n_; ++j)
            if (i != j) s += static_cast<double>(g(i, j)) * term.dyad[static_cast<std::size_t>(i) * n_ + j];
        break;
      case TermKind::MutualMin:
        for (int i = 0; i < n_; ++i)
          for (int j = i + 1; j < n_; ++j) s += static_cast<double>(std::min(g(i, j), g(j, i)));
        break;
      case TermKind::MixedTwoStarMin:
        for (int i = 0; i < n_; ++i) s += static_cast<double>(std::min(g.in_sum(i), g.out_sum(i)));
        break;
    }
    out[t] = s;
  }
  return out;
}

void Model::change_score(const CountGraph& g, int i, int j, EdgeValue l, std::span<double> out) const {
  if (i == j) throw DomainError("change score undefined for a self-loop");
  const EdgeValue y = g(i, j);
  const auto d = static_cast<double>(l - y);
  for (int t = 0; t < k(); ++t) {
    const Term& term = terms_[t];
    switch (term.kind) {
      case TermKind::Sum:
        out[t] = d;
        break;
      case TermKind::Nonzero:
        out[t] = static_cast<double>(static_cast<int>(l > 0) - static_cast<int>(y > 0));
        break;
      case TermKind::NodeOCov:
        out[t] = d * term.node[i];
        break;
      case TermKind::NodeICov:
        out[t] = d * term.node[j];
        break;
      case TermKind::EdgeCov:
        out[t] = d * term.dyad[static_cast<std::size_t>(i) * n_ + j];
        break;
      case TermKind::MutualMin: {
        const EdgeValue back = g(j, i);
        out[t] = static_cast<double>(std::min(l, back) - std::min(y, back));
        break;
      }
      case TermKind::MixedTwoStarMin: {
        // Only out-sum of i and in-sum of j move, by l - y.
        const std::int64_t delta = l - y;
        const std::int64_t in_i = g.in_sum(i), out_i = g.out_sum(i);
        const std::int64_t in_j = g.in_sum(j), out_j = g.out_sum(j);
        out[t] = static_cast<double>(std::min(in_i, out_i + delta) - std::min(in_i, out_i) +
                                     std::min(in_j + delta, out_j) - std::min(in_j, out_j));
        break;
      }
    }
  }
}

Eigen::VectorXd Model::change_score(const CountGraph& g, int i, int j, EdgeValue l) const {
  check_dimensions(g);
  Eigen::VectorXd out(k());
  change_score(g, i, j, l, std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

double Model::log_reference(const CountGraph& g) const {
  if (spec_.reference == ReferenceMeasure::ConstantCapped) return 0.0;
  double s = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      if (i != j) s -= log_factorial(g(i, j));
  return s;
}

double Model::log_potential(const CountGraph& g, const Eigen::VectorXd& theta) const {
  if (theta.size() != k()) throw DomainError("theta has wrong dimension");
  return theta.dot(suff_stats(g)) + log_reference(g);
}

}  // namespace countergm
