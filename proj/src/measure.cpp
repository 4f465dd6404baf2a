#include "unmeasure/measure.hpp"

#include <cmath>
#include <set>

#include "unmeasure/error.hpp"

namespace unmeasure {

namespace {

void require_same_support(const Measure& p, const Measure& q) {
  if (p.size() != q.size()) throw DomainError("support size mismatch");
  if (p.has_labels() && q.has_labels() && p.labels() != q.labels()) {
    throw DomainError("support label mismatch");
  }
}

std::vector<std::string> merged_labels(const Measure& p, const Measure& q) {
  return p.has_labels() ? p.labels() : q.labels();
}

double subset_mass(const Measure& mu, std::span<const std::size_t> atoms) {
  std::set<std::size_t> seen;
  double mass = 0.0;
  for (std::size_t a : atoms) {
    if (a >= mu.size()) throw DomainError("atom index out of range");
    if (!seen.insert(a).second) throw DomainError("duplicate atom in subset");
    mass += mu[a];
  }
  return mass;
}

}  // namespace

Measure::Measure(std::vector<double> weights, std::vector<std::string> labels)
    : weights_(std::move(weights)), labels_(std::move(labels)) {
  if (weights_.empty()) throw DomainError("measure needs at least one atom");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw DomainError("measure weights must be finite and non-negative");
    }
    total += w;
  }
  if (!std::isfinite(total)) throw DomainError("measure total mass is not finite");
  if (!labels_.empty()) {
    if (labels_.size() != weights_.size()) throw DomainError("labels and weights differ in length");
    if (std::set<std::string>(labels_.begin(), labels_.end()).size() != labels_.size()) {
      throw DomainError("measure labels must be distinct");
    }
  }
}

Measure Measure::zeros(std::size_t size) { return Measure(std::vector<double>(size, 0.0)); }

double Measure::total_mass() const {
  double total = 0.0;
  for (double w : weights_) total += w;
  return total;
}

AtomSet all_atoms(const Measure& m) {
  AtomSet atoms(m.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) atoms[i] = i;
  return atoms;
}

Measure add(const Measure& p, const Measure& q) {
  require_same_support(p, q);
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = p[i] + q[i];
  return Measure(std::move(out), merged_labels(p, q));
}

Measure scale(const Measure& p, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("scale factor must lie in [0, 1]");
  return multiply(p, alpha);
}

Measure multiply(const Measure& p, double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("multiplier must be finite and >= 0");
  std::vector<double> out(p.weights().begin(), p.weights().end());
  for (double& w : out) w *= c;
  return Measure(std::move(out), p.labels());
}

Measure normalize(const Measure& p) {
  const double mass = p.total_mass();
  if (!(mass > 0.0)) throw DomainError("cannot normalize a zero measure");
  std::vector<double> out(p.weights().begin(), p.weights().end());
  for (double& w : out) w /= mass;
  return Measure(std::move(out), p.labels());
}

Measure condition(const Measure& mu, std::span<const std::size_t> atoms) {
  const double mass = subset_mass(mu, atoms);
  if (!(mass > 0.0)) throw DomainError("conditioning event has zero mass");
  std::vector<double> out(mu.size(), 0.0);
  for (std::size_t a : atoms) out[a] = mu[a] / mass;
  return Measure(std::move(out), mu.labels());
}

CodelengthFn codelengths_from(const Measure& mu, std::span<const std::size_t> atoms,
                              bool allow_infinite) {
  const double mass = subset_mass(mu, atoms);
  if (!(mass > 0.0)) throw DomainError("conditioning event has zero mass");
  CodelengthFn out{std::vector<double>(mu.size(), HUGE_VAL)};
  for (std::size_t a : atoms) {
    if (mu[a] == 0.0 && !allow_infinite) {
      throw DomainError("zero-mass atom inside the coded subset has infinite codelength");
    }
    out.lengths[a] = mu[a] == 0.0 ? HUGE_VAL : std::log(mass) - std::log(mu[a]);
  }
  return out;
}

KraftReport kraft_check(const CodelengthFn& lengths) {
  KraftReport report;
  for (double l : lengths.lengths) {
    if (std::isnan(l) || l == -HUGE_VAL) throw DomainError("codelength must not be NaN or -inf");
    report.sum += std::exp(-l);
  }
  report.satisfied = report.sum <= 1.0 + 1e-12;
  return report;
}

void to_json(nlohmann::json& j, const Measure& m) {
  j = nlohmann::json::object();
  if (m.has_labels()) j["labels"] = m.labels();
  j["weights"] = std::vector<double>(m.weights().begin(), m.weights().end());
}

Measure measure_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("weights")) throw DomainError("measure JSON needs \"weights\"");
  auto weights = j.at("weights").get<std::vector<double>>();
  std::vector<std::string> labels;
  if (j.contains("labels")) labels = j.at("labels").get<std::vector<std::string>>();
  return Measure(std::move(weights), std::move(labels));
}

}  // namespace unmeasure
