#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace unmeasure {

/// Finite-support unnormalized measure: a non-negative weight per atom with
/// optional distinct labels. Immutable after construction.
class Measure {
 public:
  explicit Measure(std::vector<double> weights, std::vector<std::string> labels = {});

  static Measure zeros(std::size_t size);

  std::size_t size() const { return weights_.size(); }
  std::span<const double> weights() const { return weights_; }
  double operator[](std::size_t i) const { return weights_[i]; }
  const std::vector<std::string>& labels() const { return labels_; }
  bool has_labels() const { return !labels_.empty(); }

  double total_mass() const;

  friend bool operator==(const Measure&, const Measure&) = default;

 private:
  std::vector<double> weights_;
  std::vector<std::string> labels_;
};

using AtomSet = std::vector<std::size_t>;

/// Every atom index of `m`.
AtomSet all_atoms(const Measure& m);

/// Pointwise sum (independent experiments with pooled counts).
Measure add(const Measure& p, const Measure& q);

/// alpha * p for alpha in [0, 1]: the deletion channel that keeps each
/// observation with probability alpha.
Measure scale(const Measure& p, double alpha);

/// Unchecked non-negative multiple, for internal rescaling.
Measure multiply(const Measure& p, double c);

/// p / total_mass(p).
Measure normalize(const Measure& p);

/// mu(a | A) = mu(a) / mu(A) on A and 0 elsewhere.
Measure condition(const Measure& mu, std::span<const std::size_t> atoms);

/// Codelengths in nats. Atoms outside the coded subset carry +inf.
struct CodelengthFn {
  std::vector<double> lengths;
};

/// l(a) = -ln mu(a | A): the codelength minimizing sum_{a in A} mu(a) l(a).
/// A zero-mass atom inside A is an error unless `allow_infinite` is set.
CodelengthFn codelengths_from(const Measure& mu, std::span<const std::size_t> atoms,
                              bool allow_infinite = false);

struct KraftReport {
  double sum = 0.0;
  bool satisfied = false;
};

/// sum_a e^{-l(a)} and whether it is <= 1 (within 1e-12).
KraftReport kraft_check(const CodelengthFn& lengths);

void to_json(nlohmann::json& j, const Measure& m);
Measure measure_from_json(const nlohmann::json& j);

}  // namespace unmeasure
