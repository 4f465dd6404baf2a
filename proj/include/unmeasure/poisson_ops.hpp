#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "unmeasure/extended_real.hpp"
#include "unmeasure/measure.hpp"

namespace unmeasure {

/// Largest grid any operation here will allocate.
inline constexpr std::size_t kMaxGridPoints = 10'000'000;
/// Per-dimension upper-tail ceiling used when choosing cutoffs automatically.
inline constexpr double kDefaultTailCeiling = 1e-14;

/// Probability distribution on the box prod_d [0, cutoff_d] of N_0^k, stored
/// row-major (last dimension fastest). `tail_mass` is the probability that
/// fell outside the box; sum(probs) + tail_mass == 1.
class CountDistribution {
 public:
  CountDistribution(std::vector<int> cutoffs, std::vector<double> probs, double tail_mass = 0.0);

  static CountDistribution point_mass(std::vector<int> at);

  std::size_t dims() const { return cutoffs_.size(); }
  const std::vector<int>& cutoffs() const { return cutoffs_; }
  std::span<const double> probs() const { return probs_; }
  double tail_mass() const { return tail_mass_; }
  std::size_t grid_size() const { return probs_.size(); }

  std::size_t flat_index(std::span<const int> index) const;
  std::vector<int> grid_index(std::size_t flat) const;
  /// Probability at `index`; 0 outside the box.
  double at(std::span<const int> index) const;

  double grid_mass() const;
  std::vector<double> mean() const;
  double entropy() const;

 private:
  std::vector<int> cutoffs_;
  std::vector<double> probs_;
  double tail_mass_;
};

/// Binomial pmf bin(n, p; k) for k = 0..n, evaluated outward from the mode by
/// ratio recurrences and normalized with compensated summation.
std::vector<double> binomial_pmf(int n, double p);

/// ln Po(lambda; k).
double poisson_log_pmf(double lambda, int k);

/// Po(lambda) on [0, cutoff]. The cutoff is raised to the smallest m whose
/// upper tail is <= tail_ceiling when the requested one is too small.
CountDistribution poisson_pmf(double lambda, std::optional<int> cutoff = std::nullopt,
                              double tail_ceiling = kDefaultTailCeiling);

/// Po(lambda_1) x ... x Po(lambda_k).
CountDistribution product_poisson(const Measure& lambda,
                                  std::optional<std::vector<int>> cutoffs = std::nullopt,
                                  double tail_ceiling = kDefaultTailCeiling);

CountDistribution binomial_distribution(int n, double p);

/// Distribution of one Bernoulli random vector: base vector e_i with
/// probability p_i, the origin with 1 - sum p.
CountDistribution bernoulli_vector(const Measure& p);

/// alpha-thinning: every counted observation survives independently with
/// probability alpha, coordinate by coordinate.
CountDistribution thin(const CountDistribution& dist, double alpha);

CountDistribution convolve(const CountDistribution& a, const CountDistribution& b);

/// n-fold convolution power by repeated squaring.
CountDistribution convolve_power(const CountDistribution& dist, int n);

/// Exact distribution of a sum of independent Bernoulli random vectors.
CountDistribution bernoulli_sum(std::span<const Measure> summands);

/// Half the L1 distance over the union of both grids (tails excluded).
double total_variation(const CountDistribution& p, const CountDistribution& q);

/// sum p ln(p/q) over the union of both grids.
ExtendedReal kl_divergence(const CountDistribution& p, const CountDistribution& q);

/// D(P || Po(lambda)) with the Poisson log-pmf evaluated analytically, so no
/// grid point underflows on the reference side.
ExtendedReal kl_to_product_poisson(const CountDistribution& p, const Measure& lambda);

struct ThinLawRow {
  int n = 0;
  ExtendedReal divergence;
  double total_variation = 0.0;
  double entropy = 0.0;
  double mean_error = 0.0;
};

struct ThinLawTable {
  std::vector<ThinLawRow> rows;
  double poisson_entropy = 0.0;
  bool mean_preserved = true;
};

/// For each n, compares T_{1/n}(P^{*n}) with Po(lambda).
ThinLawTable thin_law_experiment(const CountDistribution& dist, const Measure& lambda,
                                 std::span<const int> n_list);

struct MaxentEntry {
  double entropy = 0.0;
  double margin = 0.0;  ///< H(Po(lambda)) - H(config)
};

struct MaxentReport {
  double poisson_entropy = 0.0;
  std::vector<MaxentEntry> entries;
  bool all_satisfied = true;
};

/// Checks that every Bernoulli-sum configuration with mean lambda has entropy
/// at most H(Po(lambda)) + 1e-10.
MaxentReport maxent_check(const Measure& lambda, std::span<const std::vector<Measure>> family);

struct ThinIdentityRow {
  int n = 0;
  ExtendedReal thinned_divergence;
  double error = 0.0;
};

struct ThinIdentityReport {
  ExtendedReal base_divergence;      ///< D(P || Q) of the Bernoulli vectors
  ExtendedReal extended_divergence;  ///< kl_extended(lambda, mu)
  std::vector<ThinIdentityRow> rows;
  bool holds = true;
};

/// D(P||Q) = D(T_{1/n}(P^{*n}) || T_{1/n}(Q^{*n})) = D(Po(lambda) || Po(mu)) for
/// Bernoulli vectors with probability vectors P = lambda, Q = mu.
ThinIdentityReport thin_divergence_identity(const Measure& p, const Measure& q,
                                            std::span<const int> n_list,
                                            double tolerance = 1e-8);

void to_json(nlohmann::json& j, const CountDistribution& d);
CountDistribution count_distribution_from_json(const nlohmann::json& j);

}  // namespace unmeasure
