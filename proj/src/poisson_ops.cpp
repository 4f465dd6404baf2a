#include "unmeasure/poisson_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "unmeasure/divergence.hpp"
#include "unmeasure/error.hpp"

namespace unmeasure {

namespace {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

std::size_t checked_grid_size(std::span<const int> cutoffs) {
  std::size_t size = 1;
  for (int c : cutoffs) {
    if (c < 0) throw DomainError("grid cutoffs must be non-negative");
    size *= static_cast<std::size_t>(c) + 1;
    if (size > kMaxGridPoints) throw DomainError("grid exceeds the 1e7-point guard");
  }
  return size;
}

std::vector<std::size_t> strides_for(std::span<const int> cutoffs) {
  std::vector<std::size_t> strides(cutoffs.size(), 1);
  for (std::size_t d = cutoffs.size(); d-- > 1;) {
    strides[d - 1] = strides[d] * (static_cast<std::size_t>(cutoffs[d]) + 1);
  }
  return strides;
}

/// Re-embeds `dist` into a larger box.
std::vector<double> embed(const CountDistribution& dist, std::span<const int> cutoffs) {
  std::vector<double> out(checked_grid_size(cutoffs), 0.0);
  const auto strides = strides_for(cutoffs);
  for (std::size_t i = 0; i < dist.grid_size(); ++i) {
    const double p = dist.probs()[i];
    if (p == 0.0) continue;
    const auto idx = dist.grid_index(i);
    std::size_t flat = 0;
    for (std::size_t d = 0; d < idx.size(); ++d) flat += idx[d] * strides[d];
    out[flat] = p;
  }
  return out;
}

std::vector<int> union_cutoffs(const CountDistribution& a, const CountDistribution& b) {
  if (a.dims() != b.dims()) throw DomainError("count distributions differ in dimension");
  std::vector<int> out(a.dims());
  for (std::size_t d = 0; d < out.size(); ++d) out[d] = std::max(a.cutoffs()[d], b.cutoffs()[d]);
  return out;
}

/// Drops trailing hyperplanes that carry exactly zero probability.
CountDistribution trim_zeros(const CountDistribution& dist) {
  std::vector<int> top(dist.dims(), 0);
  for (std::size_t i = 0; i < dist.grid_size(); ++i) {
    if (dist.probs()[i] == 0.0) continue;
    const auto idx = dist.grid_index(i);
    for (std::size_t d = 0; d < top.size(); ++d) top[d] = std::max(top[d], idx[d]);
  }
  if (top == dist.cutoffs()) return dist;
  return CountDistribution(top, embed(dist, top), dist.tail_mass());
}

void check_probability_vector(const Measure& p) {
  if (p.total_mass() > 1.0 + 1e-12) {
    throw DomainError("Bernoulli vector probabilities must sum to at most 1");
  }
}

}  // namespace

CountDistribution::CountDistribution(std::vector<int> cutoffs, std::vector<double> probs,
                                     double tail_mass)
    : cutoffs_(std::move(cutoffs)), probs_(std::move(probs)), tail_mass_(tail_mass) {
  if (cutoffs_.empty()) throw DomainError("count distribution needs at least one dimension");
  if (checked_grid_size(cutoffs_) != probs_.size()) {
    throw DomainError("probability grid does not match the cutoffs");
  }
  if (!(tail_mass_ >= 0.0) || tail_mass_ > 1.0) throw DomainError("tail mass must lie in [0, 1]");
  CompensatedSum total;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw DomainError("probabilities must be finite and >= 0");
    total.add(p);
  }
  total.add(tail_mass_);
  if (std::abs(total.value() - 1.0) > 1e-9) {
    throw DomainError("grid mass plus tail mass must equal 1");
  }
}

CountDistribution CountDistribution::point_mass(std::vector<int> at) {
  std::vector<double> probs(checked_grid_size(at), 0.0);
  probs.back() = 1.0;
  return CountDistribution(std::move(at), std::move(probs));
}

std::size_t CountDistribution::flat_index(std::span<const int> index) const {
  if (index.size() != dims()) throw DomainError("index has the wrong dimension");
  std::size_t flat = 0;
  for (std::size_t d = 0; d < dims(); ++d) {
    if (index[d] < 0 || index[d] > cutoffs_[d]) throw DomainError("index outside the grid");
    flat = flat * (static_cast<std::size_t>(cutoffs_[d]) + 1) + static_cast<std::size_t>(index[d]);
  }
  return flat;
}

std::vector<int> CountDistribution::grid_index(std::size_t flat) const {
  std::vector<int> index(dims());
  for (std::size_t d = dims(); d-- > 0;) {
    const auto extent = static_cast<std::size_t>(cutoffs_[d]) + 1;
    index[d] = static_cast<int>(flat % extent);
    flat /= extent;
  }
  return index;
}

double CountDistribution::at(std::span<const int> index) const {
  if (index.size() != dims()) throw DomainError("index has the wrong dimension");
  for (std::size_t d = 0; d < dims(); ++d) {
    if (index[d] < 0 || index[d] > cutoffs_[d]) return 0.0;
  }
  return probs_[flat_index(index)];
}

double CountDistribution::grid_mass() const {
  CompensatedSum total;
  for (double p : probs_) total.add(p);
  return total.value();
}

std::vector<double> CountDistribution::mean() const {
  std::vector<double> m(dims(), 0.0);
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (probs_[i] == 0.0) continue;
    const auto idx = grid_index(i);
    for (std::size_t d = 0; d < dims(); ++d) m[d] += idx[d] * probs_[i];
  }
  return m;
}

double CountDistribution::entropy() const {
  CompensatedSum h;
  for (double p : probs_) {
    if (p > 0.0) h.add(-p * std::log(p));
  }
  return h.value();
}

std::vector<double> binomial_pmf(int n, double p) {
  if (n < 0) throw DomainError("binomial size must be >= 0");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binomial probability must lie in [0, 1]");
  std::vector<double> pmf(static_cast<std::size_t>(n) + 1, 0.0);
  if (p == 0.0) {
    pmf.front() = 1.0;
    return pmf;
  }
  if (p == 1.0) {
    pmf.back() = 1.0;
    return pmf;
  }
  const int mode = std::min(n, static_cast<int>(std::floor((n + 1) * p)));
  const double odds = p / (1.0 - p);
  pmf[mode] = std::exp(std::lgamma(n + 1.0) - std::lgamma(mode + 1.0) - std::lgamma(n - mode + 1.0) +
                       mode * std::log(p) + (n - mode) * std::log1p(-p));
  for (int k = mode; k < n; ++k) pmf[k + 1] = pmf[k] * (static_cast<double>(n - k) / (k + 1)) * odds;
  for (int k = mode; k > 0; --k) pmf[k - 1] = pmf[k] * (static_cast<double>(k) / (n - k + 1)) / odds;
  CompensatedSum total;
  for (double v : pmf) total.add(v);
  const double norm = total.value();
  for (double& v : pmf) v /= norm;
  return pmf;
}

double poisson_log_pmf(double lambda, int k) {
  if (lambda < 0.0) throw DomainError("Poisson mean must be >= 0");
  if (k < 0) return -HUGE_VAL;
  if (lambda == 0.0) return k == 0 ? 0.0 : -HUGE_VAL;
  return -lambda + k * std::log(lambda) - std::lgamma(k + 1.0);
}

CountDistribution poisson_pmf(double lambda, std::optional<int> cutoff, double tail_ceiling) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("Poisson mean must be >= 0");
  if (lambda == 0.0) {
    const int top = std::max(0, cutoff.value_or(0));
    std::vector<double> probs(static_cast<std::size_t>(top) + 1, 0.0);
    probs.front() = 1.0;
    return CountDistribution({top}, std::move(probs));
  }
  // Terms out to where they are negligible against the tail ceiling; the
  // series is normalized over this extended range before truncation.
  const int mode = static_cast<int>(std::floor(lambda));
  std::vector<double> terms(static_cast<std::size_t>(mode) + 1);
  terms[mode] = std::exp(poisson_log_pmf(lambda, mode));
  for (int k = mode; k > 0; --k) terms[k - 1] = terms[k] * k / lambda;
  for (int k = mode;; ++k) {
    const double next = terms[k] * lambda / (k + 1);
    terms.push_back(next);
    if (next < 1e-40 * tail_ceiling || next == 0.0) break;
    if (terms.size() > kMaxGridPoints) throw DomainError("Poisson grid exceeds the guard");
  }
  CompensatedSum total;
  for (double t : terms) total.add(t);
  const double norm = total.value();
  for (double& t : terms) t /= norm;

  std::vector<double> suffix(terms.size() + 1, 0.0);
  for (std::size_t k = terms.size(); k-- > 0;) suffix[k] = suffix[k + 1] + terms[k];
  int top = 0;
  while (suffix[top + 1] > tail_ceiling) ++top;
  top = std::max(top, cutoff.value_or(0));
  if (static_cast<std::size_t>(top) >= terms.size()) terms.resize(top + 1, 0.0);
  const double tail = static_cast<std::size_t>(top) + 1 < suffix.size() ? suffix[top + 1] : 0.0;
  terms.resize(static_cast<std::size_t>(top) + 1);
  return CountDistribution({top}, std::move(terms), tail);
}

CountDistribution product_poisson(const Measure& lambda, std::optional<std::vector<int>> cutoffs,
                                  double tail_ceiling) {
  if (cutoffs && cutoffs->size() != lambda.size()) {
    throw DomainError("one cutoff per Poisson coordinate is required");
  }
  std::vector<CountDistribution> marginals;
  std::vector<int> grid;
  for (std::size_t d = 0; d < lambda.size(); ++d) {
    std::optional<int> c;
    if (cutoffs) c = (*cutoffs)[d];
    marginals.push_back(poisson_pmf(lambda[d], c, tail_ceiling));
    grid.push_back(marginals.back().cutoffs()[0]);
  }
  std::vector<double> probs(checked_grid_size(grid), 1.0);
  const auto strides = strides_for(grid);
  double log_keep = 0.0;
  for (std::size_t d = 0; d < grid.size(); ++d) {
    log_keep += std::log1p(-marginals[d].tail_mass());
    const auto extent = static_cast<std::size_t>(grid[d]) + 1;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      probs[i] *= marginals[d].probs()[(i / strides[d]) % extent];
    }
  }
  return CountDistribution(std::move(grid), std::move(probs), -std::expm1(log_keep));
}

CountDistribution binomial_distribution(int n, double p) {
  return CountDistribution({n}, binomial_pmf(n, p));
}

CountDistribution bernoulli_vector(const Measure& p) {
  check_probability_vector(p);
  std::vector<int> cutoffs(p.size(), 1);
  std::vector<double> probs(checked_grid_size(cutoffs), 0.0);
  const auto strides = strides_for(cutoffs);
  // Rounding residue of a full probability vector is not origin mass.
  const double origin = 1.0 - p.total_mass();
  probs[0] = origin > 1e-12 ? origin : 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) probs[strides[i]] = p[i];
  return CountDistribution(std::move(cutoffs), std::move(probs));
}

CountDistribution thin(const CountDistribution& dist, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("thinning probability must lie in [0, 1]");
  if (alpha == 1.0) return dist;
  std::vector<double> probs(dist.probs().begin(), dist.probs().end());
  const auto strides = strides_for(dist.cutoffs());
  std::vector<double> fiber;
  for (std::size_t d = 0; d < dist.dims(); ++d) {
    const int top = dist.cutoffs()[d];
    std::vector<std::vector<double>> kernel;
    kernel.reserve(static_cast<std::size_t>(top) + 1);
    for (int m = 0; m <= top; ++m) kernel.push_back(binomial_pmf(m, alpha));
    const std::size_t stride = strides[d];
    const std::size_t extent = static_cast<std::size_t>(top) + 1;
    fiber.assign(extent, 0.0);
    for (std::size_t base = 0; base < probs.size(); ++base) {
      if ((base / stride) % extent != 0) continue;  // visit each fiber once
      bool any = false;
      for (std::size_t m = 0; m < extent; ++m) {
        fiber[m] = probs[base + m * stride];
        any = any || fiber[m] != 0.0;
        probs[base + m * stride] = 0.0;
      }
      if (!any) continue;
      for (std::size_t m = 0; m < extent; ++m) {
        if (fiber[m] == 0.0) continue;
        const auto& row = kernel[m];
        for (std::size_t j = 0; j <= m; ++j) probs[base + j * stride] += fiber[m] * row[j];
      }
    }
  }
  return trim_zeros(CountDistribution(dist.cutoffs(), std::move(probs), dist.tail_mass()));
}

CountDistribution convolve(const CountDistribution& a, const CountDistribution& b) {
  if (a.dims() != b.dims()) throw DomainError("count distributions differ in dimension");
  std::vector<int> cutoffs(a.dims());
  for (std::size_t d = 0; d < cutoffs.size(); ++d) cutoffs[d] = a.cutoffs()[d] + b.cutoffs()[d];
  std::vector<double> probs(checked_grid_size(cutoffs), 0.0);
  const auto out_strides = strides_for(cutoffs);

  auto offsets = [&](const CountDistribution& dist) {
    std::vector<std::pair<std::size_t, double>> nz;
    for (std::size_t i = 0; i < dist.grid_size(); ++i) {
      if (dist.probs()[i] == 0.0) continue;
      const auto idx = dist.grid_index(i);
      std::size_t off = 0;
      for (std::size_t d = 0; d < idx.size(); ++d) off += idx[d] * out_strides[d];
      nz.emplace_back(off, dist.probs()[i]);
    }
    return nz;
  };
  const auto nz_a = offsets(a);
  const auto nz_b = offsets(b);
  for (const auto& [oa, pa] : nz_a) {
    for (const auto& [ob, pb] : nz_b) probs[oa + ob] += pa * pb;
  }
  const double tail = a.tail_mass() + b.tail_mass() - a.tail_mass() * b.tail_mass();
  return trim_zeros(CountDistribution(std::move(cutoffs), std::move(probs), tail));
}

CountDistribution convolve_power(const CountDistribution& dist, int n) {
  if (n < 1) throw DomainError("convolution power must be >= 1");
  std::optional<CountDistribution> result;
  CountDistribution square = dist;
  for (int k = n;;) {
    if (k & 1) result = result ? convolve(*result, square) : square;
    k >>= 1;
    if (k == 0) break;
    square = convolve(square, square);
  }
  return *result;
}

CountDistribution bernoulli_sum(std::span<const Measure> summands) {
  if (summands.empty()) throw DomainError("a Bernoulli sum needs at least one summand");
  CountDistribution total = bernoulli_vector(summands.front());
  for (std::size_t i = 1; i < summands.size(); ++i) {
    if (summands[i].size() != summands.front().size()) {
      throw DomainError("Bernoulli summands differ in dimension");
    }
    total = convolve(total, bernoulli_vector(summands[i]));
  }
  return total;
}

double total_variation(const CountDistribution& p, const CountDistribution& q) {
  const auto grid = union_cutoffs(p, q);
  const auto pp = embed(p, grid);
  const auto qq = embed(q, grid);
  CompensatedSum l1;
  for (std::size_t i = 0; i < pp.size(); ++i) l1.add(std::abs(pp[i] - qq[i]));
  return 0.5 * l1.value();
}

ExtendedReal kl_divergence(const CountDistribution& p, const CountDistribution& q) {
  const auto grid = union_cutoffs(p, q);
  const auto pp = embed(p, grid);
  const auto qq = embed(q, grid);
  CompensatedSum d;
  for (std::size_t i = 0; i < pp.size(); ++i) {
    if (pp[i] == 0.0) continue;
    if (qq[i] == 0.0) return ExtendedReal::infinity();
    d.add(pp[i] * std::log(pp[i] / qq[i]));
  }
  return d.value();
}

ExtendedReal kl_to_product_poisson(const CountDistribution& p, const Measure& lambda) {
  if (p.dims() != lambda.size()) throw DomainError("Poisson mean has the wrong dimension");
  CompensatedSum d;
  for (std::size_t i = 0; i < p.grid_size(); ++i) {
    const double pi = p.probs()[i];
    if (pi == 0.0) continue;
    const auto idx = p.grid_index(i);
    double log_q = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) log_q += poisson_log_pmf(lambda[k], idx[k]);
    if (log_q == -HUGE_VAL) return ExtendedReal::infinity();
    d.add(pi * (std::log(pi) - log_q));
  }
  return d.value();
}

ThinLawTable thin_law_experiment(const CountDistribution& dist, const Measure& lambda,
                                 std::span<const int> n_list) {
  if (dist.dims() != lambda.size()) throw DomainError("mean vector has the wrong dimension");
  const auto m = dist.mean();
  for (std::size_t d = 0; d < m.size(); ++d) {
    if (std::abs(m[d] - lambda[d]) > 1e-9) throw DomainError("mean of P does not match lambda");
  }
  const CountDistribution reference = product_poisson(lambda);
  ThinLawTable table;
  table.poisson_entropy = reference.entropy();
  for (int n : n_list) {
    if (n < 1) throw DomainError("n must be >= 1");
    const CountDistribution thinned = thin(convolve_power(dist, n), 1.0 / n);
    ThinLawRow row;
    row.n = n;
    row.divergence = kl_to_product_poisson(thinned, lambda);
    row.total_variation = total_variation(thinned, reference);
    row.entropy = thinned.entropy();
    const auto mean = thinned.mean();
    for (std::size_t d = 0; d < mean.size(); ++d) {
      row.mean_error = std::max(row.mean_error, std::abs(mean[d] - lambda[d]));
    }
    table.mean_preserved = table.mean_preserved && row.mean_error <= 1e-8;
    table.rows.push_back(row);
  }
  return table;
}

MaxentReport maxent_check(const Measure& lambda, std::span<const std::vector<Measure>> family) {
  MaxentReport report;
  report.poisson_entropy = product_poisson(lambda).entropy();
  for (const auto& config : family) {
    const CountDistribution dist = bernoulli_sum(config);
    if (dist.dims() != lambda.size()) throw DomainError("configuration has the wrong dimension");
    const auto m = dist.mean();
    for (std::size_t d = 0; d < m.size(); ++d) {
      if (std::abs(m[d] - lambda[d]) > 1e-9) {
        throw DomainError("Bernoulli-sum configuration does not have mean lambda");
      }
    }
    MaxentEntry entry;
    entry.entropy = dist.entropy();
    entry.margin = report.poisson_entropy - entry.entropy;
    report.all_satisfied = report.all_satisfied && entry.margin >= -1e-10;
    report.entries.push_back(entry);
  }
  return report;
}

ThinIdentityReport thin_divergence_identity(const Measure& p, const Measure& q,
                                            std::span<const int> n_list, double tolerance) {
  if (p.size() != q.size()) throw DomainError("support size mismatch");
  for (const Measure* m : {&p, &q}) {
    if (std::abs(m->total_mass() - 1.0) > 1e-12) {
      throw DomainError("Bernoulli vector distributions must be probability vectors");
    }
  }
  const CountDistribution bp = bernoulli_vector(p);
  const CountDistribution bq = bernoulli_vector(q);
  ThinIdentityReport report;
  report.base_divergence = kl_divergence(bp, bq);
  report.extended_divergence = kl_extended(p, q);

  auto gap = [](ExtendedReal a, ExtendedReal b) {
    if (a.is_infinite() || b.is_infinite()) return a == b ? 0.0 : HUGE_VAL;
    return std::abs(a.value() - b.value());
  };
  report.holds = gap(report.base_divergence, report.extended_divergence) <= tolerance;
  for (int n : n_list) {
    if (n < 1) throw DomainError("n must be >= 1");
    ThinIdentityRow row;
    row.n = n;
    row.thinned_divergence =
        kl_divergence(thin(convolve_power(bp, n), 1.0 / n), thin(convolve_power(bq, n), 1.0 / n));
    row.error = gap(row.thinned_divergence, report.base_divergence);
    report.holds = report.holds && row.error <= tolerance;
    report.rows.push_back(row);
  }
  return report;
}

void to_json(nlohmann::json& j, const CountDistribution& d) {
  j = nlohmann::json{{"dims", d.dims()},
                     {"cutoffs", d.cutoffs()},
                     {"probs", std::vector<double>(d.probs().begin(), d.probs().end())},
                     {"tail_mass", d.tail_mass()}};
}

CountDistribution count_distribution_from_json(const nlohmann::json& j) {
  auto cutoffs = j.at("cutoffs").get<std::vector<int>>();
  if (j.contains("dims") && j.at("dims").get<std::size_t>() != cutoffs.size()) {
    throw DomainError("\"dims\" disagrees with \"cutoffs\"");
  }
  return CountDistribution(std::move(cutoffs), j.at("probs").get<std::vector<double>>(),
                           j.value("tail_mass", 0.0));
}

}  // namespace unmeasure
