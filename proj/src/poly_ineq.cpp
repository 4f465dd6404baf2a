#include "unmeasure/poly_ineq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "unmeasure/divergence.hpp"
#include "unmeasure/error.hpp"
#include "unmeasure/poisson_ops.hpp"

namespace unmeasure {

namespace {

constexpr double kMomentTol = 1e-10;
constexpr int kMaxDegree = 12;

double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * a[i] * b[i];
  return s;
}

/// Orthonormal polynomials h_0..h_degree for the weights w on {0..size-1},
/// by the Stieltjes recurrence. Returns grid values and monomial coefficients.
struct Family {
  std::vector<std::vector<double>> values;
  std::vector<std::vector<double>> coefficients;
};

Family stieltjes(std::span<const double> w, int degree) {
  const std::size_t m = w.size();
  if (static_cast<std::size_t>(degree) >= m) throw DomainError("degree must be below the grid size");
  Family out;
  std::vector<double> prev_v(m, 0.0);
  std::vector<double> cur_v(m, 1.0);
  std::vector<double> prev_c;
  std::vector<double> cur_c{1.0};
  double prev_norm = 1.0;
  for (int k = 0; k <= degree; ++k) {
    const double norm = weighted_dot(w, cur_v, cur_v);
    if (!(norm > 0.0)) throw DomainError("weight has too few support points for this degree");
    const double inv = 1.0 / std::sqrt(norm);
    std::vector<double> hv(m);
    std::vector<double> hc(cur_c.size());
    for (std::size_t i = 0; i < m; ++i) hv[i] = cur_v[i] * inv;
    for (std::size_t i = 0; i < cur_c.size(); ++i) hc[i] = cur_c[i] * inv;
    out.values.push_back(std::move(hv));
    out.coefficients.push_back(std::move(hc));
    if (k == degree) break;

    std::vector<double> x_cur(m);
    for (std::size_t i = 0; i < m; ++i) x_cur[i] = static_cast<double>(i) * cur_v[i];
    const double a = weighted_dot(w, x_cur, cur_v) / norm;
    const double b = k == 0 ? 0.0 : norm / prev_norm;
    std::vector<double> next_v(m);
    for (std::size_t i = 0; i < m; ++i) next_v[i] = x_cur[i] - a * cur_v[i] - b * prev_v[i];
    std::vector<double> next_c(cur_c.size() + 1, 0.0);
    for (std::size_t i = 0; i < cur_c.size(); ++i) {
      next_c[i + 1] += cur_c[i];
      next_c[i] -= a * cur_c[i];
    }
    for (std::size_t i = 0; i < prev_c.size(); ++i) next_c[i] -= b * prev_c[i];
    prev_v = std::move(cur_v);
    cur_v = std::move(next_v);
    prev_c = std::move(cur_c);
    cur_c = std::move(next_c);
    prev_norm = norm;
  }
  return out;
}

void fill_moments(OrthoPoly& f) {
  const auto v = f.values();
  const auto w = f.reference.weights();
  f.mean = f.second_moment = f.third_moment = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    f.mean += w[i] * v[i];
    f.second_moment += w[i] * v[i] * v[i];
    f.third_moment += w[i] * v[i] * v[i] * v[i];
  }
}

OrthoPoly build(PolyBase base, std::vector<double> weights, int degree) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& x : weights) x /= total;
  OrthoPoly f;
  f.base = base;
  f.degree = degree;
  f.coefficients = stieltjes(weights, degree).coefficients.back();
  f.reference = Measure(std::move(weights));
  fill_moments(f);
  return f;
}

void check_hypotheses(const Measure& q, std::span<const double> f, double& third) {
  double m1 = 0.0, m2 = 0.0, m3 = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    m1 += q[i] * f[i];
    m2 += q[i] * f[i] * f[i];
    m3 += q[i] * f[i] * f[i] * f[i];
  }
  if (std::abs(m1) > kMomentTol) throw DomainError("scan refused: E_Q f is not 0");
  if (std::abs(m2 - 1.0) > kMomentTol) throw DomainError("scan refused: E_Q f^2 is not 1");
  if (!(m3 > kMomentTol)) throw DomainError("scan refused: E_Q f^3 is not positive");
  third = m3;
}

std::mt19937_64 sample_engine(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

std::string to_string(PolyBase base) { return base == PolyBase::kPoisson ? "poisson" : "binomial"; }

double OrthoPoly::operator()(double x) const {
  double s = 0.0;
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) s = s * x + *it;
  return s;
}

std::vector<double> OrthoPoly::values() const {
  std::vector<double> v(reference.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (*this)(static_cast<double>(i));
  return v;
}

std::string OrthoPoly::label() const {
  char buf[96];
  if (base == PolyBase::kPoisson) {
    std::snprintf(buf, sizeof buf, "charlier(lambda=%g,degree=%d)", lambda, degree);
  } else {
    std::snprintf(buf, sizeof buf, "krawtchouk(n=%d,p=%g,degree=%d)", trials, p, degree);
  }
  return buf;
}

OrthoPoly charlier(double lambda, int degree) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be positive");
  if (degree < 1 || degree > kMaxDegree) throw DomainError("degree must be in [1, 12]");
  // The tail beyond the default cutoff still carries x^(2 degree) weight.
  int cutoff = poisson_pmf(lambda).cutoffs()[0];
  while (poisson_log_pmf(lambda, cutoff) + 2.0 * degree * std::log(cutoff + 1.0) > std::log(1e-24)) ++cutoff;
  const CountDistribution po = poisson_pmf(lambda, cutoff);
  OrthoPoly f = build(PolyBase::kPoisson, std::vector<double>(po.probs().begin(), po.probs().end()), degree);
  f.lambda = lambda;
  return f;
}

OrthoPoly krawtchouk(int n, double p, int degree) {
  if (n < 1 || n > 10'000) throw DomainError("n must be in [1, 10000]");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("p must lie in (0, 1)");
  if (degree < 1 || degree > std::min(n, kMaxDegree)) throw DomainError("degree must be in [1, min(n, 12)]");
  OrthoPoly f = build(PolyBase::kBinomial, binomial_pmf(n, p), degree);
  f.trials = n;
  f.p = p;
  return f;
}

double mgf_condition(const Measure& q, std::span<const double> f, double beta) {
  if (!(beta < 0.0)) throw DomainError("beta must be negative");
  if (f.size() != q.size()) throw DomainError("f has the wrong length");
  double z = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) z += std::exp(beta * f[i]) * q[i];
  return z;
}

ScanReport inequality_scan(const Measure& q, std::span<const double> f, double epsilon, long samples,
                           std::uint64_t seed) {
  if (f.size() != q.size()) throw DomainError("f has the wrong length");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw DomainError("epsilon must be positive");
  if (samples < 1) throw DomainError("samples must be positive");
  ScanReport report;
  check_hypotheses(q, f, report.third_moment);
  report.epsilon = epsilon;
  report.samples = samples;
  report.seed = seed;

  // Random directions: orthonormal polynomials in L^2(Q) up to degree 3 with
  // the f-component removed, so E_P f is set by the f coefficient alone.
  const std::span<const double> w = q.weights();
  const int family_degree = static_cast<int>(std::min<std::size_t>(3, q.size() - 1));
  Family family = stieltjes(w, family_degree);
  std::vector<double> sup(family.values.size());
  for (std::size_t j = 0; j < family.values.size(); ++j) {
    auto& h = family.values[j];
    const double along = weighted_dot(w, h, f);
    for (std::size_t i = 0; i < h.size(); ++i) {
      h[i] -= along * f[i];
      sup[j] = std::max(sup[j], std::abs(h[i]));
    }
  }

  const std::size_t m = q.size();
  std::vector<double> p(m);
  double center_mean = 0.0;
  for (std::size_t i = 0; i < m; ++i) center_mean += q[i] * f[i];
  report.center_slack = -0.5 * center_mean * center_mean;
  report.min_slack = std::numeric_limits<double>::infinity();
  const long max_draws = 1000 * samples;
  long accepted = 0;
  std::uint64_t index = 1;
  for (; accepted < samples && report.draws < max_draws; ++index) {
    ++report.draws;
    {
      auto rng = sample_engine(seed, index);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const double target = -epsilon * unit(rng);
      double amplitude = unit(rng);
      if (unit(rng) < 0.25) amplitude *= 1e-3;
      std::vector<double> c(family.values.size());
      for (std::size_t j = 0; j < c.size(); ++j) {
        c[j] = sup[j] > 1e-12 ? amplitude * (2.0 * unit(rng) - 1.0) / sup[j] : 0.0;
      }
      bool negative = false;
      for (std::size_t i = 0; i < m; ++i) {
        double g = 1.0 + target * f[i];
        for (std::size_t j = 0; j < c.size(); ++j) g += c[j] * family.values[j][i];
        p[i] = q[i] * g;
        if (p[i] < 0.0) negative = true;
      }
      if (negative) continue;
      if (unit(rng) < 0.5) {
        const auto atom = static_cast<std::size_t>(unit(rng) * static_cast<double>(m)) % m;
        p[atom] += amplitude * unit(rng) * q[atom];
      }
    }
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) mean += p[i] * f[i];
    if (mean < -epsilon || mean > 0.0) continue;
    ++accepted;
    const Measure candidate(p);
    const double slack = kl_extended(candidate, q).value() - 0.5 * mean * mean;
    if (slack < report.min_slack) {
      report.min_slack = slack;
      report.worst_mean = mean;
      report.worst_case = candidate;
    }
  }
  if (accepted < samples) throw ConvergenceError("scan rejected too many proposals");
  return report;
}

ScanReport inequality_scan(const OrthoPoly& f, double epsilon, long samples, std::uint64_t seed) {
  const auto v = f.values();
  ScanReport report = inequality_scan(f.reference, v, epsilon, samples, seed);
  report.base = f.label();
  report.degree = f.degree;
  return report;
}

SweepReport epsilon_sweep(const OrthoPoly& f, std::span<const double> epsilons, long samples,
                          std::uint64_t seed) {
  SweepReport sweep;
  for (double eps : epsilons) {
    sweep.scans.push_back(inequality_scan(f, eps, samples, seed));
    if (sweep.scans.back().min_slack >= -1e-9) {
      sweep.largest_clean_epsilon = std::max(sweep.largest_clean_epsilon, eps);
    }
  }
  return sweep;
}

void to_json(nlohmann::json& j, const OrthoPoly& f) {
  j = nlohmann::json{{"base", f.label()},
                     {"degree", f.degree},
                     {"coefficients", f.coefficients},
                     {"mean", f.mean},
                     {"second_moment", f.second_moment},
                     {"third_moment", f.third_moment}};
}

void to_json(nlohmann::json& j, const ScanReport& r) {
  j = nlohmann::json{{"base", r.base},
                     {"degree", r.degree},
                     {"epsilon", r.epsilon},
                     {"samples", r.samples},
                     {"seed", r.seed},
                     {"draws", r.draws},
                     {"min_slack", r.min_slack},
                     {"center_slack", r.center_slack},
                     {"worst_mean", r.worst_mean},
                     {"third_moment", r.third_moment},
                     {"worst_case", r.worst_case}};
}

}  // namespace unmeasure
