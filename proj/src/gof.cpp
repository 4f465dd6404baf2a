#include "unmeasure/gof.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <utility>

#include "unmeasure/divergence.hpp"
#include "unmeasure/error.hpp"
#include "unmeasure/poisson_ops.hpp"

namespace unmeasure {

namespace {

void check_trials(int n, int x) {
  if (n < 1) throw DomainError("number of trials must be >= 1");
  if (n > kMaxBinomialTrials) throw DomainError("number of trials exceeds the 1e4 guard");
  if (x < 0 || x > n) throw DomainError("observation must lie in [0, n]");
}

double xlog_ratio(double a, double b) { return a == 0.0 ? 0.0 : a * std::log(a / b); }

/// (g2, probability) atoms of G^2 under bin(n, 1/2), g2 increasing.
std::vector<std::pair<double, double>> classical_atoms(int n) {
  const auto pmf = binomial_pmf(n, 0.5);
  std::vector<std::pair<double, double>> atoms;
  for (int x = n / 2; x >= 0; --x) {
    const double mass = 2 * x == n ? pmf[x] : pmf[x] + pmf[n - x];
    atoms.emplace_back(2.0 * binom_divergence(n, x), mass);
  }
  return atoms;
}

QqTable tabulate(std::vector<std::pair<double, double>> atoms) {
  std::sort(atoms.begin(), atoms.end());
  QqTable table;
  double running = 0.0;
  double carry = 0.0;
  for (std::size_t i = 0; i < atoms.size();) {
    const double g2 = atoms[i].first;
    double mass = 0.0;
    // Equal statistics reached from different (n, x) are merged.
    for (; i < atoms.size() && atoms[i].first - g2 <= 1e-12 * std::max(1.0, g2); ++i) {
      mass += atoms[i].second;
    }
    QqRow row;
    row.g2 = g2;
    row.cdf_left = running + carry;
    const double y = mass - carry;
    const double t = running + y;
    carry = (t - running) - y;
    running = t;
    row.cdf_right = running;
    row.chi2_cdf = chi2_1_cdf(g2);
    table.gap = std::max({table.gap, std::abs(row.chi2_cdf - row.cdf_left),
                          std::abs(row.cdf_right - row.chi2_cdf)});
    table.bracket_violation = std::max(
        {table.bracket_violation, row.cdf_left - row.chi2_cdf, row.chi2_cdf - row.cdf_right});
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace

double binom_divergence(int n, int x) {
  check_trials(n, x);
  const double lo = std::min(x, n - x);
  const double hi = std::max(x, n - x);
  const double half = 0.5 * n;
  return xlog_ratio(lo, half) + xlog_ratio(hi, half);
}

GofStatistic g_statistic(int n, int x) {
  GofStatistic s;
  s.n = n;
  s.x = x;
  s.divergence = binom_divergence(n, x);
  s.g2 = 2.0 * s.divergence;
  const double root = std::sqrt(s.g2);
  s.g = 2 * x < n ? -root : root;
  return s;
}

double binom_cdf(int n, double p, int k) {
  if (n < 0) throw DomainError("number of trials must be >= 0");
  if (n > kMaxBinomialTrials) throw DomainError("number of trials exceeds the 1e4 guard");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("success probability must lie in [0, 1]");
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  const auto pmf = binomial_pmf(n, p);
  double sum = 0.0;
  double carry = 0.0;
  for (int i = 0; i <= k; ++i) {
    const double y = pmf[i] - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return std::clamp(sum, 0.0, 1.0);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double chi2_1_cdf(double t) { return t <= 0.0 ? 0.0 : std::erf(std::sqrt(0.5 * t)); }

IntersectionReport intersection_check(int n) {
  check_trials(n, 0);
  IntersectionReport report;
  report.n = n;
  for (int k = 0; k <= n; ++k) {
    IntersectionRow row;
    row.k = k;
    row.lower = binom_cdf(n, 0.5, k - 1);
    row.upper = binom_cdf(n, 0.5, k);
    row.value = normal_cdf(g_statistic(n, k).g);
    row.ok = row.lower - 1e-12 <= row.value && row.value <= row.upper + 1e-12;
    report.all_ok = report.all_ok && row.ok;
    report.rows.push_back(row);
  }
  return report;
}

QqTable classical_qq(int n) {
  check_trials(n, 0);
  QqTable table = tabulate(classical_atoms(n));
  table.n_cutoff = n;
  return table;
}

QqTable poisson_qq(double total_intensity, int n_cutoff) {
  if (!(total_intensity > 0.0) || !std::isfinite(total_intensity)) {
    throw DomainError("total intensity must be positive");
  }
  constexpr double kTailCeiling = 1e-12;
  const CountDistribution mixing = poisson_pmf(total_intensity, std::nullopt, kTailCeiling);
  const int needed = mixing.cutoffs()[0];
  if (n_cutoff > 0 && n_cutoff < needed) {
    throw DomainError("n_cutoff leaves a Poisson tail above 1e-12; need at least " +
                      std::to_string(needed));
  }
  const int top = std::max(needed, n_cutoff);
  if (top > kMaxBinomialTrials) throw DomainError("Poisson cutoff exceeds the 1e4 guard");
  const CountDistribution weights = poisson_pmf(total_intensity, top, kTailCeiling);

  std::vector<std::pair<double, double>> atoms;
  atoms.emplace_back(0.0, weights.probs()[0]);
  for (int n = 1; n <= top; ++n) {
    const double w = weights.probs()[n];
    if (w == 0.0) continue;
    for (const auto& [g2, mass] : classical_atoms(n)) atoms.emplace_back(g2, w * mass);
  }
  QqTable table = tabulate(std::move(atoms));
  table.truncated_mass = weights.tail_mass();
  table.n_cutoff = top;
  return table;
}

double poisson_two_sample_divergence(int l, int m) {
  if (l < 0 || m < 0) throw DomainError("counts must be >= 0");
  if (l == 0 && m == 0) throw DomainError("at least one count must be positive");
  const double half = 0.5 * (static_cast<double>(l) + m);
  return kl_poisson_product(Measure({double(l), double(m)}), Measure({half, half})).value();
}

std::string qq_to_csv(const QqTable& table) {
  std::string out = "g2,cdf_left,cdf_right,chi2_cdf\n";
  char line[128];
  for (const auto& row : table.rows) {
    std::snprintf(line, sizeof line, "%.12g,%.12g,%.12g,%.12g\n", row.g2, row.cdf_left,
                  row.cdf_right, row.chi2_cdf);
    out += line;
  }
  return out;
}

std::string to_string(MachZehnderScenario scenario) {
  return scenario == MachZehnderScenario::kBlocked ? "blocked" : "unblocked";
}

MachZehnderReport mach_zehnder(MachZehnderScenario scenario, double intensity, int count_1,
                               int count_2) {
  if (!(intensity > 0.0)) throw DomainError("intensity must be positive");
  MachZehnderReport report;
  report.scenario = scenario;
  if (scenario == MachZehnderScenario::kBlocked) {
    report.intensity_1 = intensity;
    report.intensity_2 = intensity;
  } else {
    report.intensity_1 = 2.0 * intensity;
    report.intensity_2 = 0.0;
  }
  report.count_1 = count_1 >= 0 ? count_1 : static_cast<int>(std::lround(report.intensity_1));
  report.count_2 = count_2 >= 0 ? count_2 : static_cast<int>(std::lround(report.intensity_2));
  const int n = report.count_1 + report.count_2;
  if (n == 0) throw DomainError("no detections: the test has no evidence either way");
  report.statistic = g_statistic(n, report.count_1);
  report.poisson_divergence = poisson_two_sample_divergence(report.count_1, report.count_2);
  report.table = poisson_qq(report.intensity_1 + report.intensity_2);
  const double observed = report.statistic.g2;
  report.p_value_exact = 0.0;
  for (const auto& row : report.table.rows) {
    if (row.g2 >= observed - 1e-12 * std::max(1.0, observed)) {
      report.p_value_exact = std::max(0.0, 1.0 - row.cdf_left);
      break;
    }
  }
  report.p_value_chi2 = 1.0 - chi2_1_cdf(observed);
  return report;
}

}  // namespace unmeasure
