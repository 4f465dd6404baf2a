#pragma once

#include <string>
#include <vector>

namespace unmeasure {

/// Signed log-likelihood statistic for testing p = 1/2 in bin(n, p) at x.
struct GofStatistic {
  int n = 0;
  int x = 0;
  double g = 0.0;           ///< signed root, negative iff x < n/2
  double g2 = 0.0;          ///< G^2 = g^2 = 2 * divergence
  double divergence = 0.0;  ///< D(bin(n, x/n) || bin(n, 1/2)) in nats
};

/// Largest n accepted by the exact binomial routines.
inline constexpr int kMaxBinomialTrials = 10'000;

/// D(bin(n, x/n) || bin(n, 1/2)) = x ln(2x/n) + (n-x) ln(2(n-x)/n).
double binom_divergence(int n, int x);

GofStatistic g_statistic(int n, int x);

/// Pr(X <= k) for X ~ bin(n, p); 0 for k < 0 and 1 for k >= n.
double binom_cdf(int n, double p, int k);

/// Standard normal cdf.
double normal_cdf(double z);

/// Cdf of the chi-square distribution with one degree of freedom.
double chi2_1_cdf(double t);

struct IntersectionRow {
  int k = 0;
  double lower = 0.0;  ///< Pr(X < k)
  double value = 0.0;  ///< Phi(G_n(k))
  double upper = 0.0;  ///< Pr(X <= k)
  bool ok = true;
};

struct IntersectionReport {
  int n = 0;
  std::vector<IntersectionRow> rows;
  bool all_ok = true;
};

/// Checks Pr(X < k) <= Phi(G_n(k)) <= Pr(X <= k) (1e-12 slack) for every k.
IntersectionReport intersection_check(int n);

/// One atom of the exact G^2 distribution with its cumulative bracket.
struct QqRow {
  double g2 = 0.0;
  double cdf_left = 0.0;   ///< Pr(G^2 < g2)
  double cdf_right = 0.0;  ///< Pr(G^2 <= g2)
  double chi2_cdf = 0.0;   ///< F_{chi2_1}(g2)
};

struct QqTable {
  std::vector<QqRow> rows;
  /// max over atoms of the distance from chi2_cdf to the farther end of
  /// [cdf_left, cdf_right], i.e. sup_t |F_stat(t) - F_chi2(t)|.
  double gap = 0.0;
  /// max over atoms of the distance from chi2_cdf to the bracket itself
  /// (0 when every step crosses the diagonal).
  double bracket_violation = 0.0;
  /// Mixing mass dropped by truncation (Poisson table only).
  double truncated_mass = 0.0;
  int n_cutoff = 0;
};

/// Exact distribution of G^2 under bin(n, 1/2).
QqTable classical_qq(int n);

/// Distribution of G_N(X)^2 with N ~ Po(total_intensity) and X | N = n ~
/// bin(n, 1/2). N = 0 contributes an atom at G^2 = 0. n_cutoff <= 0 picks the
/// smallest cutoff with Poisson tail <= 1e-12; an explicit cutoff with a
/// larger tail is rejected.
QqTable poisson_qq(double total_intensity, int n_cutoff = 0);

/// D(Po(l) x Po(m) || Po(n/2) x Po(n/2)) with n = l + m.
double poisson_two_sample_divergence(int l, int m);

/// CSV with header `g2,cdf_left,cdf_right,chi2_cdf`, 12 significant digits.
std::string qq_to_csv(const QqTable& table);

enum class MachZehnderScenario { kBlocked, kUnblocked };

struct MachZehnderReport {
  MachZehnderScenario scenario = MachZehnderScenario::kBlocked;
  double intensity_1 = 0.0;  ///< detector 1 rate
  double intensity_2 = 0.0;  ///< detector 2 rate
  int count_1 = 0;
  int count_2 = 0;
  GofStatistic statistic;
  double poisson_divergence = 0.0;  ///< D(Po(count_1) x Po(count_2) || Po(n/2) x Po(n/2))
  double p_value_exact = 0.0;  ///< Pr(G^2 >= observed) under the Poisson null
  double p_value_chi2 = 0.0;   ///< 1 - F_{chi2_1}(observed)
  QqTable table;
};

/// Two-detector interferometer read as a Poisson two-sample test of
/// lambda = mu. Blocked: both detectors fire at `intensity`. Unblocked: detector 1
/// fires at 2 * intensity and detector 2 stays dark. Counts default to the
/// expected counts, rounded.
MachZehnderReport mach_zehnder(MachZehnderScenario scenario, double intensity, int count_1 = -1,
                               int count_2 = -1);

std::string to_string(MachZehnderScenario scenario);

}  // namespace unmeasure
