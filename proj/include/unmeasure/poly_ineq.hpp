#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "unmeasure/measure.hpp"

namespace unmeasure {

enum class PolyBase { kPoisson, kBinomial };

std::string to_string(PolyBase base);

/// Orthonormal polynomial of a given degree for a Poisson or binomial weight,
/// built on the grid {0, 1, ..., cutoff}.
struct OrthoPoly {
  PolyBase base = PolyBase::kPoisson;
  double lambda = 0.0;  ///< Poisson mean
  int trials = 0;       ///< binomial n
  double p = 0.0;       ///< binomial success probability
  int degree = 0;
  std::vector<double> coefficients;  ///< monomial basis, constant term first
  Measure reference = Measure::zeros(1);  ///< weights on the grid, total mass 1
  double mean = 0.0;          ///< E_Q f
  double second_moment = 0.0; ///< E_Q f^2
  double third_moment = 0.0;  ///< E_Q f^3

  double operator()(double x) const;
  /// f evaluated at every grid point.
  std::vector<double> values() const;
  std::string label() const;
};

/// Orthonormal Poisson-Charlier polynomial for Po(lambda).
OrthoPoly charlier(double lambda, int degree);

/// Orthonormal Krawtchouk polynomial for bin(n, p), 1 <= degree <= n.
OrthoPoly krawtchouk(int n, double p, int degree);

/// Z(beta) = sum_a exp(beta f(a)) q(a) for beta < 0.
double mgf_condition(const Measure& q, std::span<const double> f, double beta);

struct ScanReport {
  std::string base;
  int degree = 0;
  double epsilon = 0.0;
  long samples = 0;
  std::uint64_t seed = 0;
  long draws = 0;  ///< proposals including rejected ones
  double min_slack = 0.0;
  double worst_mean = 0.0;  ///< E_P f at the minimizing sample
  Measure worst_case = Measure::zeros(1);
  double third_moment = 0.0;
  double center_slack = 0.0;  ///< slack at P = Q
};

/// Samples unnormalized P = Q (1 + sum_j c_j h_j) plus positive jitter with
/// E_P f in [-epsilon, 0] and records the smallest
/// kl_extended(P, Q) - (E_P f)^2 / 2. P = Q is reported separately as center_slack.
/// Throws DomainError unless E_Q f = 0, E_Q f^2 = 1 and E_Q f^3 > 0.
ScanReport inequality_scan(const Measure& q, std::span<const double> f, double epsilon, long samples,
                           std::uint64_t seed);
ScanReport inequality_scan(const OrthoPoly& f, double epsilon, long samples, std::uint64_t seed);

struct SweepReport {
  std::vector<ScanReport> scans;
  double largest_clean_epsilon = 0.0;  ///< 0 when no scan is clean
};

/// Runs the scan for each epsilon; a scan is clean when min_slack >= -1e-9.
SweepReport epsilon_sweep(const OrthoPoly& f, std::span<const double> epsilons, long samples,
                          std::uint64_t seed);

void to_json(nlohmann::json& j, const OrthoPoly& f);
void to_json(nlohmann::json& j, const ScanReport& r);

}  // namespace unmeasure
