#pragma once

#include <span>
#include <string>
#include <vector>

#include "unmeasure/measure.hpp"

namespace unmeasure {

/// Mean-value constraint sum_j f(j) p_j = target.
struct MomentConstraint {
  std::vector<double> f;
  double target = 0.0;
};

enum class AltMinVariant { kNormalizedCyclic, kUnnormalizedCyclic, kOrthogonalized };

std::string to_string(AltMinVariant variant);

struct AltMinSnapshot {
  int cycle = 0;
  Measure measure = Measure::zeros(1);
  double divergence = 0.0;    ///< kl_extended(P, Q)
  /// D(C, Q) - D(P*, P) for the fixed point P*; computed from the accumulated
  /// tilt, non-decreasing in the cycle index for every variant.
  double lower_bound = 0.0;
  double max_residual = 0.0;  ///< over the original constraints and total mass 1
  double total_mass = 0.0;
  double change = 0.0;        ///< max_i |P(i) - P_prev(i)| over the cycle
};

struct AltMinTrace {
  AltMinVariant variant = AltMinVariant::kUnnormalizedCyclic;
  std::vector<AltMinSnapshot> cycles;
  int cycles_to_tol = -1;  ///< -1 when the cap was reached
  bool converged = false;

  const Measure& fixed_point() const { return cycles.back().measure; }
};

/// Unnormalized KL projection onto {P : sum f p = mu}: p_i = q_i exp(-beta f(i)).
Measure project_tilde(const Measure& q, std::span<const double> f, double mu);

/// Probability-normalized KL projection onto {P : sum f p = mu, sum p = 1}.
Measure project_normalized(const Measure& q, std::span<const double> f, double mu);

/// Cyclic projections. With include_normalization the cycle is
/// {sum p = 1}, then each {sum f_i p = mu_i} without normalization; otherwise
/// each step projects onto {sum f_i p = mu_i, sum p = 1}.
/// Stops once every residual and the elementwise change over a cycle are <= tol.
AltMinTrace altmin_cyclic(const Measure& q, std::span<const MomentConstraint> constraints,
                          bool include_normalization, double tol = 1e-10, int max_cycles = 200'000);

struct OrthogonalFamily {
  std::vector<std::vector<double>> functions;  ///< h_a, orthonormal in L^2(Q)
  std::vector<std::vector<double>> transform;  ///< lower-triangular L with h = L f
  std::vector<double> targets;                 ///< L t
  double gram_condition = 0.0;                 ///< condition number of the input Gram matrix
};

/// Gram-Schmidt in L^2(Q). Throws DomainError on rank deficiency.
OrthogonalFamily orthogonalize(std::span<const std::vector<double>> functions,
                               std::span<const double> targets, const Measure& q);

/// The include_normalization cycle over the orthogonalized family {1, f_1, ..., f_k}.
AltMinTrace altmin_accelerated(const Measure& q, std::span<const MomentConstraint> constraints,
                               double tol = 1e-10, int max_cycles = 200'000);

/// `cycle,divergence,max_residual,total_mass`, 12 significant digits.
std::string trace_to_csv(const AltMinTrace& trace);

}  // namespace unmeasure
