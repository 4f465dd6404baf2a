#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "unmeasure/divergence.hpp"
#include "unmeasure/extended_real.hpp"
#include "unmeasure/measure.hpp"

namespace unmeasure {

/// sum_i g(i) p_i (= or <=) target.
struct LinearConstraint {
  std::vector<double> g;
  double target = 0.0;
};

/// Convex set of measures cut out by linear mean-value constraints.
struct ConstraintSet {
  std::size_t support_size = 0;
  std::vector<LinearConstraint> equalities;
  std::vector<LinearConstraint> inequalities;  ///< sum g p <= target
  bool require_probability = false;            ///< adds sum p = 1

  /// Throws when a constraint row does not match support_size.
  void validate() const;
  bool contains(const Measure& p, double tol) const;
  /// Largest violation over all rows (0 when p is feasible).
  double max_violation(const Measure& p) const;
};

struct FeasibilityCertificate {
  bool feasible = false;
  bool strictly_feasible = false;
  /// max over feasible P of min(P_i on free atoms, inequality slacks), capped at 1.
  double interior_margin = 0.0;
  std::optional<Measure> point;
};

/// Exact-LP feasibility check. Atoms with `fixed_zero[i]` are pinned to 0.
FeasibilityCertificate certify_feasibility(const ConstraintSet& set,
                                           const std::vector<bool>& fixed_zero = {});

/// Range of total mass sum p over the set, from two exact LPs. Infinite
/// upper end is reported as +inf.
std::pair<double, double> mass_range(const ConstraintSet& set);

struct ProjectOptions {
  double tol = 1e-9;
  int max_iterations = 10'000;
  /// Starting duals ordered (normalization?, equalities..., inequalities...);
  /// empty means start at zero.
  std::vector<double> initial_duals;
};

struct ProjectionResult {
  Measure q_star = Measure::zeros(1);
  ExtendedReal value;
  double normalization_dual = 0.0;
  std::vector<double> equality_duals;
  std::vector<double> inequality_duals;  ///< >= 0
  std::vector<bool> active;
  int iterations = 0;
  bool converged = false;
  double max_violation = 0.0;
  double stationarity = 0.0;     ///< max |f'(p_i/q_i) + s_i| over interior atoms
  double complementarity = 0.0;  ///< max |dual * slack| over inequalities
};

/// argmin_{P in C} D_f(P, Q). Solves the concave dual by damped Newton for
/// each candidate active set of inequalities, smallest sets first, and keeps
/// the first one that satisfies the KKT conditions. A single equality under
/// the KL generator uses the closed-form tilt p_i = q_i exp(-beta g_i).
ProjectionResult project(const Measure& q, const ConstraintSet& set, const FDivergenceSpec& spec,
                         const ProjectOptions& options = {});

/// Root beta of sum_i g_i q_i exp(-beta g_i) = target by bracketed bisection
/// followed by one Newton polish. Throws when target is unattainable.
double solve_tilt(const Measure& q, std::span<const double> g, double target,
                  int* evaluations = nullptr);

/// q_i exp(-beta g_i) for the beta of solve_tilt: the unnormalized KL
/// projection onto {P : sum g p = target}.
Measure tilt_projection(const Measure& q, std::span<const double> g, double target);

struct SequenceStep {
  double tol = 0.0;
  ExtendedReal value;
  double max_violation = 0.0;
  double change = 0.0;  ///< max_i |P_n(i) - P_{n-1}(i)| over atoms with Q(i) > 0
};

struct SequenceReport {
  std::vector<SequenceStep> steps;
  double limit_error = 0.0;     ///< last iterate vs a tight-tolerance projection
  double uniqueness_gap = 0.0;  ///< two different dual starting points
  double tail_spread = 0.0;     ///< max |P_m(i) - P_n(i)| over the refinements from the 4th on
  bool cauchy = false;
  bool passed = false;
};

/// Runs the solver under the tolerances in `schedule` (decreasing) and checks
/// that the iterates settle pointwise on supp(Q) onto the unique projection.
SequenceReport asymptotic_sequence_check(const Measure& q, const ConstraintSet& set,
                                         const FDivergenceSpec& spec,
                                         std::span<const double> schedule);

struct Thm7Report {
  double mass = 0.0;
  double mass_error = 0.0;
  bool passed = false;
  ProjectionResult projection;
};

/// For C inside the probability simplex and f'(inf) = inf, checks that the
/// projection has total mass 1 within 1e-8.
Thm7Report thm7_check(const Measure& q, const ConstraintSet& set, const FDivergenceSpec& spec);

struct Thm8Report {
  double mu = 0.0;               ///< sum g q
  double constraint_gap = 0.0;   ///< |sum g q* - mu_tilde|
  double mass_deficit = 0.0;     ///< sum q - sum q*
  double off_support_mass = 0.0; ///< max q*_i over atoms with q_i = 0
  bool constraint_active = false;
  bool mass_reduced = false;
  bool absolutely_continuous = false;
  bool certified = false;
  ProjectionResult projection;
};

/// Projection of a probability measure Q onto {P : sum g p <= mu_tilde} for
/// positive g, 0 < mu_tilde < sum g q and finite f'(inf).
Thm8Report thm8_check(const Measure& q, std::span<const double> g, double mu_tilde,
                      const FDivergenceSpec& spec = reverse_kl_spec(), double tol = 1e-10);

void to_json(nlohmann::json& j, const ProjectionResult& r);
ConstraintSet constraint_set_from_json(const nlohmann::json& j);

}  // namespace unmeasure
