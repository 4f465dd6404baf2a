#include "unmeasure/projections.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "unmeasure/error.hpp"
#include "unmeasure/lp.hpp"

namespace unmeasure {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using lp::Rational;

std::vector<Rational> rational_row(std::span<const double> g, std::size_t width) {
  std::vector<Rational> row(width);
  for (std::size_t i = 0; i < g.size(); ++i) row[i] = lp::to_rational(g[i]);
  return row;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double row_scale(double target) { return std::max(1.0, std::abs(target)); }

/// Adds the rows of `set` to an LP whose first set.support_size variables are p.
void add_set_rows(lp::LinearProgram& program, const ConstraintSet& set) {
  const std::size_t width = program.num_vars();
  if (set.require_probability) {
    std::vector<Rational> ones(width);
    for (std::size_t i = 0; i < set.support_size; ++i) ones[i] = 1;
    program.add_eq(std::move(ones), Rational(1));
  }
  for (const auto& c : set.equalities) {
    program.add_eq(rational_row(c.g, width), lp::to_rational(c.target));
  }
  for (const auto& c : set.inequalities) {
    program.add_le(rational_row(c.g, width), lp::to_rational(c.target));
  }
}

/// How one atom enters the separable objective.
enum class AtomKind { kRegular, kFixedZero, kLinear };

struct DualRow {
  std::span<const double> g;  // empty span = all ones (normalization)
  double target = 0.0;
  double coeff(std::size_t i) const { return g.empty() ? 1.0 : g[i]; }
};

struct DualState {
  std::vector<double> p;
  std::vector<double> x;  // p_i / q_i on regular atoms
  double value = 0.0;
  std::vector<double> residual;
};

/// Lagrange dual of  min sum_i phi_i(p_i)  s.t.  row_j . p = target_j,
/// phi_i(p) = q_i f(p / q_i), restricted to a fixed set of equality rows.
class DualProblem {
 public:
  /// Atoms marked in `forced_zero` carry no mass in any feasible measure.
  DualProblem(const Measure& q, const FDivergenceSpec& spec, std::vector<DualRow> rows,
              const std::vector<bool>& forced_zero)
      : q_(q), spec_(spec), rows_(std::move(rows)), kinds_(q.size()) {
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (forced_zero[i]) {
        kinds_[i] = AtomKind::kFixedZero;
      } else if (q[i] > 0.0) {
        kinds_[i] = AtomKind::kRegular;
      } else {
        kinds_[i] = spec.fprime_at_inf.is_finite() ? AtomKind::kLinear : AtomKind::kFixedZero;
      }
    }
  }

  std::size_t num_rows() const { return rows_.size(); }

  double shadow_price(std::span<const double> y, std::size_t i) const {
    double s = 0.0;
    for (std::size_t j = 0; j < rows_.size(); ++j) s += y[j] * rows_[j].coeff(i);
    return s;
  }

  /// Minimizes the Lagrangian over p >= 0. Empty when y leaves the dual domain.
  std::optional<DualState> evaluate(std::span<const double> y) const {
    DualState st;
    st.p.assign(q_.size(), 0.0);
    st.x.assign(q_.size(), 0.0);
    double value = 0.0;
    for (std::size_t i = 0; i < q_.size(); ++i) {
      const double s = shadow_price(y, i);
      switch (kinds_[i]) {
        case AtomKind::kFixedZero:
          break;
        case AtomKind::kLinear:
          if (spec_.fprime_at_inf.value() + s < 0.0) return std::nullopt;
          break;
        case AtomKind::kRegular: {
          const double x = spec_derivative_inverse(spec_, -s);
          if (!std::isfinite(x)) return std::nullopt;
          st.x[i] = x;
          st.p[i] = q_[i] * x;
          if (x == 0.0) {
            if (spec_.f_at_0.is_infinite()) return std::nullopt;
            value += q_[i] * spec_.f_at_0.value();
          } else {
            value += q_[i] * spec_.f(x) + s * st.p[i];
          }
          break;
        }
      }
    }
    st.residual.resize(rows_.size());
    for (std::size_t j = 0; j < rows_.size(); ++j) {
      double lhs = 0.0;
      for (std::size_t i = 0; i < q_.size(); ++i) lhs += rows_[j].coeff(i) * st.p[i];
      st.residual[j] = lhs - rows_[j].target;
      value -= y[j] * rows_[j].target;
    }
    if (!std::isfinite(value)) return std::nullopt;
    st.value = value;
    return st;
  }

  bool satisfied(const DualState& st, double tol) const {
    for (std::size_t j = 0; j < rows_.size(); ++j) {
      if (std::abs(st.residual[j]) > tol * row_scale(rows_[j].target)) return false;
    }
    return true;
  }

  /// Newton direction (A W A^T)^+ r with W_i = q_i / f''(x_i).
  Eigen::VectorXd newton_step(const DualState& st) const {
    const auto m = static_cast<Eigen::Index>(rows_.size());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd r(m);
    for (Eigen::Index j = 0; j < m; ++j) r(j) = st.residual[j];
    for (std::size_t i = 0; i < q_.size(); ++i) {
      if (kinds_[i] != AtomKind::kRegular || st.x[i] == 0.0) continue;
      const double w = q_[i] / spec_second_derivative(spec_, st.x[i]);
      if (!(w > 0.0) || !std::isfinite(w)) continue;
      for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) h(a, b) += w * rows_[a].coeff(i) * rows_[b].coeff(i);
      }
    }
    return h.completeOrthogonalDecomposition().solve(r);
  }

  struct Outcome {
    bool converged = false;
    std::vector<double> y;
    std::optional<DualState> state;
    int iterations = 0;
  };

  Outcome solve(std::vector<double> y, double tol, int max_iterations) const {
    Outcome out;
    std::optional<DualState> st;
    for (int shrink = 0; shrink < 60; ++shrink) {
      st = evaluate(y);
      if (st) break;
      for (double& v : y) v *= 0.5;
    }
    if (!st) {
      std::fill(y.begin(), y.end(), 0.0);
      st = evaluate(y);
      if (!st) return out;
    }
    for (int iter = 0; iter <= max_iterations; ++iter) {
      out.iterations = iter;
      if (satisfied(*st, tol)) {
        out.converged = true;
        break;
      }
      if (iter == max_iterations) break;
      const Eigen::VectorXd step = newton_step(*st);
      double slope = 0.0;
      for (std::size_t j = 0; j < y.size(); ++j) slope += st->residual[j] * step(j);
      double alpha = 1.0;
      bool moved = false;
      for (int halving = 0; halving < 60; ++halving, alpha *= 0.5) {
        std::vector<double> trial = y;
        for (std::size_t j = 0; j < y.size(); ++j) trial[j] += alpha * step(j);
        auto next = evaluate(trial);
        if (!next) continue;
        const double slack = 1e-14 * (1.0 + std::abs(st->value));
        if (next->value >= st->value + 1e-4 * alpha * slope - slack) {
          y = std::move(trial);
          st = std::move(next);
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    out.y = std::move(y);
    out.state = std::move(st);
    return out;
  }

 private:
  const Measure& q_;
  const FDivergenceSpec& spec_;
  std::vector<DualRow> rows_;
  std::vector<AtomKind> kinds_;
};

std::vector<bool> fixed_zero_atoms(const Measure& q, const FDivergenceSpec& spec) {
  std::vector<bool> fixed(q.size(), false);
  for (std::size_t i = 0; i < q.size(); ++i) fixed[i] = q[i] == 0.0 && spec.fprime_at_inf.is_infinite();
  return fixed;
}

/// Adds to `fixed` every atom whose largest feasible mass is exactly 0, one
/// exact LP per atom. Returns whether any atom was added.
bool pin_forced_zeros(const ConstraintSet& set, std::vector<bool>& fixed) {
  const std::size_t n = set.support_size;
  bool added = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (fixed[i]) continue;
    lp::LinearProgram program(n);
    add_set_rows(program, set);
    for (std::size_t k = 0; k < n; ++k) {
      if (!fixed[k]) continue;
      std::vector<Rational> row(n);
      row[k] = 1;
      program.add_le(std::move(row), Rational(0));
    }
    std::vector<Rational> objective(n);
    objective[i] = 1;
    program.add_le(objective, Rational(1));
    program.set_objective(std::move(objective));
    const auto sol = program.maximize();
    if (sol.status == lp::Status::kOptimal && sol.value == 0) {
      fixed[i] = true;
      added = true;
    }
  }
  return added;
}

bool is_kl(const FDivergenceSpec& spec) { return spec.name == "kl"; }

/// Sign-robust evaluation of sum_i g_i q_i exp(-beta g_i) - target, scaled by
/// a positive factor so that it never overflows.
double scaled_tilt_residual(const Measure& q, std::span<const double> g, double target,
                            double beta) {
  double top = -kInf;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] > 0.0 && g[i] != 0.0) top = std::max(top, std::log(q[i]) - beta * g[i]);
  }
  if (top == -kInf) return -target;
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] > 0.0 && g[i] != 0.0) s += g[i] * std::exp(std::log(q[i]) - beta * g[i] - top);
  }
  return s - target * std::exp(-top);
}

/// max_i |a_i - b_i| over atoms with q_i > 0.
double max_gap(const Measure& q, const Measure& a, const Measure& b) {
  double gap = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] > 0.0) gap = std::max(gap, std::abs(a[i] - b[i]));
  }
  return gap;
}

}  // namespace

void ConstraintSet::validate() const {
  if (support_size == 0) throw DomainError("constraint set needs a positive support size");
  for (const auto* group : {&equalities, &inequalities}) {
    for (const auto& c : *group) {
      if (c.g.size() != support_size) throw DomainError("constraint function has the wrong length");
      for (double v : c.g) {
        if (!std::isfinite(v)) throw DomainError("constraint function values must be finite");
      }
      if (!std::isfinite(c.target)) throw DomainError("constraint target must be finite");
    }
  }
}

double ConstraintSet::max_violation(const Measure& p) const {
  if (p.size() != support_size) throw DomainError("measure does not match the constraint support");
  const auto w = p.weights();
  double worst = 0.0;
  if (require_probability) worst = std::abs(p.total_mass() - 1.0);
  for (const auto& c : equalities) worst = std::max(worst, std::abs(dot(c.g, w) - c.target));
  for (const auto& c : inequalities) worst = std::max(worst, dot(c.g, w) - c.target);
  return worst;
}

bool ConstraintSet::contains(const Measure& p, double tol) const { return max_violation(p) <= tol; }

FeasibilityCertificate certify_feasibility(const ConstraintSet& set,
                                           const std::vector<bool>& fixed_zero) {
  set.validate();
  const std::size_t n = set.support_size;
  if (!fixed_zero.empty() && fixed_zero.size() != n) throw DomainError("fixed-zero mask has the wrong length");
  // Variables p_0..p_{n-1} >= 0 and a free margin tau.
  lp::LinearProgram program(n + 1);
  program.set_free(n);
  if (set.require_probability) {
    std::vector<Rational> ones(n + 1, Rational(1));
    ones[n] = 0;
    program.add_eq(std::move(ones), Rational(1));
  }
  for (const auto& c : set.equalities) program.add_eq(rational_row(c.g, n + 1), lp::to_rational(c.target));
  for (const auto& c : set.inequalities) {
    auto row = rational_row(c.g, n + 1);
    row[n] = 1;
    program.add_le(std::move(row), lp::to_rational(c.target));
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Rational> row(n + 1);
    if (!fixed_zero.empty() && fixed_zero[i]) {
      row[i] = 1;
      program.add_le(std::move(row), Rational(0));
    } else {
      row[i] = -1;
      row[n] = 1;
      program.add_le(std::move(row), Rational(0));
    }
  }
  std::vector<Rational> objective(n + 1);
  objective[n] = 1;
  program.add_le(objective, Rational(1));
  program.set_objective(std::move(objective));
  const lp::Solution sol = program.maximize();

  FeasibilityCertificate cert;
  // tau also relaxes the inequality rows, so a negative optimum means empty.
  if (sol.status != lp::Status::kOptimal || sol.value < 0) return cert;
  cert.feasible = true;
  cert.strictly_feasible = sol.value > 0;
  cert.interior_margin = lp::to_double(sol.value);
  std::vector<double> point(n);
  for (std::size_t i = 0; i < n; ++i) point[i] = std::max(0.0, lp::to_double(sol.x[i]));
  cert.point = Measure(std::move(point));
  return cert;
}

std::pair<double, double> mass_range(const ConstraintSet& set) {
  set.validate();
  const std::size_t n = set.support_size;
  std::pair<double, double> range;
  for (int sign : {-1, 1}) {
    lp::LinearProgram program(n);
    add_set_rows(program, set);
    program.set_objective(std::vector<Rational>(n, Rational(sign)));
    const lp::Solution sol = program.maximize();
    if (sol.status == lp::Status::kInfeasible) throw InfeasibleError("constraint set is empty");
    if (sign < 0) {
      range.first = lp::to_double(-sol.value);
    } else {
      range.second = sol.status == lp::Status::kUnbounded ? kInf : lp::to_double(sol.value);
    }
  }
  return range;
}

double solve_tilt(const Measure& q, std::span<const double> g, double target, int* evaluations) {
  if (g.size() != q.size()) throw DomainError("constraint function has the wrong length");
  bool has_pos = false;
  bool has_neg = false;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] <= 0.0) continue;
    has_pos = has_pos || g[i] > 0.0;
    has_neg = has_neg || g[i] < 0.0;
  }
  if (!has_pos && !has_neg) {
    if (target == 0.0) return 0.0;
    throw DomainError("constraint function vanishes on supp(Q); target unattainable");
  }
  if ((!has_neg && target <= 0.0) || (!has_pos && target >= 0.0)) {
    throw DomainError("tilt target lies outside the attainable range");
  }
  int count = 0;
  auto h = [&](double beta) {
    ++count;
    return scaled_tilt_residual(q, g, target, beta);
  };
  // h is strictly decreasing in beta; walk outward from 0 until the sign flips.
  const double h0 = h(0.0);
  if (h0 == 0.0) {
    if (evaluations) *evaluations = count;
    return 0.0;
  }
  const double direction = h0 > 0.0 ? 1.0 : -1.0;
  double near = 0.0;
  double far = direction;
  while (h(far) * direction > 0.0) {
    near = far;
    far *= 2.0;
    if (std::abs(far) > 1e8) throw DomainError("tilt target lies outside the attainable range");
  }
  double lo = std::min(near, far);
  double hi = std::max(near, far);
  while (hi - lo > 1e-14) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (h(mid) > 0.0 ? lo : hi) = mid;
  }
  double beta = 0.5 * (lo + hi);
  // One Newton polish on the unscaled residual.
  double value = -target;
  double slope = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] <= 0.0) continue;
    const double w = q[i] * std::exp(-beta * g[i]);
    value += g[i] * w;
    slope -= g[i] * g[i] * w;
  }
  if (slope < 0.0 && std::isfinite(value)) {
    const double polished = beta - value / slope;
    double polished_value = -target;
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (q[i] > 0.0) polished_value += g[i] * q[i] * std::exp(-polished * g[i]);
    }
    if (std::abs(polished_value) < std::abs(value)) beta = polished;
  }
  if (evaluations) *evaluations = count;
  return beta;
}

Measure tilt_projection(const Measure& q, std::span<const double> g, double target) {
  const double beta = solve_tilt(q, g, target);
  std::vector<double> p(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) p[i] = q[i] > 0.0 ? q[i] * std::exp(-beta * g[i]) : 0.0;
  return Measure(std::move(p), q.labels());
}

ProjectionResult project(const Measure& q, const ConstraintSet& set, const FDivergenceSpec& spec,
                         const ProjectOptions& options) {
  set.validate();
  if (q.size() != set.support_size) throw DomainError("Q does not match the constraint support");
  validate_spec(spec);
  if (!(options.tol > 0.0)) throw DomainError("tolerance must be positive");

  auto fixed = fixed_zero_atoms(q, spec);
  auto cert = certify_feasibility(set, fixed);
  if (!cert.feasible) throw InfeasibleError("constraint set has no feasible measure");
  // Without an interior point some atoms may be empty in every feasible
  // measure; their duals would run off to infinity, so they are pinned.
  const bool pinned = !cert.strictly_feasible && pin_forced_zeros(set, fixed);
  if (pinned) cert = certify_feasibility(set, fixed);
  if (f_divergence(*cert.point, q, spec).is_infinite()) {
    throw DomainError("no feasible measure with finite divergence was found");
  }

  static const std::vector<double> kOnes;
  const std::size_t n_norm = set.require_probability ? 1 : 0;
  const std::size_t n_eq = set.equalities.size();
  const std::size_t n_in = set.inequalities.size();
  if (n_in > 12) throw DomainError("at most 12 inequality constraints are supported");

  ProjectionResult result;
  result.inequality_duals.assign(n_in, 0.0);
  result.active.assign(n_in, false);
  result.equality_duals.assign(n_eq, 0.0);

  auto finish = [&](Measure p) {
    result.q_star = std::move(p);
    result.value = f_divergence(result.q_star, q, spec);
    result.max_violation = set.max_violation(result.q_star);
    const auto w = result.q_star.weights();
    for (std::size_t k = 0; k < n_in; ++k) {
      const double slack = set.inequalities[k].target - dot(set.inequalities[k].g, w);
      result.complementarity =
          std::max(result.complementarity, std::abs(result.inequality_duals[k] * slack));
    }
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (q[i] <= 0.0 || w[i] <= 0.0) continue;
      double s = result.normalization_dual;
      for (std::size_t j = 0; j < n_eq; ++j) s += result.equality_duals[j] * set.equalities[j].g[i];
      for (std::size_t k = 0; k < n_in; ++k) s += result.inequality_duals[k] * set.inequalities[k].g[i];
      result.stationarity =
          std::max(result.stationarity, std::abs(spec_derivative(spec, w[i] / q[i]) + s));
    }
    result.converged = true;
    return result;
  };

  if (is_kl(spec) && !pinned && n_in == 0 && n_norm + n_eq == 1) {
    std::vector<double> ones(q.size(), 1.0);
    const std::span<const double> g = n_norm ? std::span<const double>(ones) : set.equalities[0].g;
    const double target = n_norm ? 1.0 : set.equalities[0].target;
    int evaluations = 0;
    const double beta = solve_tilt(q, g, target, &evaluations);
    (n_norm ? result.normalization_dual : result.equality_duals[0]) = beta;
    result.iterations = evaluations;
    std::vector<double> p(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) p[i] = q[i] > 0.0 ? q[i] * std::exp(-beta * g[i]) : 0.0;
    return finish(Measure(std::move(p), q.labels()));
  }

  auto initial = [&](std::size_t row) {
    return row < options.initial_duals.size() ? options.initial_duals[row] : 0.0;
  };

  // Candidate active sets in order of size, then lexicographically.
  std::vector<unsigned> subsets(std::size_t{1} << n_in);
  std::iota(subsets.begin(), subsets.end(), 0u);
  std::stable_sort(subsets.begin(), subsets.end(), [](unsigned a, unsigned b) {
    return std::popcount(a) < std::popcount(b);
  });

  for (unsigned mask : subsets) {
    if (mask != 0) {
      ConstraintSet tight = set;
      tight.inequalities.clear();
      for (std::size_t k = 0; k < n_in; ++k) {
        ((mask >> k) & 1u ? tight.equalities : tight.inequalities).push_back(set.inequalities[k]);
      }
      if (!certify_feasibility(tight, fixed).feasible) continue;
    }
    std::vector<DualRow> rows;
    std::vector<double> y0;
    if (n_norm) {
      rows.push_back({std::span<const double>(kOnes), 1.0});
      y0.push_back(initial(0));
    }
    for (std::size_t j = 0; j < n_eq; ++j) {
      rows.push_back({set.equalities[j].g, set.equalities[j].target});
      y0.push_back(initial(n_norm + j));
    }
    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < n_in; ++k) {
      if (!((mask >> k) & 1u)) continue;
      active.push_back(k);
      rows.push_back({set.inequalities[k].g, set.inequalities[k].target});
      y0.push_back(initial(n_norm + n_eq + k));
    }
    const DualProblem dual(q, spec, std::move(rows), fixed);
    auto outcome = dual.solve(std::move(y0), options.tol, options.max_iterations);
    result.iterations += outcome.iterations;
    if (!outcome.converged) continue;

    bool kkt = true;
    for (std::size_t a = 0; a < active.size(); ++a) {
      if (outcome.y[n_norm + n_eq + a] < -1e-10) kkt = false;
    }
    const auto& p = outcome.state->p;
    for (std::size_t k = 0; k < n_in && kkt; ++k) {
      if ((mask >> k) & 1u) continue;
      const auto& c = set.inequalities[k];
      if (dot(c.g, p) - c.target > options.tol * row_scale(c.target)) kkt = false;
    }
    if (!kkt) continue;

    if (n_norm) result.normalization_dual = outcome.y[0];
    for (std::size_t j = 0; j < n_eq; ++j) result.equality_duals[j] = outcome.y[n_norm + j];
    for (std::size_t a = 0; a < active.size(); ++a) {
      result.inequality_duals[active[a]] = outcome.y[n_norm + n_eq + a];
      result.active[active[a]] = true;
    }
    return finish(Measure(p, q.labels()));
  }
  throw ConvergenceError("projection did not converge for any active set within the iteration cap");
}

SequenceReport asymptotic_sequence_check(const Measure& q, const ConstraintSet& set,
                                         const FDivergenceSpec& spec,
                                         std::span<const double> schedule) {
  for (double x : {1e-3, 1e-1, 1.0, 10.0, 1e3}) {
    if (!(spec_second_derivative(spec, x) > 0.0)) {
      throw DomainError("asymptotic sequence check needs a strictly convex generator");
    }
  }
  if (schedule.empty()) throw DomainError("tolerance schedule is empty");
  SequenceReport report;
  std::vector<Measure> iterates;
  for (double tol : schedule) {
    ProjectOptions options;
    options.tol = tol;
    const ProjectionResult r = project(q, set, spec, options);
    SequenceStep step;
    step.tol = tol;
    step.value = r.value;
    step.max_violation = r.max_violation;
    if (!iterates.empty()) step.change = max_gap(q, r.q_star, iterates.back());
    iterates.push_back(r.q_star);
    report.steps.push_back(step);
  }
  const std::size_t from = std::min<std::size_t>(3, iterates.size() - 1);
  for (std::size_t m = from; m < iterates.size(); ++m) {
    for (std::size_t n = m + 1; n < iterates.size(); ++n) {
      report.tail_spread = std::max(report.tail_spread, max_gap(q, iterates[m], iterates[n]));
    }
  }
  const Measure& last = iterates.back();

  ProjectOptions tight;
  tight.tol = 1e-11;
  const ProjectionResult reference = project(q, set, spec, tight);
  report.limit_error = max_gap(q, last, reference.q_star);

  ProjectOptions shifted = tight;
  const std::size_t rows =
      (set.require_probability ? 1 : 0) + set.equalities.size() + set.inequalities.size();
  shifted.initial_duals.assign(rows, 0.5);
  const ProjectionResult other = project(q, set, spec, shifted);
  for (std::size_t i = 0; i < q.size(); ++i) {
    report.uniqueness_gap = std::max(report.uniqueness_gap, std::abs(other.q_star[i] - reference.q_star[i]));
  }

  report.cauchy = report.tail_spread <= 1e-6;
  report.passed = report.cauchy && report.limit_error <= 1e-6 && report.uniqueness_gap <= 1e-6;
  return report;
}

Thm7Report thm7_check(const Measure& q, const ConstraintSet& set, const FDivergenceSpec& spec) {
  if (std::abs(q.total_mass() - 1.0) > 1e-12) throw DomainError("Q must be a probability measure");
  if (spec.fprime_at_inf.is_finite()) throw DomainError("generator must have f'(inf) = +inf");
  const auto [lo, hi] = mass_range(set);
  if (std::abs(lo - 1.0) > 1e-12 || std::abs(hi - 1.0) > 1e-12) {
    throw DomainError("constraint set is not contained in the probability measures");
  }
  Thm7Report report;
  ProjectOptions options;
  options.tol = 1e-12;
  report.projection = project(q, set, spec, options);
  report.mass = report.projection.q_star.total_mass();
  report.mass_error = std::abs(report.mass - 1.0);
  report.passed = report.mass_error <= 1e-8;
  return report;
}

Thm8Report thm8_check(const Measure& q, std::span<const double> g, double mu_tilde,
                      const FDivergenceSpec& spec, double tol) {
  if (std::abs(q.total_mass() - 1.0) > 1e-12) throw DomainError("Q must be a probability measure");
  if (g.size() != q.size()) throw DomainError("g has the wrong length");
  for (double v : g) {
    if (!(v > 0.0)) throw DomainError("g must be positive");
  }
  if (spec.fprime_at_inf.is_infinite()) throw DomainError("generator must have finite f'(inf)");
  Thm8Report report;
  report.mu = dot(g, q.weights());
  if (!(mu_tilde > 0.0 && mu_tilde < report.mu)) throw DomainError("mu_tilde must lie in (0, mu)");

  ConstraintSet set;
  set.support_size = q.size();
  set.inequalities.push_back({std::vector<double>(g.begin(), g.end()), mu_tilde});
  ProjectOptions options;
  options.tol = tol;
  report.projection = project(q, set, spec, options);
  const Measure& star = report.projection.q_star;
  report.constraint_gap = std::abs(dot(g, star.weights()) - mu_tilde);
  report.mass_deficit = q.total_mass() - star.total_mass();
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] == 0.0) report.off_support_mass = std::max(report.off_support_mass, star[i]);
  }
  report.constraint_active = report.constraint_gap <= 1e-8;
  report.mass_reduced = report.mass_deficit > tol;
  report.absolutely_continuous = report.off_support_mass <= 1e-12;
  report.certified = report.constraint_active && report.mass_reduced && report.absolutely_continuous;
  return report;
}

void to_json(nlohmann::json& j, const ProjectionResult& r) {
  j = nlohmann::json{{"q_star", r.q_star},
                     {"value", r.value.is_finite() ? nlohmann::json(r.value.value()) : nlohmann::json("inf")},
                     {"normalization_dual", r.normalization_dual},
                     {"equality_duals", r.equality_duals},
                     {"inequality_duals", r.inequality_duals},
                     {"active", r.active},
                     {"iterations", r.iterations},
                     {"converged", r.converged},
                     {"max_violation", r.max_violation},
                     {"stationarity", r.stationarity},
                     {"complementarity", r.complementarity}};
}

ConstraintSet constraint_set_from_json(const nlohmann::json& j) {
  ConstraintSet set;
  auto read = [](const nlohmann::json& item, const char* bound_key) {
    LinearConstraint c;
    c.g = item.at("g").get<std::vector<double>>();
    if (item.contains(bound_key)) {
      c.target = item.at(bound_key).get<double>();
    } else {
      c.target = item.at("target").get<double>();
    }
    return c;
  };
  for (const auto& item : j.value("equalities", nlohmann::json::array())) set.equalities.push_back(read(item, "target"));
  for (const auto& item : j.value("inequalities", nlohmann::json::array())) set.inequalities.push_back(read(item, "bound"));
  set.require_probability = j.value("probability", false);
  if (j.contains("support_size")) {
    set.support_size = j.at("support_size").get<std::size_t>();
  } else if (!set.equalities.empty()) {
    set.support_size = set.equalities.front().g.size();
  } else if (!set.inequalities.empty()) {
    set.support_size = set.inequalities.front().g.size();
  } else {
    throw DomainError("constraint set JSON needs \"support_size\" when it has no constraints");
  }
  set.validate();
  return set;
}

}  // namespace unmeasure
