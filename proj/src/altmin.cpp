#include "unmeasure/altmin.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <Eigen/Dense>

#include "unmeasure/divergence.hpp"
#include "unmeasure/error.hpp"
#include "unmeasure/projections.hpp"

namespace unmeasure {

namespace {

/// One projection of the cycle: onto {sum f p = target}, or onto
/// {sum f p = target, sum p = 1} when `normalized`.
struct CycleStep {
  std::vector<double> f;
  double target;
  bool normalized;
};

void check_constraints(const Measure& q, std::span<const MomentConstraint> constraints) {
  for (const auto& c : constraints) {
    if (c.f.size() != q.size()) throw DomainError("constraint function has the wrong length");
    for (double v : c.f) {
      if (!std::isfinite(v)) throw DomainError("constraint function values must be finite");
    }
    if (!std::isfinite(c.target)) throw DomainError("constraint target must be finite");
  }
}

/// C = {sum p = 1} intersected with every constraint must contain a point that
/// is positive wherever Q is, since every iterate is a tilt of Q.
void require_reachable(const Measure& q, std::span<const MomentConstraint> constraints) {
  ConstraintSet set;
  set.support_size = q.size();
  set.require_probability = true;
  for (const auto& c : constraints) set.equalities.push_back({c.f, c.target});
  std::vector<bool> fixed(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) fixed[i] = q[i] == 0.0;
  const auto cert = certify_feasibility(set, fixed);
  if (!cert.feasible) throw InfeasibleError("moment constraints are infeasible on supp(Q)");
  if (!cert.strictly_feasible) {
    throw DomainError("moment constraints admit no point positive on all of supp(Q)");
  }
}

double max_residual(const Measure& p, std::span<const MomentConstraint> constraints) {
  double worst = std::abs(p.total_mass() - 1.0);
  const auto w = p.weights();
  for (const auto& c : constraints) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += c.f[i] * w[i];
    worst = std::max(worst, std::abs(s - c.target));
  }
  return worst;
}

AltMinTrace run_cycles(const Measure& q, std::span<const MomentConstraint> constraints,
                       const std::vector<CycleStep>& steps, AltMinVariant variant, double tol,
                       int max_cycles) {
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  if (max_cycles < 1) throw DomainError("max_cycles must be positive");
  AltMinTrace trace;
  trace.variant = variant;
  // ln(P / Q) = sum_s coeff_s f_s + shift on supp(Q).
  std::vector<double> coeff(steps.size(), 0.0);
  double shift = 0.0;
  Measure p = q;
  std::vector<double> centered(q.size());
  std::vector<double> w(q.size());
  for (int cycle = 1; cycle <= max_cycles; ++cycle) {
    const Measure previous = p;
    for (std::size_t s = 0; s < steps.size(); ++s) {
      const auto& step = steps[s];
      double beta = 0.0;
      if (step.normalized) {
        for (std::size_t i = 0; i < q.size(); ++i) centered[i] = step.f[i] - step.target;
        beta = solve_tilt(p, centered, 0.0);
        double z = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) {
          w[i] = p[i] > 0.0 ? p[i] * std::exp(-beta * centered[i]) : 0.0;
          z += w[i];
        }
        for (double& x : w) x /= z;
        shift += beta * step.target - std::log(z);
      } else {
        beta = solve_tilt(p, step.f, step.target);
        for (std::size_t i = 0; i < q.size(); ++i) w[i] = p[i] > 0.0 ? p[i] * std::exp(-beta * step.f[i]) : 0.0;
      }
      coeff[s] -= beta;
      p = Measure(w, q.labels());
    }
    AltMinSnapshot snap;
    snap.cycle = cycle;
    snap.divergence = kl_extended(p, q).value();
    snap.lower_bound = shift + q.total_mass() - p.total_mass();
    for (std::size_t s = 0; s < steps.size(); ++s) snap.lower_bound += coeff[s] * steps[s].target;
    snap.max_residual = max_residual(p, constraints);
    snap.total_mass = p.total_mass();
    for (std::size_t i = 0; i < p.size(); ++i) {
      snap.change = std::max(snap.change, std::abs(p[i] - previous[i]));
    }
    snap.measure = p;
    const bool done = snap.max_residual <= tol && snap.change <= tol;
    trace.cycles.push_back(std::move(snap));
    if (done) {
      trace.converged = true;
      trace.cycles_to_tol = cycle;
      break;
    }
  }
  return trace;
}

double inner(const Measure& q, std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) s += q[i] * a[i] * b[i];
  return s;
}

}  // namespace

std::string to_string(AltMinVariant variant) {
  switch (variant) {
    case AltMinVariant::kNormalizedCyclic:
      return "normalized-cyclic";
    case AltMinVariant::kUnnormalizedCyclic:
      return "unnormalized-cyclic";
    case AltMinVariant::kOrthogonalized:
      return "orthogonalized";
  }
  return "unknown";
}

Measure project_tilde(const Measure& q, std::span<const double> f, double mu) {
  return tilt_projection(q, f, mu);
}

Measure project_normalized(const Measure& q, std::span<const double> f, double mu) {
  if (f.size() != q.size()) throw DomainError("constraint function has the wrong length");
  std::vector<double> centered(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) centered[i] = f[i] - mu;
  const double beta = solve_tilt(q, centered, 0.0);
  std::vector<double> p(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) p[i] = q[i] > 0.0 ? q[i] * std::exp(-beta * centered[i]) : 0.0;
  return normalize(Measure(std::move(p), q.labels()));
}

AltMinTrace altmin_cyclic(const Measure& q, std::span<const MomentConstraint> constraints,
                          bool include_normalization, double tol, int max_cycles) {
  check_constraints(q, constraints);
  require_reachable(q, constraints);
  std::vector<CycleStep> steps;
  if (include_normalization) {
    steps.push_back({std::vector<double>(q.size(), 1.0), 1.0, false});
    for (const auto& c : constraints) steps.push_back({c.f, c.target, false});
  } else {
    if (constraints.empty()) steps.push_back({std::vector<double>(q.size(), 1.0), 1.0, false});
    for (const auto& c : constraints) steps.push_back({c.f, c.target, true});
  }
  return run_cycles(q, constraints, steps,
                    include_normalization ? AltMinVariant::kUnnormalizedCyclic
                                          : AltMinVariant::kNormalizedCyclic,
                    tol, max_cycles);
}

OrthogonalFamily orthogonalize(std::span<const std::vector<double>> functions,
                               std::span<const double> targets, const Measure& q) {
  const std::size_t k = functions.size();
  if (k == 0) throw DomainError("no functions to orthogonalize");
  if (targets.size() != k) throw DomainError("one target per function is required");
  for (const auto& f : functions) {
    if (f.size() != q.size()) throw DomainError("function has the wrong length");
  }

  Eigen::MatrixXd gram(k, k);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) gram(a, b) = inner(q, functions[a], functions[b]);
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();

  OrthogonalFamily out;
  out.gram_condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < k; ++a) {
    std::vector<double> v = functions[a];
    std::vector<double> row(k, 0.0);
    row[a] = 1.0;
    const double original = inner(q, v, v);
    // Two passes of modified Gram-Schmidt.
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t b = 0; b < a; ++b) {
        const double c = inner(q, v, out.functions[b]);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * out.functions[b][i];
        for (std::size_t j = 0; j <= b; ++j) row[j] -= c * out.transform[b][j];
      }
    }
    const double norm2 = inner(q, v, v);
    if (!(norm2 > 1e-12 * original) || !(original > 0.0)) {
      throw DomainError("functions are linearly dependent in L^2(Q)");
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& x : v) x *= inv;
    for (double& x : row) x *= inv;
    double t = 0.0;
    for (std::size_t j = 0; j < k; ++j) t += row[j] * targets[j];
    out.functions.push_back(std::move(v));
    out.transform.push_back(std::move(row));
    out.targets.push_back(t);
  }
  return out;
}

AltMinTrace altmin_accelerated(const Measure& q, std::span<const MomentConstraint> constraints,
                               double tol, int max_cycles) {
  check_constraints(q, constraints);
  require_reachable(q, constraints);
  std::vector<std::vector<double>> functions{std::vector<double>(q.size(), 1.0)};
  std::vector<double> targets{1.0};
  for (const auto& c : constraints) {
    functions.push_back(c.f);
    targets.push_back(c.target);
  }
  const OrthogonalFamily family = orthogonalize(functions, targets, q);
  std::vector<CycleStep> steps;
  for (std::size_t a = 0; a < family.functions.size(); ++a) {
    steps.push_back({family.functions[a], family.targets[a], false});
  }
  return run_cycles(q, constraints, steps, AltMinVariant::kOrthogonalized, tol, max_cycles);
}

std::string trace_to_csv(const AltMinTrace& trace) {
  std::string out = "cycle,divergence,max_residual,total_mass\n";
  char buf[128];
  for (const auto& s : trace.cycles) {
    std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g\n", s.cycle, s.divergence, s.max_residual,
                  s.total_mass);
    out += buf;
  }
  return out;
}

}  // namespace unmeasure
