#pragma once

#include <functional>
#include <string>

#include "unmeasure/extended_real.hpp"
#include "unmeasure/measure.hpp"

namespace unmeasure {

/// Convex generator f on (0, inf) with f(1) = 0 and f >= 0, together with its
/// boundary values f(0) = lim_{x->0} f(x) and f'(inf) = lim_{x->inf} f(x)/x.
///
/// The derivative callbacks are optional; when absent, derivatives are taken
/// numerically and f' is inverted by bisection.
struct FDivergenceSpec {
  std::string name;
  std::function<double(double)> f;
  ExtendedReal f_at_0;
  ExtendedReal fprime_at_inf;
  std::function<double(double)> fprime;
  std::function<double(double)> fsecond;
  /// Inverse of f' on its range; returns +inf for y >= f'(inf).
  std::function<double(double)> fprime_inverse;
};

/// f(x) = x ln x - (x - 1); f(0) = 1, f'(inf) = +inf.
FDivergenceSpec kl_spec();
/// f(x) = -ln x + x - 1; f(0) = +inf, f'(inf) = 1.
FDivergenceSpec reverse_kl_spec();

/// Throws DomainError when the spec is not a valid generator: f(1) != 0,
/// f < -1e-12 somewhere on a log grid over [1e-6, 1e6], or a finite declared
/// boundary value disagrees with f at 1e-8 / 1e8 by more than 1e-4 relative.
void validate_spec(const FDivergenceSpec& spec);

double spec_derivative(const FDivergenceSpec& spec, double x);
double spec_second_derivative(const FDivergenceSpec& spec, double x);
/// Solves f'(x) = y for x >= 0. Returns 0 when y <= f'(0+) and +inf when y
/// is at or beyond f'(inf).
double spec_derivative_inverse(const FDivergenceSpec& spec, double y);

/// D(lambda || mu) = sum_i lambda_i ln(lambda_i / mu_i) - lambda_i + mu_i.
ExtendedReal kl_extended(const Measure& lambda, const Measure& mu);

/// Same quantity read as D(Po(lambda) || Po(mu)) summed over independent
/// Poisson coordinates.
ExtendedReal kl_poisson_product(const Measure& lambda, const Measure& mu);

/// D_f(P, Q) = sum_i f(p_i / q_i) q_i with f(x/0) * 0 = f'(inf) * x.
ExtendedReal f_divergence(const Measure& p, const Measure& q, const FDivergenceSpec& spec);

/// Contribution of a single atom under the boundary conventions.
ExtendedReal f_divergence_term(double p, double q, const FDivergenceSpec& spec);

}  // namespace unmeasure
