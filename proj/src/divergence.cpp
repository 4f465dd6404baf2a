#include "unmeasure/divergence.hpp"

#include <cmath>
#include <limits>

#include "unmeasure/error.hpp"

namespace unmeasure {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_pair(const Measure& p, const Measure& q) {
  if (p.size() != q.size()) throw DomainError("support size mismatch");
  if (p.has_labels() && q.has_labels() && p.labels() != q.labels()) {
    throw DomainError("support label mismatch");
  }
}

double relative_gap(double approx, double declared) {
  return std::abs(approx - declared) / std::max(1.0, std::abs(declared));
}

}  // namespace

FDivergenceSpec kl_spec() {
  FDivergenceSpec spec;
  spec.name = "kl";
  spec.f = [](double x) { return x > 0.0 ? x * std::log(x) - (x - 1.0) : 1.0; };
  spec.f_at_0 = 1.0;
  spec.fprime_at_inf = ExtendedReal::infinity();
  spec.fprime = [](double x) { return std::log(x); };
  spec.fsecond = [](double x) { return 1.0 / x; };
  spec.fprime_inverse = [](double y) { return std::exp(y); };
  return spec;
}

FDivergenceSpec reverse_kl_spec() {
  FDivergenceSpec spec;
  spec.name = "reverse-kl";
  spec.f = [](double x) { return -std::log(x) + x - 1.0; };
  spec.f_at_0 = ExtendedReal::infinity();
  spec.fprime_at_inf = 1.0;
  spec.fprime = [](double x) { return 1.0 - 1.0 / x; };
  spec.fsecond = [](double x) { return 1.0 / (x * x); };
  spec.fprime_inverse = [](double y) { return y < 1.0 ? 1.0 / (1.0 - y) : kInf; };
  return spec;
}

void validate_spec(const FDivergenceSpec& spec) {
  if (!spec.f) throw DomainError("f-divergence spec '" + spec.name + "' has no generator");
  if (std::abs(spec.f(1.0)) > 1e-12) throw DomainError("generator must satisfy f(1) = 0");
  for (int k = -60; k <= 60; ++k) {
    const double x = std::pow(10.0, k / 10.0);
    const double fx = spec.f(x);
    if (std::isnan(fx) || fx < -1e-12) {
      throw DomainError("generator must be non-negative on (0, inf)");
    }
  }
  if (spec.f_at_0.is_finite() &&
      relative_gap(spec.f(1e-8), spec.f_at_0.value()) > 1e-4) {
    throw DomainError("declared f(0) disagrees with f near 0");
  }
  if (spec.fprime_at_inf.is_finite() &&
      relative_gap(spec.f(1e8) / 1e8, spec.fprime_at_inf.value()) > 1e-4) {
    throw DomainError("declared f'(inf) disagrees with f(x)/x at large x");
  }
}

double spec_derivative(const FDivergenceSpec& spec, double x) {
  if (spec.fprime) return spec.fprime(x);
  // Near 0 a relative step cancels to nothing; the forward secant over a
  // fixed step is still monotone in x for convex f.
  constexpr double kSmall = 1e-8;
  if (x < kSmall) return (spec.f(x + kSmall) - spec.f(x)) / kSmall;
  const double h = 1e-5 * x;
  return (spec.f(x + h) - spec.f(x - h)) / (2.0 * h);
}

double spec_second_derivative(const FDivergenceSpec& spec, double x) {
  if (spec.fsecond) return spec.fsecond(x);
  constexpr double kSmall = 1e-4;
  if (x < kSmall) {
    return (spec.f(x + 2.0 * kSmall) - 2.0 * spec.f(x + kSmall) + spec.f(x)) / (kSmall * kSmall);
  }
  const double h = 1e-4 * x;
  return (spec.f(x + h) - 2.0 * spec.f(x) + spec.f(x - h)) / (h * h);
}

double spec_derivative_inverse(const FDivergenceSpec& spec, double y) {
  if (spec.fprime_inverse) return spec.fprime_inverse(y);
  if (spec.fprime_at_inf.is_finite() && y >= spec.fprime_at_inf.value()) return kInf;
  // Bisection on log x; f' is non-decreasing by convexity.
  double lo = -700.0;
  double hi = 700.0;
  if (spec_derivative(spec, std::exp(lo)) >= y) return 0.0;
  if (spec_derivative(spec, std::exp(hi)) < y) return kInf;
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (spec_derivative(spec, std::exp(mid)) < y ? lo : hi) = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

ExtendedReal kl_extended(const Measure& lambda, const Measure& mu) {
  check_pair(lambda, mu);
  double total = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const double l = lambda[i];
    const double m = mu[i];
    if (l == 0.0) {
      total += m;
    } else if (m == 0.0) {
      return ExtendedReal::infinity();
    } else {
      total += l * std::log(l / m) - l + m;
    }
  }
  return std::max(total, 0.0);
}

ExtendedReal kl_poisson_product(const Measure& lambda, const Measure& mu) {
  return kl_extended(lambda, mu);
}

ExtendedReal f_divergence_term(double p, double q, const FDivergenceSpec& spec) {
  if (q > 0.0) {
    if (p == 0.0) return q * spec.f_at_0;
    return ExtendedReal::from_double(spec.f(p / q) * q);
  }
  if (p == 0.0) return 0.0;
  return p * spec.fprime_at_inf;
}

ExtendedReal f_divergence(const Measure& p, const Measure& q, const FDivergenceSpec& spec) {
  check_pair(p, q);
  ExtendedReal total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    total += f_divergence_term(p[i], q[i], spec);
    if (total.is_infinite()) return total;
  }
  return total;
}

}  // namespace unmeasure
