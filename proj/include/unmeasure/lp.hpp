#pragma once

#include <cstddef>
#include <vector>

#include <boost/multiprecision/gmp.hpp>

namespace unmeasure::lp {

using Rational = boost::multiprecision::mpq_rational;

enum class Status { kOptimal, kInfeasible, kUnbounded };

struct Solution {
  Status status = Status::kInfeasible;
  Rational value;
  std::vector<Rational> x;
};

/// Exact conversion; every finite double is a dyadic rational.
Rational to_rational(double v);
double to_double(const Rational& v);

/// Linear program  maximize c.x  subject to rows of <=, >=, = constraints.
/// Variables are non-negative unless marked free. Solved by a two-phase
/// simplex in exact rational arithmetic with Bland's anti-cycling rule.
class LinearProgram {
 public:
  explicit LinearProgram(std::size_t num_vars);

  std::size_t num_vars() const { return num_vars_; }

  void set_free(std::size_t var);
  void add_le(std::vector<Rational> coeffs, Rational rhs);
  void add_ge(std::vector<Rational> coeffs, Rational rhs);
  void add_eq(std::vector<Rational> coeffs, Rational rhs);
  void set_objective(std::vector<Rational> coeffs);

  Solution maximize() const;

 private:
  std::size_t num_vars_;
  std::vector<bool> free_;
  std::vector<std::vector<Rational>> rows_;
  std::vector<Rational> rhs_;
  std::vector<Rational> objective_;
};

}  // namespace unmeasure::lp
