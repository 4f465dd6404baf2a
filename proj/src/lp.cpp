#include "unmeasure/lp.hpp"

#include <cmath>
#include <utility>

#include "unmeasure/error.hpp"

namespace unmeasure::lp {

namespace {

/// Tableau simplex for  max c.x, A x <= b, x >= 0  (b of any sign).
/// Row m holds the objective, row m+1 the phase-one objective; column n is
/// the artificial variable (id -1) and column n+1 the right-hand side.
class Tableau {
 public:
  Tableau(const std::vector<std::vector<Rational>>& a, const std::vector<Rational>& b,
          const std::vector<Rational>& c)
      : m_(static_cast<int>(b.size())),
        n_(static_cast<int>(c.size())),
        nonbasic_(n_ + 1),
        basic_(m_),
        d_(m_ + 2, std::vector<Rational>(n_ + 2)) {
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < n_; ++j) d_[i][j] = a[i][j];
      basic_[i] = n_ + i;
      d_[i][n_] = -1;
      d_[i][n_ + 1] = b[i];
    }
    for (int j = 0; j < n_; ++j) {
      nonbasic_[j] = j;
      d_[m_][j] = -c[j];
    }
    nonbasic_[n_] = -1;
    d_[m_ + 1][n_] = 1;
  }

  Solution solve() {
    Solution out;
    int r = 0;
    for (int i = 1; i < m_; ++i) {
      if (d_[i][n_ + 1] < d_[r][n_ + 1]) r = i;
    }
    if (m_ > 0 && d_[r][n_ + 1] < 0) {
      pivot(r, n_);
      if (!run(2) || d_[m_ + 1][n_ + 1] < 0) {
        out.status = Status::kInfeasible;
        return out;
      }
      for (int i = 0; i < m_; ++i) {
        if (basic_[i] != -1) continue;
        int s = -1;
        for (int j = 0; j <= n_; ++j) {
          if (d_[i][j] != 0 && (s == -1 || nonbasic_[j] < nonbasic_[s])) s = j;
        }
        if (s != -1) pivot(i, s);
      }
    }
    const bool bounded = run(1);
    out.x.assign(n_, Rational(0));
    for (int i = 0; i < m_; ++i) {
      if (basic_[i] >= 0 && basic_[i] < n_) out.x[basic_[i]] = d_[i][n_ + 1];
    }
    out.status = bounded ? Status::kOptimal : Status::kUnbounded;
    out.value = d_[m_][n_ + 1];
    return out;
  }

 private:
  void pivot(int r, int s) {
    const Rational inv = 1 / d_[r][s];
    for (int i = 0; i < m_ + 2; ++i) {
      if (i == r || d_[i][s] == 0) continue;
      const Rational factor = d_[i][s] * inv;
      for (int j = 0; j < n_ + 2; ++j) d_[i][j] -= d_[r][j] * factor;
      d_[i][s] = d_[r][s] * factor;
    }
    for (int j = 0; j < n_ + 2; ++j) {
      if (j != s) d_[r][j] *= inv;
    }
    for (int i = 0; i < m_ + 2; ++i) {
      if (i != r) d_[i][s] *= -inv;
    }
    d_[r][s] = inv;
    std::swap(basic_[r], nonbasic_[s]);
  }

  /// Bland's rule: lowest-index improving column, lowest-index ratio tie.
  bool run(int phase) {
    const int obj = m_ + phase - 1;
    for (;;) {
      int s = -1;
      for (int j = 0; j <= n_; ++j) {
        if (nonbasic_[j] == -phase) continue;
        if (d_[obj][j] < 0 && (s == -1 || nonbasic_[j] < nonbasic_[s])) s = j;
      }
      if (s == -1) return true;
      int r = -1;
      Rational best;
      for (int i = 0; i < m_; ++i) {
        if (d_[i][s] <= 0) continue;
        Rational ratio = d_[i][n_ + 1] / d_[i][s];
        if (r == -1 || ratio < best || (ratio == best && basic_[i] < basic_[r])) {
          r = i;
          best = std::move(ratio);
        }
      }
      if (r == -1) return false;
      pivot(r, s);
    }
  }

  int m_;
  int n_;
  std::vector<int> nonbasic_;
  std::vector<int> basic_;
  std::vector<std::vector<Rational>> d_;
};

}  // namespace

Rational to_rational(double v) {
  if (!std::isfinite(v)) throw DomainError("LP coefficients must be finite");
  return Rational(v);
}

double to_double(const Rational& v) { return v.convert_to<double>(); }

LinearProgram::LinearProgram(std::size_t num_vars)
    : num_vars_(num_vars), free_(num_vars, false), objective_(num_vars) {}

void LinearProgram::set_free(std::size_t var) { free_.at(var) = true; }

void LinearProgram::add_le(std::vector<Rational> coeffs, Rational rhs) {
  if (coeffs.size() != num_vars_) throw DomainError("LP row has the wrong length");
  rows_.push_back(std::move(coeffs));
  rhs_.push_back(std::move(rhs));
}

void LinearProgram::add_ge(std::vector<Rational> coeffs, Rational rhs) {
  for (auto& c : coeffs) c = -c;
  add_le(std::move(coeffs), -rhs);
}

void LinearProgram::add_eq(std::vector<Rational> coeffs, Rational rhs) {
  add_le(coeffs, rhs);
  add_ge(std::move(coeffs), std::move(rhs));
}

void LinearProgram::set_objective(std::vector<Rational> coeffs) {
  if (coeffs.size() != num_vars_) throw DomainError("LP objective has the wrong length");
  objective_ = std::move(coeffs);
}

Solution LinearProgram::maximize() const {
  // Free variables are split as x = x+ - x-; the x- columns are appended.
  std::vector<std::size_t> negative_column(num_vars_, 0);
  std::size_t cols = num_vars_;
  for (std::size_t v = 0; v < num_vars_; ++v) {
    if (free_[v]) negative_column[v] = cols++;
  }
  auto expand = [&](const std::vector<Rational>& row) {
    std::vector<Rational> out(cols);
    for (std::size_t v = 0; v < num_vars_; ++v) {
      out[v] = row[v];
      if (free_[v]) out[negative_column[v]] = -row[v];
    }
    return out;
  };
  std::vector<std::vector<Rational>> a;
  a.reserve(rows_.size());
  for (const auto& row : rows_) a.push_back(expand(row));
  Solution raw = Tableau(a, rhs_, expand(objective_)).solve();
  Solution out;
  out.status = raw.status;
  out.value = raw.value;
  out.x.assign(num_vars_, Rational(0));
  if (raw.status == Status::kOptimal) {
    for (std::size_t v = 0; v < num_vars_; ++v) {
      out.x[v] = raw.x[v];
      if (free_[v]) out.x[v] -= raw.x[negative_column[v]];
    }
  }
  return out;
}

}  // namespace unmeasure::lp
