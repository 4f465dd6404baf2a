#include "unmeasure/dutchbook.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "unmeasure/error.hpp"
#include "unmeasure/lp.hpp"

namespace unmeasure {

using lp::Rational;

PayoffSystem::PayoffSystem(std::vector<std::vector<double>> payoffs)
    : payoffs_(std::move(payoffs)) {
  if (payoffs_.empty() || payoffs_.front().empty()) {
    throw DomainError("payoff system needs at least one function and one sample point");
  }
  for (const auto& row : payoffs_) {
    if (row.size() != payoffs_.front().size()) throw DomainError("payoff rows differ in length");
    for (double v : row) {
      if (!std::isfinite(v)) throw DomainError("payoffs must be finite");
    }
  }
}

PayoffSystem PayoffSystem::from_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw DomainError("payoff CSV: cannot parse '" + cell + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  return PayoffSystem(std::move(rows));
}

DichotomyCertificate decide(const PayoffSystem& system, double tol) {
  const std::size_t n = system.num_functions();
  const std::size_t points = system.num_points();

  // Variables: s'_0..s'_{n-1} (s = 1 + s'), then t (free).
  lp::LinearProgram arbitrage(n + 1);
  arbitrage.set_free(n);
  for (std::size_t w = 0; w < points; ++w) {
    std::vector<Rational> row(n + 1);
    Rational rhs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      row[i] = lp::to_rational(system(i, w));
      rhs -= row[i];
    }
    row[n] = 1;
    arbitrage.add_le(std::move(row), std::move(rhs));
  }
  std::vector<Rational> cap(n + 1);
  cap[n] = 1;
  arbitrage.add_le(cap, Rational(1));
  arbitrage.set_objective(cap);
  const lp::Solution first = arbitrage.maximize();
  if (first.status != lp::Status::kOptimal) throw DomainError("arbitrage LP did not solve");

  DichotomyCertificate cert;
  if (lp::to_double(first.value) > tol) {
    cert.branch = DichotomyBranch::kArbitrage;
    std::vector<Rational> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = 1 + first.x[i];
    Rational margin;
    for (std::size_t w = 0; w < points; ++w) {
      Rational combo = 0;
      for (std::size_t i = 0; i < n; ++i) combo += s[i] * lp::to_rational(system(i, w));
      if (w == 0 || -combo < margin) margin = -combo;
    }
    for (const auto& v : s) cert.weights.push_back(lp::to_double(v));
    cert.verification_margin = lp::to_double(margin);
    return cert;
  }

  // Variables: mu_0..mu_{|Omega|-1} >= 0, then r (free).
  lp::LinearProgram measure(points + 1);
  measure.set_free(points);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Rational> row(points + 1);
    for (std::size_t w = 0; w < points; ++w) row[w] = -lp::to_rational(system(i, w));
    row[points] = 1;
    measure.add_le(std::move(row), Rational(0));
  }
  std::vector<Rational> mass(points + 1, Rational(1));
  mass[points] = 0;
  measure.add_eq(mass, Rational(1));
  std::vector<Rational> objective(points + 1);
  objective[points] = 1;
  measure.set_objective(std::move(objective));
  const lp::Solution second = measure.maximize();
  if (second.status != lp::Status::kOptimal) {
    throw DomainError("measure LP did not solve although no arbitrage exists");
  }
  cert.branch = DichotomyBranch::kMeasure;
  for (std::size_t w = 0; w < points; ++w) cert.measure.push_back(lp::to_double(second.x[w]));
  cert.verification_margin = lp::to_double(second.value);
  cert.boundary = cert.verification_margin <= tol;
  return cert;
}

bool verify(const PayoffSystem& system, const DichotomyCertificate& certificate) {
  const std::size_t n = system.num_functions();
  const std::size_t points = system.num_points();
  if (certificate.branch == DichotomyBranch::kArbitrage) {
    if (certificate.weights.size() != n) return false;
    for (double s : certificate.weights) {
      if (!(s > 0.0) || !std::isfinite(s)) return false;
    }
    for (std::size_t w = 0; w < points; ++w) {
      long double combo = 0.0L;
      for (std::size_t i = 0; i < n; ++i) combo += static_cast<long double>(certificate.weights[i]) * system(i, w);
      if (!(combo < 0.0L)) return false;
    }
    return true;
  }
  if (certificate.measure.size() != points) return false;
  long double mass = 0.0L;
  for (double m : certificate.measure) {
    if (!(m >= 0.0) || !std::isfinite(m)) return false;
    mass += m;
  }
  if (!(mass > 0.0L)) return false;
  for (std::size_t i = 0; i < n; ++i) {
    long double integral = 0.0L;
    for (std::size_t w = 0; w < points; ++w) integral += static_cast<long double>(system(i, w)) * certificate.measure[w];
    if (integral < -1e-9L) return false;
  }
  return true;
}

std::string to_string(DichotomyBranch branch) {
  return branch == DichotomyBranch::kArbitrage ? "ARBITRAGE" : "MEASURE";
}

void to_json(nlohmann::json& j, const DichotomyCertificate& c) {
  j = nlohmann::json{{"branch", to_string(c.branch)},
                     {"verification_margin", c.verification_margin},
                     {"boundary", c.boundary}};
  if (c.branch == DichotomyBranch::kArbitrage) {
    j["weights"] = c.weights;
  } else {
    j["measure"] = c.measure;
  }
}

}  // namespace unmeasure
