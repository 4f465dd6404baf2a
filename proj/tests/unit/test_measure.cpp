#include <doctest.h>

#include <cmath>
#include <random>

#include "../oracles.hpp"
#include "unmeasure/error.hpp"
#include "unmeasure/measure.hpp"

using unmeasure::AtomSet;
using unmeasure::CodelengthFn;
using unmeasure::kraft_check;
using unmeasure::DomainError;
using unmeasure::Measure;

namespace {

std::vector<double> w(const Measure& m) { return {m.weights().begin(), m.weights().end()}; }

}  // namespace

TEST_CASE("measure construction validates weights and labels") {
  CHECK_THROWS_AS(Measure({}), DomainError);
  CHECK_THROWS_AS(Measure({1.0, -0.5}), DomainError);
  CHECK_THROWS_AS(Measure({1.0, NAN}), DomainError);
  CHECK_THROWS_AS(Measure({1.0, INFINITY}), DomainError);
  CHECK_THROWS_AS(Measure({1e308, 1e308}), DomainError);
  CHECK_THROWS_AS(Measure({1.0, 2.0}, {"a"}), DomainError);
  CHECK_THROWS_AS(Measure({1.0, 2.0}, {"a", "a"}), DomainError);
  const Measure m({0.0, 2.5}, {"x", "y"});
  CHECK(m.size() == 2);
  CHECK(m.has_labels());
  CHECK(m.total_mass() == 2.5);
}

TEST_CASE("add") {
  CHECK(w(add(Measure({1, 2}), Measure({3, 4}))) == std::vector<double>{4, 6});
  CHECK(w(add(Measure({0, 0}), Measure({1, 1}))) == std::vector<double>{1, 1});
  CHECK(w(add(Measure({0.5, 0.5}), Measure({0.5, 0.5}))) == std::vector<double>{1, 1});
  CHECK_THROWS_AS(add(Measure({1}), Measure({1, 2})), DomainError);
  CHECK_THROWS_AS(add(Measure({1, 2}, {"a", "b"}), Measure({1, 2}, {"a", "c"})), DomainError);
}

TEST_CASE("scale keeps the deletion interpretation") {
  const Measure p({2, 4});
  CHECK(w(scale(p, 0.5)) == std::vector<double>{1, 2});
  CHECK(scale(p, 1.0) == p);
  CHECK(scale(p, 0.0).total_mass() == 0.0);
  CHECK_THROWS_AS(scale(p, 1.5), DomainError);
  CHECK_THROWS_AS(scale(p, -0.1), DomainError);
  CHECK(w(multiply(p, 3.0)) == std::vector<double>{6, 12});
}

TEST_CASE("condition") {
  const Measure mu({2, 6});
  const auto all = all_atoms(mu);
  CHECK(w(condition(mu, all)) == std::vector<double>{0.25, 0.75});
  const AtomSet first_two{0, 1};
  CHECK(w(condition(Measure({1, 1, 2}), first_two)) == std::vector<double>{0.5, 0.5, 0});
  const AtomSet single{0};
  CHECK(w(condition(Measure({5}), single)) == std::vector<double>{1});
  const AtomSet zero{1};
  CHECK_THROWS_AS(condition(Measure({1, 0}), zero), DomainError);
  const AtomSet bad{3};
  CHECK_THROWS_AS(condition(Measure({1, 0}), bad), DomainError);
}

TEST_CASE("codelengths and Kraft") {
  const auto l1 = codelengths_from(Measure({1, 1}), AtomSet{0, 1});
  CHECK_NEAR(l1.lengths[0], std::log(2.0), 1e-15);
  CHECK_NEAR(l1.lengths[1], std::log(2.0), 1e-15);
  CHECK_NEAR(kraft_check(l1).sum, 1.0, 1e-12);
  const auto l2 = codelengths_from(Measure({1, 3}), AtomSet{0, 1});
  CHECK_NEAR(l2.lengths[0], std::log(4.0), 1e-15);
  CHECK_NEAR(l2.lengths[1], std::log(4.0 / 3.0), 1e-15);
  const auto l3 = codelengths_from(Measure({1, 1, 2}), AtomSet{0, 1});
  CHECK_NEAR(l3.lengths[0], std::log(2.0), 1e-15);
  CHECK(std::isinf(l3.lengths[2]));
  CHECK_NEAR(kraft_check(l3).sum, 1.0, 1e-12);
  CHECK_THROWS_AS(codelengths_from(Measure({1, 0}), AtomSet{0, 1}), DomainError);
  CHECK(std::isinf(codelengths_from(Measure({1, 0}), AtomSet{0, 1}, true).lengths[1]));

  CHECK(kraft_check(CodelengthFn{{std::log(2.0), std::log(2.0)}}).satisfied);
  const auto over = kraft_check(CodelengthFn{{0.0, 0.0}});
  CHECK(over.sum == 2.0);
  CHECK_FALSE(over.satisfied);
  CHECK(kraft_check(CodelengthFn{std::vector<double>(4, std::log(4.0))}).satisfied);
}

TEST_CASE("properties on random measures") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(1 + trial % 7);
    for (double& x : v) x = u(rng);
    v[0] += 0.1;
    const Measure mu(v);
    const AtomSet atoms = all_atoms(mu);
    const double c = 0.01 + u(rng);
    const Measure a = condition(mu, atoms);
    const Measure b = condition(multiply(mu, c), atoms);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK_NEAR(a[i], b[i], 1e-12);
    CHECK_NEAR(kraft_check(codelengths_from(a, atoms)).sum, 1.0, 1e-12);
    const double alpha = u(rng) / 5.0;
    CHECK_NEAR(scale(mu, alpha).total_mass(), alpha * mu.total_mass(), 1e-14 * (1 + mu.total_mass()));
    CHECK_NEAR(add(mu, a).total_mass(), mu.total_mass() + 1.0, 1e-13);
  }
}

TEST_CASE("json round trip") {
  const Measure m({0.25, 1.5}, {"left", "right"});
  nlohmann::json j = m;
  CHECK(j.at("weights").size() == 2);
  CHECK(unmeasure::measure_from_json(j) == m);
  CHECK(unmeasure::measure_from_json(nlohmann::json::parse(R"({"weights":[2]})")).total_mass() == 2.0);
  CHECK_THROWS(unmeasure::measure_from_json(nlohmann::json::parse(R"({"weights":[-1]})")));
}
