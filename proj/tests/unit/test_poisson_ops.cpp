#include <doctest.h>

#include <cmath>
#include <random>

#include "../oracles.hpp"
#include "unmeasure/error.hpp"
#include "unmeasure/poisson_ops.hpp"

using namespace unmeasure;

namespace {

double mass_defect(const CountDistribution& d) { return std::abs(d.grid_mass() + d.tail_mass() - 1.0); }

CountDistribution random_count(std::mt19937_64& rng, int cutoff) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(cutoff + 1);
  double s = 0;
  for (double& x : p) s += x = u(rng);
  for (double& x : p) x /= s;
  return CountDistribution({cutoff}, p);
}

}  // namespace

TEST_CASE("Poisson pmf") {
  const auto zero = poisson_pmf(0.0);
  CHECK(zero.grid_size() == 1);
  CHECK(zero.probs()[0] == 1.0);
  const auto one = poisson_pmf(1.0);
  CHECK_NEAR(one.probs()[0], std::exp(-1.0), 1e-16);
  for (int i = 0; i <= one.cutoffs()[0]; ++i) {
    CHECK_NEAR(one.probs()[i], std::exp(static_cast<double>(oracle::log_poisson(1.0, i))), 1e-15);
  }
  const auto twenty = poisson_pmf(20.0);
  CHECK_NEAR(twenty.mean()[0], 20.0, 1e-9);
  CHECK(twenty.tail_mass() <= 1e-14);
  CHECK(mass_defect(twenty) <= 1e-12);
  CHECK_THROWS_AS(poisson_pmf(-1.0), DomainError);
  CHECK(poisson_pmf(3.0, 40).cutoffs()[0] == 40);
}

TEST_CASE("product Poisson") {
  const auto origin = product_poisson(Measure({0, 0}));
  CHECK(origin.grid_size() == 1);
  const auto d = product_poisson(Measure({1, 2}));
  std::mt19937_64 rng(5);
  for (int t = 0; t < 5; ++t) {
    const int i = static_cast<int>(rng() % 8), j = static_cast<int>(rng() % 10);
    const std::vector<int> idx{i, j};
    const double expect = std::exp(static_cast<double>(oracle::log_poisson(1, i) + oracle::log_poisson(2, j)));
    CHECK_NEAR(d.at(idx), expect, 1e-16);
  }
  CHECK_NEAR(d.entropy(), poisson_pmf(1).entropy() + poisson_pmf(2).entropy(), 1e-10);
  CHECK_THROWS_AS(product_poisson(Measure(std::vector<double>(8, 50.0))), DomainError);
}

TEST_CASE("thinning") {
  const auto p = poisson_pmf(3.0);
  CHECK(total_variation(thin(p, 1.0), p) == 0.0);
  const auto gone = thin(p, 0.0);
  CHECK(gone.at(std::vector<int>{0}) == doctest::Approx(1.0 - gone.tail_mass()));
  CHECK(total_variation(thin(p, 0.4), poisson_pmf(1.2)) <= 1e-10);
  CHECK(total_variation(thin(binomial_distribution(20, 0.3), 0.5), binomial_distribution(20, 0.15)) <= 1e-11);
  CHECK_THROWS_AS(thin(p, 1.2), DomainError);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int t = 0; t < 20; ++t) {
    const auto d = random_count(rng, 6);
    const double a = u(rng), b = u(rng);
    CHECK(total_variation(thin(thin(d, a), b), thin(d, a * b)) <= 1e-11);
    CHECK_NEAR(thin(d, a).mean()[0], a * d.mean()[0], 1e-10);
    const auto e = random_count(rng, 6);
    CHECK(kl_divergence(thin(d, a), thin(e, a)) <= kl_divergence(d, e) + ExtendedReal(1e-12));
  }
}

TEST_CASE("convolution powers") {
  const auto d = poisson_pmf(0.7);
  CHECK(total_variation(convolve_power(d, 1), d) == 0.0);
  const auto five = convolve_power(CountDistribution::point_mass({1}), 5);
  CHECK(five.at(std::vector<int>{5}) == 1.0);
  std::mt19937_64 rng(2);
  const auto r = random_count(rng, 2);
  for (int n : {2, 3, 7, 16}) {
    const auto c = convolve_power(r, n);
    CHECK_NEAR(c.mean()[0], n * r.mean()[0], 1e-9);
    CHECK(mass_defect(c) <= 1e-12);
  }
  // Poisson closure under convolution.
  CHECK(total_variation(convolve_power(poisson_pmf(0.5), 4), poisson_pmf(2.0)) <= 1e-12);
}

TEST_CASE("Bernoulli sums") {
  const Measure fair({0.5, 0.5});
  const std::vector<Measure> one{fair};
  CHECK(total_variation(bernoulli_sum(one), bernoulli_vector(fair)) == 0.0);
  const std::vector<Measure> two{fair, fair};
  const auto s = bernoulli_sum(two);
  CHECK_NEAR(s.at(std::vector<int>{0, 2}), 0.25, 1e-15);
  CHECK_NEAR(s.at(std::vector<int>{1, 1}), 0.5, 1e-15);
  CHECK_NEAR(s.at(std::vector<int>{2, 0}), 0.25, 1e-15);
  CHECK(s.at(std::vector<int>{0, 0}) == 0.0);
  const std::vector<Measure> mixed{Measure({0.2, 0.3}), Measure({0.6, 0.1}), Measure({0.25, 0.75})};
  const auto m = bernoulli_sum(mixed).mean();
  CHECK_NEAR(m[0], 1.05, 1e-12);
  CHECK_NEAR(m[1], 1.15, 1e-12);
  CHECK_THROWS_AS(bernoulli_vector(Measure({0.7, 0.7})), DomainError);
}

TEST_CASE("law of thin numbers") {
  const Measure lambda({0.4, 1.1});
  const std::vector<int> ns{1, 2, 4};
  const auto fixed = thin_law_experiment(product_poisson(lambda), lambda, ns);
  for (const auto& row : fixed.rows) CHECK(row.divergence.value() <= 1e-10);

  const Measure half({0.5, 0.5});
  const std::vector<int> powers{1, 2, 4, 8, 16, 32, 64, 128, 256};
  const auto t = thin_law_experiment(bernoulli_vector(half), half, powers);
  CHECK(t.mean_preserved);
  for (std::size_t k = 1; k < t.rows.size(); ++k) CHECK(t.rows[k].divergence < t.rows[k - 1].divergence);
  CHECK(t.rows.back().divergence.value() < t.rows.front().divergence.value() / 10);
  CHECK(std::abs(t.rows.back().entropy - t.poisson_entropy) < std::abs(t.rows.front().entropy - t.poisson_entropy));
  CHECK_THROWS_AS(thin_law_experiment(bernoulli_vector(half), Measure({0.4, 0.5}), powers), DomainError);
}

TEST_CASE("maximum entropy of Bernoulli sums") {
  const Measure lambda({0.5});
  std::vector<std::vector<Measure>> family{{Measure({0.5})},
                                           {Measure({0.25}), Measure({0.25})},
                                           std::vector<Measure>(5, Measure({0.1}))};
  const auto r = maxent_check(lambda, family);
  CHECK(r.all_satisfied);
  REQUIRE(r.entries.size() == 3);
  CHECK(r.entries[0].margin > r.entries[1].margin);
  CHECK(r.entries[1].margin > r.entries[2].margin);
  CHECK(r.entries[2].margin > 0);
  CHECK(maxent_check(lambda, std::span<const std::vector<Measure>>{}).all_satisfied);
  std::vector<std::vector<Measure>> wrong{{Measure({0.3})}};
  CHECK_THROWS_AS(maxent_check(lambda, wrong), DomainError);
}

TEST_CASE("thinning preserves Bernoulli-vector divergence") {
  const std::vector<int> ns{1, 2, 3, 4};
  const auto same = thin_divergence_identity(Measure({0.3, 0.7}), Measure({0.3, 0.7}), ns);
  CHECK(same.holds);
  CHECK(same.base_divergence.value() == 0.0);
  const auto r = thin_divergence_identity(Measure({0.3, 0.7}), Measure({0.5, 0.5}), ns);
  CHECK(r.holds);
  const double expect = 0.3 * std::log(0.6) + 0.7 * std::log(1.4);
  CHECK_NEAR(r.base_divergence.value(), expect, 1e-14);
  for (const auto& row : r.rows) CHECK_NEAR(row.thinned_divergence.value(), expect, 1e-8);
  const auto point = thin_divergence_identity(Measure({1, 0}), Measure({0.5, 0.5}), ns);
  CHECK_NEAR(point.base_divergence.value(), std::log(2.0), 1e-14);
  CHECK_NEAR(point.extended_divergence.value(), std::log(2.0), 1e-14);
  for (const auto& row : point.rows) CHECK_NEAR(row.thinned_divergence.value(), std::log(2.0), 1e-8);
  CHECK_THROWS_AS(thin_divergence_identity(Measure({0.3, 0.3}), Measure({0.5, 0.5}), ns), DomainError);
}

TEST_CASE("count distribution json") {
  const auto d = binomial_distribution(4, 0.3);
  nlohmann::json j = d;
  CHECK(j.at("dims") == 1);
  const auto back = count_distribution_from_json(j);
  CHECK(total_variation(back, d) == 0.0);
}

TEST_CASE("rounding residue of a probability vector is not origin mass") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  const std::vector<int> ns{1, 2};
  for (int t = 0; t < 50; ++t) {
    std::vector<double> p(2 + t % 3), q(p.size());
    double sp = 0, sq = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      sp += p[i] = u(rng);
      sq += q[i] = u(rng);
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] /= sp;
      q[i] /= sq;
    }
    CHECK(bernoulli_vector(Measure(p)).probs()[0] == 0.0);
    CHECK(thin_divergence_identity(Measure(p), Measure(q), ns).holds);
  }
}
