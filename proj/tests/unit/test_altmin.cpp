#include <doctest.h>

#include <cmath>
#include <random>

#include "../benchmarks.hpp"
#include "../oracles.hpp"
#include "unmeasure/altmin.hpp"
#include "unmeasure/divergence.hpp"
#include "unmeasure/error.hpp"
#include "unmeasure/projections.hpp"

using namespace unmeasure;

namespace {

double max_abs_diff(const Measure& a, const Measure& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double integral(std::span<const double> f, const Measure& p) {
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) s += f[i] * p[i];
  return s;
}

const Measure kDie(std::vector<double>(6, 1.0 / 6));
const std::vector<double> kFaces{1, 2, 3, 4, 5, 6};

}  // namespace

TEST_CASE("unnormalized projection onto one constraint") {
  const auto same = project_tilde(kDie, kFaces, 3.5);
  CHECK(max_abs_diff(same, kDie) == 0.0);

  const Measure heavy({0.5, 1.0, 1.5});
  const std::vector<double> ones(3, 1.0);
  const auto rescaled = project_tilde(heavy, ones, 1.0);
  for (std::size_t i = 0; i < 3; ++i) CHECK_NEAR(rescaled[i], heavy[i] / 3.0, 1e-15);

  const auto tilted = project_tilde(kDie, kFaces, 4.5);
  CHECK_NEAR(integral(kFaces, tilted), 4.5, 1e-10);
  // One rescaling after the tilt moves the mean off 4.5; alternating the two
  // steps to convergence reaches the normalized tilt.
  const std::vector<double> ones6(6, 1.0);
  const auto expected = oracle::normalized_tilt(std::vector<double>(6, 1.0 / 6), kFaces, 4.5);
  CHECK(integral(kFaces, project_tilde(tilted, ones6, 1.0)) < 4.4);
  Measure p = kDie;
  for (int k = 0; k < 400; ++k) p = project_tilde(project_tilde(p, kFaces, 4.5), ones6, 1.0);
  for (std::size_t i = 0; i < 6; ++i) CHECK_NEAR(p[i], expected[i], 1e-6);

  const auto normalized = project_normalized(kDie, kFaces, 4.5);
  for (std::size_t i = 0; i < 6; ++i) CHECK_NEAR(normalized[i], expected[i], 1e-12);

  CHECK_THROWS_AS(project_tilde(kDie, kFaces, -2.0), DomainError);
  CHECK_THROWS_AS(project_normalized(kDie, kFaces, 6.0), DomainError);
}

TEST_CASE("root function is decreasing in beta") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 1.0), f(-2.0, 2.0);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> q(5), g(5);
    for (int i = 0; i < 5; ++i) {
      q[i] = u(rng);
      g[i] = f(rng);
    }
    double prev = std::numeric_limits<double>::infinity();
    for (double beta = -3; beta <= 3; beta += 0.25) {
      double s = 0;
      for (int i = 0; i < 5; ++i) s += g[i] * q[i] * std::exp(-beta * g[i]);
      CHECK(s < prev);
      prev = s;
    }
    // Each output satisfies its own constraint.
    const double mu = 0.3 * integral(g, Measure(q));
    CHECK_NEAR(integral(g, project_tilde(Measure(q), g, mu)), mu, 1e-10);
  }
}

TEST_CASE("cyclic projections on the die") {
  const std::vector<MomentConstraint> c{{kFaces, 4.5}};
  const auto normalized = altmin_cyclic(kDie, c, false);
  CHECK(normalized.converged);
  CHECK(normalized.cycles_to_tol <= 20);
  const auto unnormalized = altmin_cyclic(kDie, c, true);
  CHECK(unnormalized.converged);
  CHECK(unnormalized.cycles_to_tol < 400);
  const auto expected = oracle::normalized_tilt(std::vector<double>(6, 1.0 / 6), kFaces, 4.5);
  for (const auto* t : {&normalized, &unnormalized}) {
    for (std::size_t i = 0; i < 6; ++i) CHECK_NEAR(t->fixed_point()[i], expected[i], 1e-9);
    CHECK_NEAR(t->fixed_point().total_mass(), 1.0, 1e-9);
  }
  // Raw divergence is monotone along the unnormalized cycle.
  for (std::size_t k = 1; k < unnormalized.cycles.size(); ++k) {
    CHECK(unnormalized.cycles[k].divergence >= unnormalized.cycles[k - 1].divergence - 1e-12);
  }

  const std::vector<MomentConstraint> satisfied{{kFaces, 3.5}};
  for (bool norm : {false, true}) {
    const auto t = altmin_cyclic(kDie, satisfied, norm);
    CHECK(t.cycles_to_tol == 1);
    CHECK(max_abs_diff(t.fixed_point(), kDie) <= 1e-15);
  }

  const auto capped = altmin_cyclic(kDie, c, true, 1e-10, 5);
  CHECK_FALSE(capped.converged);
  CHECK(capped.cycles_to_tol == -1);
  CHECK(capped.cycles.size() == 5);
}

TEST_CASE("unreachable constraint sets are rejected") {
  const std::vector<MomentConstraint> outside{{kFaces, 7.0}};
  CHECK_THROWS_AS(altmin_cyclic(kDie, outside, true), InfeasibleError);
  const std::vector<MomentConstraint> corner{{kFaces, 6.0}};
  CHECK_THROWS_AS(altmin_cyclic(kDie, corner, false), DomainError);
  const std::vector<MomentConstraint> clash{{kFaces, 3.0}, {kFaces, 4.0}};
  CHECK_THROWS_AS(altmin_accelerated(kDie, clash), InfeasibleError);
}

TEST_CASE("Gram-Schmidt in L2(Q)") {
  const Measure q({1.0 / 3, 1.0 / 3, 1.0 / 3});
  const std::vector<std::vector<double>> fs{{1, 1, 1}, {0, 1, 2}};
  const std::vector<double> targets{1.0, 1.2};
  const auto o = orthogonalize(fs, targets, q);
  const double s = std::sqrt(2.0 / 3.0);
  for (int i = 0; i < 3; ++i) {
    CHECK_NEAR(o.functions[0][i], 1.0, 1e-15);
    CHECK_NEAR(o.functions[1][i], (i - 1) / s, 1e-14);
  }
  CHECK_NEAR(o.transform[1][0], -1 / s, 1e-14);
  CHECK_NEAR(o.transform[1][1], 1 / s, 1e-14);
  CHECK(o.transform[0][1] == 0.0);
  CHECK_NEAR(o.targets[1], (1.2 - 1.0) / s, 1e-14);

  const auto same = orthogonalize(o.functions, o.targets, q);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) CHECK_NEAR(same.transform[a][b], a == b ? 1.0 : 0.0, 1e-12);
  }
  CHECK_NEAR(same.gram_condition, 1.0, 1e-12);

  const std::vector<std::vector<double>> dependent{{1, 1, 1}, {0, 1, 2}, {2, 3, 4}};
  CHECK_THROWS_AS(orthogonalize(dependent, std::vector<double>{1, 1, 3}, q), DomainError);
}

TEST_CASE("orthogonalized families are orthonormal and keep the feasible set") {
  for (const auto& c : bench::altmin_suite()) {
    std::vector<std::vector<double>> fs{std::vector<double>(c.q.size(), 1.0)};
    std::vector<double> ts{1.0};
    for (const auto& k : c.constraints) {
      fs.push_back(k.f);
      ts.push_back(k.target);
    }
    const auto o = orthogonalize(fs, ts, c.q);
    for (std::size_t a = 0; a < fs.size(); ++a) {
      for (std::size_t b = 0; b < fs.size(); ++b) {
        double g = 0;
        for (std::size_t i = 0; i < c.q.size(); ++i) g += o.functions[a][i] * o.functions[b][i] * c.q[i];
        CHECK_NEAR(g, a == b ? 1.0 : 0.0, 1e-10);
      }
    }
    // A feasible probe satisfies both families; perturbed probes fail both.
    const auto star = project(c.q, bench::as_probability_set(c), kl_spec(), {.tol = 1e-13}).q_star;
    std::mt19937_64 rng(c.q.size());
    std::normal_distribution<double> n(0.0, 0.05);
    for (int t = 0; t < 20; ++t) {
      std::vector<double> p(star.weights().begin(), star.weights().end());
      if (t > 0) {
        for (double& v : p) v = std::max(0.0, v + n(rng));
      }
      const Measure probe(p);
      double orig = 0, trans = 0;
      for (std::size_t a = 0; a < fs.size(); ++a) {
        orig = std::max(orig, std::abs(integral(fs[a], probe) - ts[a]));
        trans = std::max(trans, std::abs(integral(o.functions[a], probe) - o.targets[a]));
      }
      if (t == 0) {
        CHECK(orig <= 1e-9);
        CHECK(trans <= 1e-8);
      } else {
        CHECK(orig > 1e-6);
        CHECK(trans > 1e-8);
      }
    }
  }
}

TEST_CASE("all variants reach the direct projection") {
  for (const auto& c : bench::altmin_suite()) {
    CAPTURE(c.name);
    const auto direct = project(c.q, bench::as_probability_set(c), kl_spec(), {.tol = 1e-12});
    const auto a = altmin_cyclic(c.q, c.constraints, false);
    const auto b = altmin_cyclic(c.q, c.constraints, true);
    const auto o = altmin_accelerated(c.q, c.constraints);
    for (const auto* t : {&a, &b, &o}) {
      CHECK(t->converged);
      CHECK(max_abs_diff(t->fixed_point(), direct.q_star) <= 1e-9);
      CHECK_NEAR(t->fixed_point().total_mass(), 1.0, 1e-9);
      CHECK(t->cycles.back().max_residual <= 1e-10);
      for (std::size_t k = 1; k < t->cycles.size(); ++k) {
        CHECK(t->cycles[k].lower_bound >= t->cycles[k - 1].lower_bound - 1e-12);
      }
      CHECK_NEAR(t->cycles.back().lower_bound, direct.value.value(), 1e-8);
    }
    CHECK(o.cycles_to_tol <= b.cycles_to_tol);
  }
}

TEST_CASE("orthonormal inputs give the plain trace") {
  const Measure q({1.0 / 3, 1.0 / 3, 1.0 / 3});
  const double s = std::sqrt(2.0 / 3.0);
  const std::vector<double> h{-1 / s, 0, 1 / s};
  const std::vector<MomentConstraint> c{{h, 0.4}};
  const auto plain = altmin_cyclic(q, c, true);
  const auto fast = altmin_accelerated(q, c);
  REQUIRE(plain.cycles.size() == fast.cycles.size());
  for (std::size_t k = 0; k < plain.cycles.size(); ++k) {
    CHECK(max_abs_diff(plain.cycles[k].measure, fast.cycles[k].measure) <= 1e-14);
  }
}

TEST_CASE("trace csv") {
  const std::vector<MomentConstraint> c{{kFaces, 3.5}};
  const auto csv = trace_to_csv(altmin_cyclic(kDie, c, true));
  CHECK(csv.rfind("cycle,divergence,max_residual,total_mass\n1,", 0) == 0);
  CHECK(to_string(AltMinVariant::kOrthogonalized) == "orthogonalized");
}
