#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "gremlab/gibbs_solver.hpp"
#include "gremlab/parisi.hpp"
#include "helpers.hpp"

using namespace gremlab;
using namespace gremlab::testutil;

TEST_CASE("the unconstrained tilt has the exponential-family closed form") {
  ModelSpec spec = two_point_model(1.0);
  auto [nu, value] = unconstrained_tilt(spec);
  double e = std::exp(1.0);
  CHECK(nu.weights[0] == doctest::Approx(1.0 / (1.0 + e)).epsilon(1e-14));
  CHECK(nu.weights[1] == doctest::Approx(e / (1.0 + e)).epsilon(1e-14));
  CHECK(value == doctest::Approx(std::log((1.0 + e) / 2.0)).epsilon(1e-14));
}

TEST_CASE("adding a constant to phi shifts the tilt value and nothing else") {
  std::mt19937_64 rng(301);
  ModelSpec spec = random_model(rng, 2, 2, 1.0);
  ModelSpec shifted = spec;
  shifted.phi_raw_table =
      std::make_shared<const Eigen::ArrayXd>(*spec.phi_raw_table + 2.5);
  auto [nu_a, val_a] = unconstrained_tilt(spec);
  auto [nu_b, val_b] = unconstrained_tilt(shifted);
  CHECK(val_b - val_a == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(0.5 * (nu_a.weights - nu_b.weights).abs().sum() <= 1e-13);
}

TEST_CASE("the objective evaluates the tilt and the base law consistently") {
  std::mt19937_64 rng(311);
  ModelSpec spec = random_model(rng, 2, 2, 1.0);
  Eigen::ArrayXd phi = phi_table(spec);
  JointMeasure mu = product_measure(spec);
  CHECK(gibbs_objective(mu, spec) ==
        doctest::Approx((phi * mu.weights).sum()).epsilon(1e-13));
  auto [tilt, value] = unconstrained_tilt(spec);
  if (check_constraints(tilt, spec).feasible) {
    CHECK(gibbs_objective(tilt, spec) == doctest::Approx(value).epsilon(1e-12));
  }

  // infeasible measures collapse to the minus-infinity sentinel
  JointMeasure delta = mu;
  delta.weights.setZero();
  delta.weights[0] = 1.0;
  CHECK(std::isinf(gibbs_objective(delta, spec)));
  CHECK(gibbs_objective(delta, spec) < 0.0);
}

TEST_CASE("the objective is concave along feasible segments") {
  std::mt19937_64 rng(321);
  ModelSpec spec = random_model(rng, 2, 2, 0.5);
  JointMeasure mu = product_measure(spec);
  auto [tilt, value] = unconstrained_tilt(spec);
  REQUIRE(check_constraints(tilt, spec).feasible);
  JointMeasure mid = mu;
  mid.weights = 0.5 * (mu.weights + tilt.weights);
  double f_mid = gibbs_objective(mid, spec);
  double f_avg = 0.5 * (gibbs_objective(mu, spec) + gibbs_objective(tilt, spec));
  CHECK(f_mid >= f_avg - 1e-12);
}

TEST_CASE("a weak interaction takes the feasible-tilt fast path") {
  std::mt19937_64 rng(331);
  ModelSpec spec = random_model(rng, 2, 2, 0.2);
  auto [tilt, tilt_value] = unconstrained_tilt(spec);
  REQUIRE(check_constraints(tilt, spec).feasible);
  GibbsSolveResult result = solve_gibbs(spec);
  CHECK(result.converged);
  CHECK(result.value == doctest::Approx(tilt_value).epsilon(1e-12));
  CHECK(0.5 * (result.nu_star.weights - tilt.weights).abs().sum() <= 1e-12);
  CHECK(result.active_set.empty());
}

TEST_CASE("the single-species constrained maximum matches a dense scan") {
  // a strong field on a rare symbol: the unconstrained tilt concentrates
  // beyond the entropy cap, so the cap must bind
  Eigen::ArrayXd table(2);
  table << 0.0, 4.0;
  ModelSpec spec = table_model(1, 2, {law2(0.9, 0.1)}, std::move(table));
  Eigen::ArrayXd phi = phi_table(spec);
  auto [tilt, tilt_value] = unconstrained_tilt(spec);
  REQUIRE(!check_constraints(tilt, spec).feasible);

  double cap = std::log(2.0);
  auto entropy = [&](double p) {
    double h = 0.0;
    if (p > 0.0) h += p * std::log(p / spec.mu[0][1]);
    if (p < 1.0) h += (1.0 - p) * std::log((1.0 - p) / spec.mu[0][0]);
    return h;
  };
  double best = -1e300;
  for (double t = 0.0; t <= 1.0 + 1e-12; t += 1e-6) {
    double p = std::min(t, 1.0);
    if (entropy(p) > cap) continue;
    best = std::max(best, p * phi[1] - entropy(p));
  }

  // the objective is concave in p and its unconstrained peak is infeasible,
  // so the true maximum sits where the cap binds; bisect for that point
  double lo = spec.mu[0][1];  // entropy 0 here
  double hi = 1.0;            // entropy log(1/0.1) > cap here
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    ((entropy(mid) <= cap) ? lo : hi) = mid;
  }
  double boundary_value = lo * phi[1] - entropy(lo);
  REQUIRE(boundary_value >= best);

  GibbsSolveResult result = solve_gibbs(spec);
  CHECK(result.converged);
  CHECK(result.value == doctest::Approx(best).epsilon(1e-5));
  CHECK(result.value == doctest::Approx(boundary_value).epsilon(1e-9));
  REQUIRE(result.active_set.size() == 1);
  CHECK(result.active_set[0].mask == 1u);
  CHECK(result.iterations > 0);
  ConstraintReport report = check_constraints(result.nu_star, spec);
  CHECK(report.feasible);
}

TEST_CASE("solves are deterministic for a fixed seed") {
  std::mt19937_64 rng(341);
  ModelSpec spec = random_model(rng, 2, 2, 4.0);
  GibbsSolveResult a = solve_gibbs(spec);
  GibbsSolveResult b = solve_gibbs(spec);
  CHECK(a.value == b.value);
  CHECK((a.nu_star.weights == b.nu_star.weights).all());
}

TEST_CASE("the constrained maximum complements the chain minimum") {
  // moderate two-species instance with an infeasible tilt
  std::mt19937_64 rng(351);
  ModelSpec spec = random_model(rng, 2, 2, 3.0);
  auto [tilt, tilt_value] = unconstrained_tilt(spec);
  int guard = 0;
  while (check_constraints(tilt, spec).feasible && guard++ < 50) {
    spec = random_model(rng, 2, 2, 3.0);
    std::tie(tilt, tilt_value) = unconstrained_tilt(spec);
  }
  REQUIRE(guard < 50);

  GibbsSolveResult gibbs = solve_gibbs(spec);
  GlobalParisiResult parisi = global_parisi_min(spec);
  CHECK(gibbs.converged);
  CHECK(parisi.best.value ==
        doctest::Approx(gibbs.value + std::log(2.0)).epsilon(1e-6));
  CHECK(!gibbs.active_set.empty());
  ConstraintReport report = check_constraints(gibbs.nu_star, spec);
  CHECK(report.feasible);
}
