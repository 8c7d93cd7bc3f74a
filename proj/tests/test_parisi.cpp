#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "gremlab/parisi.hpp"
#include "helpers.hpp"

using namespace gremlab;
using namespace gremlab::testutil;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// Closed form for the single-species two-point instance with phi = (0, b):
// value(m) = log2/m + (1/m) log((1 + e^(m b))/2).
double two_point_value(double b, double m) {
  return std::log(2.0) / m + std::log((1.0 + std::exp(m * b)) / 2.0) / m;
}

// Minimax characterization of the nondecreasing least-squares fit:
// y_i = max over a <= i of min over b >= i of mean(x[a..b]).
Eigen::VectorXd isotonic_minimax(const Eigen::VectorXd& x) {
  Eigen::Index n = x.size();
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = -1e300;
    for (Eigen::Index a = 0; a <= i; ++a) {
      double worst = 1e300;
      for (Eigen::Index b = i; b < n; ++b) {
        double mean = x.segment(a, b - a + 1).mean();
        worst = std::min(worst, mean);
      }
      best = std::max(best, worst);
    }
    y[i] = best;
  }
  return y;
}

}  // namespace

TEST_CASE("the recursion matches the two-point closed form") {
  ModelSpec spec = two_point_model(1.0);
  Chain chain = make_chain({1});
  for (double m : {0.1, 0.25, 0.5, 0.8, 1.0}) {
    Eigen::VectorXd mv = vec({m});
    CHECK(parisi_value(spec, chain, mv) ==
          doctest::Approx(two_point_value(1.0, m)).epsilon(1e-13));
    PhiStack stack = phi_stack(spec, chain, mv);
    CHECK(stack.root() ==
          doctest::Approx(two_point_value(1.0, m) - std::log(2.0) / m).epsilon(1e-13));
  }
  CHECK(parisi_value(spec, chain, vec({1.0})) ==
        doctest::Approx(std::log(2.0) + std::log((1.0 + std::exp(1.0)) / 2.0))
            .epsilon(1e-14));
}

TEST_CASE("at m = 1 every chain reduces to the annealed value") {
  std::mt19937_64 rng(101);
  for (int n : {1, 2, 3}) {
    ModelSpec spec = random_model(rng, n, 2, 1.5);
    Eigen::ArrayXd phi = phi_table(spec);
    Eigen::ArrayXd mu = product_measure(spec).weights;
    double annealed = std::log(2.0) + std::log((phi.exp() * mu).sum());
    for (const Chain& chain : enumerate_chains(n)) {
      CHECK(parisi_value(spec, chain, Eigen::VectorXd::Ones(n)) ==
            doctest::Approx(annealed).epsilon(1e-12));
    }
  }
}

TEST_CASE("the stack re-indexes phi into chain coordinate order") {
  std::mt19937_64 rng(111);
  ModelSpec spec = random_model(rng, 2, 2, 1.0);
  Eigen::ArrayXd phi = phi_table(spec);
  Chain chain = make_chain({2, 1});  // chain coords: {2}, {1}, {12}
  PhiStack stack = phi_stack(spec, chain, vec({0.5, 0.5}));
  REQUIRE(stack.tables.size() == 3);
  for (int s1 = 0; s1 < 2; ++s1) {
    for (int s2 = 0; s2 < 2; ++s2) {
      for (int s12 = 0; s12 < 2; ++s12) {
        CHECK(stack.tables[2][s2 + 2 * s1 + 4 * s12] ==
              phi[s1 + 2 * s2 + 4 * s12]);
      }
    }
  }
  // level block laws follow the same order: T_1 = {2}, T_2 = {1, 12}
  CHECK((stack.level_weights[1] == spec.mu[1]).all());
  for (int s1 = 0; s1 < 2; ++s1) {
    for (int s12 = 0; s12 < 2; ++s12) {
      CHECK(stack.level_weights[2][s1 + 2 * s12] ==
            doctest::Approx(spec.mu[0][s1] * spec.mu[2][s12]).epsilon(1e-15));
    }
  }
}

TEST_CASE("analytic gradients match central differences") {
  std::mt19937_64 rng(121);
  for (int trial = 0; trial < 4; ++trial) {
    int n = 1 + trial % 3;
    ModelSpec spec = random_model(rng, n, 2, 2.0);
    std::vector<Chain> chains = enumerate_chains(n);
    const Chain& chain = chains[trial % chains.size()];
    Eigen::VectorXd m(n);
    std::uniform_real_distribution<double> unit(0.3, 0.9);
    for (int k = 0; k < n; ++k) m[k] = unit(rng);
    std::sort(m.data(), m.data() + n);
    Eigen::VectorXd grad = parisi_grad(spec, chain, m);
    for (int k = 0; k < n; ++k) {
      double h = 1e-5;
      Eigen::VectorXd hi = m, lo = m;
      hi[k] += h;
      lo[k] -= h;
      double fd = (parisi_value(spec, chain, hi) - parisi_value(spec, chain, lo)) / (2 * h);
      CHECK(grad[k] == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("isotonic projection agrees with the minimax formula") {
  CHECK((isotonic_projection(vec({0.9, 0.4})) - vec({0.65, 0.65})).norm() <= 1e-15);
  CHECK((isotonic_projection(vec({0.1, 0.5, 0.9})) - vec({0.1, 0.5, 0.9})).norm() == 0.0);

  std::mt19937_64 rng(131);
  std::uniform_real_distribution<double> unit(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd x(2 + trial % 6);
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = unit(rng);
    Eigen::VectorXd got = isotonic_projection(x);
    Eigen::VectorXd expect = isotonic_minimax(x);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-12));
      if (i > 0) CHECK(got[i - 1] <= got[i] + 1e-15);
    }
  }
}

TEST_CASE("ordered-box projection is feasible and no farther than any feasible point") {
  std::mt19937_64 rng(141);
  std::uniform_real_distribution<double> unit(-1.5, 2.5);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd x(3);
    for (Eigen::Index i = 0; i < 3; ++i) x[i] = unit(rng);
    Eigen::VectorXd p = project_ordered_box(x, 0.25, 1.0);
    CHECK(p[0] >= 0.25);
    CHECK(p[2] <= 1.0);
    CHECK(p[0] <= p[1] + 1e-15);
    CHECK(p[1] <= p[2] + 1e-15);
    // idempotent
    CHECK((project_ordered_box(p, 0.25, 1.0) - p).norm() <= 1e-14);
    // optimality against random feasible competitors
    std::uniform_real_distribution<double> box(0.25, 1.0);
    for (int probe = 0; probe < 200; ++probe) {
      Eigen::VectorXd q(3);
      for (Eigen::Index i = 0; i < 3; ++i) q[i] = box(rng);
      std::sort(q.data(), q.data() + 3);
      CHECK((x - p).squaredNorm() <= (x - q).squaredNorm() + 1e-12);
    }
  }
}

TEST_CASE("the zero interaction is minimized at m = 1 with value log 2") {
  ModelSpec spec = zero_model(2);
  for (const Chain& chain : enumerate_chains(2)) {
    ParisiPoint point = minimize_parisi(spec, chain);
    CHECK(point.converged);
    CHECK(point.value == doctest::Approx(std::log(2.0)).epsilon(1e-9));
    CHECK(point.m[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(point.m[1] == doctest::Approx(1.0).epsilon(1e-6));
    // the gradient pushes every parameter against the upper bound
    CHECK(point.grad[0] < 0.0);
    CHECK(point.grad[1] < 0.0);
  }
}

TEST_CASE("the single-species minimizer matches a dense grid scan") {
  // uniform base law: the weak field keeps the minimum at the boundary m = 1
  ModelSpec spec = two_point_model(2.0);
  Chain chain = make_chain({1});
  ParisiPoint point = minimize_parisi(spec, chain);
  CHECK(point.converged);

  double grid_best = 1e300;
  for (double m = 1e-4; m <= 1.0 + 1e-12; m += 1e-4) {
    grid_best = std::min(grid_best, two_point_value(2.0, std::min(m, 1.0)));
  }
  CHECK(point.value <= grid_best + 1e-12);
  CHECK(point.value == doctest::Approx(grid_best).epsilon(1e-9));
  CHECK(point.m[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(point.grad[0] < 0.0);  // pinned against the upper bound

  // a rare-symbol field strong enough to condense: interior optimum
  Eigen::ArrayXd t(2);
  t << 0.0, 4.0;
  ModelSpec skew = table_model(1, 2, {law2(0.9, 0.1)}, std::move(t));
  auto skew_value = [](double m) {
    return (std::log(2.0) + std::log(0.9 + 0.1 * std::exp(4.0 * m))) / m;
  };
  ParisiPoint interior = minimize_parisi(skew, chain);
  CHECK(interior.converged);
  grid_best = 1e300;
  double grid_arg = 0.0;
  for (double m = 1e-4; m <= 1.0 + 1e-12; m += 1e-4) {
    double v = skew_value(std::min(m, 1.0));
    if (v < grid_best) {
      grid_best = v;
      grid_arg = std::min(m, 1.0);
    }
  }
  CHECK(grid_arg < 0.999);  // genuinely interior
  CHECK(interior.value <= grid_best + 1e-12);
  CHECK(interior.value == doctest::Approx(grid_best).epsilon(1e-7));
  CHECK(interior.m[0] == doctest::Approx(grid_arg).epsilon(1e-3));
  CHECK(std::abs(interior.grad[0]) <= 1e-7);  // stationarity at the interior point
}

TEST_CASE("equal parameters make the value chain-independent") {
  std::mt19937_64 rng(151);
  ModelSpec spec = random_model(rng, 2, 2, 2.0);
  for (double m : {0.3, 0.6, 1.0}) {
    Eigen::VectorXd mv = Eigen::VectorXd::Constant(2, m);
    double first = parisi_value(spec, enumerate_chains(2)[0], mv);
    double second = parisi_value(spec, enumerate_chains(2)[1], mv);
    CHECK(first == doctest::Approx(second).epsilon(1e-10));
  }
}

TEST_CASE("the global scan returns one point per chain with the best first") {
  std::mt19937_64 rng(161);
  ModelSpec spec = random_model(rng, 2, 2, 1.5);
  GlobalParisiResult global = global_parisi_min(spec);
  REQUIRE(global.per_chain.size() == 2);
  double lo = std::min(global.per_chain[0].value, global.per_chain[1].value);
  CHECK(global.best.value == doctest::Approx(lo).epsilon(1e-12));
  for (const ParisiPoint& point : global.per_chain) CHECK(point.converged);
}
