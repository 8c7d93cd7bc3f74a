#pragma once

#include <Eigen/Core>
#include <memory>
#include <random>
#include <utility>
#include <vector>

#include "gremlab/model.hpp"

namespace gremlab::testutil {

inline Eigen::ArrayXd law2(double a, double b) {
  Eigen::ArrayXd v(2);
  v << a, b;
  return v;
}

inline ModelSpec table_model(int n, int q, std::vector<Eigen::ArrayXd> mu, Eigen::ArrayXd table) {
  ModelSpec spec;
  spec.n = n;
  spec.alphabet_size = q;
  spec.alphabet_values.resize(q);
  for (int s = 0; s < q; ++s) spec.alphabet_values[s] = s;
  spec.mu = std::move(mu);
  spec.phi_raw_table = std::make_shared<const Eigen::ArrayXd>(std::move(table));
  validate_model(spec);
  return spec;
}

/// n = 1, uniform base law, phi = (0, b): every quantity of interest has a
/// closed form, which makes this the workhorse fixture.
inline ModelSpec two_point_model(double b) {
  Eigen::ArrayXd t(2);
  t << 0.0, b;
  return table_model(1, 2, {law2(0.5, 0.5)}, std::move(t));
}

inline ModelSpec zero_model(int n, int q = 2) {
  int coords = (1 << n) - 1;
  std::vector<Eigen::ArrayXd> mu(coords, Eigen::ArrayXd::Constant(q, 1.0 / q));
  std::int64_t size = 1;
  for (int c = 0; c < coords; ++c) size *= q;
  return table_model(n, q, std::move(mu), Eigen::ArrayXd::Zero(size));
}

inline Eigen::ArrayXd random_law(std::mt19937_64& rng, int q) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::ArrayXd law(q);
  for (int s = 0; s < q; ++s) law[s] = -std::log(1.0 - unit(rng));
  law /= law.sum();
  return law;
}

inline ModelSpec random_model(std::mt19937_64& rng, int n, int q, double phi_scale) {
  int coords = (1 << n) - 1;
  std::vector<Eigen::ArrayXd> mu;
  for (int c = 0; c < coords; ++c) mu.push_back(random_law(rng, q));
  std::int64_t size = 1;
  for (int c = 0; c < coords; ++c) size *= q;
  std::uniform_real_distribution<double> amp(-phi_scale, phi_scale);
  Eigen::ArrayXd table(size);
  for (std::int64_t i = 0; i < size; ++i) table[i] = amp(rng);
  return table_model(n, q, std::move(mu), std::move(table));
}

}  // namespace gremlab::testutil
