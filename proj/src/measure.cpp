#include "gremlab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gremlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_matching(const MeasureTensor& a, const MeasureTensor& b) {
  if (a.alphabet_size != b.alphabet_size || a.coords != b.coords) {
    throw std::invalid_argument("tensor coordinate sets do not match");
  }
}

int position_of(const std::vector<SubsetId>& coords, SubsetId j) {
  auto it = std::find(coords.begin(), coords.end(), j);
  if (it == coords.end()) {
    throw std::invalid_argument("coordinate " + subset_label(j) + " not present in tensor");
  }
  return static_cast<int>(it - coords.begin());
}

std::vector<SubsetId> complement_coords(const std::vector<SubsetId>& all,
                                        const std::vector<SubsetId>& B) {
  std::vector<SubsetId> out;
  for (SubsetId j : all) {
    if (std::find(B.begin(), B.end(), j) == B.end()) out.push_back(j);
  }
  return out;
}

}  // namespace

MeasureTensor as_tensor(const JointMeasure& nu) {
  return MeasureTensor{all_subsets(nu.n), nu.alphabet_size, nu.weights};
}

JointMeasure as_joint(const MeasureTensor& t, int n) {
  if (t.coords != all_subsets(n)) {
    throw std::invalid_argument("tensor is not in canonical full-coordinate form");
  }
  return JointMeasure{n, t.alphabet_size, t.weights};
}

std::int64_t tensor_size(int alphabet_size, int coord_count) {
  std::int64_t total = 1;
  for (int c = 0; c < coord_count; ++c) total *= alphabet_size;
  return total;
}

std::vector<std::int64_t> projection_map(const std::vector<SubsetId>& full_coords,
                                         int alphabet_size,
                                         const std::vector<SubsetId>& sub_coords) {
  std::vector<std::int64_t> strides(sub_coords.size());
  std::vector<int> positions(sub_coords.size());
  std::int64_t stride = 1;
  for (std::size_t t = 0; t < sub_coords.size(); ++t) {
    positions[t] = position_of(full_coords, sub_coords[t]);
    strides[t] = stride;
    stride *= alphabet_size;
  }
  std::int64_t full_size = tensor_size(alphabet_size, static_cast<int>(full_coords.size()));
  std::vector<std::int64_t> pow(full_coords.size());
  std::int64_t p = 1;
  for (std::size_t c = 0; c < full_coords.size(); ++c) {
    pow[c] = p;
    p *= alphabet_size;
  }
  std::vector<std::int64_t> map(full_size);
  for (std::int64_t i = 0; i < full_size; ++i) {
    std::int64_t sub = 0;
    for (std::size_t t = 0; t < sub_coords.size(); ++t) {
      sub += strides[t] * ((i / pow[positions[t]]) % alphabet_size);
    }
    map[i] = sub;
  }
  return map;
}

MeasureTensor marginal(const MeasureTensor& nu, const std::vector<SubsetId>& keep) {
  if (keep.empty()) throw std::invalid_argument("marginal onto no coordinates");
  // Output keeps coordinates in their relative order inside nu.coords.
  std::vector<SubsetId> ordered;
  for (SubsetId j : nu.coords) {
    if (std::find(keep.begin(), keep.end(), j) != keep.end()) ordered.push_back(j);
  }
  if (ordered.size() != keep.size()) {
    for (SubsetId j : keep) position_of(nu.coords, j);  // raise the precise error
  }
  MeasureTensor out;
  out.coords = ordered;
  out.alphabet_size = nu.alphabet_size;
  out.weights = Eigen::ArrayXd::Zero(tensor_size(nu.alphabet_size, static_cast<int>(ordered.size())));
  std::vector<std::int64_t> pm = projection_map(nu.coords, nu.alphabet_size, ordered);
  for (std::int64_t i = 0; i < nu.weights.size(); ++i) out.weights[pm[i]] += nu.weights[i];
  return out;
}

Eigen::ArrayXd lift(const MeasureTensor& sub, const std::vector<SubsetId>& full_coords) {
  std::vector<std::int64_t> pm = projection_map(full_coords, sub.alphabet_size, sub.coords);
  Eigen::ArrayXd out(static_cast<std::int64_t>(pm.size()));
  for (std::size_t i = 0; i < pm.size(); ++i) out[static_cast<std::int64_t>(i)] = sub.weights[pm[i]];
  return out;
}

double rel_entropy(const MeasureTensor& nu, const MeasureTensor& ref) {
  require_matching(nu, ref);
  double h = 0.0;
  for (std::int64_t i = 0; i < nu.weights.size(); ++i) {
    double p = nu.weights[i];
    if (p <= 0.0) continue;
    double q = ref.weights[i];
    if (q <= 0.0) return kInf;
    h += p * std::log(p / q);
  }
  return h;
}

double tv_distance(const MeasureTensor& a, const MeasureTensor& b) {
  require_matching(a, b);
  return 0.5 * (a.weights - b.weights).abs().sum();
}

std::pair<double, double> chain_rule_terms(const MeasureTensor& nu,
                                           const std::vector<SubsetId>& B,
                                           const MeasureTensor& mu) {
  require_matching(nu, mu);
  if (B.empty()) throw std::invalid_argument("chain rule with empty coordinate set");
  MeasureTensor nuB = marginal(nu, B);
  MeasureTensor muB = marginal(mu, B);
  double first = rel_entropy(nuB, muB);

  std::vector<SubsetId> Bc = complement_coords(nu.coords, B);
  if (Bc.empty()) return {first, 0.0};

  MeasureTensor muBc = marginal(mu, Bc);
  MeasureTensor ref;
  ref.coords = nu.coords;
  ref.alphabet_size = nu.alphabet_size;
  ref.weights = lift(nuB, nu.coords) * lift(muBc, nu.coords);
  return {first, rel_entropy(nu, ref)};
}

ConstraintReport check_constraints(const JointMeasure& nu, const ModelSpec& spec,
                                   double tolerance) {
  MeasureTensor full = as_tensor(nu);
  MeasureTensor mu = as_tensor(product_measure(spec));
  ConstraintReport report;
  report.tolerance = tolerance;
  report.feasible = true;
  double cap_unit = std::log(2.0) / spec.n;
  for (SubsetId j : all_subsets(spec.n)) {
    std::vector<SubsetId> pj = power_set_coords(j);
    ConstraintEntry entry;
    entry.j = j;
    entry.value = rel_entropy(marginal(full, pj), marginal(mu, pj));
    entry.cap = cap_unit * set_size(j);
    entry.slack = entry.cap - entry.value;
    if (!(entry.slack >= -tolerance)) report.feasible = false;
    report.entries.push_back(entry);
  }
  return report;
}

double pair_rate(const JointMeasure& nu, const JointMeasure& theta, SubsetId A,
                 const ModelSpec& spec) {
  if (A.mask == 0) throw std::invalid_argument("pair rate needs a nonempty species set");
  MeasureTensor nut = as_tensor(nu);
  MeasureTensor tht = as_tensor(theta);
  MeasureTensor mu = as_tensor(product_measure(spec));
  std::vector<SubsetId> pa = power_set_coords(A);

  MeasureTensor nuA = marginal(nut, pa);
  MeasureTensor thA = marginal(tht, pa);
  if (tv_distance(nuA, thA) > 1e-10) return kInf;

  double value = rel_entropy(nuA, marginal(mu, pa));
  if (A == full_set(spec.n)) return value;  // complement terms defined as 0
  value += chain_rule_terms(nut, pa, mu).second;
  value += chain_rule_terms(tht, pa, mu).second;
  return value;
}

}  // namespace gremlab
