#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

#include "gremlab/model.hpp"
#include "gremlab/subsets.hpp"

namespace gremlab {

/// Dense probability tensor over an explicit list of subset coordinates.
/// Digit p of a flat index is the symbol at coords[p]; digit 0 is least
/// significant. A JointMeasure is the special case coords = all_subsets(n).
struct MeasureTensor {
  std::vector<SubsetId> coords;
  int alphabet_size = 2;
  Eigen::ArrayXd weights;
};

MeasureTensor as_tensor(const JointMeasure& nu);
JointMeasure as_joint(const MeasureTensor& t, int n);

std::int64_t tensor_size(int alphabet_size, int coord_count);

/// For each flat index of a tensor over full_coords, the flat index of its
/// restriction to sub_coords (each of which must appear in full_coords).
std::vector<std::int64_t> projection_map(const std::vector<SubsetId>& full_coords,
                                         int alphabet_size,
                                         const std::vector<SubsetId>& sub_coords);

/// Sums out every coordinate not in keep. Output coordinates retain their
/// relative order in nu.coords. Throws on empty keep or unknown coordinates.
MeasureTensor marginal(const MeasureTensor& nu, const std::vector<SubsetId>& keep);

/// Expands a tensor over a coordinate subset back to full_coords shape:
/// out[i] = sub.weights[restriction of i]. Used for constraint gradients.
Eigen::ArrayXd lift(const MeasureTensor& sub, const std::vector<SubsetId>& full_coords);

/// Relative entropy sum nu log(nu/ref) with 0 log 0 = 0 and +inf when some
/// nu entry is positive where ref vanishes. Coordinates must match exactly.
double rel_entropy(const MeasureTensor& nu, const MeasureTensor& ref);

/// Total variation distance, half the L1 difference. Coordinates must match.
double tv_distance(const MeasureTensor& a, const MeasureTensor& b);

/// Splits H(nu|mu) into H(nu^B|mu^B) + H(nu | nu^B (x) mu^Bc) where Bc is the
/// complement of B in nu.coords. The terms sum to rel_entropy(nu, mu).
/// B = all coordinates gives a zero second term.
std::pair<double, double> chain_rule_terms(const MeasureTensor& nu,
                                           const std::vector<SubsetId>& B,
                                           const MeasureTensor& mu);

struct ConstraintEntry {
  SubsetId j;
  double value = 0.0;  // H(nu^(P_J) | mu^(P_J))
  double cap = 0.0;    // (|J|/n) log 2
  double slack = 0.0;  // cap - value
};

struct ConstraintReport {
  std::vector<ConstraintEntry> entries;  // canonical subset order
  double tolerance = 0.0;
  bool feasible = false;  // all slacks >= -tolerance
};

/// Entropy-cap audit of every subset constraint against the model's product
/// base law. P_J is the power set of J restricted to nonempty members.
ConstraintReport check_constraints(const JointMeasure& nu, const ModelSpec& spec,
                                   double tolerance = 1e-8);

/// Joint rate for a pair of measures whose configurations share the species
/// in A: +inf when the P_A marginals of nu and theta differ by more than
/// 1e-10 in total variation; otherwise
///   H(nu^(P_A)|mu^(P_A)) + H(nu | nu^(P_A) (x) mu^(P_A^c))
///                        + H(theta | theta^(P_A) (x) mu^(P_A^c)),
/// with the conditional terms defined as 0 when A is the full species set.
double pair_rate(const JointMeasure& nu, const JointMeasure& theta, SubsetId A,
                 const ModelSpec& spec);

}  // namespace gremlab
