#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gremlab/phi_expr.hpp"
#include "gremlab/subsets.hpp"

namespace gremlab {

/// Full problem instance: n species, a finite alphabet of size |S| with a
/// real embedding of each symbol, one base law mu[J] per nonempty subset J
/// (canonical ascending-mask order), and the interaction phi given either
/// as a parsed expression or as a dense table in flat-index order.
struct ModelSpec {
  int n = 1;
  int alphabet_size = 2;
  std::vector<double> alphabet_values;   // length alphabet_size
  std::vector<Eigen::ArrayXd> mu;        // length 2^n - 1, each of length |S|

  // Exactly one of these holds phi.
  std::shared_ptr<const PhiExpr> phi_expr;
  std::shared_ptr<const Eigen::ArrayXd> phi_raw_table;

  int coords() const { return subset_count(n); }
  std::int64_t config_count() const;  // |S|^(2^n - 1)
};

/// Throws std::invalid_argument when any invariant fails: n outside 1..4,
/// |S| < 2, mu entries negative or not summing to 1 within 1e-12, table
/// length mismatch, non-finite table entries, or |S|^(2^n-1) > 2^24.
void validate_model(const ModelSpec& spec);

/// Mixed-radix encoding of a per-subset symbol tuple (canonical coordinate
/// order, coordinate 0 least significant). symbols.size() must be 2^n - 1.
std::int64_t flat_index(const ModelSpec& spec, const std::vector<int>& symbols);

/// Inverse of flat_index.
std::vector<int> unflatten(const ModelSpec& spec, std::int64_t flat);

/// Dense probability tensor over S^(2^n - 1) in canonical coordinate order.
struct JointMeasure {
  int n = 1;
  int alphabet_size = 2;
  Eigen::ArrayXd weights;  // length |S|^(2^n - 1), entries >= 0, sum 1
};

/// weights[flat_index(s)] = prod_J mu[J][s_J].
JointMeasure product_measure(const ModelSpec& spec);

/// Dense table of phi over all coordinates. Expression mode substitutes
/// alphabet_values[s_J] for each variable xJ; table mode returns the stored
/// table verbatim. Throws PhiEvalError on domain errors or non-finite values.
Eigen::ArrayXd phi_table(const ModelSpec& spec);

/// Reads a model from JSON text:
///   {"n":2, "alphabet_size":2, "alphabet_values":[-1,1],
///    "mu":{"1":[.5,.5],"2":[.5,.5],"12":[.5,.5]},
///    "phi":{"expr":"x1*x2 + 0.5*x12"}}
/// "phi" may instead be {"table":[...]} in flat-index order.
/// "alphabet_values" defaults to (0, 1, .., |S|-1). The result is validated.
ModelSpec parse_model(const std::string& json_text);

/// parse_model applied to the contents of a file.
ModelSpec load_model(const std::string& path);

}  // namespace gremlab
