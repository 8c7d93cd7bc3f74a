#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gremlab/gibbs_solver.hpp"
#include "gremlab/measure.hpp"
#include "gremlab/model.hpp"
#include "gremlab/parisi.hpp"

namespace gremlab {

/// Shortest fixed-width rendering used for every float in reports:
/// printf %.17g, enough digits to reparse to the identical double.
std::string format_double(double x);

/// Order-preserving JSON tree with deterministic byte output. Doubles are
/// rendered by format_double, so identical reports dump identical bytes.
struct JsonValue {
  using Array = std::vector<JsonValue>;
  using Object = std::vector<std::pair<std::string, JsonValue>>;

  std::variant<std::nullptr_t, bool, std::int64_t, double, std::string, Array, Object> v =
      nullptr;

  JsonValue() = default;
  JsonValue(bool b) : v(b) {}
  JsonValue(int i) : v(static_cast<std::int64_t>(i)) {}
  JsonValue(std::int64_t i) : v(i) {}
  JsonValue(std::uint64_t i) : v(static_cast<std::int64_t>(i)) {}
  JsonValue(double d) : v(d) {}
  JsonValue(const char* s) : v(std::string(s)) {}
  JsonValue(std::string s) : v(std::move(s)) {}
  JsonValue(Array a) : v(std::move(a)) {}
  JsonValue(Object o) : v(std::move(o)) {}

  /// Appends a key to an object value (the default-constructed state is
  /// null; the first add turns it into an object).
  JsonValue& add(const std::string& key, JsonValue value);
  /// Appends an element to an array value (null promotes to array).
  JsonValue& push(JsonValue value);

  std::string dump(int indent = 2) const;
};

JsonValue to_json(const ConstraintReport& report);

struct MonteCarloPoint {
  int N = 0;
  double f = 0.0;
  double target = 0.0;  // the constrained maximization value g
  double gap = 0.0;     // |f - target|
};

struct CriterionResult {
  std::string name;
  bool enabled = true;
  double observed = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct VerifyReport {
  std::string model_digest;
  GlobalParisiResult parisi;
  GibbsSolveResult gibbs;
  double identity_residual = 0.0;  // |p - (g + log 2)|
  ConstraintReport audit;          // winning chain's measure at its optimum
  std::vector<MonteCarloPoint> montecarlo;
  std::vector<CriterionResult> criteria;
  bool all_passed = false;
};

struct VerifyOptions {
  std::vector<int> sweep;  // N values for the enumeration; empty = per-n default
  std::uint64_t seed = 42;
  int threads = 1;
  bool check_identity = true;
  bool check_gradient = true;
  bool check_entropy = true;
  bool check_audit = true;
  bool check_montecarlo = true;
  double identity_tol = 1e-4;
  double gradient_tol = 1e-6;
  double entropy_tol = 1e-10;
  double monotonicity_tol = 1e-12;
  double mc_gap_tol = 0.05;
  double audit_tol = 1e-8;
};

/// FNV-1a 64 over a canonical rendering of the instance, hex encoded.
std::string digest_model(const ModelSpec& spec);

std::vector<int> default_sweep(int n);

/// Full pipeline: chain minimization, constrained maximization, winning
/// chain audit, enumeration sweep, then one pass/fail entry per enabled
/// criterion.
VerifyReport run_verify(const ModelSpec& spec, const VerifyOptions& options = {});

JsonValue report_to_json(const VerifyReport& report);

/// "N,F_N,target,gap" rows of the enumeration series.
std::string montecarlo_csv(const VerifyReport& report);

}  // namespace gremlab
