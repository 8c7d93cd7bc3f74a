#include "gremlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "gremlab/disorder.hpp"
#include "gremlab/gibbs_measure.hpp"
#include "gremlab/rng.hpp"

namespace gremlab {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

JsonValue& JsonValue::add(const std::string& key, JsonValue value) {
  if (std::holds_alternative<std::nullptr_t>(v)) v = Object{};
  std::get<Object>(v).emplace_back(key, std::move(value));
  return *this;
}

JsonValue& JsonValue::push(JsonValue value) {
  if (std::holds_alternative<std::nullptr_t>(v)) v = Array{};
  std::get<Array>(v).push_back(std::move(value));
  return *this;
}

namespace {

void escape_into(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

void dump_into(std::string& out, const JsonValue& value, int indent, int depth) {
  std::string pad(static_cast<std::size_t>(indent) * depth, ' ');
  std::string pad_in(static_cast<std::size_t>(indent) * (depth + 1), ' ');
  if (std::holds_alternative<std::nullptr_t>(value.v)) {
    out += "null";
  } else if (std::holds_alternative<bool>(value.v)) {
    out += std::get<bool>(value.v) ? "true" : "false";
  } else if (std::holds_alternative<std::int64_t>(value.v)) {
    out += std::to_string(std::get<std::int64_t>(value.v));
  } else if (std::holds_alternative<double>(value.v)) {
    double d = std::get<double>(value.v);
    out += std::isfinite(d) ? format_double(d) : "null";
  } else if (std::holds_alternative<std::string>(value.v)) {
    escape_into(out, std::get<std::string>(value.v));
  } else if (std::holds_alternative<JsonValue::Array>(value.v)) {
    const auto& items = std::get<JsonValue::Array>(value.v);
    if (items.empty()) {
      out += "[]";
      return;
    }
    out += "[\n";
    for (std::size_t i = 0; i < items.size(); ++i) {
      out += pad_in;
      dump_into(out, items[i], indent, depth + 1);
      if (i + 1 < items.size()) out += ',';
      out += '\n';
    }
    out += pad + "]";
  } else {
    const auto& fields = std::get<JsonValue::Object>(value.v);
    if (fields.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    for (std::size_t i = 0; i < fields.size(); ++i) {
      out += pad_in;
      escape_into(out, fields[i].first);
      out += ": ";
      dump_into(out, fields[i].second, indent, depth + 1);
      if (i + 1 < fields.size()) out += ',';
      out += '\n';
    }
    out += pad + "}";
  }
}

JsonValue double_array(const Eigen::VectorXd& v) {
  JsonValue arr{JsonValue::Array{}};
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push(v[i]);
  return arr;
}

JsonValue chain_point_json(const ParisiPoint& point) {
  JsonValue obj;
  obj.add("chain", chain_label(point.chain));
  obj.add("m", double_array(point.m));
  obj.add("value", point.value);
  obj.add("grad", double_array(point.grad));
  obj.add("converged", point.converged);
  return obj;
}

}  // namespace

std::string JsonValue::dump(int indent) const {
  std::string out;
  dump_into(out, *this, indent, 0);
  out += '\n';
  return out;
}

JsonValue to_json(const ConstraintReport& report) {
  JsonValue obj;
  obj.add("feasible", report.feasible);
  obj.add("tolerance", report.tolerance);
  JsonValue entries{JsonValue::Array{}};
  for (const ConstraintEntry& entry : report.entries) {
    JsonValue e;
    e.add("subset", subset_label(entry.j));
    e.add("value", entry.value);
    e.add("cap", entry.cap);
    e.add("slack", entry.slack);
    entries.push(std::move(e));
  }
  obj.add("entries", std::move(entries));
  return obj;
}

std::string digest_model(const ModelSpec& spec) {
  std::string canon = "n=" + std::to_string(spec.n) + ";q=" + std::to_string(spec.alphabet_size);
  canon += ";values=";
  for (double v : spec.alphabet_values) canon += format_double(v) + ",";
  for (SubsetId j : all_subsets(spec.n)) {
    canon += ";mu" + subset_label(j) + "=";
    const Eigen::ArrayXd& law = spec.mu[coord_of(j)];
    for (Eigen::Index i = 0; i < law.size(); ++i) canon += format_double(law[i]) + ",";
  }
  if (spec.phi_expr) {
    canon += ";phi=expr:" + pretty_print(*spec.phi_expr);
  } else {
    canon += ";phi=table:";
    for (Eigen::Index i = 0; i < spec.phi_raw_table->size(); ++i) {
      canon += format_double((*spec.phi_raw_table)[i]) + ",";
    }
  }
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<int> default_sweep(int n) {
  switch (n) {
    case 1:
    case 2: return {8, 12, 16, 20};
    case 3: return {9, 12, 15, 18};
    default: return {8, 12};
  }
}

namespace {

double fd_gradient_error(const ModelSpec& spec, const Chain& chain, std::uint64_t seed) {
  double worst = 0.0;
  for (int probe = 0; probe < 3; ++probe) {
    Eigen::VectorXd m(spec.n);
    for (int k = 0; k < spec.n; ++k) {
      m[k] = 0.25 + 0.65 * unit_double(mix64(seed ^ (static_cast<std::uint64_t>(probe) << 32 | k)));
    }
    std::sort(m.data(), m.data() + m.size());
    Eigen::VectorXd analytic = parisi_grad(spec, chain, m);
    for (int k = 0; k < spec.n; ++k) {
      double h = 1e-5;
      Eigen::VectorXd hi = m, lo = m;
      hi[k] += h;
      lo[k] -= h;
      double fd = (parisi_value(spec, chain, hi) - parisi_value(spec, chain, lo)) / (2 * h);
      worst = std::max(worst, std::abs(analytic[k] - fd) / std::max(1.0, std::abs(fd)));
    }
  }
  return worst;
}

std::pair<double, double> entropy_identity_errors(const ModelSpec& spec, std::uint64_t seed) {
  MeasureTensor mu = as_tensor(product_measure(spec));
  std::vector<SubsetId> coords = all_subsets(spec.n);
  double worst_chain = 0.0, worst_mono = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    MeasureTensor nu = mu;
    for (Eigen::Index i = 0; i < nu.weights.size(); ++i) {
      std::uint64_t bits = mix64(seed ^ mix64(static_cast<std::uint64_t>(trial) << 32 | i));
      nu.weights[i] *= -std::log(1.0 - unit_double(bits));
    }
    nu.weights /= nu.weights.sum();
    double total = rel_entropy(nu, mu);

    // All splits for small coordinate counts, a seeded sample otherwise.
    std::vector<std::vector<SubsetId>> splits;
    if (spec.n <= 2) {
      for (std::uint32_t bits = 1; bits < (1u << coords.size()); ++bits) {
        std::vector<SubsetId> B;
        for (std::size_t c = 0; c < coords.size(); ++c) {
          if (bits & (1u << c)) B.push_back(coords[c]);
        }
        splits.push_back(std::move(B));
      }
    } else {
      for (int pick = 0; pick < 16; ++pick) {
        std::vector<SubsetId> B;
        std::uint64_t bits = mix64(seed ^ 0xb10cull ^ (static_cast<std::uint64_t>(trial) << 8 | pick));
        for (std::size_t c = 0; c < coords.size(); ++c) {
          if ((bits >> (c % 64)) & 1) B.push_back(coords[c]);
          if (c % 64 == 63) bits = mix64(bits);
        }
        if (B.empty()) B.push_back(coords[pick % coords.size()]);
        splits.push_back(std::move(B));
      }
    }
    for (const auto& B : splits) {
      auto [first, second] = chain_rule_terms(nu, B, mu);
      worst_chain = std::max(worst_chain, std::abs(total - first - second));
      worst_mono = std::max(worst_mono, first - total);
    }
  }
  return {worst_chain, worst_mono};
}

}  // namespace

VerifyReport run_verify(const ModelSpec& spec, const VerifyOptions& options) {
  VerifyReport report;
  report.model_digest = digest_model(spec);
  report.parisi = global_parisi_min(spec);
  report.gibbs = solve_gibbs(spec);
  double p = report.parisi.best.value;
  double g = report.gibbs.value;
  report.identity_residual = std::abs(p - (g + std::log(2.0)));

  GibbsStructure winner = build_gibbs(spec, report.parisi.best.chain, report.parisi.best.m);
  report.audit = audit_constraints(winner, spec, options.audit_tol);

  if (options.check_montecarlo) {
    std::vector<int> sweep = options.sweep.empty() ? default_sweep(spec.n) : options.sweep;
    for (int N : sweep) {
      SimResult sim = free_energy_exact(spec, N, options.seed, options.threads);
      report.montecarlo.push_back({N, sim.f, g, std::abs(sim.f - g)});
    }
  }

  auto add_criterion = [&](const std::string& name, bool enabled, double observed,
                           double tolerance) {
    report.criteria.push_back({name, enabled, observed, tolerance,
                               !enabled || observed <= tolerance});
  };
  add_criterion("identity", options.check_identity, report.identity_residual,
                options.identity_tol);
  add_criterion("gradient", options.check_gradient,
                options.check_gradient
                    ? fd_gradient_error(spec, report.parisi.best.chain, options.seed)
                    : 0.0,
                options.gradient_tol);
  double chain_err = 0.0, mono_err = 0.0;
  if (options.check_entropy) {
    std::tie(chain_err, mono_err) = entropy_identity_errors(spec, options.seed);
  }
  add_criterion("entropy_chain_rule", options.check_entropy, chain_err, options.entropy_tol);
  add_criterion("entropy_monotonicity", options.check_entropy, mono_err,
                options.monotonicity_tol);
  double audit_violation = 0.0;
  for (const ConstraintEntry& entry : report.audit.entries) {
    audit_violation = std::max(audit_violation, -entry.slack);
  }
  add_criterion("audit", options.check_audit, audit_violation, options.audit_tol);
  add_criterion("montecarlo", options.check_montecarlo && !report.montecarlo.empty(),
                report.montecarlo.empty() ? 0.0 : report.montecarlo.back().gap,
                options.mc_gap_tol);

  report.all_passed = true;
  for (const CriterionResult& criterion : report.criteria) {
    if (criterion.enabled && !criterion.passed) report.all_passed = false;
  }
  return report;
}

JsonValue report_to_json(const VerifyReport& report) {
  JsonValue root;
  root.add("schema", "gremlab-verify/1");
  root.add("model_digest", report.model_digest);

  JsonValue parisi;
  JsonValue chains{JsonValue::Array{}};
  for (const ParisiPoint& point : report.parisi.per_chain) chains.push(chain_point_json(point));
  parisi.add("chains", std::move(chains));
  parisi.add("best_chain", chain_label(report.parisi.best.chain));
  parisi.add("value", report.parisi.best.value);
  parisi.add("m", double_array(report.parisi.best.m));
  parisi.add("converged", report.parisi.best.converged);
  root.add("parisi", std::move(parisi));

  JsonValue gibbs;
  gibbs.add("value", report.gibbs.value);
  JsonValue active{JsonValue::Array{}};
  for (SubsetId j : report.gibbs.active_set) active.push(subset_label(j));
  gibbs.add("active_set", std::move(active));
  gibbs.add("iterations", static_cast<std::int64_t>(report.gibbs.iterations));
  gibbs.add("converged", report.gibbs.converged);
  root.add("gibbs", std::move(gibbs));

  root.add("identity_residual", report.identity_residual);
  root.add("audit", to_json(report.audit));

  JsonValue mc{JsonValue::Array{}};
  for (const MonteCarloPoint& point : report.montecarlo) {
    JsonValue e;
    e.add("N", point.N);
    e.add("f", point.f);
    e.add("target", point.target);
    e.add("gap", point.gap);
    mc.push(std::move(e));
  }
  root.add("montecarlo", std::move(mc));

  JsonValue criteria{JsonValue::Array{}};
  for (const CriterionResult& criterion : report.criteria) {
    JsonValue e;
    e.add("name", criterion.name);
    e.add("enabled", criterion.enabled);
    e.add("observed", criterion.observed);
    e.add("tolerance", criterion.tolerance);
    e.add("passed", criterion.passed);
    criteria.push(std::move(e));
  }
  root.add("criteria", std::move(criteria));
  root.add("all_passed", report.all_passed);
  return root;
}

std::string montecarlo_csv(const VerifyReport& report) {
  std::string out = "N,F_N,target,gap\n";
  for (const MonteCarloPoint& point : report.montecarlo) {
    out += std::to_string(point.N) + "," + format_double(point.f) + "," +
           format_double(point.target) + "," + format_double(point.gap) + "\n";
  }
  return out;
}

}  // namespace gremlab
