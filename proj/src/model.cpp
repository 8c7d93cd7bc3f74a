#include "gremlab/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace gremlab {

namespace {

constexpr std::int64_t kMaxConfigs = std::int64_t{1} << 24;

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument(msg); }

}  // namespace

std::int64_t ModelSpec::config_count() const {
  std::int64_t total = 1;
  for (int c = 0; c < coords(); ++c) {
    total *= alphabet_size;
    if (total > kMaxConfigs) return total;  // caller rejects; avoid overflow
  }
  return total;
}

void validate_model(const ModelSpec& spec) {
  if (spec.n < 1 || spec.n > 4) bad("n must be in 1..4");
  if (spec.alphabet_size < 2) bad("alphabet_size must be at least 2");
  if (static_cast<int>(spec.alphabet_values.size()) != spec.alphabet_size) {
    bad("alphabet_values must have one entry per symbol");
  }
  if (static_cast<int>(spec.mu.size()) != spec.coords()) {
    bad("mu must have one law per nonempty subset (" + std::to_string(spec.coords()) +
        " expected)");
  }
  for (SubsetId j : all_subsets(spec.n)) {
    const Eigen::ArrayXd& law = spec.mu[coord_of(j)];
    if (law.size() != spec.alphabet_size) {
      bad("mu[" + subset_label(j) + "] must have length " + std::to_string(spec.alphabet_size));
    }
    if ((law < 0.0).any()) bad("mu[" + subset_label(j) + "] has a negative entry");
    if (std::abs(law.sum() - 1.0) > 1e-12) {
      bad("mu[" + subset_label(j) + "] must sum to 1 within 1e-12");
    }
  }
  if (spec.config_count() > kMaxConfigs) {
    bad("alphabet_size^(2^n-1) exceeds the 2^24 dense-tensor guard");
  }
  bool has_expr = spec.phi_expr != nullptr;
  bool has_table = spec.phi_raw_table != nullptr;
  if (has_expr == has_table) bad("phi must be exactly one of expression or table");
  if (has_table) {
    if (spec.phi_raw_table->size() != spec.config_count()) {
      bad("phi table must have length " + std::to_string(spec.config_count()));
    }
    if (!spec.phi_raw_table->isFinite().all()) bad("phi table has a non-finite entry");
  }
}

std::int64_t flat_index(const ModelSpec& spec, const std::vector<int>& symbols) {
  if (static_cast<int>(symbols.size()) != spec.coords()) {
    bad("symbol tuple must have length " + std::to_string(spec.coords()));
  }
  std::int64_t flat = 0;
  std::int64_t stride = 1;
  for (int c = 0; c < spec.coords(); ++c) {
    int s = symbols[c];
    if (s < 0 || s >= spec.alphabet_size) bad("symbol out of range at coordinate " + std::to_string(c));
    flat += stride * s;
    stride *= spec.alphabet_size;
  }
  return flat;
}

std::vector<int> unflatten(const ModelSpec& spec, std::int64_t flat) {
  if (flat < 0 || flat >= spec.config_count()) bad("flat index out of range");
  std::vector<int> symbols(spec.coords());
  for (int c = 0; c < spec.coords(); ++c) {
    symbols[c] = static_cast<int>(flat % spec.alphabet_size);
    flat /= spec.alphabet_size;
  }
  return symbols;
}

JointMeasure product_measure(const ModelSpec& spec) {
  JointMeasure out;
  out.n = spec.n;
  out.alphabet_size = spec.alphabet_size;
  out.weights = Eigen::ArrayXd::Ones(spec.config_count());
  // Coordinate c has stride |S|^c; fill factor by factor.
  std::int64_t stride = 1;
  for (int c = 0; c < spec.coords(); ++c) {
    const Eigen::ArrayXd& law = spec.mu[c];
    for (std::int64_t i = 0; i < out.weights.size(); ++i) {
      out.weights[i] *= law[(i / stride) % spec.alphabet_size];
    }
    stride *= spec.alphabet_size;
  }
  return out;
}

Eigen::ArrayXd phi_table(const ModelSpec& spec) {
  if (spec.phi_raw_table) return *spec.phi_raw_table;
  Eigen::ArrayXd table(spec.config_count());
  std::map<std::uint32_t, double> assignment;
  for (std::int64_t flat = 0; flat < table.size(); ++flat) {
    std::int64_t rem = flat;
    for (int c = 0; c < spec.coords(); ++c) {
      int s = static_cast<int>(rem % spec.alphabet_size);
      rem /= spec.alphabet_size;
      assignment[static_cast<std::uint32_t>(c + 1)] = spec.alphabet_values[s];
    }
    table[flat] = evaluate_phi(*spec.phi_expr, assignment);
  }
  return table;
}

ModelSpec parse_model(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& err) {
    bad(std::string("model JSON is malformed: ") + err.what());
  }
  if (!doc.is_object()) bad("model JSON must be an object");

  ModelSpec spec;
  if (!doc.contains("n") || !doc["n"].is_number_integer()) bad("missing integer field \"n\"");
  spec.n = doc["n"].get<int>();
  if (spec.n < 1 || spec.n > 4) bad("n must be in 1..4");

  if (!doc.contains("alphabet_size") || !doc["alphabet_size"].is_number_integer()) {
    bad("missing integer field \"alphabet_size\"");
  }
  spec.alphabet_size = doc["alphabet_size"].get<int>();
  if (spec.alphabet_size < 2) bad("alphabet_size must be at least 2");

  if (doc.contains("alphabet_values")) {
    spec.alphabet_values = doc["alphabet_values"].get<std::vector<double>>();
  } else {
    spec.alphabet_values.resize(spec.alphabet_size);
    for (int s = 0; s < spec.alphabet_size; ++s) spec.alphabet_values[s] = s;
  }

  if (!doc.contains("mu") || !doc["mu"].is_object()) bad("missing object field \"mu\"");
  spec.mu.assign(spec.coords(), Eigen::ArrayXd());
  std::vector<bool> seen(spec.coords(), false);
  for (const auto& [key, value] : doc["mu"].items()) {
    SubsetId j = parse_subset_label(key, spec.n);
    if (seen[coord_of(j)]) bad("duplicate mu key \"" + key + "\"");
    seen[coord_of(j)] = true;
    auto entries = value.get<std::vector<double>>();
    spec.mu[coord_of(j)] = Eigen::Map<const Eigen::ArrayXd>(entries.data(), entries.size());
  }
  for (SubsetId j : all_subsets(spec.n)) {
    if (!seen[coord_of(j)]) bad("mu is missing subset \"" + subset_label(j) + "\"");
  }

  if (!doc.contains("phi") || !doc["phi"].is_object()) bad("missing object field \"phi\"");
  const auto& phi = doc["phi"];
  if (phi.contains("expr") && !phi.contains("table")) {
    spec.phi_expr = std::shared_ptr<const PhiExpr>(
        parse_phi(phi["expr"].get<std::string>(), spec.n));
  } else if (phi.contains("table") && !phi.contains("expr")) {
    auto entries = phi["table"].get<std::vector<double>>();
    spec.phi_raw_table = std::make_shared<const Eigen::ArrayXd>(
        Eigen::Map<const Eigen::ArrayXd>(entries.data(), entries.size()));
  } else {
    bad("phi must contain exactly one of \"expr\" or \"table\"");
  }

  validate_model(spec);
  return spec;
}

ModelSpec load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) bad("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

}  // namespace gremlab
