#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "gremlab/report.hpp"
#include "helpers.hpp"
#include "json.hpp"

using namespace gremlab;
using namespace gremlab::testutil;

TEST_CASE("formatted doubles reparse to the identical bits") {
  const double values[] = {0.0,     -0.0,        0.1,    1.0 / 3.0, 1e-300, 1e300,
                           2.5e-15, 4.9406564584124654e-324, 3.141592653589793,
                           -123456789.123456789};
  for (double x : values) {
    std::string text = format_double(x);
    double back = std::strtod(text.c_str(), nullptr);
    CHECK(std::memcmp(&back, &x, sizeof x) == 0);
  }
}

TEST_CASE("json trees dump deterministically and escape strings") {
  JsonValue root;
  root.add("name", "line1\nline2\t\"quoted\" back\\slash");
  root.add("count", std::int64_t{42});
  root.add("ratio", 0.125);
  root.add("flag", true);
  root.add("nothing", JsonValue{});
  JsonValue arr;
  arr.push(1).push(2).push("three");
  root.add("items", std::move(arr));
  JsonValue inner;
  inner.add("control", std::string("\x01"));
  root.add("inner", std::move(inner));

  std::string first = root.dump();
  CHECK(first == root.dump());
  CHECK(first.back() == '\n');

  nlohmann::json parsed = nlohmann::json::parse(first);
  CHECK(parsed["name"] == "line1\nline2\t\"quoted\" back\\slash");
  CHECK(parsed["count"] == 42);
  CHECK(parsed["ratio"] == 0.125);
  CHECK(parsed["flag"] == true);
  CHECK(parsed["nothing"].is_null());
  CHECK(parsed["items"].size() == 3);
  CHECK(parsed["items"][2] == "three");
  CHECK(parsed["inner"]["control"] == "\x01");

  // non-finite doubles degrade to null rather than invalid JSON
  JsonValue bad;
  bad.add("inf", std::exp(1000.0));
  CHECK(nlohmann::json::parse(bad.dump())["inf"].is_null());
}

TEST_CASE("constraint reports serialize their entries") {
  ModelSpec spec = zero_model(2);
  ConstraintReport report = check_constraints(product_measure(spec), spec);
  nlohmann::json parsed = nlohmann::json::parse(to_json(report).dump());
  CHECK(parsed["feasible"] == true);
  REQUIRE(parsed["entries"].size() == 3);
  CHECK(parsed["entries"][0]["subset"] == "1");
  CHECK(parsed["entries"][2]["subset"] == "12");
  CHECK(parsed["entries"][2]["cap"].get<double>() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("model digests are stable, sensitive, and hex-shaped") {
  ModelSpec a = two_point_model(1.0);
  std::string digest = digest_model(a);
  CHECK(digest.size() == 16);
  CHECK(digest.find_first_not_of("0123456789abcdef") == std::string::npos);
  CHECK(digest_model(a) == digest);

  ModelSpec b = two_point_model(1.0 + 1e-12);
  CHECK(digest_model(b) != digest);
  ModelSpec c = a;
  c.mu[0] = law2(0.25, 0.75);
  CHECK(digest_model(c) != digest);
}

TEST_CASE("default sweeps depend on the species count") {
  CHECK(default_sweep(1) == std::vector<int>{8, 12, 16, 20});
  CHECK(default_sweep(2) == std::vector<int>{8, 12, 16, 20});
  CHECK(default_sweep(3) == std::vector<int>{9, 12, 15, 18});
  CHECK(default_sweep(4) == std::vector<int>{8, 12});
}

TEST_CASE("verification of the zero interaction passes every criterion") {
  ModelSpec spec = zero_model(1);
  VerifyOptions options;
  options.sweep = {8};
  VerifyReport report = run_verify(spec, options);
  CHECK(report.all_passed);
  CHECK(report.identity_residual <= 1e-9);
  REQUIRE(report.montecarlo.size() == 1);
  CHECK(report.montecarlo[0].N == 8);
  CHECK(report.montecarlo[0].gap == 0.0);  // enumeration is exact here
  CHECK(report.montecarlo[0].target == doctest::Approx(0.0).epsilon(1e-12));

  std::vector<std::string> names;
  for (const CriterionResult& criterion : report.criteria) {
    names.push_back(criterion.name);
    CHECK(criterion.passed);
  }
  CHECK(names == std::vector<std::string>{"identity", "gradient", "entropy_chain_rule",
                                          "entropy_monotonicity", "audit", "montecarlo"});
}

TEST_CASE("verification passes on an instance with an active cap") {
  ModelSpec spec = two_point_model(3.0);
  VerifyOptions options;
  options.sweep = {8, 12};
  VerifyReport report = run_verify(spec, options);
  CHECK(report.all_passed);
  CHECK(report.identity_residual <= 1e-6);
  CHECK(report.audit.feasible);
  REQUIRE(report.montecarlo.size() == 2);
  CHECK(report.montecarlo[1].gap <= 0.05);

  nlohmann::json parsed = nlohmann::json::parse(report_to_json(report).dump());
  CHECK(parsed["model_digest"] == report.model_digest);
  CHECK(parsed["identity_residual"].get<double>() ==
        doctest::Approx(report.identity_residual).epsilon(1e-15));
}

TEST_CASE("disabled checks keep their slot but always pass") {
  ModelSpec spec = zero_model(1);
  VerifyOptions options;
  options.check_montecarlo = false;
  options.check_gradient = false;
  VerifyReport report = run_verify(spec, options);
  CHECK(report.all_passed);
  CHECK(report.montecarlo.empty());
  for (const CriterionResult& criterion : report.criteria) {
    if (criterion.name == "montecarlo" || criterion.name == "gradient") {
      CHECK(!criterion.enabled);
      CHECK(criterion.passed);
    }
  }
  CHECK(montecarlo_csv(report) == "N,F_N,target,gap\n");
}

TEST_CASE("the enumeration series renders as CSV rows") {
  ModelSpec spec = zero_model(1);
  VerifyOptions options;
  options.sweep = {4, 8};
  VerifyReport report = run_verify(spec, options);
  std::string csv = montecarlo_csv(report);
  CHECK(csv.rfind("N,F_N,target,gap\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.find("\n4,") != std::string::npos);
  CHECK(csv.find("\n8,") != std::string::npos);
}
