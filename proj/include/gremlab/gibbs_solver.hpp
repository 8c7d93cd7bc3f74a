#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gremlab/measure.hpp"
#include "gremlab/model.hpp"

namespace gremlab {

/// Maximizer of integral(phi dnu) - H(nu|mu) with the entropy caps ignored:
/// nu* proportional to e^phi mu, value log integral(e^phi dmu). When nu* also
/// satisfies every cap it solves the constrained problem (concave objective,
/// convex feasible set).
std::pair<JointMeasure, double> unconstrained_tilt(const ModelSpec& spec);

/// integral(phi dnu) - H(nu|mu), or -infinity when nu violates some entropy
/// cap beyond the tolerance band.
double gibbs_objective(const JointMeasure& nu, const ModelSpec& spec, double tolerance = 1e-8);

struct GibbsSolveResult {
  JointMeasure nu_star;
  double value = 0.0;
  std::vector<SubsetId> active_set;  // caps met within active_tol
  int iterations = 0;                // inner ascent steps, summed over restarts
  bool converged = false;
};

struct GibbsSolveOptions {
  double rho = 10.0;            // multiplier update rate of the outer loop
  double inner_tol = 1e-9;      // stop inner ascent on objective change below this
  int max_inner = 20000;        // per outer round
  double outer_tol = 1e-8;      // stop when the worst cap violation is below this
  int max_outer = 300;
  int restarts = 16;            // first restart starts at mu, the rest randomized
  double agree_tol = 1e-6;      // restart values must agree this tightly
  double feas_tol = 1e-6;       // feasibility demanded of the reported measure
  double active_tol = 1e-6;
  std::uint64_t seed = 0x5eedULL;
};

/// Entropy-cap constrained maximization. Fast path: return the tilt when it
/// is feasible. Otherwise multiplier-penalty outer loop with entropic mirror
/// ascent inside, restarted from randomized interior points; the reported
/// measure is the best feasible iterate seen.
GibbsSolveResult solve_gibbs(const ModelSpec& spec, const GibbsSolveOptions& options = {});

}  // namespace gremlab
