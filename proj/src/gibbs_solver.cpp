#include "gremlab/gibbs_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gremlab/rng.hpp"

namespace gremlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogFloor = -800.0;  // stands in for log 0 in gradients

struct CapData {
  SubsetId j;
  std::vector<std::int64_t> pm;  // full flat index -> P_J flat index
  Eigen::ArrayXd log_mu_sub;
  std::int64_t sub_size = 0;
  double cap = 0.0;
};

struct SolveWork {
  Eigen::ArrayXd mu;
  Eigen::ArrayXd phi;
  Eigen::ArrayXd log_mu;
  std::vector<std::int64_t> support;
  std::vector<CapData> caps;
};

SolveWork make_work(const ModelSpec& spec) {
  SolveWork work;
  work.mu = product_measure(spec).weights;
  work.phi = phi_table(spec);
  work.log_mu = Eigen::ArrayXd::Constant(work.mu.size(), kLogFloor);
  for (std::int64_t i = 0; i < work.mu.size(); ++i) {
    if (work.mu[i] > 0.0) {
      work.log_mu[i] = std::log(work.mu[i]);
      work.support.push_back(i);
    }
  }
  MeasureTensor mu_tensor = as_tensor(JointMeasure{spec.n, spec.alphabet_size, work.mu});
  double cap_unit = std::log(2.0) / spec.n;
  for (SubsetId j : all_subsets(spec.n)) {
    CapData cap;
    cap.j = j;
    std::vector<SubsetId> pj = power_set_coords(j);
    cap.pm = projection_map(mu_tensor.coords, spec.alphabet_size, pj);
    MeasureTensor sub = marginal(mu_tensor, pj);
    cap.sub_size = sub.weights.size();
    cap.log_mu_sub = Eigen::ArrayXd::Constant(cap.sub_size, kLogFloor);
    for (std::int64_t i = 0; i < cap.sub_size; ++i) {
      if (sub.weights[i] > 0.0) cap.log_mu_sub[i] = std::log(sub.weights[i]);
    }
    cap.cap = cap_unit * set_size(j);
    work.caps.push_back(cap);
  }
  return work;
}

// State evaluated at a logit vector over the support.
struct Point {
  Eigen::ArrayXd nu;       // full length, zero off support
  Eigen::ArrayXd log_nu;   // support order, normalized logits
  double objective = 0.0;  // <phi,nu> - H(nu|mu)
  std::vector<double> g;   // per-cap violation H_J - cap_J
  double penalized = 0.0;
};

Point evaluate(const SolveWork& work, const Eigen::ArrayXd& logits,
               const std::vector<double>& lambda, double rho) {
  Point pt;
  double lse = kNegInf;
  double lmax = logits.maxCoeff();
  double acc = 0.0;
  for (std::int64_t s = 0; s < logits.size(); ++s) acc += std::exp(logits[s] - lmax);
  lse = lmax + std::log(acc);

  pt.log_nu = logits - lse;
  pt.nu = Eigen::ArrayXd::Zero(work.mu.size());
  pt.objective = 0.0;
  for (std::size_t s = 0; s < work.support.size(); ++s) {
    std::int64_t i = work.support[s];
    double v = std::exp(pt.log_nu[static_cast<std::int64_t>(s)]);
    pt.nu[i] = v;
    pt.objective += v * (work.phi[i] - (pt.log_nu[static_cast<std::int64_t>(s)] - work.log_mu[i]));
  }

  pt.penalized = pt.objective;
  pt.g.resize(work.caps.size());
  for (std::size_t c = 0; c < work.caps.size(); ++c) {
    const CapData& cap = work.caps[c];
    Eigen::ArrayXd marg = Eigen::ArrayXd::Zero(cap.sub_size);
    for (std::int64_t i : work.support) marg[cap.pm[i]] += pt.nu[i];
    double h = 0.0;
    for (std::int64_t k = 0; k < cap.sub_size; ++k) {
      if (marg[k] > 0.0) h += marg[k] * (std::log(marg[k]) - cap.log_mu_sub[k]);
    }
    pt.g[c] = h - cap.cap;
    double active = std::max(0.0, lambda[c] + rho * pt.g[c]);
    pt.penalized -= (active * active - lambda[c] * lambda[c]) / (2.0 * rho);
  }
  return pt;
}

Eigen::ArrayXd ascent_direction(const SolveWork& work, const Point& pt,
                                const std::vector<double>& lambda, double rho) {
  Eigen::ArrayXd grad(static_cast<std::int64_t>(work.support.size()));
  std::vector<Eigen::ArrayXd> log_marg(work.caps.size());
  std::vector<double> coef(work.caps.size());
  for (std::size_t c = 0; c < work.caps.size(); ++c) {
    const CapData& cap = work.caps[c];
    Eigen::ArrayXd marg = Eigen::ArrayXd::Zero(cap.sub_size);
    for (std::int64_t i : work.support) marg[cap.pm[i]] += pt.nu[i];
    log_marg[c] = Eigen::ArrayXd::Constant(cap.sub_size, kLogFloor);
    for (std::int64_t k = 0; k < cap.sub_size; ++k) {
      if (marg[k] > 0.0) log_marg[c][k] = std::log(marg[k]);
    }
    coef[c] = std::max(0.0, lambda[c] + rho * pt.g[c]);
  }
  for (std::size_t s = 0; s < work.support.size(); ++s) {
    std::int64_t i = work.support[s];
    double d = work.phi[i] - (pt.log_nu[static_cast<std::int64_t>(s)] - work.log_mu[i] + 1.0);
    for (std::size_t c = 0; c < work.caps.size(); ++c) {
      if (coef[c] > 0.0) {
        const CapData& cap = work.caps[c];
        d -= coef[c] * (log_marg[c][cap.pm[i]] - cap.log_mu_sub[cap.pm[i]] + 1.0);
      }
    }
    grad[static_cast<std::int64_t>(s)] = d;
  }
  return grad;
}

double exact_objective(const SolveWork& work, const Eigen::ArrayXd& nu) {
  double value = 0.0;
  for (std::int64_t i : work.support) {
    if (nu[i] > 0.0) value += nu[i] * (work.phi[i] - (std::log(nu[i]) - work.log_mu[i]));
  }
  return value;
}

// Per-cap H_J(nu) - cap_J, exact (no penalty smoothing).
std::vector<double> cap_margins(const SolveWork& work, const Eigen::ArrayXd& nu) {
  std::vector<double> out(work.caps.size());
  for (std::size_t c = 0; c < work.caps.size(); ++c) {
    const CapData& cap = work.caps[c];
    Eigen::ArrayXd marg = Eigen::ArrayXd::Zero(cap.sub_size);
    for (std::int64_t i : work.support) marg[cap.pm[i]] += nu[i];
    double h = 0.0;
    for (std::int64_t k = 0; k < cap.sub_size; ++k) {
      if (marg[k] > 0.0) h += marg[k] * (std::log(marg[k]) - cap.log_mu_sub[k]);
    }
    out[c] = h - cap.cap;
  }
  return out;
}

double caps_excess(const SolveWork& work, const Eigen::ArrayXd& nu) {
  double worst = -1e300;
  for (double g : cap_margins(work, nu)) worst = std::max(worst, g);
  return worst;
}

// Smallest pull toward the strictly feasible base law that restores every
// cap; the caps are convex with value 0 at the base law, so the pulled
// point is exactly feasible.
Eigen::ArrayXd retract_to_caps(const SolveWork& work, Eigen::ArrayXd nu) {
  if (caps_excess(work, nu) <= 0.0) return nu;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 50; ++it) {
    double mid = 0.5 * (lo + hi);
    Eigen::ArrayXd cand = nu + mid * (work.mu - nu);
    ((caps_excess(work, cand) <= 0.0) ? hi : lo) = mid;
  }
  return nu + hi * (work.mu - nu);
}

// Boundary-sliding refinement. Augmented-Lagrangian rounds leave the iterate
// within ~1e-5 of the optimum in value; stepping along the objective gradient
// projected off the active cap gradients, then retracting onto the feasible
// set, recovers the remaining first-order error. Worthwhile only for tensors
// small enough that the retraction bisections stay cheap.
Eigen::ArrayXd slide_polish(const SolveWork& work, Eigen::ArrayXd nu) {
  const auto size = static_cast<std::int64_t>(work.support.size());
  nu = 0.999 * nu + 0.001 * work.mu;  // strictly feasible interior start
  nu = retract_to_caps(work, nu);
  double value = exact_objective(work, nu);
  double eta = 0.1;
  for (int iter = 0; iter < 5000 && eta > 1e-13; ++iter) {
    std::vector<double> margins = cap_margins(work, nu);
    Eigen::ArrayXd g(size);
    for (std::int64_t s = 0; s < size; ++s) {
      std::int64_t i = work.support[s];
      g[s] = work.phi[i] - (std::log(std::max(nu[i], 1e-300)) - work.log_mu[i]) - 1.0;
    }
    g -= g.mean();
    std::vector<Eigen::ArrayXd> normals;
    for (std::size_t c = 0; c < work.caps.size(); ++c) {
      if (margins[c] < -1e-7) continue;
      const CapData& cap = work.caps[c];
      Eigen::ArrayXd marg = Eigen::ArrayXd::Zero(cap.sub_size);
      for (std::int64_t i : work.support) marg[cap.pm[i]] += nu[i];
      Eigen::ArrayXd normal(size);
      for (std::int64_t s = 0; s < size; ++s) {
        std::int64_t k = cap.pm[work.support[s]];
        normal[s] = std::log(std::max(marg[k], 1e-300)) - cap.log_mu_sub[k] + 1.0;
      }
      normal -= normal.mean();
      for (const Eigen::ArrayXd& u : normals) {
        double uu = (u * u).sum();
        if (uu > 1e-18) normal -= ((normal * u).sum() / uu) * u;
      }
      if ((normal * normal).sum() > 1e-14) normals.push_back(std::move(normal));
    }
    Eigen::ArrayXd d = g;
    for (const Eigen::ArrayXd& u : normals) {
      double uu = (u * u).sum();
      if (uu > 1e-18) d -= ((d * u).sum() / uu) * u;
    }
    if (std::sqrt((d * d).sum()) < 1e-10) break;
    bool moved = false;
    for (double s = eta; s > 1e-13; s *= 0.5) {
      Eigen::ArrayXd cand = nu;
      bool negative = false;
      for (std::int64_t k = 0; k < size; ++k) {
        cand[work.support[k]] += s * d[k];
        negative = negative || cand[work.support[k]] < 0.0;
      }
      if (negative) continue;
      cand = retract_to_caps(work, cand);
      double cand_value = exact_objective(work, cand);
      if (cand_value > value + 1e-16) {
        nu = std::move(cand);
        value = cand_value;
        eta = std::min(0.5, s * 2.0);
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return nu;
}

struct RestartOutcome {
  Eigen::ArrayXd nu;
  double value = kNegInf;
  bool success = false;
  int iterations = 0;
};

RestartOutcome run_restart(const SolveWork& work, Eigen::ArrayXd logits,
                           const GibbsSolveOptions& opt) {
  std::vector<double> lambda(work.caps.size(), 0.0);
  RestartOutcome out;
  Point pt = evaluate(work, logits, lambda, opt.rho);

  for (int outer = 0; outer < opt.max_outer; ++outer) {
    double eta = 1.0;
    for (int inner = 0; inner < opt.max_inner; ++inner) {
      Eigen::ArrayXd grad = ascent_direction(work, pt, lambda, opt.rho);
      eta = std::min(1.0, eta * 2.0);
      bool accepted = false;
      while (eta >= 1e-15) {
        Eigen::ArrayXd cand_logits = pt.log_nu + eta * grad;
        Point cand = evaluate(work, cand_logits, lambda, opt.rho);
        if (cand.penalized >= pt.penalized - 1e-16 * (1.0 + std::abs(pt.penalized))) {
          double gain = cand.penalized - pt.penalized;
          pt = std::move(cand);
          ++out.iterations;
          accepted = true;
          if (gain < opt.inner_tol) inner = opt.max_inner;  // converged inside
          break;
        }
        eta *= 0.5;
      }
      if (!accepted) break;
    }

    double viol = 0.0;
    for (std::size_t c = 0; c < work.caps.size(); ++c) viol = std::max(viol, pt.g[c]);
    if (viol <= opt.outer_tol && pt.objective > out.value) {
      out.value = pt.objective;
      out.nu = pt.nu;
      out.success = true;
    }
    if (out.success && viol <= opt.outer_tol) return out;
    for (std::size_t c = 0; c < work.caps.size(); ++c) {
      lambda[c] = std::max(0.0, lambda[c] + opt.rho * pt.g[c]);
    }
    pt = evaluate(work, pt.log_nu, lambda, opt.rho);  // refresh penalty terms
  }

  // Did not reach the violation target; keep the best mildly feasible
  // iterate if any (final point, judged at the looser reporting band).
  double viol = 0.0;
  for (std::size_t c = 0; c < work.caps.size(); ++c) viol = std::max(viol, pt.g[c]);
  if (viol <= opt.feas_tol && pt.objective > out.value) {
    out.value = pt.objective;
    out.nu = pt.nu;
  }
  return out;
}

}  // namespace

std::pair<JointMeasure, double> unconstrained_tilt(const ModelSpec& spec) {
  Eigen::ArrayXd mu = product_measure(spec).weights;
  Eigen::ArrayXd phi = phi_table(spec);
  double amax = kNegInf;
  for (std::int64_t i = 0; i < mu.size(); ++i) {
    if (mu[i] > 0.0) amax = std::max(amax, phi[i]);
  }
  double z = 0.0;
  for (std::int64_t i = 0; i < mu.size(); ++i) {
    if (mu[i] > 0.0) z += mu[i] * std::exp(phi[i] - amax);
  }
  double value = amax + std::log(z);
  JointMeasure nu;
  nu.n = spec.n;
  nu.alphabet_size = spec.alphabet_size;
  nu.weights = Eigen::ArrayXd::Zero(mu.size());
  for (std::int64_t i = 0; i < mu.size(); ++i) {
    if (mu[i] > 0.0) nu.weights[i] = mu[i] * std::exp(phi[i] - value);
  }
  return {nu, value};
}

double gibbs_objective(const JointMeasure& nu, const ModelSpec& spec, double tolerance) {
  if (!check_constraints(nu, spec, tolerance).feasible) return kNegInf;
  double h = rel_entropy(as_tensor(nu), as_tensor(product_measure(spec)));
  if (!std::isfinite(h)) return kNegInf;
  return (phi_table(spec) * nu.weights).sum() - h;
}

GibbsSolveResult solve_gibbs(const ModelSpec& spec, const GibbsSolveOptions& options) {
  auto [tilt, tilt_value] = unconstrained_tilt(spec);
  GibbsSolveResult result;
  ConstraintReport tilt_report = check_constraints(tilt, spec);
  if (tilt_report.feasible) {
    result.nu_star = tilt;
    result.value = tilt_value;
    result.converged = true;
    for (const ConstraintEntry& entry : tilt_report.entries) {
      if (std::abs(entry.slack) <= options.active_tol) result.active_set.push_back(entry.j);
    }
    return result;
  }

  SolveWork work = make_work(spec);
  std::vector<RestartOutcome> outcomes;
  for (int r = 0; r < options.restarts; ++r) {
    Eigen::ArrayXd logits(static_cast<std::int64_t>(work.support.size()));
    for (std::size_t s = 0; s < work.support.size(); ++s) {
      double jitter = 0.0;
      if (r > 0) {
        std::uint64_t bits =
            mix64(options.seed ^ mix64(static_cast<std::uint64_t>(r) << 32 | s));
        jitter = 4.0 * unit_double(bits) - 2.0;
      }
      logits[static_cast<std::int64_t>(s)] = work.log_mu[work.support[s]] + jitter;
    }
    outcomes.push_back(run_restart(work, logits, options));
  }

  const RestartOutcome* best = nullptr;
  double lo = std::numeric_limits<double>::infinity(), hi = kNegInf;
  bool all_success = true;
  for (const RestartOutcome& out : outcomes) {
    result.iterations += out.iterations;
    all_success = all_success && out.success;
    if (out.value > kNegInf) {
      lo = std::min(lo, out.value);
      hi = std::max(hi, out.value);
      if (!best || out.value > best->value) best = &out;
    }
  }
  if (!best) {  // nothing feasible found; report the base law
    result.nu_star = product_measure(spec);
    result.value = gibbs_objective(result.nu_star, spec);
    result.converged = false;
    return result;
  }
  result.nu_star = JointMeasure{spec.n, spec.alphabet_size, best->nu};
  result.value = best->value;
  if (static_cast<std::int64_t>(work.mu.size()) <= 4096) {
    Eigen::ArrayXd polished = slide_polish(work, best->nu);
    double polished_value = exact_objective(work, polished);
    if (polished_value > result.value) {
      result.nu_star = JointMeasure{spec.n, spec.alphabet_size, polished};
      result.value = polished_value;
    }
  }
  result.converged = all_success && (hi - lo) <= options.agree_tol;
  ConstraintReport report = check_constraints(result.nu_star, spec, options.feas_tol);
  for (const ConstraintEntry& entry : report.entries) {
    if (std::abs(entry.slack) <= options.active_tol) result.active_set.push_back(entry.j);
  }
  return result;
}

}  // namespace gremlab
