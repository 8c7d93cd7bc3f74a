#include "gremlab/parisi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gremlab/measure.hpp"
#include "gremlab/rng.hpp"

namespace gremlab {

namespace {

Eigen::VectorXd clamp_box(const Eigen::VectorXd& m) {
  return m.cwiseMax(kEpsM).cwiseMin(1.0);
}

// Chain-invariant data reused across solver iterations.
struct ChainWork {
  int n = 1;
  int q = 2;
  Eigen::ArrayXd phi;                     // chain coordinate order
  std::vector<Eigen::ArrayXd> weights;    // weights[k], k = 1..n: base law of level block
  std::vector<std::int64_t> state_size;   // state_size[k] = q^(2^(k-1)-1), source states of level k
};

ChainWork make_work(const ModelSpec& spec, const Chain& chain) {
  ChainWork work;
  work.n = spec.n;
  work.q = spec.alphabet_size;

  Eigen::ArrayXd canonical = phi_table(spec);
  std::vector<std::int64_t> remap =
      projection_map(chain.coord_order, spec.alphabet_size, all_subsets(spec.n));
  work.phi.resize(canonical.size());
  for (std::int64_t i = 0; i < canonical.size(); ++i) work.phi[i] = canonical[remap[i]];

  work.weights.resize(spec.n + 1);
  work.state_size.resize(spec.n + 1);
  for (int k = 1; k <= spec.n; ++k) {
    int block_coords = 1 << (k - 1);  // |T_k| = 2^(k-1)
    work.state_size[k] = tensor_size(spec.alphabet_size, block_coords - 1);
    Eigen::ArrayXd w = Eigen::ArrayXd::Ones(tensor_size(spec.alphabet_size, block_coords));
    std::int64_t stride = 1;
    for (int t = 0; t < block_coords; ++t) {
      SubsetId j = chain.coord_order[(block_coords - 1) + t];
      const Eigen::ArrayXd& law = spec.mu[coord_of(j)];
      for (std::int64_t i = 0; i < w.size(); ++i) w[i] *= law[(i / stride) % spec.alphabet_size];
      stride *= spec.alphabet_size;
    }
    work.weights[k] = w;
  }
  return work;
}

// One backward level: out(x) = (1/mk) log sum_y exp(mk in(x,y)) w(y),
// stabilized by the max over positive-weight entries.
Eigen::ArrayXd collapse_level(const Eigen::ArrayXd& in, const Eigen::ArrayXd& w,
                              std::int64_t state_size, double mk) {
  Eigen::ArrayXd out(state_size);
  std::int64_t block = w.size();
  for (std::int64_t x = 0; x < state_size; ++x) {
    double amax = -std::numeric_limits<double>::infinity();
    for (std::int64_t y = 0; y < block; ++y) {
      if (w[y] > 0.0) amax = std::max(amax, mk * in[x + state_size * y]);
    }
    double sum = 0.0;
    for (std::int64_t y = 0; y < block; ++y) {
      if (w[y] > 0.0) sum += w[y] * std::exp(mk * in[x + state_size * y] - amax);
    }
    out[x] = (amax + std::log(sum)) / mk;
  }
  return out;
}

std::vector<Eigen::ArrayXd> all_levels(const ChainWork& work, const Eigen::VectorXd& m) {
  std::vector<Eigen::ArrayXd> tables(work.n + 1);
  tables[work.n] = work.phi;
  for (int k = work.n; k >= 1; --k) {
    tables[k - 1] = collapse_level(tables[k], work.weights[k], work.state_size[k], m[k - 1]);
  }
  return tables;
}

double root_value(const ChainWork& work, const Eigen::VectorXd& m) {
  Eigen::ArrayXd cur = work.phi;
  for (int k = work.n; k >= 1; --k) {
    cur = collapse_level(cur, work.weights[k], work.state_size[k], m[k - 1]);
  }
  return cur[0];
}

double value_of(const ChainWork& work, const Eigen::VectorXd& m) {
  double sum_inv = 0.0;
  for (int k = 0; k < work.n; ++k) sum_inv += 1.0 / m[k];
  return (std::log(2.0) / work.n) * sum_inv + root_value(work, m);
}

Eigen::VectorXd grad_of(const ChainWork& work, const Eigen::VectorXd& m) {
  std::vector<Eigen::ArrayXd> tables = all_levels(work, m);
  double cap_unit = std::log(2.0) / work.n;
  Eigen::VectorXd grad(work.n);

  // Level marginals of the tilted measure, built forward. Conditional rows
  // K(x,y) = exp(mk (f_k(x,y) - f_{k-1}(x))) w(y) never exceed 1.
  Eigen::ArrayXd g_prev = Eigen::ArrayXd::Ones(1);
  double e_prev = tables[0](0);
  for (int k = 1; k <= work.n; ++k) {
    double mk = m[k - 1];
    const Eigen::ArrayXd& w = work.weights[k];
    std::int64_t sx = work.state_size[k];
    Eigen::ArrayXd g(sx * w.size());
    for (std::int64_t y = 0; y < w.size(); ++y) {
      if (w[y] <= 0.0) {
        g.segment(sx * y, sx).setZero();
        continue;
      }
      double lw = std::log(w[y]);
      for (std::int64_t x = 0; x < sx; ++x) {
        g[x + sx * y] =
            g_prev[x] * std::exp(mk * (tables[k][x + sx * y] - tables[k - 1][x]) + lw);
      }
    }
    double e_k = (g * tables[k]).sum();
    double level_entropy = mk * (e_k - e_prev);
    grad[k - 1] = (level_entropy - cap_unit) / (mk * mk);
    g_prev = std::move(g);
    e_prev = e_k;
  }
  return grad;
}

struct PgdRun {
  Eigen::VectorXd m;
  double value = 0.0;
  bool converged = false;
};

PgdRun run_pgd(const ChainWork& work, Eigen::VectorXd m, const ParisiMinOptions& opt) {
  m = project_ordered_box(m, kEpsM, 1.0);
  double f = value_of(work, m);
  double step = 1.0;
  PgdRun run;
  for (int iter = 0; iter < opt.max_iters; ++iter) {
    Eigen::VectorXd g = grad_of(work, m);
    double pg = (m - project_ordered_box(m - g, kEpsM, 1.0)).norm();
    if (pg < opt.pg_tol) {
      run.converged = true;
      break;
    }
    // Armijo backtracking along the projection arc. Near the minimum the
    // required decrease drops below double resolution; from there accept
    // non-increasing moves at a small fixed step, which still contracts the
    // iterate toward the fixed point of the projected map.
    double s = std::min(1.0, step * 2.0);
    bool moved = false;
    while (s >= 1e-18) {
      Eigen::VectorXd cand = project_ordered_box(m - s * g, kEpsM, 1.0);
      double dd = (m - cand).squaredNorm();
      if (dd == 0.0) break;
      double fc = value_of(work, cand);
      bool armijo = fc <= f - (opt.armijo_c / s) * dd;
      bool noise_floor = (opt.armijo_c / s) * dd < 1e-14 * (1.0 + std::abs(f));
      if (armijo || (noise_floor && fc <= f + 1e-14 * (1.0 + std::abs(f)))) {
        m = cand;
        f = fc;
        step = s;
        moved = true;
        break;
      }
      s *= 0.5;
    }
    if (!moved) break;  // no representable progress left
  }
  // Gradient-flow polish. The line search above is limited by the resolution
  // of the value itself, which leaves residual gradients of order 1e-7 and,
  // through the stationarity identity, constraint slacks of the same order.
  // Plain projected steps driven by the analytic gradient alone contract to
  // the stationary point without consulting the value, so they push the
  // projected gradient to ~1e-12; the value only brakes genuine divergence.
  double eta = std::min(1.0, step);
  for (int iter = 0; iter < 20000; ++iter) {
    Eigen::VectorXd g = grad_of(work, m);
    if ((m - project_ordered_box(m - g, kEpsM, 1.0)).norm() <= 1e-12) break;
    Eigen::VectorXd cand = project_ordered_box(m - eta * g, kEpsM, 1.0);
    if (cand == m) break;
    double fc = value_of(work, cand);
    if (fc <= f + 1e-12 * (1.0 + std::abs(f))) {
      m = cand;
      f = std::min(f, fc);
    } else {
      eta *= 0.5;
      if (eta < 1e-10) break;
    }
  }
  Eigen::VectorXd g = grad_of(work, m);
  run.converged = (m - project_ordered_box(m - g, kEpsM, 1.0)).norm() < opt.pg_tol;
  run.m = m;
  run.value = value_of(work, m);
  return run;
}

std::uint64_t chain_salt(const Chain& chain) {
  std::uint64_t h = 0;
  for (int s : chain.perm) h = mix64(h ^ static_cast<std::uint64_t>(s));
  return h;
}

}  // namespace

PhiStack phi_stack(const ModelSpec& spec, const Chain& chain, const Eigen::VectorXd& m) {
  ChainWork work = make_work(spec, chain);
  Eigen::VectorXd mc = clamp_box(m);
  PhiStack stack;
  stack.tables = all_levels(work, mc);
  stack.level_weights = work.weights;
  return stack;
}

double parisi_value(const ModelSpec& spec, const Chain& chain, const Eigen::VectorXd& m) {
  return value_of(make_work(spec, chain), clamp_box(m));
}

Eigen::VectorXd parisi_grad(const ModelSpec& spec, const Chain& chain, const Eigen::VectorXd& m) {
  return grad_of(make_work(spec, chain), clamp_box(m));
}

Eigen::VectorXd isotonic_projection(const Eigen::VectorXd& x) {
  int n = static_cast<int>(x.size());
  std::vector<double> mean;
  std::vector<int> count;
  for (int i = 0; i < n; ++i) {
    mean.push_back(x[i]);
    count.push_back(1);
    while (mean.size() >= 2 && mean[mean.size() - 2] >= mean.back()) {
      double total = mean[mean.size() - 2] * count[count.size() - 2] + mean.back() * count.back();
      int c = count[count.size() - 2] + count.back();
      mean.pop_back();
      count.pop_back();
      mean.back() = total / c;
      count.back() = c;
    }
  }
  Eigen::VectorXd out(n);
  int at = 0;
  for (std::size_t b = 0; b < mean.size(); ++b) {
    for (int i = 0; i < count[b]; ++i) out[at++] = mean[b];
  }
  return out;
}

Eigen::VectorXd project_ordered_box(const Eigen::VectorXd& x, double lo, double hi) {
  return isotonic_projection(x).cwiseMax(lo).cwiseMin(hi);
}

ParisiPoint minimize_parisi(const ModelSpec& spec, const Chain& chain,
                            const ParisiMinOptions& options) {
  ChainWork work = make_work(spec, chain);
  std::uint64_t salt = mix64(options.seed ^ chain_salt(chain));

  std::vector<PgdRun> runs;
  runs.push_back(run_pgd(work, Eigen::VectorXd::Ones(spec.n), options));
  for (int s = 0; s < options.random_starts; ++s) {
    Eigen::VectorXd m0(spec.n);
    for (int k = 0; k < spec.n; ++k) {
      std::uint64_t bits = mix64(salt ^ (static_cast<std::uint64_t>(s) << 32 | k));
      m0[k] = kEpsM + (1.0 - kEpsM) * unit_double(bits);
    }
    std::sort(m0.data(), m0.data() + m0.size());
    runs.push_back(run_pgd(work, m0, options));
  }

  const PgdRun* best = &runs[0];
  double lo = runs[0].value, hi = runs[0].value;
  bool all_converged = runs[0].converged;
  for (const PgdRun& run : runs) {
    lo = std::min(lo, run.value);
    hi = std::max(hi, run.value);
    all_converged = all_converged && run.converged;
    if (run.value < best->value) best = &run;
  }

  ParisiPoint point;
  point.chain = chain;
  point.m = best->m;
  point.value = best->value;
  point.grad = grad_of(work, best->m);
  point.converged = all_converged && (hi - lo) <= options.agree_tol;
  return point;
}

GlobalParisiResult global_parisi_min(const ModelSpec& spec, const ParisiMinOptions& options) {
  GlobalParisiResult result;
  for (const Chain& chain : enumerate_chains(spec.n)) {
    result.per_chain.push_back(minimize_parisi(spec, chain, options));
  }
  result.best = result.per_chain[0];
  for (const ParisiPoint& point : result.per_chain) {
    if (point.value < result.best.value) result.best = point;
  }
  return result;
}

}  // namespace gremlab
