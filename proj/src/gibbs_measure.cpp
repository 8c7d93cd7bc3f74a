#include "gremlab/gibbs_measure.hpp"

#include <cmath>
#include <stdexcept>

namespace gremlab {

GibbsStructure build_gibbs(const ModelSpec& spec, const Chain& chain, const Eigen::VectorXd& m) {
  PhiStack stack = phi_stack(spec, chain, m);
  Eigen::VectorXd mc = m.cwiseMax(kEpsM).cwiseMin(1.0);
  int n = spec.n;

  GibbsStructure gs;
  gs.chain = chain;
  gs.m = mc;
  gs.kernels.resize(n + 1);
  gs.level_marginals.resize(n + 1);

  const Eigen::ArrayXd& w1 = stack.level_weights[1];
  gs.gamma = Eigen::ArrayXd::Zero(w1.size());
  for (std::int64_t y = 0; y < w1.size(); ++y) {
    if (w1[y] > 0.0) {
      gs.gamma[y] =
          std::exp(mc[0] * (stack.tables[1][y] - stack.tables[0](0)) + std::log(w1[y]));
    }
  }
  if (std::abs(gs.gamma.sum() - 1.0) > 1e-10) {
    throw std::runtime_error("first-level law failed to normalize");
  }
  gs.level_marginals[1] = gs.gamma;

  for (int j = 2; j <= n; ++j) {
    const Eigen::ArrayXd& w = stack.level_weights[j];
    std::int64_t sx = stack.tables[j - 1].size();
    Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(sx, w.size());
    for (std::int64_t y = 0; y < w.size(); ++y) {
      if (w[y] <= 0.0) continue;
      double lw = std::log(w[y]);
      for (std::int64_t x = 0; x < sx; ++x) {
        kernel(x, y) = std::exp(
            mc[j - 1] * (stack.tables[j][x + sx * y] - stack.tables[j - 1][x]) + lw);
      }
    }
    for (std::int64_t x = 0; x < sx; ++x) {
      if (std::abs(kernel.row(x).sum() - 1.0) > 1e-10) {
        throw std::runtime_error("kernel row failed to normalize");
      }
    }
    Eigen::ArrayXd marg(sx * w.size());
    const Eigen::ArrayXd& prev = gs.level_marginals[j - 1];
    for (std::int64_t y = 0; y < w.size(); ++y) {
      for (std::int64_t x = 0; x < sx; ++x) marg[x + sx * y] = prev[x] * kernel(x, y);
    }
    gs.level_marginals[j] = marg;
    gs.kernels[j] = std::move(kernel);
  }
  return gs;
}

JointMeasure flatten(const GibbsStructure& gs, const ModelSpec& spec) {
  const Eigen::ArrayXd& top = gs.level_marginals[spec.n];
  std::vector<std::int64_t> remap =
      projection_map(gs.chain.coord_order, spec.alphabet_size, all_subsets(spec.n));
  JointMeasure out;
  out.n = spec.n;
  out.alphabet_size = spec.alphabet_size;
  out.weights.resize(top.size());
  for (std::int64_t i = 0; i < top.size(); ++i) out.weights[remap[i]] = top[i];
  return out;
}

ConstraintReport audit_constraints(const GibbsStructure& gs, const ModelSpec& spec,
                                   double tolerance) {
  return check_constraints(flatten(gs, spec), spec, tolerance);
}

}  // namespace gremlab
