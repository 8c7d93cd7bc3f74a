#pragma once

#include <Eigen/Core>
#include <vector>

#include "gremlab/chains.hpp"
#include "gremlab/measure.hpp"
#include "gremlab/model.hpp"
#include "gremlab/parisi.hpp"

namespace gremlab {

/// Tilted measure of a chain at parameters m, kept in semi-direct product
/// form: a first-level law gamma over S, one conditional kernel per level
/// j = 2..n (rows: source states over the first 2^(j-1)-1 chain coordinates,
/// columns: level-j block states), and the per-level marginals the kernels
/// generate. All tables use chain coordinate order.
struct GibbsStructure {
  Chain chain;
  Eigen::VectorXd m;
  Eigen::ArrayXd gamma;                         // length |S|
  std::vector<Eigen::MatrixXd> kernels;         // kernels[j], j = 2..n; [0],[1] unused
  std::vector<Eigen::ArrayXd> level_marginals;  // [j] over first 2^j - 1 coords; [0] unused
};

/// gamma = exp(m1 (f1 - f0)) w1 and K_j(x,y) = exp(mj (f_j(x,y) - f_{j-1}(x))) w_j(y)
/// from the recursion stack; every row then sums to 1 by construction,
/// checked within 1e-10.
GibbsStructure build_gibbs(const ModelSpec& spec, const Chain& chain, const Eigen::VectorXd& m);

/// Re-indexes the top-level marginal to canonical coordinate order.
JointMeasure flatten(const GibbsStructure& gs, const ModelSpec& spec);

/// check_constraints applied to the flattened measure.
ConstraintReport audit_constraints(const GibbsStructure& gs, const ModelSpec& spec,
                                   double tolerance = 1e-8);

}  // namespace gremlab
