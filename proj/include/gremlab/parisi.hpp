#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "gremlab/chains.hpp"
#include "gremlab/model.hpp"

namespace gremlab {

/// Lower bound of the ordered-parameter box [eps_m, 1]^n. The 1/m_k terms
/// diverge at 0, so clamping loses no minimizer.
inline constexpr double kEpsM = 1e-6;

/// Backward recursion tables: tables[k] holds the level-k function over the
/// first 2^k - 1 chain-ordered coordinates (digit 0 least significant), so
/// tables[n] is the interaction re-indexed to chain order and tables[0] is
/// the scalar root. level_weights[k] (k = 1..n) is the product base law of
/// the level-k block, in block digit order.
struct PhiStack {
  std::vector<Eigen::ArrayXd> tables;
  std::vector<Eigen::ArrayXd> level_weights;
  double root() const { return tables[0](0); }
};

/// Builds the stack for parameters m (clamped into [eps_m, 1]): each level
/// collapses its block by a weighted log-sum-exp with max-shift,
///   f_{k-1}(x) = (1/m_k) log sum_y exp(m_k f_k(x,y)) w_k(y).
PhiStack phi_stack(const ModelSpec& spec, const Chain& chain, const Eigen::VectorXd& m);

/// (log2/n) sum_k 1/m_k + root of the stack.
double parisi_value(const ModelSpec& spec, const Chain& chain, const Eigen::VectorXd& m);

/// Analytic gradient: component j equals
///   (1/m_j^2) (H(G_j | G_{j-1} (x) w_j) - log2/n),
/// with the level entropy evaluated as m_j (E_{G_j}[f_j] - E_{G_{j-1}}[f_{j-1}]).
Eigen::VectorXd parisi_grad(const ModelSpec& spec, const Chain& chain, const Eigen::VectorXd& m);

/// Pool-adjacent-violators: Euclidean projection onto the nondecreasing cone.
Eigen::VectorXd isotonic_projection(const Eigen::VectorXd& x);

/// Euclidean projection onto {lo <= m_1 <= .. <= m_n <= hi}: PAV then clamp.
Eigen::VectorXd project_ordered_box(const Eigen::VectorXd& x, double lo, double hi);

struct ParisiPoint {
  Chain chain;
  Eigen::VectorXd m;
  double value = 0.0;
  Eigen::VectorXd grad;
  bool converged = false;
};

struct ParisiMinOptions {
  double pg_tol = 1e-9;       // stop when the unit-step projected gradient is below this
  int max_iters = 100000;
  int random_starts = 8;      // in addition to the deterministic start at (1,..,1)
  double agree_tol = 1e-7;    // multi-start values must agree this tightly
  double armijo_c = 1e-4;
  std::uint64_t seed = 0x9e3779b97f4a7c15ull;
};

/// Projected gradient descent with Armijo backtracking over the ordered box,
/// run from (1,..,1) plus random_starts random points. Returns the best
/// point; converged means every start met pg_tol and all values agree
/// within agree_tol.
ParisiPoint minimize_parisi(const ModelSpec& spec, const Chain& chain,
                            const ParisiMinOptions& options = {});

struct GlobalParisiResult {
  ParisiPoint best;                    // ties broken by chain enumeration order
  std::vector<ParisiPoint> per_chain;  // one per chain, enumeration order
};

/// minimize_parisi over all n! chains.
GlobalParisiResult global_parisi_min(const ModelSpec& spec, const ParisiMinOptions& options = {});

}  // namespace gremlab
