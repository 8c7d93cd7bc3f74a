#pragma once

#include <cstdint>
#include <string>

#include "gremlab/chains.hpp"
#include "gremlab/model.hpp"

namespace gremlab {

/// Key of one disorder draw. alpha is the mixed-radix composite of the spin
/// values of the key-set species (increasing species order, each value in
/// [0, 2^(N/n))); the key set is J itself for the exact model and the
/// chain's nested set at level k_J for a coarse-grained model. Distinct
/// keys give independent draws, identical keys identical symbols.
struct DisorderKey {
  std::uint64_t seed = 0;
  std::uint32_t subset_mask = 0;
  std::uint64_t alpha = 0;
  std::uint32_t i = 0;  // sample index, 0-based, < N
};

/// Counter-based draw: chained 64-bit mixing of the key fields to a uniform
/// variate, then inverse CDF over mu_j (cumulative capped at 1).
int draw_symbol(const DisorderKey& key, const Eigen::ArrayXd& mu_j);

struct SimResult {
  int N = 0;
  std::uint64_t seed = 0;
  std::string chain;  // "a1<a2<..." for coarse-grained keying, empty for exact
  double f = 0.0;     // (1/N) log (2^-N sum_alpha e^H), the 2^-N convention
  double wall_seconds = 0.0;
};

/// Throws std::invalid_argument unless n divides N and N 2^N fits the
/// enumeration budget: N at most {24, 24, 18, 12} for n = 1..4, or the
/// GREMLAB_BUDGET environment variable (maximum N 2^N work units) when set.
void check_sim_budget(const ModelSpec& spec, int N);

/// Exact quenched free energy by enumeration of all 2^N configurations,
/// symbols drawn on the fly per subset key set. Bit-identical for any
/// thread count: the configuration range is cut into 256 fixed blocks whose
/// partial log-sum-exp pairs merge in block order.
SimResult free_energy_exact(const ModelSpec& spec, int N, std::uint64_t seed, int threads = 1);

/// Same enumeration with subset J keyed by the chain prefix of level k_J.
SimResult free_energy_chain(const ModelSpec& spec, const Chain& chain, int N, std::uint64_t seed,
                            int threads = 1);

/// Number of configurations whose empirical symbol measure lies strictly
/// inside the total-variation ball around center.
std::int64_t count_in_ball(const ModelSpec& spec, int N, std::uint64_t seed,
                           const JointMeasure& center, double radius, int threads = 1);

}  // namespace gremlab
