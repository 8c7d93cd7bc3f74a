#include "gremlab/chains.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace gremlab {

Chain make_chain(const std::vector<int>& perm) {
  int n = static_cast<int>(perm.size());
  if (n < 1 || n > 4) throw std::invalid_argument("species count must be in 1..4");
  std::vector<int> sorted = perm;
  std::sort(sorted.begin(), sorted.end());
  for (int k = 0; k < n; ++k) {
    if (sorted[k] != k + 1) throw std::invalid_argument("chain must be a permutation of 1..n");
  }

  Chain chain;
  chain.perm = perm;
  std::uint32_t acc = 0;
  for (int k = 0; k < n; ++k) {
    acc |= 1u << (perm[k] - 1);
    chain.A.push_back(SubsetId{acc});
  }

  chain.level_of.assign(subset_count(n), 0);
  chain.levels.assign(n, {});
  for (SubsetId j : all_subsets(n)) {
    int k = 1;
    while (!is_subset_of(j, chain.A[k - 1])) ++k;
    chain.level_of[coord_of(j)] = k;
    chain.levels[k - 1].push_back(j);  // ascending mask: all_subsets order
  }

  chain.coord_order = all_subsets(n);
  std::stable_sort(chain.coord_order.begin(), chain.coord_order.end(),
                   [&](SubsetId a, SubsetId b) {
                     return chain.level_of[coord_of(a)] < chain.level_of[coord_of(b)];
                   });
  return chain;
}

std::vector<Chain> enumerate_chains(int n) {
  if (n < 1 || n > 4) throw std::invalid_argument("species count must be in 1..4");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 1);
  std::vector<Chain> chains;
  do {
    chains.push_back(make_chain(perm));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return chains;
}

std::pair<std::vector<std::vector<SubsetId>>, std::vector<int>> level_sets(const Chain& chain) {
  int n = static_cast<int>(chain.perm.size());
  std::vector<std::vector<SubsetId>> levels(n);
  std::vector<int> level_of(subset_count(n), 0);
  for (SubsetId j : all_subsets(n)) {
    for (int k = 1; k <= n; ++k) {
      bool in_k = is_subset_of(j, chain.A[k - 1]);
      bool in_prev = k > 1 && is_subset_of(j, chain.A[k - 2]);
      if (in_k && !in_prev) {
        levels[k - 1].push_back(j);
        level_of[coord_of(j)] = k;
        break;
      }
    }
  }
  return {levels, level_of};
}

std::vector<SubsetId> chain_prefix(const Chain& chain, int k) {
  if (k < 1 || k > static_cast<int>(chain.perm.size())) {
    throw std::invalid_argument("chain prefix level out of range");
  }
  return {chain.coord_order.begin(), chain.coord_order.begin() + (subset_count(k))};
}

Chain swap_chain(const Chain& chain, SubsetId J) {
  int n = static_cast<int>(chain.perm.size());
  int kJ = chain.level_of[coord_of(J)];
  if (!is_subset_of(J, chain.A[kJ - 1])) {
    throw std::logic_error("subset escapes its own level prefix");
  }
  // J's species first, then the rest of A_{k_J}, both in increasing order,
  // then the untouched tail. Levels k_J..n keep their nested sets.
  std::vector<int> perm = species_of(J);
  for (int s : species_of(chain.A[kJ - 1])) {
    if (!contains(J, s)) perm.push_back(s);
  }
  for (int k = kJ; k < n; ++k) perm.push_back(chain.perm[k]);
  return make_chain(perm);
}

std::string chain_label(const Chain& chain) {
  std::string out;
  for (std::size_t k = 0; k < chain.perm.size(); ++k) {
    if (k) out += '<';
    out += static_cast<char>('0' + chain.perm[k]);
  }
  return out;
}

}  // namespace gremlab
