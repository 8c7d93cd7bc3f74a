#pragma once

#include <vector>

#include "gremlab/subsets.hpp"

namespace gremlab {

/// A maximal nested family of species sets, represented by the permutation
/// (a_1,..,a_n) that generates it: A_k = {a_1,..,a_k}. Level set T_k holds
/// the subsets first covered at level k (J subset of A_k, J not subset of
/// A_{k-1}); level k_J of a subset is the largest permutation position of
/// any of its species.
struct Chain {
  std::vector<int> perm;                      // species, 1-based
  std::vector<SubsetId> A;                    // A[k-1] = A_k; A.back() = full set
  std::vector<std::vector<SubsetId>> levels;  // levels[k-1] = T_k, ascending mask
  std::vector<int> level_of;                  // level_of[coord_of(J)] = k_J
  std::vector<SubsetId> coord_order;          // all subsets sorted by (k_J, mask)
};

/// Builds the chain generated by a permutation of 1..n. Throws
/// std::invalid_argument if perm is not such a permutation.
Chain make_chain(const std::vector<int>& perm);

/// All n! chains in lexicographic order of their permutations.
std::vector<Chain> enumerate_chains(int n);

/// Recomputes (levels, level_of) from a chain's nested sets alone, without
/// using the permutation positions. Checking counterpart of make_chain.
std::pair<std::vector<std::vector<SubsetId>>, std::vector<int>> level_sets(const Chain& chain);

/// The first 2^k - 1 chain-ordered coordinates, i.e. T_1 u .. u T_k. Equals
/// the power set of A_k.
std::vector<SubsetId> chain_prefix(const Chain& chain, int k);

/// Replacement chain whose set at level |J| is exactly J and which agrees
/// with the input from level k_J upward: the species of J come first, then
/// the rest of A_{k_J}, both in increasing species order, then the original
/// tail. Its nested sets at positions k_J..n match the input's, and so do
/// the level sets above k_J (at k_J itself the last-added species differs,
/// so that level set is redistributed).
Chain swap_chain(const Chain& chain, SubsetId J);

/// "a1<a2<...": CLI rendering of the permutation.
std::string chain_label(const Chain& chain);

}  // namespace gremlab
