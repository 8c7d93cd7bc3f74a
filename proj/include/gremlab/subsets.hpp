#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gremlab {

/// Nonempty subset J of the species set {1,..,n}, encoded as a bitmask
/// (bit j-1 set iff species j is in J). The canonical order of the 2^n - 1
/// subsets is increasing mask value, so the canonical coordinate index of
/// a subset is simply mask - 1.
struct SubsetId {
  std::uint32_t mask = 0;

  constexpr bool operator==(const SubsetId&) const = default;
  constexpr auto operator<=>(const SubsetId&) const = default;
};

constexpr int subset_count(int n) { return (1 << n) - 1; }

constexpr int coord_of(SubsetId j) { return static_cast<int>(j.mask) - 1; }

constexpr SubsetId full_set(int n) {
  return SubsetId{static_cast<std::uint32_t>((1u << n) - 1u)};
}

constexpr bool contains(SubsetId j, int species) {
  return (j.mask >> (species - 1)) & 1u;
}

constexpr bool is_subset_of(SubsetId a, SubsetId b) {
  return (a.mask & ~b.mask) == 0;
}

int set_size(SubsetId j);

/// All nonempty subsets of {1,..,n} in canonical (ascending mask) order.
std::vector<SubsetId> all_subsets(int n);

/// All nonempty subsets K of J, ascending mask order. This is the index set
/// written P_J below; for J = I it is the whole canonical coordinate list.
std::vector<SubsetId> power_set_coords(SubsetId j);

/// Species of J in increasing order (1-based).
std::vector<int> species_of(SubsetId j);

/// "12", "134", ...: concatenated increasing species digits.
std::string subset_label(SubsetId j);

/// Inverse of subset_label. Throws std::invalid_argument on malformed keys
/// (digits not strictly increasing, species outside 1..n, empty).
SubsetId parse_subset_label(const std::string& key, int n);

}  // namespace gremlab
