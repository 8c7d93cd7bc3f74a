#include "gremlab/subsets.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace gremlab {

int set_size(SubsetId j) { return std::popcount(j.mask); }

std::vector<SubsetId> all_subsets(int n) {
  std::vector<SubsetId> out;
  out.reserve(subset_count(n));
  for (std::uint32_t m = 1; m <= full_set(n).mask; ++m) {
    out.push_back(SubsetId{m});
  }
  return out;
}

std::vector<SubsetId> power_set_coords(SubsetId j) {
  std::vector<SubsetId> out;
  // Submask enumeration ascends because submasks of j are order-isomorphic
  // to integers under the mask order.
  for (std::uint32_t s = j.mask; s != 0; s = (s - 1) & j.mask) {
    out.push_back(SubsetId{s});
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<int> species_of(SubsetId j) {
  std::vector<int> out;
  for (int s = 1; s <= 32; ++s) {
    if (contains(j, s)) out.push_back(s);
  }
  return out;
}

std::string subset_label(SubsetId j) {
  std::string out;
  for (int s : species_of(j)) out += static_cast<char>('0' + s);
  return out;
}

SubsetId parse_subset_label(const std::string& key, int n) {
  if (key.empty()) throw std::invalid_argument("subset key is empty");
  std::uint32_t mask = 0;
  int prev = 0;
  for (char c : key) {
    if (c < '1' || c > '9') {
      throw std::invalid_argument("subset key '" + key + "' has non-digit character");
    }
    int s = c - '0';
    if (s <= prev) {
      throw std::invalid_argument("subset key '" + key + "' digits must be strictly increasing");
    }
    if (s > n) {
      throw std::invalid_argument("subset key '" + key + "' names species " + std::to_string(s) +
                                  " but n = " + std::to_string(n));
    }
    mask |= 1u << (s - 1);
    prev = s;
  }
  return SubsetId{mask};
}

}  // namespace gremlab
