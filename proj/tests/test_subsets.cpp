#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "gremlab/subsets.hpp"

using namespace gremlab;

TEST_CASE("subset counts and canonical coordinate order") {
  CHECK(subset_count(1) == 1);
  CHECK(subset_count(2) == 3);
  CHECK(subset_count(3) == 7);
  CHECK(subset_count(4) == 15);
  for (int n = 1; n <= 4; ++n) {
    std::vector<SubsetId> all = all_subsets(n);
    REQUIRE(static_cast<int>(all.size()) == subset_count(n));
    for (int c = 0; c < subset_count(n); ++c) {
      CHECK(all[c].mask == static_cast<std::uint32_t>(c + 1));
      CHECK(coord_of(all[c]) == c);
    }
  }
  CHECK(full_set(1).mask == 1u);
  CHECK(full_set(3).mask == 7u);
  CHECK(full_set(4).mask == 15u);
}

TEST_CASE("membership, inclusion, and size") {
  SubsetId j{0b101};  // {1,3}
  CHECK(contains(j, 1));
  CHECK(!contains(j, 2));
  CHECK(contains(j, 3));
  CHECK(is_subset_of(SubsetId{0b100}, j));
  CHECK(is_subset_of(j, j));
  CHECK(!is_subset_of(SubsetId{0b010}, j));
  CHECK(!is_subset_of(j, SubsetId{0b100}));
  CHECK(set_size(SubsetId{1}) == 1);
  CHECK(set_size(j) == 2);
  CHECK(set_size(full_set(4)) == 4);
  CHECK(species_of(j) == std::vector<int>{1, 3});
  CHECK(species_of(SubsetId{0b110}) == std::vector<int>{2, 3});
  CHECK(species_of(full_set(4)) == std::vector<int>{1, 2, 3, 4});
}

TEST_CASE("power set coordinates are the ascending nonempty subsets") {
  std::vector<SubsetId> ps = power_set_coords(SubsetId{0b101});
  REQUIRE(ps.size() == 3);
  CHECK(ps[0].mask == 0b001u);
  CHECK(ps[1].mask == 0b100u);
  CHECK(ps[2].mask == 0b101u);

  for (int n = 1; n <= 4; ++n) {
    CHECK(power_set_coords(full_set(n)) == all_subsets(n));
    for (SubsetId a : all_subsets(n)) {
      std::vector<SubsetId> sub = power_set_coords(a);
      CHECK(static_cast<int>(sub.size()) == (1 << set_size(a)) - 1);
      for (std::size_t i = 0; i < sub.size(); ++i) {
        CHECK(is_subset_of(sub[i], a));
        if (i > 0) CHECK(sub[i - 1] < sub[i]);
      }
    }
  }
}

TEST_CASE("labels concatenate increasing species digits and round-trip") {
  CHECK(subset_label(SubsetId{1}) == "1");
  CHECK(subset_label(SubsetId{0b101}) == "13");
  CHECK(subset_label(SubsetId{0b110}) == "23");
  CHECK(subset_label(full_set(4)) == "1234");
  for (int n = 1; n <= 4; ++n) {
    for (SubsetId j : all_subsets(n)) {
      CHECK(parse_subset_label(subset_label(j), n) == j);
    }
  }
  CHECK(parse_subset_label("13", 3).mask == 0b101u);
}

TEST_CASE("malformed subset labels are rejected") {
  CHECK_THROWS_AS(parse_subset_label("", 3), std::invalid_argument);
  CHECK_THROWS_AS(parse_subset_label("31", 3), std::invalid_argument);
  CHECK_THROWS_AS(parse_subset_label("11", 3), std::invalid_argument);
  CHECK_THROWS_AS(parse_subset_label("3", 2), std::invalid_argument);
  CHECK_THROWS_AS(parse_subset_label("0", 3), std::invalid_argument);
  CHECK_THROWS_AS(parse_subset_label("1a", 3), std::invalid_argument);
  CHECK_THROWS_AS(parse_subset_label("125", 4), std::invalid_argument);
}
