#include <doctest.h>

#include <set>
#include <vector>

#include "deepcal/numerics.h"
#include "deepcal/rng.h"

using deepcal::Philox4x32;
using deepcal::UniformStream;

TEST_CASE("philox matches the published known-answer vectors") {
  using C = Philox4x32::Counter;
  CHECK(Philox4x32::Generate({0, 0, 0, 0}, {0, 0}) ==
        C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::Generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                             {0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::Generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                             {0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("open-unit mapping never reaches 0 or 1") {
  CHECK(deepcal::BitsToOpenUnit(0) > 0.0);
  CHECK(deepcal::BitsToOpenUnit(~std::uint64_t{0}) < 1.0);
}

TEST_CASE("stream draws are random access") {
  UniformStream s(42, 7);
  const UniformStream probe(42, 7);
  for (std::uint64_t k = 0; k < 11; ++k) CHECK(s.Next() == probe.At(k));
}

TEST_CASE("streams with different ids or seeds differ") {
  CHECK(UniformStream(1, 0).At(0) != UniformStream(1, 1).At(0));
  CHECK(UniformStream(1, 0).At(0) != UniformStream(2, 0).At(0));
}

TEST_CASE("uniform stream has the moments of U(0,1)") {
  UniformStream s(3, 0);
  constexpr int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = s.Next();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sq += u * u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.005));
  CHECK(sq / n - (sum / n) * (sum / n) ==
        doctest::Approx(1.0 / 12.0).epsilon(0.01));
}

TEST_CASE("derived seeds are distinct per purpose") {
  using deepcal::DeriveSeed;
  using deepcal::SeedPurpose;
  std::set<std::uint64_t> seeds = {DeriveSeed(5, SeedPurpose::kMonteCarloPaths),
                                   DeriveSeed(5, SeedPurpose::kWeightInit),
                                   DeriveSeed(5, SeedPurpose::kCalibrationStarts),
                                   DeriveSeed(6, SeedPurpose::kMonteCarloPaths)};
  CHECK(seeds.size() == 4);
  CHECK(DeriveSeed(5, SeedPurpose::kWeightInit) ==
        DeriveSeed(5, SeedPurpose::kWeightInit));
}

TEST_CASE("pairwise sum is exact on integers and order-fixed") {
  std::vector<double> v(1000);
  for (int i = 0; i < 1000; ++i) v[i] = i + 1;
  CHECK(deepcal::PairwiseSum(v) == 500500.0);
  CHECK(deepcal::PairwiseSum({}) == 0.0);
}
