#include "doctest.h"

#include <cmath>
#include <vector>

#include "causeway/common.hpp"
#include "causeway/metrics.hpp"
#include "causeway/world.hpp"

#include "oracles.hpp"

using namespace causeway;

namespace {

template <typename Fn>
void check_error(ErrorCode code, Fn&& fn) {
  try {
    fn();
    FAIL_CHECK("no error thrown");
  } catch (const Error& e) {
    CHECK(e.code() == code);
  }
}

}  // namespace

TEST_CASE("completion rate is a plain ratio") {
  CHECK(completion_rate(3, 4) == 0.75);
  CHECK(completion_rate(0, 5) == 0.0);
  CHECK(completion_rate(5, 5) == 1.0);
  check_error(ErrorCode::ZeroIndicators, [] { completion_rate(0, 0); });
  check_error(ErrorCode::ZeroIndicators, [] { completion_rate(1, -2); });
}

TEST_CASE("construction completion matches kind and pinned facing") {
  std::vector<BlueprintBlock> blueprint{
      {{0, 1, 0}, "stone", std::nullopt},
      {{0, 2, 0}, "stone", std::nullopt},
      {{1, 1, 0}, "brick", std::nullopt},
      {{1, 2, 0}, "brick", "north"},
  };
  World w;
  w.set_block({0, 1, 0}, "stone");
  w.set_block({0, 2, 0}, "stone", "south");  // unpinned facing is ignored
  w.set_block({1, 1, 0}, "stone");           // wrong kind
  w.set_block({1, 2, 0}, "brick");           // facing missing

  auto eval = construction_completion(w, blueprint);
  CHECK(eval.total == 4);
  CHECK(eval.matched == 2);
  CHECK(eval.rate == 0.5);
  REQUIRE(eval.mismatched.size() == 2);
  CHECK(eval.mismatched[0] == Vec3{1, 1, 0});
  CHECK(eval.mismatched[1] == Vec3{1, 2, 0});

  w.set_block({1, 2, 0}, "brick", "north");
  CHECK(construction_completion(w, blueprint).matched == 3);
  w.set_block({1, 2, 0}, "brick", "south");
  CHECK(construction_completion(w, blueprint).matched == 2);

  check_error(ErrorCode::EmptyBlueprint, [&] { construction_completion(w, {}); });
}

TEST_CASE("view hit rate on a half-built column") {
  // Two stacked cells wanted, only the bottom built. Four side views each see
  // half of the silhouette, the top view matches, the bottom view sees the
  // wrong cell: (4 * 1/2 + 1 + 0) / 6.
  std::vector<BlueprintBlock> blueprint{
      {{0, 0, 0}, "stone", std::nullopt},
      {{0, 1, 0}, "stone", std::nullopt},
  };
  World w;
  w.set_block({0, 0, 0}, "stone");
  CHECK(view_hit_rate(w, blueprint) == doctest::Approx(0.5).epsilon(1e-12));

  SUBCASE("perfect build scores one") {
    w.set_block({0, 1, 0}, "stone");
    CHECK(view_hit_rate(w, blueprint) == 1.0);
  }

  SUBCASE("empty site scores zero") {
    World bare;
    CHECK(view_hit_rate(bare, blueprint) == 0.0);
  }

  SUBCASE("wrong kind in front hides the match behind it") {
    World wrong;
    wrong.set_block({0, 0, 0}, "brick");
    wrong.set_block({0, 1, 0}, "stone");
    // Silhouettes still disagree on the bottom cell from every side view.
    CHECK(view_hit_rate(wrong, blueprint) < 1.0);
  }

  SUBCASE("guard errors") {
    check_error(ErrorCode::EmptyBlueprint, [&] { view_hit_rate(w, {}); });
    check_error(ErrorCode::NoViewpoints, [&] { view_hit_rate(w, blueprint, {}); });
  }
}

TEST_CASE("view hit rate agrees with the reference rasterizer") {
  static const char* kKinds[3] = {"stone", "brick", "glass"};
  Rng rng(424242);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<BlueprintBlock> blueprint;
    for (int x = 0; x < 5; ++x) {
      for (int y = 0; y < 5; ++y) {
        for (int z = 0; z < 5; ++z) {
          if (rng.chance(0.3)) {
            blueprint.push_back({{x, y, z}, kKinds[rng.range(0, 2)], std::nullopt});
          }
        }
      }
    }
    if (blueprint.empty()) blueprint.push_back({{0, 0, 0}, "stone", std::nullopt});

    World w;
    for (const auto& b : blueprint) {
      if (rng.chance(0.7)) w.set_block(b.pos, rng.chance(0.85) ? b.kind : "dirt");
    }
    for (int extra = 0; extra < 6; ++extra) {
      if (rng.chance(0.5)) {
        w.set_block({rng.range(0, 4), rng.range(0, 4), rng.range(0, 4)},
                    kKinds[rng.range(0, 2)]);
      }
    }

    double lib = view_hit_rate(w, blueprint);
    double ref = oracle::view_hit(w, blueprint);
    REQUIRE(std::abs(lib - ref) <= 1e-9);
  }
}

TEST_CASE("efficiency divides completion by summed minutes") {
  CHECK(efficiency(1.0, {4.0, 6.0}) == doctest::Approx(0.10).epsilon(1e-12));
  CHECK(efficiency(0.5, {2.5}) == doctest::Approx(0.2).epsilon(1e-12));
  check_error(ErrorCode::ZeroTime, [] { efficiency(1.0, {}); });
  check_error(ErrorCode::ZeroTime, [] { efficiency(1.0, {0.0, 0.0}); });
}

TEST_CASE("balance score spreads last-completion times") {
  SUBCASE("one agent at the start, one at the budget") {
    CHECK(balance_score({0.0, 120.0}, 120.0) == doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("identical timings are perfectly balanced") {
    CHECK(balance_score({30.0, 30.0, 30.0}, 100.0) == 1.0);
  }

  SUBCASE("everyone at the budget edge") {
    CHECK(balance_score({100.0, 100.0}, 100.0) == 1.0);
  }

  SUBCASE("times beyond the budget clamp") {
    CHECK(balance_score({0.0, 240.0}, 120.0) == doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("three-way spread") {
    // u = {0, 0.5, 1}, population std = sqrt(1/6).
    double expected = 1.0 - std::sqrt(1.0 / 6.0);
    CHECK(balance_score({0.0, 60.0, 120.0}, 120.0) == doctest::Approx(expected).epsilon(1e-12));
  }

  SUBCASE("no agents is an error") {
    check_error(ErrorCode::ZeroIndicators, [] { balance_score({}, 100.0); });
  }
}

TEST_CASE("allocation balance compares against the most lopsided split") {
  CHECK(allocation_balance({3, 1}) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(allocation_balance({2, 2}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(allocation_balance({4, 0}) == doctest::Approx(0.0).epsilon(1e-12));
  // sigma = sqrt(2/3), sigma_max = 3 * sqrt(2) / 3.
  double expected = 1.0 - std::sqrt(2.0 / 3.0) / std::sqrt(2.0);
  CHECK(allocation_balance({2, 1, 0}) == doctest::Approx(expected).epsilon(1e-12));

  check_error(ErrorCode::DegenerateDenominator, [] { allocation_balance({5}); });
  check_error(ErrorCode::DegenerateDenominator, [] { allocation_balance({0, 0}); });
}

TEST_CASE("escape rate weights rooms by score") {
  SUBCASE("two rooms, only the light one solved") {
    std::vector<RoomOutcome> rooms{
        {"cell", 1, 1, 1.0},
        {"hall", 0, 1, 3.0},
    };
    CHECK(escape_rate(rooms) == doctest::Approx(0.25).epsilon(1e-12));
  }

  SUBCASE("rooms without conditions count as met") {
    std::vector<RoomOutcome> rooms{
        {"lobby", 0, 0, 2.0},
        {"vault", 0, 1, 2.0},
    };
    CHECK(escape_rate(rooms) == doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("partial conditions scale the room ratio") {
    std::vector<RoomOutcome> rooms{{"cell", 1, 4, 1.0}};
    CHECK(escape_rate(rooms) == doctest::Approx(0.25).epsilon(1e-12));
  }

  SUBCASE("guard errors") {
    check_error(ErrorCode::EmptyRooms, [] { escape_rate({}); });
    check_error(ErrorCode::ZeroTotal, [] {
      escape_rate({{"cell", 1, 1, 0.0}});
    });
  }
}

TEST_CASE("cooking rate is the weight-normalized share of latched flags") {
  std::vector<WeightedFlag> flags{
      {"gather wheat", 1.0, true},
      {"gather milk", 1.0, true},
      {"gather egg", 1.0, false},
      {"craft cake", 2.0, false},
  };
  CHECK(cooking_rate(flags) == doctest::Approx(0.4).epsilon(1e-12));

  flags[2].done = true;
  flags[3].done = true;
  CHECK(cooking_rate(flags) == 1.0);

  check_error(ErrorCode::EmptyRecipe, [] { cooking_rate({}); });
  check_error(ErrorCode::ZeroTotal, [] {
    cooking_rate({{"step", 0.0, true}});
  });
}

TEST_CASE("success rate needs at least one attempt") {
  CHECK(success_rate(7, 10) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(success_rate(0, 3) == 0.0);
  check_error(ErrorCode::ZeroAttempts, [] { success_rate(1, 0); });
}
