#include "dragonpit/data.hpp"
#include "dragonpit/stats.hpp"
#include "doctest.h"

using namespace dragonpit;

TEST_SUITE_BEGIN("stats");

TEST_CASE("stat field table covers every attribute exactly once") {
  CHECK(stat_names().size() == kStatCount);
  UnitStats s;
  for (int i = 0; i < kStatCount; ++i) stat_ref(s, i) = i + 1;
  for (int i = 0; i < kStatCount; ++i) CHECK(stat_get(s, i) == i + 1);
  CHECK(s.max_hp == 1);
  CHECK(s.attack_range == kStatCount);
}

TEST_CASE("stat validation rejects out-of-domain values") {
  UnitStats ok;
  ok.max_hp = 100;
  CHECK_NOTHROW(validate_stats(ok, "unit"));

  UnitStats negative = ok;
  negative.phys_attack = -1;
  CHECK_THROWS_AS(validate_stats(negative, "unit"), ConfigError);

  UnitStats crit = ok;
  crit.crit_rate = 10001;
  CHECK_THROWS_AS(validate_stats(crit, "unit"), ConfigError);

  UnitStats dead;
  CHECK_THROWS_AS(validate_stats(dead, "unit"), ConfigError);
}

TEST_CASE("bundled catalog loads the full roster") {
  const GameData& data = game_data();
  REQUIRE(data.heroes.size() == 5);
  CHECK(data.dragon.unit_id == 12202);
  CHECK(data.summoners.size() == 8);
  // Every hero resolves, uses a playable summoner skill, and has a loadout.
  for (const auto& hero : data.heroes) {
    CHECK(data.find_hero(hero.unit_id) == &hero);
    CHECK(data.summoner(hero.summoner_id).effect.has_value());
    CHECK(data.find_equipment(hero.unit_id) != nullptr);
    CHECK(hero.skills[0].levels.size() == 6);
    CHECK(hero.skills[1].levels.size() == 6);
    CHECK(hero.skills[2].levels.size() == 3);
  }
  CHECK(data.find_hero(99999) == nullptr);
  CHECK_THROWS_AS(data.hero(99999), ConfigError);
  CHECK_THROWS_AS(data.summoner(12345), ConfigError);
}

TEST_CASE("level interpolation hits both anchor rows exactly") {
  const GameData& data = game_data();
  for (const auto& hero : data.heroes) {
    UnitStats at3 = stats_at_level(hero, 3, false, nullptr);
    UnitStats at15 = stats_at_level(hero, 15, false, nullptr);
    for (int i = 0; i < kStatCount; ++i) {
      CHECK(stat_get(at3, i) == stat_get(hero.level3, i));
      CHECK(stat_get(at15, i) == stat_get(hero.level15, i));
    }
  }
}

TEST_CASE("level interpolation is linear between the anchors") {
  const HeroSpec& hero = game_data().hero(11301);
  UnitStats mid = stats_at_level(hero, 9, false, nullptr);
  for (int i = 0; i < kStatCount; ++i) {
    double v3 = stat_get(hero.level3, i);
    double v15 = stat_get(hero.level15, i);
    CHECK(stat_get(mid, i) == doctest::Approx((v3 + v15) / 2).epsilon(1e-12));
  }
  // Attributes with equal anchors stay constant at every level.
  for (int level = 1; level <= 15; ++level) {
    UnitStats s = stats_at_level(hero, level, false, nullptr);
    CHECK(s.move_speed == hero.level3.move_speed);
    CHECK(s.attack_range == hero.level3.attack_range);
  }
}

TEST_CASE("levels below the first anchor extrapolate and clamp at zero") {
  const HeroSpec& hero = game_data().hero(11301);
  UnitStats at1 = stats_at_level(hero, 1, false, nullptr);
  double expected_hp =
      hero.level3.max_hp + (hero.level15.max_hp - hero.level3.max_hp) * (-2 / 12.0);
  CHECK(at1.max_hp == doctest::Approx(expected_hp).epsilon(1e-12));
  CHECK(at1.max_hp < hero.level3.max_hp);
  for (int i = 0; i < kStatCount; ++i) CHECK(stat_get(at1, i) >= 0);

  CHECK_THROWS_AS(stats_at_level(hero, 0, false, nullptr), ConfigError);
  CHECK_THROWS_AS(stats_at_level(hero, 16, false, nullptr), ConfigError);
}

TEST_CASE("equipment multiplies before adding") {
  const HeroSpec& hero = game_data().hero(16701);
  EquipmentModifier mod;
  for (int i = 0; i < kStatCount; ++i) stat_ref(mod.multipliers, i) = 1.0;
  mod.multipliers.phys_attack = 1.5;
  mod.additions.phys_attack = 100;
  mod.additions.max_hp = 500;

  UnitStats bare = stats_at_level(hero, 15, false, nullptr);
  UnitStats geared = stats_at_level(hero, 15, true, &mod);
  CHECK(geared.phys_attack ==
        doctest::Approx(bare.phys_attack * 1.5 + 100).epsilon(1e-12));
  CHECK(geared.max_hp == doctest::Approx(bare.max_hp + 500).epsilon(1e-12));
  CHECK(geared.phys_defense == bare.phys_defense);

  // equipped=false ignores the modifier entirely.
  UnitStats ignored = stats_at_level(hero, 15, false, &mod);
  CHECK(ignored.phys_attack == bare.phys_attack);
}

TEST_CASE("bundled loadouts only ever strengthen a hero") {
  const GameData& data = game_data();
  for (const auto& hero : data.heroes) {
    UnitStats bare = stats_at_level(hero, 4, false, nullptr);
    UnitStats geared = stats_at_level(hero, 4, true);
    for (int i = 0; i < kStatCount; ++i) {
      CHECK(stat_get(geared, i) >= stat_get(bare, i));
    }
    CHECK(geared.phys_attack > bare.phys_attack);
  }
}

TEST_CASE("catalog parser rejects malformed documents") {
  CHECK_THROWS_AS(parse_game_data("not json", "{}", "{}", "{}"), ConfigError);
  CHECK_THROWS_AS(parse_game_data("{}", "{}", "{}", "{}"), ConfigError);
}

TEST_SUITE_END();
