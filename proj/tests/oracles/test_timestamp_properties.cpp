#include <doctest.h>

#include "generators.hpp"
#include "twinworld/perturber.hpp"

using namespace twinworld;

TEST_CASE("shift preserves order of random timestamp pairs") {
  gen::Source s(601);
  for (int c = 0; c < 10000; ++c) {
    auto a = gen::date(s, 1000, 2020);
    auto b = gen::date(s, 1000, 2020);
    int delta = s.integer(0, 200);
    auto sa = shift_timestamp(a, delta);
    auto sb = shift_timestamp(b, delta);
    if (a < b) CHECK(sa <= sb);
    if (a > b) CHECK(sa >= sb);
    if (a == b) CHECK(sa == sb);
    bool leap_day = a.substr(5) == "02-29" || b.substr(5) == "02-29";
    if (!leap_day && a != b) CHECK((a < b) == (sa < sb));
  }
}

TEST_CASE("shift adds the offset to the year and keeps month and day") {
  gen::Source s(602);
  for (int c = 0; c < 2000; ++c) {
    auto a = gen::date(s, 1000, 2020);
    int delta = s.integer(0, 500);
    auto b = shift_timestamp(a, delta);
    CHECK(std::stoi(b.substr(0, 4)) == std::stoi(a.substr(0, 4)) + delta);
    if (a.substr(5) != "02-29") CHECK(b.substr(5) == a.substr(5));
  }
}
