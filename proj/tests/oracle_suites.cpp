// Oracle property suites: the library paths are replayed against independent
// brute-force reference implementations (see support/oracles.hpp). Zero
// tolerance; any divergence reports the failing seed round.

#include <catch2/catch_amalgamated.hpp>

#include "support/drivers.hpp"

using namespace cstore;

TEST_CASE("buffer I/O matches the reference replay", "[oracle][store]") {
  testdrv::DriverResult lru = testdrv::drive_buffer_oracle(1000, 100, false);
  INFO(lru.detail);
  REQUIRE(lru.ok);
  REQUIRE(lru.cases == 100);

  testdrv::DriverResult lruc = testdrv::drive_buffer_oracle(1001, 100, true);
  INFO(lruc.detail);
  REQUIRE(lruc.ok);
  REQUIRE(lruc.cases == 100);
}

TEST_CASE("placement order matches the exhaustive enumeration", "[oracle][dro]") {
  testdrv::DriverResult r = testdrv::drive_step2_oracle(777, 100);
  INFO(r.detail);
  REQUIRE(r.ok);
  REQUIRE(r.cases == 100);
}

TEST_CASE("statistics match the event-log recomputation", "[oracle][stats]") {
  testdrv::DriverResult r = testdrv::drive_stats_oracle(31415, 40);
  INFO(r.detail);
  REQUIRE(r.ok);
  REQUIRE(r.cases == 40);
}
