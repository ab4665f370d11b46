// SPDX-License-Identifier: Apache-2.0
//
// rfimap - UAV-borne GNSS interference survey and transmitter mapping
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rfimap/geometry.hpp"

using namespace rfimap;

TEST_CASE("bearing_to follows the compass convention") {
    CHECK(bearing_to({0, 0}, {0, 10}).degrees() == doctest::Approx(0.0));
    CHECK(bearing_to({0, 0}, {10, 0}).degrees() == doctest::Approx(90.0));
    CHECK(bearing_to({0, 0}, {-5, -5}).degrees() == doctest::Approx(225.0));
    CHECK(bearing_to({0, 0}, {0, -1}).degrees() == doctest::Approx(180.0));
    CHECK(bearing_to({0, 0}, {-1, 0}).degrees() == doctest::Approx(270.0));
}

TEST_CASE("bearing_to rejects coincident points") {
    CHECK_THROWS_AS(bearing_to({3, 4}, {3, 4}), std::invalid_argument);
}

TEST_CASE("bearing_diff wraps into (-180, 180]") {
    CHECK(bearing_diff(Bearing(350), Bearing(10)) == doctest::Approx(-20.0));
    CHECK(bearing_diff(Bearing(90), Bearing(90)) == doctest::Approx(0.0));
    CHECK(bearing_diff(Bearing(0), Bearing(180)) == doctest::Approx(180.0));
    CHECK(bearing_diff(Bearing(10), Bearing(350)) == doctest::Approx(20.0));
}

TEST_CASE("bearings normalize on construction") {
    CHECK(Bearing(360.0).degrees() == doctest::Approx(0.0));
    CHECK(Bearing(-90.0).degrees() == doctest::Approx(270.0));
    CHECK(Bearing(725.0).degrees() == doctest::Approx(5.0));
    CHECK(Bearing(0.0).degrees() == 0.0);
}

TEST_CASE("reciprocal bearings differ by 180 degrees") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> coord(-1000.0, 1000.0);
    for (int trial = 0; trial < 500; ++trial) {
        const LocalPoint p{coord(rng), coord(rng)};
        const LocalPoint q{coord(rng), coord(rng)};
        if (p == q) continue;
        const double forward = bearing_to(p, q).degrees();
        const double backward = bearing_to(q, p).degrees();
        CHECK(wrap_degrees(backward + 180.0) == doctest::Approx(forward).epsilon(1e-9));
    }
}

TEST_CASE("bearing_diff is antisymmetric away from the 180 tie") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> angle(0.0, 360.0);
    for (int trial = 0; trial < 500; ++trial) {
        const Bearing a(angle(rng));
        const Bearing b(angle(rng));
        const double d = bearing_diff(a, b);
        if (std::abs(d) == 180.0) continue;
        CHECK(bearing_diff(b, a) == doctest::Approx(-d).epsilon(1e-12));
    }
}

TEST_CASE("cell_center puts cells at half-resolution offsets") {
    const GridSpec a{{0, 0}, 5.0, 10, 10};
    CHECK(a.cell_center(0, 0).east == doctest::Approx(2.5));
    CHECK(a.cell_center(0, 0).north == doctest::Approx(2.5));

    const GridSpec b{{-25, -25}, 5.0, 10, 10};
    CHECK(b.cell_center(5, 5).east == doctest::Approx(2.5));
    CHECK(b.cell_center(5, 5).north == doctest::Approx(2.5));

    const GridSpec c{{0, 0}, 1.0, 3, 3};
    CHECK(c.cell_center(2, 2).east == doctest::Approx(2.5));
    CHECK(c.cell_center(2, 2).north == doctest::Approx(2.5));
}

TEST_CASE("cell_center rejects out-of-range indices") {
    const GridSpec grid{{0, 0}, 5.0, 10, 10};
    CHECK_THROWS_AS(grid.cell_center(10, 0), std::out_of_range);
    CHECK_THROWS_AS(grid.cell_center(0, -1), std::out_of_range);
}

TEST_CASE("point-to-cell then cell_center moves points at most half a diagonal") {
    const GridSpec grid{{-100, -100}, 4.0, 50, 50};
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> coord(-100.0, 99.999);
    const double bound = grid.resolution * std::numbers::sqrt2 / 2.0 + 1e-12;
    for (int trial = 0; trial < 1000; ++trial) {
        const LocalPoint p{coord(rng), coord(rng)};
        const auto cell = grid.cell_of(p);
        REQUIRE(cell.has_value());
        const LocalPoint c = grid.cell_center(cell->first, cell->second);
        CHECK(std::hypot(c.east - p.east, c.north - p.north) <= bound);
    }
}

TEST_CASE("cell_of reports points outside the grid") {
    const GridSpec grid{{0, 0}, 5.0, 10, 10};
    CHECK(grid.cell_of({-0.01, 5.0}) == std::nullopt);
    CHECK(grid.cell_of({50.0, 5.0}) == std::nullopt);
    CHECK(grid.cell_of({49.999, 49.999}).value() == std::make_pair(9, 9));
}

TEST_CASE("grid validation") {
    CHECK_THROWS_AS((GridSpec{{0, 0}, 0.0, 10, 10}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((GridSpec{{0, 0}, 5.0, 0, 10}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((GridSpec{{0, 0}, 0.001, 1 << 13, 1 << 13}).validate(),
                    std::invalid_argument);
    CHECK_NOTHROW((GridSpec{{0, 0}, 5.0, 240, 240}).validate());
}

TEST_CASE("geodetic round trip through the local frame") {
    const GeoOrigin origin{59.35, 18.07};
    const LocalPoint p{1234.5, -987.6};
    const auto [lat, lon] = local_to_geodetic(origin, p);
    const LocalPoint back = geodetic_to_local(origin, lat, lon);
    CHECK(back.east == doctest::Approx(p.east).epsilon(1e-9));
    CHECK(back.north == doctest::Approx(p.north).epsilon(1e-9));
}
