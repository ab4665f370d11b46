// SPDX-License-Identifier: Apache-2.0
//
// rfimap - UAV-borne GNSS interference survey and transmitter mapping
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <vector>

#include "rfimap/fusion.hpp"
#include "rfimap/io_util.hpp"
#include "support/naive_reference.hpp"

using namespace rfimap;

namespace {

HorizonScan make_scan(const LocalPoint& position, double step_deg,
                      const std::vector<double>& powers, double start_heading = 0.0) {
    HorizonScan scan;
    scan.pose.position = position;
    scan.pose.heading = Bearing(start_heading);
    scan.band = "L1";
    scan.step_deg = step_deg;
    for (std::size_t k = 0; k < powers.size(); ++k) {
        scan.steps.push_back({Bearing(static_cast<double>(k) * step_deg), powers[k]});
    }
    return scan;
}

}  // namespace

TEST_CASE("expectation_density of a silent scan is the zero map") {
    const auto scan = make_scan({0, 0}, 45.0, std::vector<double>(8, 0.0));
    const auto map = expectation_density(scan, srp_from_hpbw(60.0), {{-50, -50}, 5.0, 20, 20});
    for (double v : map.values) CHECK(v == 0.0);
}

TEST_CASE("a single active step projects the antenna pattern along its heading") {
    std::vector<double> powers(8, 0.0);
    powers[2] = 1.0;  // heading 90, due east
    const auto scan = make_scan({2.5, 2.5}, 45.0, powers);
    const auto srp = srp_from_hpbw(60.0);
    const GridSpec grid{{0, 0}, 5.0, 20, 20};
    const auto map = expectation_density(scan, srp, grid);

    // Cells due east of the pose see the pattern peak.
    for (int i = 1; i < 20; ++i) {
        CHECK(map.at(i, 0) == doctest::Approx(1.0).epsilon(1e-12));
    }
    // A cell due north sees the 90-degree skirt.
    const double north_gain = srp_eval(srp, 90.0);
    CHECK(map.at(0, 5) == doctest::Approx(north_gain).epsilon(1e-9));
}

TEST_CASE("density is constant along rays from the pose") {
    std::vector<double> powers(12, 0.0);
    powers[3] = 0.7;
    const auto scan = make_scan({0, 2.5}, 30.0, powers);
    const GridSpec grid{{0, 0}, 5.0, 40, 40};
    const auto map = expectation_density(scan, srp_from_hpbw(45.0), grid);
    const double reference = map.at(1, 0);
    for (int i = 2; i < 40; ++i) {
        CHECK(map.at(i, 0) == doctest::Approx(reference).epsilon(1e-9));
    }
}

TEST_CASE("cells coincident with the scan position stay zero") {
    const auto scan = make_scan({2.5, 2.5}, 90.0, {1.0, 1.0, 1.0, 1.0});
    const auto map = expectation_density(scan, srp_from_hpbw(60.0), {{0, 0}, 5.0, 4, 4});
    CHECK(map.at(0, 0) == 0.0);
    CHECK(map.at(1, 1) > 0.0);
}

TEST_CASE("non-finite step power is rejected") {
    auto scan = make_scan({0, 0}, 90.0, {1.0, 0.5, 0.2, 0.1});
    scan.steps[1].rel_power = std::nan("");
    CHECK_THROWS(expectation_density(scan, srp_from_hpbw(60.0), {{0, 0}, 5.0, 4, 4}));
}

TEST_CASE("projection is linear in the step powers") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> p(12);
    std::vector<double> q(12);
    for (std::size_t k = 0; k < 12; ++k) {
        p[k] = unit(rng);
        q[k] = unit(rng);
    }
    const double a = 0.35;
    const double b = 0.65;
    std::vector<double> combo(12);
    for (std::size_t k = 0; k < 12; ++k) combo[k] = a * p[k] + b * q[k];

    const GridSpec grid{{-100, -100}, 10.0, 20, 20};
    const auto srp = srp_from_hpbw(55.0);
    const auto mp = expectation_density(make_scan({3, 7}, 30.0, p), srp, grid);
    const auto mq = expectation_density(make_scan({3, 7}, 30.0, q), srp, grid);
    const auto mc = expectation_density(make_scan({3, 7}, 30.0, combo), srp, grid);
    for (std::size_t c = 0; c < mc.values.size(); ++c) {
        CHECK(mc.values[c] ==
              doctest::Approx(a * mp.values[c] + b * mq.values[c]).epsilon(1e-12));
    }
}

TEST_CASE("rotating the scan and the query by 90 degrees leaves densities unchanged") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    std::vector<double> powers(12);
    for (auto& v : powers) v = unit(rng);

    // Pose at the exact grid center so rotation maps cell centers to centers.
    const GridSpec grid{{-60, -60}, 6.0, 20, 20};
    const auto srp = srp_from_hpbw(48.0);
    const auto base = expectation_density(make_scan({0, 0}, 30.0, powers), srp, grid);

    std::vector<double> rotated(12);
    for (std::size_t k = 0; k < 12; ++k) rotated[(k + 3) % 12] = powers[k];  // +90 deg
    const auto rot = expectation_density(make_scan({0, 0}, 30.0, rotated), srp, grid);

    for (int j = 0; j < 20; ++j) {
        for (int i = 0; i < 20; ++i) {
            const LocalPoint c = grid.cell_center(i, j);
            const LocalPoint turned{c.north, -c.east};  // +90 deg compass rotation
            const auto cell = grid.cell_of(turned);
            REQUIRE(cell.has_value());
            CHECK(rot.at(cell->first, cell->second) ==
                  doctest::Approx(base.at(i, j)).epsilon(1e-9));
        }
    }
}

TEST_CASE("fuse averages cell-wise") {
    const GridSpec grid{{0, 0}, 5.0, 8, 8};
    const auto scan = make_scan({-10, -10}, 90.0, {1.0, 0.3, 0.1, 0.6});
    const auto m = expectation_density(scan, srp_from_hpbw(60.0), grid);

    SUBCASE("mean of identical maps is the map itself") {
        const std::vector<Heatmap> maps{m, m, m};
        const FusedMap fused = fuse(maps);
        CHECK(fused.n_scans == 3);
        for (std::size_t c = 0; c < m.values.size(); ++c) {
            CHECK(fused.values[c] == m.values[c]);
        }
    }
    SUBCASE("a zero map halves the density") {
        Heatmap zero;
        zero.grid = grid;
        zero.values.assign(grid.cell_count(), 0.0);
        const std::vector<Heatmap> maps{m, zero};
        const FusedMap fused = fuse(maps);
        for (std::size_t c = 0; c < m.values.size(); ++c) {
            CHECK(fused.values[c] == doctest::Approx(m.values[c] / 2.0));
        }
    }
    SUBCASE("grid mismatch throws") {
        Heatmap other;
        other.grid = GridSpec{{0, 0}, 5.0, 8, 9};
        other.values.assign(other.grid.cell_count(), 0.0);
        const std::vector<Heatmap> maps{m, other};
        CHECK_THROWS_AS(fuse(maps), std::invalid_argument);
    }
}

TEST_CASE("fuse is bit-identical under input permutation") {
    const GridSpec grid{{-100, -100}, 10.0, 20, 20};
    const auto srp = srp_from_hpbw(60.0);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<Heatmap> maps;
    for (int s = 0; s < 5; ++s) {
        std::vector<double> powers(8);
        for (auto& v : powers) v = unit(rng);
        maps.push_back(expectation_density(
            make_scan({unit(rng) * 400 - 200, unit(rng) * 400 - 200}, 45.0, powers), srp,
            grid));
    }
    const FusedMap reference = fuse(maps);

    std::vector<std::size_t> order{4, 2, 0, 3, 1};
    std::vector<Heatmap> shuffled;
    for (std::size_t k : order) shuffled.push_back(maps[k]);
    const FusedMap permuted = fuse(shuffled);

    for (std::size_t c = 0; c < reference.values.size(); ++c) {
        CHECK(permuted.values[c] == reference.values[c]);  // exact, not approximate
    }
}

TEST_CASE("threshold zeroes sub-threshold cells and nothing else") {
    FusedMap map;
    map.grid = GridSpec{{0, 0}, 5.0, 3, 1};
    map.values = {1.0, 0.6, 0.4};
    map.n_scans = 1;

    SUBCASE("alpha 0.5 keeps 1.0 and 0.6") {
        const FusedMap cut = threshold(map, 0.5);
        CHECK(cut.values == std::vector<double>{1.0, 0.6, 0.0});
        CHECK(cut.threshold_applied == 0.5);
    }
    SUBCASE("alpha near 1 keeps only the maximum") {
        const FusedMap cut = threshold(map, 1.0 - 1e-12);
        CHECK(cut.values == std::vector<double>{1.0, 0.0, 0.0});
    }
    SUBCASE("idempotent for a fixed alpha") {
        const FusedMap once = threshold(map, 0.7);
        const FusedMap twice = threshold(once, 0.7);
        CHECK(once.values == twice.values);
    }
    SUBCASE("invalid alpha and all-zero maps are rejected") {
        CHECK_THROWS_AS(threshold(map, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(threshold(map, 1.0), std::invalid_argument);
        map.values = {0.0, 0.0, 0.0};
        CHECK_THROWS_AS(threshold(map, 0.5), std::domain_error);
    }
}

TEST_CASE("pipeline matches the naive reference cell-for-cell") {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const GridSpec grid{{-250, -250}, 10.0, 50, 50};
    const auto srp = srp_from_hpbw(50.0);

    std::vector<Heatmap> maps;
    std::vector<std::vector<double>> naive_maps;
    for (int s = 0; s < 4; ++s) {
        std::vector<double> powers(12);
        for (auto& v : powers) v = unit(rng);
        const auto scan =
            make_scan({unit(rng) * 800 - 400, unit(rng) * 800 - 400}, 30.0, powers);
        maps.push_back(expectation_density(scan, srp, grid));
        naive_maps.push_back(naive::expectation_density(scan, srp, grid));
    }
    const FusedMap fused = fuse(maps);
    const auto reference = naive::fuse_mean(naive_maps);
    for (std::size_t c = 0; c < fused.values.size(); ++c) {
        CHECK(fused.values[c] == doctest::Approx(reference[c]).epsilon(1e-9));
    }
}

TEST_CASE("unweighted mode ignores measured powers") {
    std::vector<double> powers{0.9, 0.1, 0.4, 0.7};
    const auto scan = make_scan({0, 0}, 90.0, powers);
    const auto uniform = make_scan({0, 0}, 90.0, {1.0, 1.0, 1.0, 1.0});
    const GridSpec grid{{5, 5}, 5.0, 10, 10};
    const auto srp = srp_from_hpbw(60.0);

    const auto unweighted =
        expectation_density(scan, srp, grid, ProjectionMode::kUnweighted);
    const auto weighted_uniform = expectation_density(uniform, srp, grid);
    for (std::size_t c = 0; c < unweighted.values.size(); ++c) {
        CHECK(unweighted.values[c] ==
              doctest::Approx(weighted_uniform.values[c]).epsilon(1e-12));
    }
}

TEST_CASE("fused maps round-trip through JSON and render as PGM") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::current_path() / "fusion_io_tmp";
    fs::create_directories(dir);

    const GridSpec grid{{-20, -20}, 5.0, 8, 8};
    const auto scan = make_scan({0, 2.5}, 90.0, {1.0, 0.2, 0.5, 0.8});
    const FusedMap fused = fuse(std::vector<Heatmap>{
        expectation_density(scan, srp_from_hpbw(60.0), grid)});

    save_fused_json(fused, dir / "map.json");
    const FusedMap back = load_fused_json(dir / "map.json");
    CHECK(back.grid == fused.grid);
    CHECK(back.n_scans == fused.n_scans);
    for (std::size_t c = 0; c < fused.values.size(); ++c) {
        CHECK(back.values[c] == fused.values[c]);
    }

    save_fused_pgm(fused, dir / "map.pgm");
    const std::string pgm = read_text_file(dir / "map.pgm");
    CHECK(pgm.substr(0, 2) == "P5");
    CHECK(pgm.find("8 8") != std::string::npos);
    CHECK(pgm.find("65535") != std::string::npos);
    fs::remove_all(dir);
}
