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
#include <limits>
#include <vector>

#include "rfimap/localize.hpp"
#include "rfimap/simulator.hpp"
#include "rfimap/spectrum.hpp"

using namespace rfimap;

namespace {

Scenario base_scenario() {
    Scenario s;
    s.grid = {{-600, -600}, 5.0, 240, 240};
    s.jammers.push_back({{0, 0}, 1.0, "L1", 1.0, std::nullopt, Bearing(0),
                         Waveform::kTone, 0.0, 1.0, std::nullopt});
    s.poses = {{{0, 500}, Bearing(0)},
               {{500, 0}, Bearing(0)},
               {{0, -500}, Bearing(0)},
               {{-500, 0}, Bearing(0)}};
    s.noise_floor = 1e-8;
    s.srp = srp_from_hpbw(60.0);
    s.step_deg = 30.0;
    s.seed = 1;
    return s;
}

}  // namespace

TEST_CASE("received_power follows the power law and the patterns") {
    const Jammer jammer{{0, 0}, 1.0, "L1", 1.0, std::nullopt, Bearing(0),
                        Waveform::kTone, 0.0, 1.0, std::nullopt};
    const SRPModel srp = srp_from_hpbw(60.0);

    SUBCASE("doubling the distance quarters the power at exponent 2") {
        const ScanPose near{{0, 100}, Bearing(180)};  // pointing at the jammer
        const ScanPose far{{0, 200}, Bearing(180)};
        const double p_near = received_power(jammer, near, srp, 2.0);
        const double p_far = received_power(jammer, far, srp, 2.0);
        CHECK(p_near / p_far == doctest::Approx(4.0).epsilon(1e-12));
    }
    SUBCASE("boresight versus backplane spans the full pattern contrast") {
        const ScanPose toward{{0, 100}, Bearing(180)};
        const ScanPose away{{0, 100}, Bearing(0)};
        const double on = received_power(jammer, toward, srp, 2.0);
        const double off = received_power(jammer, away, srp, 2.0);
        CHECK(off / on <= 0.01);
        CHECK(off / on == doctest::Approx(srp_eval(srp, 180.0)).epsilon(1e-9));
    }
    SUBCASE("duty cycle scales linearly") {
        Jammer pulsed = jammer;
        pulsed.duty_cycle = 0.5;
        const ScanPose rx{{0, 100}, Bearing(180)};
        CHECK(received_power(pulsed, rx, srp, 2.0) ==
              doctest::Approx(0.5 * received_power(jammer, rx, srp, 2.0)));
    }
    SUBCASE("a directional transmitter applies its own pattern") {
        Jammer directional = jammer;
        directional.tx_pattern = srp_from_hpbw(40.0);
        directional.tx_heading = Bearing(0);  // transmitting due north
        const ScanPose north{{0, 100}, Bearing(180)};
        const ScanPose south{{0, -100}, Bearing(0)};
        const double on = received_power(directional, north, srp, 2.0);
        const double off = received_power(directional, south, srp, 2.0);
        CHECK(on / off >= 100.0);
    }
    SUBCASE("coincident positions are rejected") {
        const ScanPose rx{{0, 0}, Bearing(0)};
        CHECK_THROWS_AS(received_power(jammer, rx, srp, 2.0), std::invalid_argument);
    }
    SUBCASE("power is monotone nonincreasing in distance at fixed bearing") {
        double previous = std::numeric_limits<double>::infinity();
        for (double r = 50.0; r <= 2000.0; r += 50.0) {
            const ScanPose rx{{0, r}, Bearing(137.0)};
            const double p = received_power(jammer, rx, srp, 2.3);
            CHECK(p <= previous);
            previous = p;
        }
    }
}

TEST_CASE("simulate_scan points its argmax at the jammer") {
    Scenario s = base_scenario();
    s.jammers[0].position = {0, 400};  // due north of the single pose
    s.poses = {{{0, -400}, Bearing(0)}};
    s.srp = srp_from_hpbw(40.0);
    s.noise_floor = 1e-9;
    const HorizonScan scan = simulate_scan(s, 0, 20.0, 5);
    const auto it = std::max_element(
        scan.steps.begin(), scan.steps.end(),
        [](const ScanStep& a, const ScanStep& b) { return a.rel_power < b.rel_power; });
    CHECK(it->heading.degrees() == 0.0);  // jammer due north
    CHECK(it->rel_power == 1.0);
}

TEST_CASE("simulate_scan is deterministic in the seed") {
    const Scenario s = base_scenario();
    const HorizonScan a = simulate_scan(s, 2, 30.0, 42);
    const HorizonScan b = simulate_scan(s, 2, 30.0, 42);
    REQUIRE(a.steps.size() == b.steps.size());
    for (std::size_t k = 0; k < a.steps.size(); ++k) {
        CHECK(a.steps[k].rel_power == b.steps[k].rel_power);
    }
    CHECK(a.pose.position.east == b.pose.position.east);

    const HorizonScan c = simulate_scan(s, 2, 30.0, 43);
    bool any_differs = false;
    for (std::size_t k = 0; k < a.steps.size(); ++k) {
        any_differs = any_differs || a.steps[k].rel_power != c.steps[k].rel_power;
    }
    CHECK(any_differs);
}

TEST_CASE("an empty scenario yields an all-zero scan") {
    Scenario s = base_scenario();
    s.jammers.clear();
    s.noise_floor = 0.0;
    const HorizonScan scan = simulate_scan(s, 0, 30.0, 1);
    for (const auto& step : scan.steps) CHECK(step.rel_power == 0.0);
}

TEST_CASE("scenario validation enforces the denial radius and bounds") {
    Scenario s = base_scenario();
    CHECK_NOTHROW(s.validate());

    SUBCASE("pose inside the denial radius") {
        // 60 dB over a 1e-8 floor at exponent 2 puts the radius at 10 m.
        CHECK(denial_radius(s.jammers[0], s.noise_floor, 2.0) == doctest::Approx(10.0));
        s.poses.push_back({{5, 0}, Bearing(0)});
        CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    }
    SUBCASE("explicit denial radius overrides the computed one") {
        s.jammers[0].denial_radius_m = 600.0;
        CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    }
    SUBCASE("path loss exponent bounds") {
        s.path_loss_exponent = 1.2;
        CHECK_THROWS_AS(s.validate(), std::invalid_argument);
        s.path_loss_exponent = 4.5;
        CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    }
    SUBCASE("no poses") {
        s.poses.clear();
        CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    }
}

TEST_CASE("perturb_pose reproduces the configured spread") {
    const ScanPose pose{{10, 20}, Bearing(45)};

    SUBCASE("zero jitter and wind leave the pose untouched") {
        const JitterModel none{0.0, 0.0};
        const ScanPose out = perturb_pose(pose, none, {0.0, Bearing(0)}, 7);
        CHECK(out.position.east == pose.position.east);
        CHECK(out.position.north == pose.position.north);
        CHECK(out.heading == pose.heading);
    }
    SUBCASE("per-axis stddev matches the configured 0.142 m within 10 percent") {
        const JitterModel jitter{0.142, 0.0};
        double ss = 0.0;
        const int n = 10000;
        for (int k = 0; k < n; ++k) {
            const ScanPose out = perturb_pose(pose, jitter, {0.0, Bearing(0)},
                                              static_cast<std::uint64_t>(k));
            ss += std::pow(out.position.east - pose.position.east, 2) +
                  std::pow(out.position.north - pose.position.north, 2);
        }
        const double sigma = std::sqrt(ss / (2.0 * n));
        CHECK(sigma == doctest::Approx(0.142).epsilon(0.10));
    }
    SUBCASE("wind inflates the spread along its direction only") {
        const JitterModel jitter{0.142, 0.05};
        const Wind wind{5.0, Bearing(90)};  // pushing east
        double ss_along = 0.0;
        double ss_cross = 0.0;
        const int n = 10000;
        for (int k = 0; k < n; ++k) {
            const ScanPose out = perturb_pose(pose, jitter, wind,
                                              static_cast<std::uint64_t>(k));
            ss_along += std::pow(out.position.east - pose.position.east, 2);
            ss_cross += std::pow(out.position.north - pose.position.north, 2);
        }
        const double along = std::sqrt(ss_along / n);
        const double cross = std::sqrt(ss_cross / n);
        CHECK(along > cross);
        CHECK(along == doctest::Approx(0.142 + 0.05 * 5.0).epsilon(0.10));
        CHECK(cross == doctest::Approx(0.142).epsilon(0.10));
    }
}

TEST_CASE("simulate_iq produces analyzable captures") {
    const ChannelMask mask{"L1", 1575.42, 4.0};

    SUBCASE("noise-only capture has a roughly flat averaged spectrum") {
        std::vector<IQBuffer> noise;
        for (std::uint64_t k = 0; k < 8; ++k) {
            noise.push_back(simulate_iq({}, mask, 4096, 11 + k, 1e-3));
        }
        const PSDFrame frame = psd_mean(noise);
        const double mean = frame.total_power() / static_cast<double>(frame.size());
        CHECK(mean == doctest::Approx(1e-3).epsilon(0.1));
        CHECK(detect_peaks(frame, 10.0).empty());
    }
    SUBCASE("a tone jammer shows up in detect_peaks at its offset") {
        std::vector<Jammer> jammers{{{0, 0}, 1.0, "L1", 1.0, std::nullopt, Bearing(0),
                                     Waveform::kTone, 1.25, 1.0, std::nullopt}};
        const IQBuffer iq = simulate_iq(jammers, mask, 4096, 12, 1e-5, 20e6);
        const auto peaks = detect_peaks(psd(iq), 10.0);
        REQUIRE(!peaks.empty());
        CHECK(peaks[0].freq_mhz == doctest::Approx(1575.42 + 1.25).epsilon(1e-5));
    }
    SUBCASE("chirp energy matches tone energy at equal power (Parseval)") {
        // 1.25 MHz is bin-aligned at 20 MHz / 8192 samples.
        std::vector<Jammer> tone{{{0, 0}, 2.0, "L1", 1.0, std::nullopt, Bearing(0),
                                  Waveform::kTone, 1.25, 1.0, std::nullopt}};
        std::vector<Jammer> chirp{{{0, 0}, 2.0, "L1", 1.0, std::nullopt, Bearing(0),
                                   Waveform::kChirp, 1.25, 2.0, std::nullopt}};
        const PSDFrame pt = psd(simulate_iq(tone, mask, 8192, 13, 0.0));
        const PSDFrame pc = psd(simulate_iq(chirp, mask, 8192, 13, 0.0));
        CHECK(pc.total_power() == doctest::Approx(pt.total_power()).epsilon(1e-9));

        // The chirp spreads over its sweep; the tone stays in one bin.
        const auto tone_peaks = detect_peaks(pt, 2.0);
        REQUIRE(!tone_peaks.empty());
        CHECK(pt.power[tone_peaks[0].bin] / pt.total_power() > 0.99);
        double cmax = 0.0;
        for (double p : pc.power) cmax = std::max(cmax, p);
        CHECK(cmax / pc.total_power() < 0.5);
    }
    SUBCASE("band-noise jammer lands inside its configured band") {
        std::vector<Jammer> jammers{{{0, 0}, 1.0, "L1", 1.0, std::nullopt, Bearing(0),
                                     Waveform::kBandNoise, -2.0, 1.0, std::nullopt}};
        const IQBuffer iq = simulate_iq(jammers, mask, 4096, 14, 0.0, 20e6);
        const PSDFrame frame = psd(iq);
        const double inside = band_power(frame, {"jam", 1575.42 - 2.0, 1.2});
        CHECK(inside / frame.total_power() > 0.95);
    }
    SUBCASE("deterministic per seed") {
        const IQBuffer a = simulate_iq({}, mask, 1024, 21, 1e-3);
        const IQBuffer b = simulate_iq({}, mask, 1024, 21, 1e-3);
        CHECK(a.samples == b.samples);
    }
    SUBCASE("n must be a power of two") {
        CHECK_THROWS_AS(simulate_iq({}, mask, 1000, 1, 1e-3), std::invalid_argument);
    }
}

TEST_CASE("scenario files round-trip") {
    const Scenario s = base_scenario();
    const std::string text = scenario_to_json(s);
    const Scenario back = scenario_from_json(text);
    CHECK(back.jammers.size() == s.jammers.size());
    CHECK(back.poses.size() == s.poses.size());
    CHECK(back.noise_floor == s.noise_floor);
    CHECK(back.step_deg == s.step_deg);
    CHECK(back.seed == s.seed);
    CHECK(srp_eval(back.srp, 30.0) == doctest::Approx(srp_eval(s.srp, 30.0)));

    CHECK_THROWS(scenario_from_json("{\"this is\": \"not a scenario\"}"));
    CHECK_THROWS(scenario_from_json("not json at all"));
}

TEST_CASE("single-jammer round trip localizes within 25 m with good geometry") {
    Scenario s = base_scenario();
    s.jammers[0].position = {37, -12};
    s.jitter = {0.142, 0.0};
    const double step = 30.0;

    std::vector<Heatmap> maps;
    std::vector<ScanPose> poses;
    for (std::size_t i = 0; i < s.poses.size(); ++i) {
        const HorizonScan scan = simulate_scan(s, i, step, 99);
        poses.push_back(scan.pose);
        maps.push_back(expectation_density(scan, s.srp, s.grid));
    }
    const FusedMap cut = threshold(fuse(maps), 0.8);
    const auto regions = extract_regions(cut);
    REQUIRE(!regions.empty());
    CHECK(geometry_quality(poses, regions[0].centroid) >= 0.7);

    std::vector<LocalPoint> positions;
    for (const auto& p : poses) positions.push_back(p.position);
    const EllipseFit fit = fit_ellipse(regions[0], cut, positions);
    CHECK(localization_error(fit, s.jammers[0].position) <= 25.0);
    const double peak_error = std::hypot(regions[0].peak.east - 37.0,
                                         regions[0].peak.north - (-12.0));
    CHECK(peak_error <= 25.0);
}
