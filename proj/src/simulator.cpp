// SPDX-License-Identifier: Apache-2.0
//
// rfimap - UAV-borne GNSS interference survey and transmitter mapping
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "rfimap/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>

#include <fftw3.h>
#include <json.hpp>

#include "fftw_guard.hpp"
#include "rfimap/io_util.hpp"
#include "rfimap/spectrum.hpp"

namespace rfimap {

namespace {

constexpr double kDenialMarginLinear = 1e6;  // 60 dB over the noise floor

// splitmix64; decorrelates per-pose streams derived from one master seed.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

LocalPoint jitter_displacement(const JitterModel& jitter, const Wind& wind,
                               std::mt19937_64& rng) {
    const double along = jitter.position_stddev_m + jitter.wind_gain_m_per_mps * wind.speed_mps;
    const double cross = jitter.position_stddev_m;
    std::normal_distribution<double> unit(0.0, 1.0);
    const double u = along > 0.0 ? along * unit(rng) : 0.0;
    const double v = cross > 0.0 ? cross * unit(rng) : 0.0;
    const double rad = wind.direction.degrees() * std::numbers::pi / 180.0;
    const double we = std::sin(rad);
    const double wn = std::cos(rad);
    return {u * we + v * wn, u * wn - v * we};
}

Waveform waveform_from_string(const std::string& s) {
    if (s == "tone") return Waveform::kTone;
    if (s == "chirp") return Waveform::kChirp;
    if (s == "band_noise") return Waveform::kBandNoise;
    throw std::invalid_argument("unknown waveform '" + s + "'");
}

std::string waveform_to_string(Waveform w) {
    switch (w) {
        case Waveform::kTone: return "tone";
        case Waveform::kChirp: return "chirp";
        case Waveform::kBandNoise: return "band_noise";
    }
    return "tone";
}

}  // namespace

void Jammer::validate() const {
    if (!(eirp > 0.0) || !std::isfinite(eirp)) {
        throw std::invalid_argument("Jammer: eirp must be positive");
    }
    if (!std::isfinite(position.east) || !std::isfinite(position.north)) {
        throw std::invalid_argument("Jammer: position must be finite");
    }
    if (!(duty_cycle > 0.0) || duty_cycle > 1.0) {
        throw std::invalid_argument("Jammer: duty_cycle must lie in (0, 1]");
    }
}

double denial_radius(const Jammer& jammer, double noise_floor, double exponent) {
    if (jammer.denial_radius_m) return *jammer.denial_radius_m;
    if (!(noise_floor > 0.0)) return 0.0;
    return std::pow(jammer.eirp / (kDenialMarginLinear * noise_floor), 1.0 / exponent);
}

void Scenario::validate() const {
    if (poses.empty()) {
        throw std::invalid_argument("Scenario: needs at least one scan pose");
    }
    if (path_loss_exponent < 1.5 || path_loss_exponent > 4.0) {
        throw std::invalid_argument("Scenario: path_loss_exponent must lie in [1.5, 4]");
    }
    if (!(noise_floor >= 0.0) || !std::isfinite(noise_floor)) {
        throw std::invalid_argument("Scenario: noise_floor must be >= 0");
    }
    if (noise_avg_count < 1) {
        throw std::invalid_argument("Scenario: noise_avg_count must be >= 1");
    }
    grid.validate();
    if (srp.components.empty()) {
        throw std::invalid_argument("Scenario: missing receive SRP model");
    }
    for (const auto& jammer : jammers) {
        jammer.validate();
        const double radius = denial_radius(jammer, noise_floor, path_loss_exponent);
        for (std::size_t p = 0; p < poses.size(); ++p) {
            const double d = std::hypot(poses[p].position.east - jammer.position.east,
                                        poses[p].position.north - jammer.position.north);
            if (d <= radius) {
                throw std::invalid_argument("Scenario: pose " + std::to_string(p) +
                                            " is inside a jammer's denial radius (" +
                                            std::to_string(radius) + " m)");
            }
        }
    }
    if (step_deg != 0.0) {
        if (!(step_deg > 0.0) ||
            std::abs(std::llround(360.0 / step_deg) * step_deg - 360.0) > 1e-9 * 360.0) {
            throw std::invalid_argument("Scenario: step_deg must divide 360");
        }
    }
}

double Scenario::heading_step() const {
    return step_deg != 0.0 ? step_deg : default_step(srp);
}

double received_power(const Jammer& jammer, const ScanPose& rx, const SRPModel& rx_srp,
                      double exponent) {
    if (rx.position == jammer.position) {
        throw std::invalid_argument("received_power: receiver coincides with the jammer");
    }
    const double d = std::hypot(jammer.position.east - rx.position.east,
                                jammer.position.north - rx.position.north);
    const double rx_gain =
        srp_eval(rx_srp, bearing_diff(rx.heading, bearing_to(rx.position, jammer.position)));
    double tx_gain = 1.0;
    if (jammer.tx_pattern) {
        tx_gain = srp_eval(*jammer.tx_pattern,
                           bearing_diff(jammer.tx_heading,
                                        bearing_to(jammer.position, rx.position)));
    }
    return jammer.eirp * std::pow(d, -exponent) * rx_gain * tx_gain * jammer.duty_cycle;
}

HorizonScan simulate_scan(const Scenario& scenario, std::size_t pose_index,
                          double step_deg, std::uint64_t seed) {
    scenario.validate();
    if (pose_index >= scenario.poses.size()) {
        throw std::out_of_range("simulate_scan: pose index out of range");
    }
    const int n = static_cast<int>(std::llround(360.0 / step_deg));
    if (n < 1 || std::abs(n * step_deg - 360.0) > 1e-9 * 360.0) {
        throw std::invalid_argument("simulate_scan: step_deg must divide 360");
    }

    std::mt19937_64 rng(mix_seed(seed, pose_index));
    const ScanPose& commanded = scenario.poses[pose_index];

    std::vector<double> powers(static_cast<std::size_t>(n), 0.0);
    LocalPoint mean_position{0.0, 0.0};
    for (int k = 0; k < n; ++k) {
        const LocalPoint d = jitter_displacement(scenario.jitter, scenario.wind, rng);
        const ScanPose instant{{commanded.position.east + d.east,
                                commanded.position.north + d.north},
                               Bearing(k * step_deg)};
        mean_position.east += instant.position.east;
        mean_position.north += instant.position.north;

        double p = 0.0;
        for (const auto& jammer : scenario.jammers) {
            p += received_power(jammer, instant, scenario.srp, scenario.path_loss_exponent);
        }
        if (scenario.noise_floor > 0.0) {
            // Averaged-periodogram noise: Gamma(M, floor / M) keeps the mean at
            // the configured floor with the variance of an M-frame average.
            std::gamma_distribution<double> noise(
                static_cast<double>(scenario.noise_avg_count),
                scenario.noise_floor / static_cast<double>(scenario.noise_avg_count));
            p += noise(rng);
        }
        powers[static_cast<std::size_t>(k)] = p;
    }

    HorizonScan scan;
    scan.pose.position = {mean_position.east / n, mean_position.north / n};
    scan.pose.heading = commanded.heading;
    scan.band = scenario.band;
    scan.step_deg = step_deg;
    scan.steps.resize(static_cast<std::size_t>(n));
    const double max_power = *std::max_element(powers.begin(), powers.end());
    for (int k = 0; k < n; ++k) {
        scan.steps[static_cast<std::size_t>(k)].heading = Bearing(k * step_deg);
        scan.steps[static_cast<std::size_t>(k)].rel_power =
            max_power > 0.0 ? powers[static_cast<std::size_t>(k)] / max_power : 0.0;
    }
    return scan;
}

IQBuffer simulate_iq(std::span<const Jammer> jammers, const ChannelMask& mask,
                     std::size_t n, std::uint64_t seed, double noise_floor,
                     double sample_rate_hz) {
    if (n < 16 || (n & (n - 1)) != 0) {
        throw std::invalid_argument("simulate_iq: n must be a power of two >= 16");
    }

    IQBuffer iq;
    iq.sample_rate_hz = sample_rate_hz;
    iq.center_freq_mhz = mask.center_mhz;
    iq.samples.assign(n, {0.0, 0.0});

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    if (noise_floor > 0.0) {
        const double s = std::sqrt(noise_floor / 2.0);
        for (auto& x : iq.samples) {
            x = {s * unit(rng), s * unit(rng)};
        }
    }

    for (const auto& jammer : jammers) {
        jammer.validate();
        const std::size_t on = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(jammer.duty_cycle * n)));
        const double amplitude = std::sqrt(jammer.eirp);
        const double f0 = jammer.freq_offset_mhz * 1e6;

        switch (jammer.waveform) {
            case Waveform::kTone: {
                for (std::size_t i = 0; i < on; ++i) {
                    const double phase = 2.0 * std::numbers::pi * f0 * i / sample_rate_hz;
                    iq.samples[i] += std::polar(amplitude, phase);
                }
                break;
            }
            case Waveform::kChirp: {
                const double span = jammer.sweep_mhz * 1e6;
                const double f_start = f0 - span / 2.0;
                const double rate = span / (static_cast<double>(on) / sample_rate_hz);
                for (std::size_t i = 0; i < on; ++i) {
                    const double t = static_cast<double>(i) / sample_rate_hz;
                    const double phase =
                        2.0 * std::numbers::pi * (f_start * t + 0.5 * rate * t * t);
                    iq.samples[i] += std::polar(amplitude, phase);
                }
                break;
            }
            case Waveform::kBandNoise: {
                // Bandlimited noise shaped in the frequency domain.
                std::vector<std::complex<double>> spec(n, {0.0, 0.0});
                const double df = sample_rate_hz / static_cast<double>(n);
                std::size_t kept = 0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double f = (k < n / 2 ? static_cast<double>(k)
                                                : static_cast<double>(k) - static_cast<double>(n)) *
                                     df;
                    if (std::abs(f - f0) <= jammer.sweep_mhz * 1e6 / 2.0) {
                        spec[k] = {unit(rng), unit(rng)};
                        ++kept;
                    }
                }
                if (kept == 0) break;
                std::vector<std::complex<double>> time(n);
                fftw_plan plan = nullptr;
                {
                    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
                    plan = fftw_plan_dft_1d(
                        static_cast<int>(n), reinterpret_cast<fftw_complex*>(spec.data()),
                        reinterpret_cast<fftw_complex*>(time.data()), FFTW_BACKWARD,
                        FFTW_ESTIMATE);
                }
                fftw_execute(plan);
                {
                    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
                    fftw_destroy_plan(plan);
                }
                double power = 0.0;
                for (std::size_t i = 0; i < on; ++i) power += std::norm(time[i]);
                power /= static_cast<double>(on);
                const double scale = power > 0.0 ? amplitude / std::sqrt(power) : 0.0;
                for (std::size_t i = 0; i < on; ++i) iq.samples[i] += scale * time[i];
                break;
            }
        }
    }
    return iq;
}

ScanPose perturb_pose(const ScanPose& pose, const JitterModel& jitter, const Wind& wind,
                      std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const LocalPoint d = jitter_displacement(jitter, wind, rng);
    return {{pose.position.east + d.east, pose.position.north + d.north}, pose.heading};
}

namespace {

nlohmann::ordered_json jammer_to_json(const Jammer& jammer) {
    nlohmann::ordered_json j;
    j["east"] = jammer.position.east;
    j["north"] = jammer.position.north;
    j["eirp"] = jammer.eirp;
    j["band"] = jammer.band;
    j["duty_cycle"] = jammer.duty_cycle;
    j["waveform"] = waveform_to_string(jammer.waveform);
    j["freq_offset_mhz"] = jammer.freq_offset_mhz;
    j["sweep_mhz"] = jammer.sweep_mhz;
    if (jammer.tx_pattern) {
        auto& comps = j["tx_pattern"] = nlohmann::ordered_json::array();
        for (const auto& c : jammer.tx_pattern->components) {
            comps.push_back({c.weight, c.mean_deg, c.sigma_deg});
        }
        j["tx_heading_deg"] = jammer.tx_heading.degrees();
    }
    if (jammer.denial_radius_m) j["denial_radius_m"] = *jammer.denial_radius_m;
    return j;
}

Jammer jammer_from_json(const nlohmann::json& j) {
    Jammer jammer;
    jammer.position = {j.at("east").get<double>(), j.at("north").get<double>()};
    jammer.eirp = j.at("eirp").get<double>();
    if (j.contains("band")) jammer.band = j["band"].get<std::string>();
    if (j.contains("duty_cycle")) jammer.duty_cycle = j["duty_cycle"].get<double>();
    if (j.contains("waveform")) jammer.waveform = waveform_from_string(j["waveform"]);
    if (j.contains("freq_offset_mhz")) jammer.freq_offset_mhz = j["freq_offset_mhz"].get<double>();
    if (j.contains("sweep_mhz")) jammer.sweep_mhz = j["sweep_mhz"].get<double>();
    if (j.contains("tx_pattern")) {
        SRPModel tx;
        for (const auto& c : j["tx_pattern"]) {
            tx.components.push_back(
                {c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()});
        }
        jammer.tx_pattern = std::move(tx);
        jammer.tx_heading = Bearing(j.value("tx_heading_deg", 0.0));
    }
    if (j.contains("denial_radius_m")) jammer.denial_radius_m = j["denial_radius_m"].get<double>();
    jammer.validate();
    return jammer;
}

SRPModel srp_from_json_value(const nlohmann::json& j) {
    SRPModel model;
    for (const auto& c : j) {
        model.components.push_back(
            {c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()});
    }
    return model;
}

}  // namespace

Scenario scenario_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    Scenario s;

    const auto& grid = j.at("grid");
    s.grid.origin = {grid.at("origin_east").get<double>(), grid.at("origin_north").get<double>()};
    s.grid.resolution = grid.at("resolution_m").get<double>();
    s.grid.width = grid.at("width").get<int>();
    s.grid.height = grid.at("height").get<int>();

    for (const auto& jam : j.at("jammers")) s.jammers.push_back(jammer_from_json(jam));
    for (const auto& p : j.at("poses")) {
        s.poses.push_back({{p.at("east").get<double>(), p.at("north").get<double>()},
                           Bearing(p.value("heading_deg", 0.0))});
    }

    s.noise_floor = j.value("noise_floor", 0.0);
    s.path_loss_exponent = j.value("path_loss_exponent", 2.0);
    if (j.contains("wind")) {
        s.wind.speed_mps = j["wind"].value("speed_mps", 0.0);
        s.wind.direction = Bearing(j["wind"].value("direction_deg", 0.0));
    }
    if (j.contains("jitter")) {
        s.jitter.position_stddev_m = j["jitter"].value("position_stddev_m", 0.0);
        s.jitter.wind_gain_m_per_mps = j["jitter"].value("wind_gain_m_per_mps", 0.0);
    }
    if (j.contains("srp_components")) {
        s.srp = srp_from_json_value(j["srp_components"]);
    } else if (j.contains("srp_hpbw_deg")) {
        s.srp = srp_from_hpbw(j["srp_hpbw_deg"].get<double>());
    } else {
        throw std::invalid_argument("Scenario: needs srp_components or srp_hpbw_deg");
    }
    s.band = j.value("band", std::string("L1"));
    s.step_deg = j.value("step_deg", 0.0);
    s.noise_avg_count = j.value("noise_avg_count", 4);
    s.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("origin")) {
        s.origin = GeoOrigin{j["origin"].at("lat_deg").get<double>(),
                             j["origin"].at("lon_deg").get<double>()};
    }
    s.validate();
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    try {
        return scenario_from_json(read_text_file(path));
    } catch (const std::exception& e) {
        throw std::runtime_error("load_scenario: " + path.string() + ": " + e.what());
    }
}

std::string scenario_to_json(const Scenario& s) {
    nlohmann::ordered_json j;
    j["grid"] = {{"origin_east", s.grid.origin.east},
                 {"origin_north", s.grid.origin.north},
                 {"resolution_m", s.grid.resolution},
                 {"width", s.grid.width},
                 {"height", s.grid.height}};
    auto& jams = j["jammers"] = nlohmann::ordered_json::array();
    for (const auto& jammer : s.jammers) jams.push_back(jammer_to_json(jammer));
    auto& poses = j["poses"] = nlohmann::ordered_json::array();
    for (const auto& p : s.poses) {
        poses.push_back({{"east", p.position.east},
                         {"north", p.position.north},
                         {"heading_deg", p.heading.degrees()}});
    }
    j["noise_floor"] = s.noise_floor;
    j["path_loss_exponent"] = s.path_loss_exponent;
    j["wind"] = {{"speed_mps", s.wind.speed_mps}, {"direction_deg", s.wind.direction.degrees()}};
    j["jitter"] = {{"position_stddev_m", s.jitter.position_stddev_m},
                   {"wind_gain_m_per_mps", s.jitter.wind_gain_m_per_mps}};
    auto& comps = j["srp_components"] = nlohmann::ordered_json::array();
    for (const auto& c : s.srp.components) comps.push_back({c.weight, c.mean_deg, c.sigma_deg});
    j["band"] = s.band;
    j["step_deg"] = s.step_deg;
    j["noise_avg_count"] = s.noise_avg_count;
    j["seed"] = s.seed;
    if (s.origin) {
        j["origin"] = {{"lat_deg", s.origin->lat_deg}, {"lon_deg", s.origin->lon_deg}};
    }
    return j.dump(2) + "\n";
}

std::string truth_to_json(const Scenario& s) {
    nlohmann::ordered_json j;
    auto& jams = j["jammers"] = nlohmann::ordered_json::array();
    for (const auto& jammer : s.jammers) {
        jams.push_back({{"east", jammer.position.east},
                        {"north", jammer.position.north},
                        {"eirp", jammer.eirp},
                        {"band", jammer.band}});
    }
    j["seed"] = s.seed;
    return j.dump(2) + "\n";
}

}  // namespace rfimap
