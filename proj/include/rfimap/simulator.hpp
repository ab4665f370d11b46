// SPDX-License-Identifier: Apache-2.0
//
// rfimap - UAV-borne GNSS interference survey and transmitter mapping
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rfimap/antenna.hpp"
#include "rfimap/geometry.hpp"
#include "rfimap/scanops.hpp"
#include "rfimap/spectrum.hpp"

namespace rfimap {

enum class Waveform { kTone, kChirp, kBandNoise };

/// Ground-truth interference transmitter.
struct Jammer {
    LocalPoint position;
    double eirp = 1.0;  // relative linear power
    std::string band = "L1";
    double duty_cycle = 1.0;  // in (0, 1]
    std::optional<SRPModel> tx_pattern;  // directional transmitter, else isotropic
    Bearing tx_heading;
    Waveform waveform = Waveform::kTone;
    double freq_offset_mhz = 0.0;  // offset from the channel center
    double sweep_mhz = 1.0;        // chirp sweep span / band-noise bandwidth
    std::optional<double> denial_radius_m;  // override for the computed radius

    void validate() const;
};

/// UAV position-holding noise: an isotropic base plus extra spread along the
/// wind direction proportional to wind speed.
struct JitterModel {
    double position_stddev_m = 0.0;
    double wind_gain_m_per_mps = 0.0;
};

struct Wind {
    double speed_mps = 0.0;
    Bearing direction;  // direction the wind pushes toward
};

/// Complete simulated world: transmitters, survey geometry, propagation and
/// noise. Doubles as the ground-truth oracle for pipeline tests.
struct Scenario {
    std::vector<Jammer> jammers;
    std::vector<ScanPose> poses;
    GridSpec grid;
    double noise_floor = 0.0;        // relative power added per heading step
    double path_loss_exponent = 2.0;  // in [1.5, 4]
    Wind wind;
    JitterModel jitter;
    SRPModel srp;           // receive antenna model used for the scans
    std::string band = "L1";
    double step_deg = 0.0;  // 0 = derive from the SRP beamwidth
    int noise_avg_count = 4;
    std::uint64_t seed = 0;
    std::optional<GeoOrigin> origin;

    /// Throws std::invalid_argument on structural problems, including scan
    /// poses inside a jammer's denial radius.
    void validate() const;

    double heading_step() const;  // step_deg, or default_step(srp) when 0
};

/// Power-law propagation margin considered "denied": inside this radius the
/// received jammer power exceeds the noise floor by 60 dB.
double denial_radius(const Jammer& jammer, double noise_floor, double exponent);

/// Received relative power from one jammer at one receiver pose:
/// eirp * d^-exponent * rx gain at the arrival bearing * tx gain * duty.
/// Throws std::invalid_argument for coincident positions.
double received_power(const Jammer& jammer, const ScanPose& rx, const SRPModel& rx_srp,
                      double exponent);

/// Simulate the horizon scan at poses[pose_index]: per heading step, the sum
/// of received jammer powers plus a noise draw, max-normalized per scan. The
/// hover position is re-drawn per step from the jitter model; the recorded
/// pose is the mean of those positions. Deterministic in (scenario, seed).
HorizonScan simulate_scan(const Scenario& scenario, std::size_t pose_index,
                          double step_deg, std::uint64_t seed);

/// Synthetic baseband capture: complex white noise at `noise_floor` per-bin
/// level, plus each jammer's waveform at its configured offset and relative
/// power (duty cycle gates the waveform on for the leading fraction of the
/// buffer). n must be a power of two >= 16.
IQBuffer simulate_iq(std::span<const Jammer> jammers, const ChannelMask& mask,
                     std::size_t n, std::uint64_t seed, double noise_floor = 1e-6,
                     double sample_rate_hz = 20e6);

/// Gaussian position displacement: stddev `jitter.position_stddev_m` across
/// the wind and that plus wind_gain * speed along it. Heading is unchanged.
ScanPose perturb_pose(const ScanPose& pose, const JitterModel& jitter, const Wind& wind,
                      std::uint64_t seed);

// Scenario file (JSON), see README for the schema.
Scenario load_scenario(const std::filesystem::path& path);
Scenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const Scenario& scenario);

/// Ground-truth transmitter positions for scoring a simulated run.
std::string truth_to_json(const Scenario& scenario);

}  // namespace rfimap
