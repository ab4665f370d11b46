// SPDX-License-Identifier: Apache-2.0
//
// rfimap - UAV-borne GNSS interference survey and transmitter mapping
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <filesystem>
#include <stdexcept>
#include <vector>

namespace rfimap {

/// One measured gain sample of an azimuthal radiation pattern.
struct PatternSample {
    double bearing_deg = 0.0;  // relative to the antenna major axis, [0, 360)
    double gain_db = 0.0;      // power gain
};

/// Measured azimuthal radiation pattern for one frequency band.
struct RadiationPattern {
    double band_mhz = 0.0;
    std::vector<PatternSample> samples;

    /// Throws std::invalid_argument unless there are >= 8 samples with
    /// strictly increasing bearings in [0, 360) and finite gains.
    void validate() const;
};

struct GaussComponent {
    double weight = 0.0;     // >= 0
    double mean_deg = 0.0;   // component center, relative bearing
    double sigma_deg = 0.0;  // > 0
};

/// Standard radiation pattern: a mirror-symmetric Gaussian mixture over
/// relative bearing, normalized so the boresight gain is 1. Components with
/// nonzero mean always come in +/- pairs, so the stored mixture is itself an
/// even function.
struct SRPModel {
    std::vector<GaussComponent> components;
    double fit_rms = 0.0;  // residual RMS of the fit that produced the model
};

/// Per-band multiplicative sensitivity correction.
struct GainMask {
    double band_mhz = 0.0;
    double scale = 1.0;  // in (0, 1]
};

/// Raised when a pattern fit does not meet the residual or shape constraints.
class FitError : public std::runtime_error {
  public:
    FitError(const std::string& what, double residual_rms)
        : std::runtime_error(what), residual_rms_(residual_rms) {}

    double residual_rms() const { return residual_rms_; }

  private:
    double residual_rms_;
};

/// Scale the pattern so its peak linear gain is 1 (0 dB). Shape preserved.
RadiationPattern normalize_pattern(const RadiationPattern& rp);

/// Enforce the standard-pattern constraints on a normalized pattern:
/// mirror symmetry (average of mirrored samples), global maximum at 0 deg,
/// and a smooth backplane taper pushing the gain at +/-180 deg below 0.01.
/// The output is resampled onto a uniform 1-degree bearing grid.
RadiationPattern symmetrize(const RadiationPattern& rp);

/// Least-squares fit of a nonnegative mirror-symmetric Gaussian mixture to a
/// symmetrized pattern. Throws FitError if the residual RMS exceeds 0.05 in
/// linear gain or the fitted model violates the shape constraints.
SRPModel fit_srp(const RadiationPattern& rp, int n_components = 3);

/// Per-band scales equalizing directional sensitivity across bands: the band
/// with the lowest peak sensitivity keeps scale 1, more sensitive bands are
/// compressed below 1. Operates on raw (un-normalized) patterns, whose peak
/// gains carry the relative band sensitivities.
std::vector<GainMask> band_masks(const std::vector<RadiationPattern>& patterns);

/// Mixture gain at relative bearing dpsi, in [0, 1]. Even in dpsi.
double srp_eval(const SRPModel& model, double dpsi_deg);

/// Angular width over which srp_eval stays >= 0.5, found by dense scanning.
/// Returns 360 if the gain never drops below 0.5.
double half_power_beamwidth(const SRPModel& model);

/// Single-Gaussian SRP with the given half-power beamwidth. Convenience
/// constructor for simulations; hpbw must be < 145 deg so the backplane
/// constraint still holds.
SRPModel srp_from_hpbw(double hpbw_deg);

// Pattern file: JSON {"band_mhz": f, "samples": [[deg, dB], ...]}.
RadiationPattern load_pattern(const std::filesystem::path& path);
void save_pattern(const RadiationPattern& rp, const std::filesystem::path& path);

// SRP model file: JSON {"components": [[w, mu, sigma], ...]}.
SRPModel load_srp(const std::filesystem::path& path);
void save_srp(const SRPModel& model, const std::filesystem::path& path);

}  // namespace rfimap
