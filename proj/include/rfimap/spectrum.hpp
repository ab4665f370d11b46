// SPDX-License-Identifier: Apache-2.0
//
// rfimap - UAV-borne GNSS interference survey and transmitter mapping
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <complex>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rfimap/geometry.hpp"

namespace rfimap {

/// Complex baseband capture. Length must be a power of two >= 16. Heading and
/// position record where the capture was taken; they default to the origin
/// for captures without pose metadata.
struct IQBuffer {
    std::vector<std::complex<double>> samples;
    double sample_rate_hz = 0.0;
    double center_freq_mhz = 0.0;
    Bearing heading;
    LocalPoint position;

    void validate() const;
};

/// One periodogram. Bin k holds relative power at frequency
/// center + k_signed * sample_rate / N, with k_signed in DFT order (positive
/// frequencies first, then negative).
struct PSDFrame {
    std::vector<double> power;
    double sample_rate_hz = 0.0;
    double center_freq_mhz = 0.0;
    Bearing heading;
    LocalPoint position;

    std::size_t size() const { return power.size(); }
    double bin_width_hz() const { return sample_rate_hz / static_cast<double>(power.size()); }
    double freq_mhz(std::size_t k) const;
    double total_power() const;
};

/// Monitored channel: a named frequency slice of the front-end span.
struct ChannelMask {
    std::string name;
    double center_mhz = 0.0;
    double bandwidth_mhz = 0.0;
};

/// Candidate explanation of a detected peak: a transmitter at
/// `fundamental_mhz` whose `order`-th harmonic lands on the peak, when the
/// fundamental falls inside a known allocation band.
struct HarmonicCandidate {
    double fundamental_mhz = 0.0;
    int order = 1;  // 1 = the peak frequency itself lies in the band
    std::string band_name;
};

struct PeakReport {
    double freq_mhz = 0.0;
    double power = 0.0;
    double prominence = 0.0;  // peak power over the frame's median bin power
    std::size_t bin = 0;
    std::vector<HarmonicCandidate> attribution;
};

struct AllocationBand {
    std::string name;
    double lo_mhz = 0.0;
    double hi_mhz = 0.0;
};

/// Table of regional frequency allocations used for harmonic attribution.
/// The built-in defaults cover the allocations relevant to GNSS bands; they
/// can be replaced from a JSON file since allocations are region-specific.
class AllocationTable {
  public:
    static AllocationTable defaults();
    static AllocationTable load(const std::filesystem::path& path);

    explicit AllocationTable(std::vector<AllocationBand> bands);

    const std::vector<AllocationBand>& bands() const { return bands_; }

    /// For each harmonic order in {1, 2, 3}, report every allocation band
    /// containing peak_mhz / order.
    std::vector<HarmonicCandidate> attribute(double peak_mhz) const;

  private:
    std::vector<AllocationBand> bands_;
};

/// Periodogram of one capture: P(f_k) = |DFT(x)_k|^2 / N. Satisfies
/// Parseval: sum_k P(f_k) == sum_n |x[n]|^2.
PSDFrame psd(const IQBuffer& iq);

/// Mean of the periodograms of several equal-length captures. Pose metadata
/// is taken from the first buffer.
PSDFrame psd_mean(std::span<const IQBuffer> buffers);

/// Sum of bin powers inside the mask. Throws std::invalid_argument when the
/// mask does not overlap the frame's frequency span.
double band_power(const PSDFrame& frame, const ChannelMask& mask);

/// Strict local maxima whose power is at least `min_prominence` times the
/// median bin power, sorted by power descending. Attribution is filled from
/// the allocation table.
std::vector<PeakReport> detect_peaks(const PSDFrame& frame, double min_prominence,
                                     const AllocationTable& table = AllocationTable::defaults());

/// Allocation bands whose harmonics (orders 1-3) land on peak_mhz.
std::vector<HarmonicCandidate> attribute_harmonics(
    double peak_mhz, const AllocationTable& table = AllocationTable::defaults());

// IQ capture files: interleaved little-endian float32 I/Q pairs, with a JSON
// sidecar {"sample_rate_hz": ..., "center_freq_mhz": ..., "n": ...}.
IQBuffer load_iq(const std::filesystem::path& bin_path,
                 const std::filesystem::path& sidecar_path);
void save_iq(const IQBuffer& iq, const std::filesystem::path& bin_path,
             const std::filesystem::path& sidecar_path);

// PSD and peak reports as JSON documents.
std::string psd_to_json(const PSDFrame& frame);
std::string peaks_to_json(const std::vector<PeakReport>& peaks);

}  // namespace rfimap
