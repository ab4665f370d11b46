// SPDX-License-Identifier: Apache-2.0
//
// rfimap - UAV-borne GNSS interference survey and transmitter mapping
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "rfimap/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>
#include <json.hpp>

#include "fftw_guard.hpp"
#include "rfimap/io_util.hpp"

namespace rfimap {

namespace detail {
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace detail

namespace {

struct FftwBuffer {
    fftw_complex* data = nullptr;
    explicit FftwBuffer(std::size_t n)
        : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
        if (data == nullptr) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
};

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

void IQBuffer::validate() const {
    if (samples.size() < 16 || !is_power_of_two(samples.size())) {
        throw std::invalid_argument("IQBuffer: sample count must be a power of two >= 16");
    }
    if (!(sample_rate_hz > 0.0)) {
        throw std::invalid_argument("IQBuffer: sample_rate_hz must be positive");
    }
    for (const auto& s : samples) {
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
            throw std::invalid_argument("IQBuffer: non-finite sample");
        }
    }
}

double PSDFrame::freq_mhz(std::size_t k) const {
    const std::size_t n = power.size();
    const double k_signed = (k < n / 2) ? static_cast<double>(k)
                                        : static_cast<double>(k) - static_cast<double>(n);
    return center_freq_mhz + k_signed * sample_rate_hz / static_cast<double>(n) / 1e6;
}

double PSDFrame::total_power() const {
    double acc = 0.0;
    for (double p : power) acc += p;
    return acc;
}

PSDFrame psd(const IQBuffer& iq) {
    iq.validate();
    const std::size_t n = iq.samples.size();

    FftwBuffer in(n);
    FftwBuffer out(n);
    fftw_plan plan = nullptr;
    {
        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(n), in.data, out.data, FFTW_FORWARD,
                                FFTW_ESTIMATE);
    }
    if (plan == nullptr) throw std::runtime_error("psd: FFTW plan creation failed");

    for (std::size_t i = 0; i < n; ++i) {
        in.data[i][0] = iq.samples[i].real();
        in.data[i][1] = iq.samples[i].imag();
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }

    PSDFrame frame;
    frame.sample_rate_hz = iq.sample_rate_hz;
    frame.center_freq_mhz = iq.center_freq_mhz;
    frame.heading = iq.heading;
    frame.position = iq.position;
    frame.power.resize(n);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        frame.power[k] = (out.data[k][0] * out.data[k][0] + out.data[k][1] * out.data[k][1]) * inv_n;
    }
    return frame;
}

PSDFrame psd_mean(std::span<const IQBuffer> buffers) {
    if (buffers.empty()) {
        throw std::invalid_argument("psd_mean: no buffers");
    }
    PSDFrame acc = psd(buffers[0]);
    for (std::size_t i = 1; i < buffers.size(); ++i) {
        const PSDFrame f = psd(buffers[i]);
        if (f.power.size() != acc.power.size()) {
            throw std::invalid_argument("psd_mean: buffers differ in length");
        }
        for (std::size_t k = 0; k < acc.power.size(); ++k) acc.power[k] += f.power[k];
    }
    const double inv = 1.0 / static_cast<double>(buffers.size());
    for (auto& p : acc.power) p *= inv;
    return acc;
}

double band_power(const PSDFrame& frame, const ChannelMask& mask) {
    if (!(mask.bandwidth_mhz > 0.0)) {
        throw std::invalid_argument("band_power: mask bandwidth must be positive");
    }
    const double lo = mask.center_mhz - mask.bandwidth_mhz / 2.0;
    const double hi = mask.center_mhz + mask.bandwidth_mhz / 2.0;
    const double span_half = frame.sample_rate_hz / 2.0 / 1e6;
    if (hi < frame.center_freq_mhz - span_half || lo > frame.center_freq_mhz + span_half) {
        throw std::invalid_argument("band_power: mask [" + std::to_string(lo) + ", " +
                                    std::to_string(hi) + "] MHz outside the frame span");
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < frame.size(); ++k) {
        const double f = frame.freq_mhz(k);
        if (f >= lo && f <= hi) acc += frame.power[k];
    }
    return acc;
}

AllocationTable::AllocationTable(std::vector<AllocationBand> bands) : bands_(std::move(bands)) {
    for (const auto& b : bands_) {
        if (!(b.lo_mhz < b.hi_mhz)) {
            throw std::invalid_argument("AllocationTable: band '" + b.name +
                                        "' has lo >= hi");
        }
    }
}

AllocationTable AllocationTable::defaults() {
    return AllocationTable({
        {"TV broadcast 781-794", 781.0, 794.0},
        {"TV broadcast 521-530", 521.0, 530.0},
        {"amateur 1240-1300", 1240.0, 1300.0},
    });
}

AllocationTable AllocationTable::load(const std::filesystem::path& path) {
    const auto j = nlohmann::json::parse(read_text_file(path));
    std::vector<AllocationBand> bands;
    for (const auto& b : j.at("bands")) {
        bands.push_back({b.at("name").get<std::string>(), b.at("lo_mhz").get<double>(),
                         b.at("hi_mhz").get<double>()});
    }
    return AllocationTable(std::move(bands));
}

std::vector<HarmonicCandidate> AllocationTable::attribute(double peak_mhz) const {
    std::vector<HarmonicCandidate> result;
    for (int order = 1; order <= 3; ++order) {
        const double fundamental = peak_mhz / order;
        for (const auto& b : bands_) {
            if (fundamental >= b.lo_mhz && fundamental <= b.hi_mhz) {
                result.push_back({fundamental, order, b.name});
            }
        }
    }
    return result;
}

std::vector<HarmonicCandidate> attribute_harmonics(double peak_mhz,
                                                   const AllocationTable& table) {
    return table.attribute(peak_mhz);
}

std::vector<PeakReport> detect_peaks(const PSDFrame& frame, double min_prominence,
                                     const AllocationTable& table) {
    const std::size_t n = frame.size();
    if (n < 3) return {};

    std::vector<double> sorted = frame.power;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n / 2),
                     sorted.end());
    const double median = sorted[n / 2];

    // Scan in ascending-frequency order so neighbors are spectral neighbors.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = (i + n / 2) % n;  // fftshift

    std::vector<PeakReport> peaks;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double p = frame.power[order[i]];
        if (!(p > frame.power[order[i - 1]] && p > frame.power[order[i + 1]])) continue;
        const double prominence = median > 0.0 ? p / median
                                               : std::numeric_limits<double>::infinity();
        if (prominence < min_prominence) continue;
        PeakReport report;
        report.bin = order[i];
        report.freq_mhz = frame.freq_mhz(order[i]);
        report.power = p;
        report.prominence = prominence;
        report.attribution = table.attribute(report.freq_mhz);
        peaks.push_back(std::move(report));
    }
    std::stable_sort(peaks.begin(), peaks.end(),
                     [](const PeakReport& a, const PeakReport& b) { return a.power > b.power; });
    return peaks;
}

IQBuffer load_iq(const std::filesystem::path& bin_path,
                 const std::filesystem::path& sidecar_path) {
    const auto j = nlohmann::json::parse(read_text_file(sidecar_path));
    IQBuffer iq;
    iq.sample_rate_hz = j.at("sample_rate_hz").get<double>();
    iq.center_freq_mhz = j.at("center_freq_mhz").get<double>();
    const auto n = j.at("n").get<std::size_t>();

    std::ifstream in(bin_path, std::ios::binary | std::ios::ate);
    if (!in) throw std::runtime_error("cannot open " + bin_path.string());
    const auto bytes = static_cast<std::size_t>(in.tellg());
    if (bytes != n * 2 * sizeof(float)) {
        throw std::runtime_error("load_iq: " + bin_path.string() + " holds " +
                                 std::to_string(bytes) + " bytes, sidecar n=" +
                                 std::to_string(n) + " needs " +
                                 std::to_string(n * 2 * sizeof(float)));
    }
    in.seekg(0);
    std::vector<float> raw(n * 2);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(bytes));
    if (!in) throw std::runtime_error("load_iq: short read from " + bin_path.string());

    iq.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        iq.samples[i] = {static_cast<double>(raw[2 * i]), static_cast<double>(raw[2 * i + 1])};
    }
    iq.validate();
    return iq;
}

void save_iq(const IQBuffer& iq, const std::filesystem::path& bin_path,
             const std::filesystem::path& sidecar_path) {
    iq.validate();
    std::string raw(iq.samples.size() * 2 * sizeof(float), '\0');
    for (std::size_t i = 0; i < iq.samples.size(); ++i) {
        const float re = static_cast<float>(iq.samples[i].real());
        const float im = static_cast<float>(iq.samples[i].imag());
        std::memcpy(raw.data() + (2 * i) * sizeof(float), &re, sizeof(float));
        std::memcpy(raw.data() + (2 * i + 1) * sizeof(float), &im, sizeof(float));
    }
    write_file_atomic(bin_path, raw);

    nlohmann::ordered_json j;
    j["sample_rate_hz"] = iq.sample_rate_hz;
    j["center_freq_mhz"] = iq.center_freq_mhz;
    j["n"] = iq.samples.size();
    write_file_atomic(sidecar_path, j.dump(2) + "\n");
}

std::string psd_to_json(const PSDFrame& frame) {
    nlohmann::ordered_json j;
    j["sample_rate_hz"] = frame.sample_rate_hz;
    j["center_freq_mhz"] = frame.center_freq_mhz;
    j["heading_deg"] = frame.heading.degrees();
    j["position"] = {{"east", frame.position.east}, {"north", frame.position.north}};
    auto& freqs = j["freq_mhz"] = nlohmann::ordered_json::array();
    auto& powers = j["power"] = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < frame.size(); ++k) {
        freqs.push_back(frame.freq_mhz(k));
        powers.push_back(frame.power[k]);
    }
    return j.dump(2) + "\n";
}

std::string peaks_to_json(const std::vector<PeakReport>& peaks) {
    nlohmann::ordered_json j;
    auto& arr = j["peaks"] = nlohmann::ordered_json::array();
    for (const auto& p : peaks) {
        nlohmann::ordered_json e;
        e["freq_mhz"] = p.freq_mhz;
        e["power"] = p.power;
        e["prominence"] = p.prominence;
        e["bin"] = p.bin;
        auto& attr = e["attribution"] = nlohmann::ordered_json::array();
        for (const auto& h : p.attribution) {
            attr.push_back({{"fundamental_mhz", h.fundamental_mhz},
                            {"order", h.order},
                            {"band", h.band_name}});
        }
        arr.push_back(std::move(e));
    }
    return j.dump(2) + "\n";
}

}  // namespace rfimap
