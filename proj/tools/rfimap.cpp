// SPDX-License-Identifier: Apache-2.0
//
// rfimap - UAV-borne GNSS interference survey and transmitter mapping
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rfimap/antenna.hpp"
#include "rfimap/fusion.hpp"
#include "rfimap/geometry.hpp"
#include "rfimap/io_util.hpp"
#include "rfimap/localize.hpp"
#include "rfimap/scanops.hpp"
#include "rfimap/simulator.hpp"
#include "rfimap/spectrum.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNoRegion = 1;
constexpr int kExitInputError = 2;

struct NoRegionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

rfimap::LocalPoint parse_point(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) {
        throw std::invalid_argument("expected 'east,north', got '" + text + "'");
    }
    return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
}

rfimap::GridSpec parse_grid(const std::string& text, double resolution) {
    double e0 = 0.0;
    double n0 = 0.0;
    int w = 0;
    int h = 0;
    if (std::sscanf(text.c_str(), "%lf,%lf,%d,%d", &e0, &n0, &w, &h) != 4) {
        throw std::invalid_argument("expected 'origin_east,origin_north,width,height', got '" +
                                    text + "'");
    }
    rfimap::GridSpec grid{{e0, n0}, resolution, w, h};
    grid.validate();
    return grid;
}

// Square grid covering the scan positions with a generous margin, so distant
// transmitters seen from inside the pose cluster still land on the map.
rfimap::GridSpec auto_grid(const std::vector<rfimap::HorizonScan>& scans, double resolution) {
    double lo_e = scans[0].pose.position.east;
    double hi_e = lo_e;
    double lo_n = scans[0].pose.position.north;
    double hi_n = lo_n;
    for (const auto& s : scans) {
        lo_e = std::min(lo_e, s.pose.position.east);
        hi_e = std::max(hi_e, s.pose.position.east);
        lo_n = std::min(lo_n, s.pose.position.north);
        hi_n = std::max(hi_n, s.pose.position.north);
    }
    const double span = std::max(hi_e - lo_e, hi_n - lo_n);
    const double margin = std::max(250.0, 0.5 * span);
    lo_e -= margin;
    hi_e += margin;
    lo_n -= margin;
    hi_n += margin;
    rfimap::GridSpec grid;
    grid.origin = {lo_e, lo_n};
    grid.resolution = resolution;
    grid.width = static_cast<int>(std::ceil((hi_e - lo_e) / resolution));
    grid.height = static_cast<int>(std::ceil((hi_n - lo_n) / resolution));
    grid.validate();
    return grid;
}

int cmd_simulate(const std::string& scenario_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed_override, double step_override) {
    rfimap::Scenario scenario = rfimap::load_scenario(scenario_path);
    if (seed_override) scenario.seed = *seed_override;
    const double step = step_override > 0.0 ? step_override : scenario.heading_step();

    std::vector<std::string> scan_texts;
    scan_texts.reserve(scenario.poses.size());
    for (std::size_t i = 0; i < scenario.poses.size(); ++i) {
        const rfimap::HorizonScan scan =
            rfimap::simulate_scan(scenario, i, step, scenario.seed);
        scan_texts.push_back(rfimap::scan_to_json(scan));
    }

    fs::create_directories(out_dir);
    for (std::size_t i = 0; i < scan_texts.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "scan_%03zu.json", i);
        rfimap::write_file_atomic(fs::path(out_dir) / name, scan_texts[i]);
    }
    rfimap::write_file_atomic(fs::path(out_dir) / "truth.json",
                              rfimap::truth_to_json(scenario));
    std::cout << "wrote " << scan_texts.size() << " scan logs and truth.json to " << out_dir
              << "\n";
    return kExitOk;
}

int cmd_psd(const std::string& iq_path, std::string sidecar_path,
            const std::string& bands_path, double min_prominence_db,
            const std::string& out_dir) {
    if (sidecar_path.empty()) {
        fs::path p(iq_path);
        p.replace_extension(".json");
        if (p == fs::path(iq_path)) p += ".json";
        sidecar_path = p.string();
    }
    const rfimap::IQBuffer iq = rfimap::load_iq(iq_path, sidecar_path);
    const rfimap::AllocationTable table = bands_path.empty()
                                              ? rfimap::AllocationTable::defaults()
                                              : rfimap::AllocationTable::load(bands_path);
    const rfimap::PSDFrame frame = rfimap::psd(iq);
    const auto peaks =
        rfimap::detect_peaks(frame, std::pow(10.0, min_prominence_db / 10.0), table);

    fs::create_directories(out_dir);
    rfimap::write_file_atomic(fs::path(out_dir) / "psd.json", rfimap::psd_to_json(frame));
    rfimap::write_file_atomic(fs::path(out_dir) / "peaks.json", rfimap::peaks_to_json(peaks));
    std::cout << peaks.size() << " peak(s) detected\n";
    for (const auto& p : peaks) {
        std::cout << "  " << p.freq_mhz << " MHz, power " << p.power << ", prominence "
                  << p.prominence << "\n";
        for (const auto& a : p.attribution) {
            std::cout << "    order " << a.order << " harmonic of " << a.fundamental_mhz
                      << " MHz (" << a.band_name << ")\n";
        }
    }
    return kExitOk;
}

int cmd_fuse(const std::vector<std::string>& scan_paths, const std::string& srp_path,
             double srp_hpbw, const std::string& grid_text, double grid_res, double alpha,
             const std::string& band, bool unweighted, const std::string& out_dir) {
    std::vector<rfimap::HorizonScan> scans;
    for (const auto& path : scan_paths) scans.push_back(rfimap::load_scan(path));
    if (!band.empty()) {
        std::erase_if(scans, [&band](const auto& s) { return s.band != band; });
        if (scans.empty()) {
            throw std::invalid_argument("no scan logs for band '" + band + "'");
        }
    }
    for (const auto& s : scans) {
        if (s.band != scans[0].band) {
            throw std::invalid_argument("scan logs mix bands '" + scans[0].band + "' and '" +
                                        s.band + "'; select one with --band");
        }
    }

    const rfimap::SRPModel srp =
        srp_path.empty() ? rfimap::srp_from_hpbw(srp_hpbw) : rfimap::load_srp(srp_path);
    const rfimap::GridSpec grid =
        grid_text.empty() ? auto_grid(scans, grid_res) : parse_grid(grid_text, grid_res);

    const auto mode = unweighted ? rfimap::ProjectionMode::kUnweighted
                                 : rfimap::ProjectionMode::kPowerWeighted;
    std::vector<rfimap::Heatmap> maps;
    maps.reserve(scans.size());
    for (const auto& s : scans) {
        maps.push_back(rfimap::expectation_density(s, srp, grid, mode));
    }
    const rfimap::FusedMap fused = rfimap::fuse(maps);

    rfimap::FusedMap cut;
    try {
        cut = rfimap::threshold(fused, alpha);
    } catch (const std::domain_error&) {
        throw NoRegionError("fused map is all zero; nothing above the threshold");
    }
    const auto regions = rfimap::extract_regions(cut);
    if (regions.empty()) {
        throw NoRegionError("no region above the threshold");
    }

    std::vector<rfimap::ScanPose> poses;
    std::vector<rfimap::LocalPoint> positions;
    for (const auto& s : scans) {
        poses.push_back(s.pose);
        positions.push_back(s.pose.position);
    }

    std::vector<rfimap::RegionEstimate> fitted_regions;
    std::vector<rfimap::EllipseFit> fits;
    std::vector<double> quality;
    for (const auto& region : regions) {
        if (region.cells.size() < 3) continue;  // too small for a second-moment fit
        fitted_regions.push_back(region);
        fits.push_back(rfimap::fit_ellipse(region, cut, positions));
        if (poses.size() >= 2) {
            quality.push_back(rfimap::geometry_quality(std::span<const rfimap::ScanPose>(poses),
                                                       region.centroid));
        }
    }
    if (fitted_regions.empty()) {
        throw NoRegionError("regions above the threshold are too small to fit");
    }

    fs::create_directories(out_dir);
    rfimap::save_fused_json(cut, fs::path(out_dir) / "heatmap.json");
    rfimap::save_fused_pgm(cut, fs::path(out_dir) / "heatmap.pgm");
    rfimap::write_file_atomic(
        fs::path(out_dir) / "results.geojson",
        rfimap::results_geojson(fitted_regions, fits, quality, std::nullopt));

    std::printf("  #  %12s  %12s  %26s  %14s  %14s  %8s\n", "Long Axis", "Short Axis",
                "Heading on Local northing", "Local Easting", "Local Northing", "Quality");
    for (std::size_t r = 0; r < fits.size(); ++r) {
        const auto& fit = fits[r];
        char long_axis[32];
        if (fit.unbounded) {
            std::snprintf(long_axis, sizeof(long_axis), "%s", "unbound");
        } else {
            std::snprintf(long_axis, sizeof(long_axis), "%.2f m", fit.long_axis);
        }
        char qual[16] = "-";
        if (r < quality.size()) std::snprintf(qual, sizeof(qual), "%.3f", quality[r]);
        std::printf("%3zu  %12s  %10.2f m  %22.2f deg  %12.2f m  %12.2f m  %8s\n", r,
                    long_axis, fit.short_axis, fit.heading_deg, fit.center.east,
                    fit.center.north, qual);
        if (r < quality.size() && quality[r] < rfimap::kDegenerateQuality) {
            std::printf("     warning: degenerate survey geometry (quality %.3f < %.1f)\n",
                        quality[r], rfimap::kDegenerateQuality);
        }
    }
    return kExitOk;
}

int cmd_plan(const std::vector<std::string>& scan_paths, const std::string& hint_text,
             const std::string& out_path) {
    std::vector<rfimap::ScanPose> poses;
    for (const auto& path : scan_paths) poses.push_back(rfimap::load_scan(path).pose);
    if (poses.size() < 2) {
        throw std::invalid_argument("plan needs at least 2 scan logs");
    }
    const rfimap::LocalPoint hint = parse_point(hint_text);
    const double quality =
        rfimap::geometry_quality(std::span<const rfimap::ScanPose>(poses), hint);

    std::vector<std::string> warnings;
    if (quality < rfimap::kDegenerateQuality) {
        warnings.push_back("degenerate geometry: survey points cluster on one side of the "
                           "hinted region; expect an unbounded best fit");
    }

    std::cout << "poses: " << poses.size() << "\n";
    std::cout << "hint: (" << hint.east << ", " << hint.north << ")\n";
    std::cout << "geometry quality: " << quality << "\n";
    for (const auto& w : warnings) std::cout << "warning: " << w << "\n";

    if (!out_path.empty()) {
        nlohmann::ordered_json j;
        j["n_poses"] = poses.size();
        j["hint"] = {{"east", hint.east}, {"north", hint.north}};
        j["quality"] = quality;
        j["warnings"] = warnings;
        rfimap::write_file_atomic(out_path, j.dump(2) + "\n");
    }
    return kExitOk;
}

int cmd_export(const std::string& heatmap_path, const std::string& out_path) {
    const rfimap::FusedMap map = rfimap::load_fused_json(heatmap_path);
    rfimap::save_fused_pgm(map, out_path);
    std::cout << "wrote " << out_path << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"UAV-borne GNSS interference survey tools"};
    app.require_subcommand(1);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "generate scan logs from a scenario file");
    std::string scenario_path;
    std::string sim_out = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    double sim_step = 0.0;
    simulate->add_option("--scenario", scenario_path, "scenario JSON")->required();
    simulate->add_option("--out", sim_out, "output directory");
    simulate->add_option("--seed", seed, "override the scenario seed")
        ->each([&seed_set](const std::string&) { seed_set = true; });
    simulate->add_option("--step-deg", sim_step, "override the heading step");

    // psd
    auto* psd_cmd = app.add_subcommand("psd", "periodogram and peak report for an IQ capture");
    std::string iq_path;
    std::string sidecar_path;
    std::string bands_path;
    double min_prominence_db = 10.0;
    std::string psd_out = "out";
    psd_cmd->add_option("--iq", iq_path, "interleaved float32 I/Q file")->required();
    psd_cmd->add_option("--sidecar", sidecar_path, "sidecar JSON (default: <iq>.json)");
    psd_cmd->add_option("--bands", bands_path, "allocation band table JSON");
    psd_cmd->add_option("--min-prominence-db", min_prominence_db,
                        "peak prominence over the median bin");
    psd_cmd->add_option("--out", psd_out, "output directory");

    // fuse
    auto* fuse_cmd = app.add_subcommand("fuse", "fuse scan logs into a heatmap and fits");
    std::vector<std::string> scan_paths;
    std::string srp_path;
    double srp_hpbw = 0.0;
    std::string grid_text;
    double grid_res = 5.0;
    double alpha = 0.8;
    std::string band;
    bool unweighted = false;
    std::string fuse_out = "out";
    fuse_cmd->add_option("scans", scan_paths, "scan log JSON files")->required();
    fuse_cmd->add_option("--srp", srp_path, "SRP model JSON");
    fuse_cmd->add_option("--srp-hpbw", srp_hpbw, "single-lobe SRP beamwidth, deg");
    fuse_cmd->add_option("--grid", grid_text, "grid as origin_east,origin_north,width,height");
    fuse_cmd->add_option("--grid-res", grid_res, "grid resolution, m/cell");
    fuse_cmd->add_option("--alpha", alpha, "threshold fraction of the map maximum")
        ->check(CLI::Range(1e-9, 1.0 - 1e-9));
    fuse_cmd->add_option("--band", band, "use only scan logs for this band");
    fuse_cmd->add_flag("--unweighted", unweighted,
                       "project the bare antenna pattern, ignoring measured powers");
    fuse_cmd->add_option("--out", fuse_out, "output directory");

    // plan
    auto* plan_cmd = app.add_subcommand("plan", "rate survey geometry around a hinted region");
    std::vector<std::string> plan_scans;
    std::string hint = "0,0";
    std::string plan_out;
    plan_cmd->add_option("scans", plan_scans, "scan log JSON files")->required();
    plan_cmd->add_option("--hint", hint, "hypothesized region center as east,north");
    plan_cmd->add_option("--out", plan_out, "write the report as JSON");

    // export
    auto* export_cmd = app.add_subcommand("export", "render a heatmap JSON as 16-bit PGM");
    std::string heatmap_path;
    std::string export_out = "heatmap.pgm";
    export_cmd->add_option("--heatmap", heatmap_path, "heatmap JSON")->required();
    export_cmd->add_option("--out", export_out, "output PGM path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        app.exit(e);
        return kExitInputError;
    }

    try {
        if (simulate->parsed()) {
            return cmd_simulate(scenario_path, sim_out,
                                seed_set ? std::optional<std::uint64_t>(seed) : std::nullopt,
                                sim_step);
        }
        if (psd_cmd->parsed()) {
            return cmd_psd(iq_path, sidecar_path, bands_path, min_prominence_db, psd_out);
        }
        if (fuse_cmd->parsed()) {
            if (srp_path.empty() == (srp_hpbw <= 0.0)) {
                throw std::invalid_argument("give exactly one of --srp or --srp-hpbw");
            }
            return cmd_fuse(scan_paths, srp_path, srp_hpbw, grid_text, grid_res, alpha, band,
                            unweighted, fuse_out);
        }
        if (plan_cmd->parsed()) {
            return cmd_plan(plan_scans, hint, plan_out);
        }
        if (export_cmd->parsed()) {
            return cmd_export(heatmap_path, export_out);
        }
    } catch (const NoRegionError& e) {
        std::cerr << "rfimap: " << e.what() << "\n";
        return kExitNoRegion;
    } catch (const std::exception& e) {
        std::cerr << "rfimap: error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitInputError;
}
