// SPDX-License-Identifier: Apache-2.0
//
// rfimap - UAV-borne GNSS interference survey and transmitter mapping
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "rfimap/antenna.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>
#include <json.hpp>

#include "rfimap/geometry.hpp"
#include "rfimap/io_util.hpp"

namespace rfimap {

namespace {

constexpr double kHpbwSigmaFactor = 2.0 * 1.17741002251547469;  // 2*sqrt(2 ln 2)
constexpr double kBackplaneLimit = 0.01;
constexpr double kFitRmsLimit = 0.05;
constexpr double kGainFloorDb = -120.0;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double lin) {
    return 10.0 * std::log10(std::max(lin, db_to_linear(kGainFloorDb)));
}

double gauss(double x, double sigma) {
    const double s = std::max(std::abs(sigma), 1e-3);
    return std::exp(-(x * x) / (2.0 * s * s));
}

// Mirror-paired mixture used during fitting: lobe k contributes at both +m_k
// and -m_k, which keeps the model even without constraining the optimizer.
double lobe_mixture_eval(const Eigen::VectorXd& p, double theta_deg) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < p.size(); k += 3) {
        const double a = p[k];
        const double m = p[k + 1];
        const double s = p[k + 2];
        acc += a * (gauss(wrap_signed_degrees(theta_deg - m), s) +
                    gauss(wrap_signed_degrees(theta_deg + m), s));
    }
    return acc;
}

// Resample a pattern's linear gains onto a uniform 1-degree grid with
// circular linear interpolation.
std::vector<double> resample_linear_1deg(const RadiationPattern& rp) {
    const std::size_t n = rp.samples.size();
    std::vector<double> out(360);
    for (int k = 0; k < 360; ++k) {
        const double theta = static_cast<double>(k);
        // Find the sample interval containing theta (circularly).
        std::size_t hi = 0;
        while (hi < n && rp.samples[hi].bearing_deg <= theta) ++hi;
        const std::size_t i0 = (hi == 0) ? n - 1 : hi - 1;
        const std::size_t i1 = hi % n;
        double b0 = rp.samples[i0].bearing_deg;
        double b1 = rp.samples[i1].bearing_deg;
        double t = theta;
        if (i1 <= i0) {  // interval wraps through 360
            b1 += 360.0;
            if (t < b0) t += 360.0;
        }
        const double g0 = db_to_linear(rp.samples[i0].gain_db);
        const double g1 = db_to_linear(rp.samples[i1].gain_db);
        const double span = b1 - b0;
        const double f = span > 0.0 ? (t - b0) / span : 0.0;
        out[static_cast<std::size_t>(k)] = g0 + f * (g1 - g0);
    }
    return out;
}

struct LMResult {
    Eigen::VectorXd params;
    double rms = 0.0;
};

// Dense residual vector: weighted data misfit plus a backplane penalty term.
Eigen::VectorXd fit_residuals(const Eigen::VectorXd& p,
                              const std::vector<double>& theta,
                              const std::vector<double>& gain,
                              const std::vector<double>& weight) {
    const Eigen::Index n = static_cast<Eigen::Index>(theta.size());
    Eigen::VectorXd r(n + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        r[i] = weight[static_cast<std::size_t>(i)] *
               (lobe_mixture_eval(p, theta[static_cast<std::size_t>(i)]) -
                gain[static_cast<std::size_t>(i)]);
    }
    r[n] = 20.0 * std::max(0.0, lobe_mixture_eval(p, 180.0) - kBackplaneLimit / 2.0);
    return r;
}

void clamp_params(Eigen::VectorXd& p) {
    for (Eigen::Index k = 0; k < p.size(); k += 3) {
        p[k] = std::clamp(p[k], 0.0, 100.0);
        p[k + 1] = std::clamp(p[k + 1], 0.0, 179.0);
        p[k + 2] = std::clamp(p[k + 2], 3.0, 150.0);
    }
}

// Levenberg-Marquardt with a numeric Jacobian. The problem is tiny (at most
// 15 parameters, a few hundred residuals), so central differences are cheap.
LMResult levenberg_marquardt(Eigen::VectorXd p,
                             const std::vector<double>& theta,
                             const std::vector<double>& gain,
                             const std::vector<double>& weight) {
    const auto residuals = [&](const Eigen::VectorXd& q) {
        return fit_residuals(q, theta, gain, weight);
    };

    Eigen::VectorXd r = residuals(p);
    double cost = r.squaredNorm();
    double lambda = 1e-3;
    bool converged = false;

    for (int iter = 0; iter < 400 && !converged; ++iter) {
        const Eigen::Index np = p.size();
        const Eigen::Index nr = r.size();
        Eigen::MatrixXd jac(nr, np);
        for (Eigen::Index j = 0; j < np; ++j) {
            const double h = 1e-6 * std::max(1.0, std::abs(p[j]));
            Eigen::VectorXd pf = p, pb = p;
            pf[j] += h;
            pb[j] -= h;
            jac.col(j) = (residuals(pf) - residuals(pb)) / (2.0 * h);
        }

        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * r;

        bool stepped = false;
        for (int attempt = 0; attempt < 25; ++attempt) {
            Eigen::MatrixXd a = jtj;
            a.diagonal() += lambda * jtj.diagonal() +
                            Eigen::VectorXd::Constant(np, 1e-12);
            const Eigen::VectorXd delta = a.ldlt().solve(-jtr);
            Eigen::VectorXd cand = p + delta;
            clamp_params(cand);
            const Eigen::VectorXd rc = residuals(cand);
            const double cc = rc.squaredNorm();
            if (cc < cost) {
                converged = (cost - cc) <= 1e-12 * std::max(cost, 1e-300);
                p = cand;
                r = rc;
                cost = cc;
                lambda = std::max(lambda / 3.0, 1e-12);
                stepped = true;
                break;
            }
            lambda *= 4.0;
            if (lambda > 1e12) break;
        }
        if (!stepped) break;
    }

    double data_ss = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double d = lobe_mixture_eval(p, theta[i]) - gain[i];
        data_ss += d * d;
    }
    return {p, std::sqrt(data_ss / static_cast<double>(theta.size()))};
}

nlohmann::ordered_json pattern_to_json(const RadiationPattern& rp) {
    nlohmann::ordered_json j;
    j["band_mhz"] = rp.band_mhz;
    auto& samples = j["samples"] = nlohmann::ordered_json::array();
    for (const auto& s : rp.samples) {
        samples.push_back({s.bearing_deg, s.gain_db});
    }
    return j;
}

}  // namespace

void RadiationPattern::validate() const {
    if (samples.size() < 8) {
        throw std::invalid_argument("RadiationPattern: needs at least 8 samples");
    }
    double prev = -1.0;
    for (const auto& s : samples) {
        if (!std::isfinite(s.bearing_deg) || s.bearing_deg < 0.0 || s.bearing_deg >= 360.0) {
            throw std::invalid_argument("RadiationPattern: bearings must lie in [0, 360)");
        }
        if (s.bearing_deg <= prev) {
            throw std::invalid_argument("RadiationPattern: bearings must be strictly increasing");
        }
        if (!std::isfinite(s.gain_db)) {
            throw std::invalid_argument("RadiationPattern: gains must be finite");
        }
        prev = s.bearing_deg;
    }
    if (!std::isfinite(band_mhz) || band_mhz <= 0.0) {
        throw std::invalid_argument("RadiationPattern: band_mhz must be positive");
    }
}

RadiationPattern normalize_pattern(const RadiationPattern& rp) {
    rp.validate();
    double peak_db = -std::numeric_limits<double>::infinity();
    for (const auto& s : rp.samples) peak_db = std::max(peak_db, s.gain_db);

    RadiationPattern out = rp;
    for (auto& s : out.samples) s.gain_db -= peak_db;
    return out;
}

RadiationPattern symmetrize(const RadiationPattern& rp) {
    rp.validate();
    std::vector<double> g = resample_linear_1deg(rp);

    // Recentre so the peak sits on the major axis (bearing 0).
    const auto peak_it = std::max_element(g.begin(), g.end());
    std::rotate(g.begin(), peak_it, g.end());

    // Mirror average: h(theta) = (g(theta) + g(-theta)) / 2.
    std::vector<double> h(360);
    for (int k = 0; k < 360; ++k) {
        h[static_cast<std::size_t>(k)] =
            0.5 * (g[static_cast<std::size_t>(k)] + g[static_cast<std::size_t>((360 - k) % 360)]);
    }

    // Backplane taper cos^2(theta/2)^p, with the smallest exponent that pulls
    // everything at |theta| >= 165 deg under the backplane limit. Patterns
    // that already decay are left untouched (p = 0).
    const auto tapered = [&h](int k, int p) {
        const double theta = wrap_signed_degrees(static_cast<double>(k));
        const double c = std::cos(theta / 2.0 * std::numbers::pi / 180.0);
        return h[static_cast<std::size_t>(k)] * std::pow(c * c, p);
    };
    int power = 0;
    for (; power < 4; ++power) {
        bool ok = true;
        for (int k = 0; k < 360; ++k) {
            if (std::abs(wrap_signed_degrees(static_cast<double>(k))) >= 165.0 &&
                tapered(k, power) > kBackplaneLimit) {
                ok = false;
                break;
            }
        }
        if (ok) break;
    }

    RadiationPattern out;
    out.band_mhz = rp.band_mhz;
    out.samples.resize(360);
    for (int k = 0; k < 360; ++k) {
        out.samples[static_cast<std::size_t>(k)] = {static_cast<double>(k),
                                                    linear_to_db(tapered(k, power))};
    }
    return out;
}

double srp_eval(const SRPModel& model, double dpsi_deg) {
    // Evaluating at |wrap(dpsi)| makes the gain exactly even in dpsi.
    const double a = std::abs(wrap_signed_degrees(dpsi_deg));
    double acc = 0.0;
    for (const auto& c : model.components) {
        acc += c.weight * gauss(wrap_signed_degrees(a - c.mean_deg), c.sigma_deg);
    }
    return acc;
}

double half_power_beamwidth(const SRPModel& model) {
    const double peak = srp_eval(model, 0.0);
    const double level = 0.5 * peak;
    double prev_theta = 0.0;
    double prev_val = peak;
    for (double theta = 0.01; theta <= 180.0; theta += 0.01) {
        const double v = srp_eval(model, theta);
        if (v < level) {
            const double f = (prev_val - level) / std::max(prev_val - v, 1e-300);
            return 2.0 * (prev_theta + f * (theta - prev_theta));
        }
        prev_theta = theta;
        prev_val = v;
    }
    return 360.0;
}

SRPModel fit_srp(const RadiationPattern& rp, int n_components) {
    rp.validate();
    if (n_components < 1 || n_components > 5) {
        throw std::invalid_argument("fit_srp: n_components must be in [1, 5]");
    }

    std::vector<double> theta;
    std::vector<double> gain;
    std::vector<double> weight;
    theta.reserve(rp.samples.size());
    for (const auto& s : rp.samples) {
        const double t = wrap_signed_degrees(s.bearing_deg);
        theta.push_back(t);
        gain.push_back(db_to_linear(s.gain_db));
        weight.push_back(std::abs(t) >= 150.0 ? 3.1622776601683795 : 1.0);
    }

    // Width seed: half-width at half maximum of the data around boresight.
    const double gmax = *std::max_element(gain.begin(), gain.end());
    double half_width = 60.0;
    for (double probe = 1.0; probe <= 179.0; probe += 1.0) {
        double nearest = std::numeric_limits<double>::infinity();
        double val = gmax;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double d = std::abs(std::abs(theta[i]) - probe);
            if (d < nearest) {
                nearest = d;
                val = gain[i];
            }
        }
        if (val < 0.5 * gmax) {
            half_width = probe;
            break;
        }
    }
    const double sigma0 = std::max(half_width, 5.0) / 1.17741002251547469;

    Eigen::VectorXd p(3 * n_components);
    p[0] = 0.5 * gmax;
    p[1] = 0.0;
    p[2] = sigma0;
    for (int k = 1; k < n_components; ++k) {
        p[3 * k + 0] = 0.05 * gmax;
        p[3 * k + 1] = 180.0 * k / n_components;
        p[3 * k + 2] = std::max(0.5 * sigma0, 15.0);
    }
    clamp_params(p);

    const LMResult fit = levenberg_marquardt(p, theta, gain, weight);

    const double at_zero = lobe_mixture_eval(fit.params, 0.0);
    if (!(at_zero > 1e-6)) {
        throw FitError("fit_srp: degenerate fit, no boresight gain", fit.rms);
    }
    if (fit.rms > kFitRmsLimit) {
        throw FitError("fit_srp: residual RMS " + std::to_string(fit.rms) +
                           " exceeds " + std::to_string(kFitRmsLimit),
                       fit.rms);
    }

    SRPModel model;
    model.fit_rms = fit.rms;
    for (Eigen::Index k = 0; k < fit.params.size(); k += 3) {
        const double a = fit.params[k] / at_zero;
        const double m = fit.params[k + 1];
        const double s = fit.params[k + 2];
        if (a <= 1e-12) continue;
        if (m < 1e-9) {
            model.components.push_back({2.0 * a, 0.0, s});
        } else {
            model.components.push_back({a, m, s});
            model.components.push_back({a, -m, s});
        }
    }
    if (model.components.empty()) {
        throw FitError("fit_srp: all components vanished", fit.rms);
    }

    // Shape constraints on the fitted model itself.
    if (srp_eval(model, 180.0) > kBackplaneLimit) {
        throw FitError("fit_srp: fitted model violates the backplane limit", fit.rms);
    }
    const double peak = srp_eval(model, 0.0);
    for (double t = 0.1; t <= 180.0; t += 0.1) {
        if (srp_eval(model, t) > peak * (1.0 + 1e-9)) {
            throw FitError("fit_srp: fitted maximum is off boresight", fit.rms);
        }
    }
    return model;
}

std::vector<GainMask> band_masks(const std::vector<RadiationPattern>& patterns) {
    if (patterns.empty()) {
        throw std::invalid_argument("band_masks: needs at least one pattern");
    }
    std::vector<double> peaks;
    peaks.reserve(patterns.size());
    for (const auto& rp : patterns) {
        rp.validate();
        double peak_db = -std::numeric_limits<double>::infinity();
        for (const auto& s : rp.samples) peak_db = std::max(peak_db, s.gain_db);
        peaks.push_back(db_to_linear(peak_db));
    }
    const double floor_peak = *std::min_element(peaks.begin(), peaks.end());

    std::vector<GainMask> masks;
    masks.reserve(patterns.size());
    for (std::size_t i = 0; i < patterns.size(); ++i) {
        masks.push_back({patterns[i].band_mhz, floor_peak / peaks[i]});
    }
    return masks;
}

SRPModel srp_from_hpbw(double hpbw_deg) {
    if (!(hpbw_deg > 0.0) || hpbw_deg >= 145.0) {
        throw std::invalid_argument("srp_from_hpbw: beamwidth must be in (0, 145) deg");
    }
    SRPModel model;
    model.components.push_back({1.0, 0.0, hpbw_deg / kHpbwSigmaFactor});
    return model;
}

RadiationPattern load_pattern(const std::filesystem::path& path) {
    const auto j = nlohmann::json::parse(read_text_file(path));
    RadiationPattern rp;
    rp.band_mhz = j.at("band_mhz").get<double>();
    for (const auto& s : j.at("samples")) {
        rp.samples.push_back({s.at(0).get<double>(), s.at(1).get<double>()});
    }
    rp.validate();
    return rp;
}

void save_pattern(const RadiationPattern& rp, const std::filesystem::path& path) {
    write_file_atomic(path, pattern_to_json(rp).dump(2) + "\n");
}

SRPModel load_srp(const std::filesystem::path& path) {
    const auto j = nlohmann::json::parse(read_text_file(path));
    SRPModel model;
    for (const auto& c : j.at("components")) {
        GaussComponent gc{c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()};
        if (!(gc.weight >= 0.0) || !(gc.sigma_deg > 0.0) || !std::isfinite(gc.mean_deg)) {
            throw std::invalid_argument("load_srp: invalid component in " + path.string());
        }
        model.components.push_back(gc);
    }
    if (model.components.empty()) {
        throw std::invalid_argument("load_srp: no components in " + path.string());
    }
    if (j.contains("fit_rms")) model.fit_rms = j["fit_rms"].get<double>();
    return model;
}

void save_srp(const SRPModel& model, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    auto& comps = j["components"] = nlohmann::ordered_json::array();
    for (const auto& c : model.components) {
        comps.push_back({c.weight, c.mean_deg, c.sigma_deg});
    }
    j["fit_rms"] = model.fit_rms;
    write_file_atomic(path, j.dump(2) + "\n");
}

}  // namespace rfimap
