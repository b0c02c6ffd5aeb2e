/*
 * Copyright 2026 The mm-access Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

///
/// \file metrics.hpp
///
/// Error accounting and analytic complexity.
///
/// AUD error rate: Pe = (E_u + E_f) / K, with E_u missed active devices and
/// E_f falsely detected inactive ones.
///
/// Bit error rate: BER = (E_u J eta + B_m + B_c) / (K_a J eta). B_m and B_c
/// count MAP-bit and QAM-bit errors of correctly detected active devices only;
/// false detections cost nothing here and are penalized through Pe.
///
#ifndef MMACCESS_METRICS_HPP
#define MMACCESS_METRICS_HPP

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <mmaccess/detectors.hpp>
#include <mmaccess/model.hpp>

namespace mmaccess
{

struct AudCounts
{
    int missed = 0;        // E_u
    int false_alarms = 0;  // E_f
    int num_devices = 0;   // K

    double pe() const noexcept
    {
        return num_devices == 0 ? 0.0 : static_cast<double>(missed + false_alarms) / num_devices;
    }
};

inline AudCounts aud_metrics(const std::vector<std::uint8_t>& activity, const ActiveSet& detected)
{
    AudCounts c;
    c.num_devices = static_cast<int>(activity.size());
    std::vector<char> hit(activity.size(), 0);
    for (const int k : detected) {
        if (k < 0 || static_cast<std::size_t>(k) >= activity.size()) {
            throw std::invalid_argument("aud_metrics: device index out of range");
        }
        if (hit[static_cast<std::size_t>(k)]) throw std::invalid_argument("aud_metrics: duplicate device");
        hit[static_cast<std::size_t>(k)] = 1;
        if (activity[static_cast<std::size_t>(k)] == 0) ++c.false_alarms;
    }
    for (std::size_t k = 0; k < activity.size(); ++k) {
        if (activity[k] != 0 && !hit[k]) ++c.missed;
    }
    return c;
}

struct BerCounts
{
    int missed = 0;                   // E_u
    std::uint64_t map_bit_errors = 0; // B_m
    std::uint64_t qam_bit_errors = 0; // B_c
    std::uint64_t bits_per_device = 0; // J * eta
    std::uint64_t total_bits = 0;     // K_a * J * eta

    std::uint64_t error_bits() const noexcept
    {
        return static_cast<std::uint64_t>(missed) * bits_per_device + map_bit_errors + qam_bit_errors;
    }
    double ber() const noexcept
    {
        return total_bits == 0 ? 0.0 : static_cast<double>(error_bits()) / static_cast<double>(total_bits);
    }
};

///
/// Bit errors of `decoded` against `truth`. Only devices that are both truly
/// active and in `detected` are compared; a missing decoded word counts as
/// every bit wrong.
///
inline BerCounts ber_metrics(const GroundTruth& truth, const ActiveSet& detected, const DecodedWords& decoded,
                             int num_mirrors, int qam_bits)
{
    BerCounts c;
    const int eta = num_mirrors + qam_bits;
    c.bits_per_device = static_cast<std::uint64_t>(truth.num_slots) * static_cast<std::uint64_t>(eta);
    c.total_bits = static_cast<std::uint64_t>(truth.active_devices.size()) * c.bits_per_device;
    const Word qam_mask = (Word{1} << qam_bits) - 1;

    for (const int k : truth.active_devices) {
        if (std::find(detected.begin(), detected.end(), k) == detected.end()) {
            ++c.missed;
            continue;
        }
        const auto it = decoded.find(k);
        for (int j = 0; j < truth.num_slots; ++j) {
            const Word sent = truth.words[truth.at(k, j)];
            const Word got = it == decoded.end() ? kMissingWord : it->second[static_cast<std::size_t>(j)];
            if (got == kMissingWord) {
                c.map_bit_errors += static_cast<std::uint64_t>(num_mirrors);
                c.qam_bit_errors += static_cast<std::uint64_t>(qam_bits);
                continue;
            }
            const Word diff = sent ^ got;
            c.map_bit_errors += static_cast<std::uint64_t>(std::popcount(diff >> qam_bits));
            c.qam_bit_errors += static_cast<std::uint64_t>(std::popcount(diff & qam_mask));
        }
    }
    return c;
}

inline BerCounts ber_metrics(const GroundTruth& truth, const ActiveSet& detected, const DecodedWords& decoded,
                             const SystemConfig& cfg)
{
    return ber_metrics(truth, detected, decoded, cfg.num_mirrors, cfg.qam_bits());
}

// ---------------------------------------------------------------------------
// Analytic complexity (complex multiplications per frame)
// ---------------------------------------------------------------------------

enum class Algorithm
{
    StrOMP,
    TlsscsAud,
    AudLowerBound,
    SicSsp,
    TlsscsData,
    Gsp,
    LeastSquares,
};

inline constexpr std::array<Algorithm, 7> kAllAlgorithms = {
    Algorithm::StrOMP, Algorithm::TlsscsAud,  Algorithm::AudLowerBound, Algorithm::SicSsp,
    Algorithm::TlsscsData, Algorithm::Gsp, Algorithm::LeastSquares,
};

inline std::string_view algorithm_name(Algorithm a) noexcept
{
    switch (a) {
    case Algorithm::StrOMP: return "StrOMP";
    case Algorithm::TlsscsAud: return "TLSSCS-AUD";
    case Algorithm::AudLowerBound: return "AUD-LB";
    case Algorithm::SicSsp: return "SIC-SSP";
    case Algorithm::TlsscsData: return "TLSSCS-data";
    case Algorithm::Gsp: return "GSP";
    case Algorithm::LeastSquares: return "LS/Benchmark1";
    }
    return "?";
}

inline Algorithm parse_algorithm(std::string_view name)
{
    for (const Algorithm a : kAllAlgorithms) {
        if (algorithm_name(a) == name) return a;
    }
    throw std::invalid_argument("unknown algorithm: " + std::string(name));
}

namespace detail
{
// Shared by StrOMP and its known-K_a variant: correlation per iteration plus
// coarse and fine LS and residual update summed over `iterations` iterations.
inline double greedy_aud_cost(double iterations, double J, double K, double Nt, double Nr)
{
    double sum = 0.0;
    for (int s = 1; s <= static_cast<int>(iterations); ++s) {
        const double sn = s * Nt;
        sum += J * Nr * (s + 2.0 * s * s + 2.0 * sn * sn) + J * (1.0 * s * s * s + sn * sn * sn);
    }
    return iterations * J * K * Nt * Nr + sum;
}
} // namespace detail

///
/// Closed-form complex-multiplication count of `algorithm` for the scalars in
/// `cfg` (J, N_t, K, K_a, N_r).
///
/// The GSP expression carries the pursuit's support size s in its correlation
/// term; it is evaluated at s = K_a, the size of the full-device-set pursuit.
///
inline double complexity_eval(const SystemConfig& cfg, Algorithm algorithm)
{
    const double J = cfg.num_slots;
    const double Nt = cfg.num_maps();
    const double K = cfg.num_devices;
    const double Ka = cfg.num_active;
    const double Nr = cfg.num_rx;

    switch (algorithm) {
    case Algorithm::StrOMP:
        return detail::greedy_aud_cost(Ka + 1, J, K, Nt, Nr);
    case Algorithm::AudLowerBound:
        return detail::greedy_aud_cost(Ka, J, K, Nt, Nr);
    case Algorithm::TlsscsAud: {
        double sum = 0.0;
        for (int s = 1; s <= cfg.num_active + 1; ++s) {
            const double sn = s * Nt;
            sum += Nr * Nr + 2.0 * Nr * sn * sn + sn * sn * sn;
        }
        return (Ka + 1) * (Nr * Nr * (K * Nt + J) + Nr * J * K * Nt) + sum;
    }
    case Algorithm::SicSsp: {
        double sum = 0.0;
        for (int s = 1; s <= cfg.num_active; ++s) {
            sum += 2.0 * s * Nr * (Nt + 1) + 14.0 * Nr * s * s + 11.0 * s * s * s;
        }
        return J * sum;
    }
    case Algorithm::TlsscsData: {
        const double cols = Ka * Nt;
        return J * Nr * Ka * Nt + 2.0 * Nr * cols * cols + cols * cols * cols;
    }
    case Algorithm::Gsp:
        return J * (2.0 * Ka * Nr * (Nt + 1) + 14.0 * Nr * Ka * Ka + 11.0 * Ka * Ka * Ka);
    case Algorithm::LeastSquares:
        return J * Nr * Ka + 2.0 * Nr * Ka * Ka + Ka * Ka * Ka;
    }
    throw std::invalid_argument("complexity_eval: unknown algorithm");
}

inline double complexity_eval(const SystemConfig& cfg, std::string_view algorithm)
{
    return complexity_eval(cfg, parse_algorithm(algorithm));
}

} // namespace mmaccess

#endif // MMACCESS_METRICS_HPP
