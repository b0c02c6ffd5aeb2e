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
/// \file detectors.hpp
///
/// Greedy compressive-sensing receivers for the media-modulated uplink.
///
///  - `stromp`: structured OMP active-device detection. Grows the device set
///    one device per iteration using block correlation energy summed over all
///    MAPs and slots, and stops when the residual Frobenius norm decreases by
///    less than a threshold.
///  - `stromp_known_ka`: the same iteration run exactly K_a times.
///  - `sic_ssp`: per-slot structured subspace pursuit with successive
///    interference cancellation; one device is finalized per stage.
///  - `gsp`: the same structured subspace pursuit run once per slot over the
///    whole device set, without cancellation.
///  - `oracle_ls`: least squares on the true supports.
///  - `zf_benchmark`: zero-forcing detection of single-antenna users.
///
/// Device, MAP and column indices are zero based. Every argmax breaks ties
/// toward the smallest index.
///
#ifndef MMACCESS_DETECTORS_HPP
#define MMACCESS_DETECTORS_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include <mmaccess/model.hpp>
#include <mmaccess/numerics.hpp>

namespace mmaccess
{

/// Detected devices in discovery order.
using ActiveSet = std::vector<int>;

inline constexpr Word kMissingWord = ~Word{0};

struct SlotEntry
{
    int device = 0;
    int map_index = 0;
    Complex amplitude;
};

///
/// Sparse estimate of X: for each slot, one (device, MAP, amplitude) entry per
/// detected device.
///
struct Reconstruction
{
    int num_devices = 0;
    int num_maps = 0;
    std::vector<std::vector<SlotEntry>> slots;

    int num_slots() const noexcept { return static_cast<int>(slots.size()); }

    ComplexMatrix dense() const
    {
        ComplexMatrix x = ComplexMatrix::Zero(static_cast<Eigen::Index>(num_devices) * num_maps,
                                              num_slots());
        for (int j = 0; j < num_slots(); ++j) {
            for (const auto& e : slots[static_cast<std::size_t>(j)]) {
                x(static_cast<Eigen::Index>(e.device) * num_maps + e.map_index, j) = e.amplitude;
            }
        }
        return x;
    }
};

/// Demodulated words per device; slots without an entry hold `kMissingWord`.
using DecodedWords = std::map<int, std::vector<Word>>;

inline DecodedWords decode(const Reconstruction& rec, const Modulator& mod)
{
    DecodedWords out;
    for (int j = 0; j < rec.num_slots(); ++j) {
        for (const auto& e : rec.slots[static_cast<std::size_t>(j)]) {
            auto [it, inserted] = out.try_emplace(e.device);
            if (inserted) it->second.assign(static_cast<std::size_t>(rec.num_slots()), kMissingWord);
            it->second[static_cast<std::size_t>(j)] = mod.demodulate_word(e.map_index, e.amplitude);
        }
    }
    return out;
}

///
/// True when every slot carries exactly one entry per device of `devices`, at a
/// valid MAP, and nothing else.
///
inline bool verify_reconstruction(const Reconstruction& rec, const ActiveSet& devices)
{
    std::vector<int> expected(devices);
    std::sort(expected.begin(), expected.end());
    for (const auto& slot : rec.slots) {
        std::vector<int> seen;
        seen.reserve(slot.size());
        for (const auto& e : slot) {
            if (e.map_index < 0 || e.map_index >= rec.num_maps) return false;
            seen.push_back(e.device);
        }
        std::sort(seen.begin(), seen.end());
        if (seen != expected) return false;
    }
    return true;
}

namespace detail
{
template <typename Derived>
Eigen::Index argmax_abs2(const Eigen::MatrixBase<Derived>& v)
{
    Eigen::Index best = 0;
    double best_val = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double a = std::norm(v(i));
        if (a > best_val) {
            best_val = a;
            best = i;
        }
    }
    return best;
}

inline void append_block(std::vector<ColumnIndex>& cols, int device, int num_maps)
{
    for (int u = 0; u < num_maps; ++u) cols.push_back(static_cast<ColumnIndex>(device) * num_maps + u);
}
} // namespace detail

// ---------------------------------------------------------------------------
// StrOMP
// ---------------------------------------------------------------------------

struct StrompOptions
{
    double stop_threshold = 2.0;
    /// When set, run exactly this many iterations without the threshold test.
    std::optional<int> known_active;
};

struct StrompResult
{
    ActiveSet devices;
    /// ||R^(i)||_F for i = 0 and every committed iteration.
    std::vector<double> residual_norms;
    /// Committed iterations whose residual grew by more than 1e-9 relative.
    int monotonicity_violations = 0;
    bool degenerate = false;
};

///
/// Structured OMP over the observation `y` (N_r x J) and aggregate channel `h`
/// (N_r x K num_maps).
///
/// Each iteration adds the device with the largest block correlation energy
/// among those not yet selected, fits all of the candidate set's MAP columns
/// jointly by least squares, keeps the strongest MAP per device and slot, and
/// refits per slot on those columns. The device added in an iteration whose
/// residual-norm decrease is below the threshold is discarded. Iteration also
/// stops when the candidate columns would exceed N_r, when every device is
/// selected, or on a rank-deficient fit.
///
inline StrompResult run_stromp(const ComplexMatrix& y, const ComplexMatrix& h, int num_maps,
                               const StrompOptions& opts)
{
    detail::require_same_rows(y.rows(), h.rows(), "stromp");
    if (num_maps < 1 || h.cols() % num_maps != 0) {
        throw DimensionError("stromp: channel width is not a multiple of the MAP count");
    }
    if (!opts.known_active && !(opts.stop_threshold > 0.0)) {
        throw std::invalid_argument("stromp: threshold must be positive");
    }
    const auto num_devices = static_cast<int>(h.cols() / num_maps);
    const Eigen::Index num_rx = h.rows();
    const Eigen::Index num_slots = y.cols();

    StrompResult result;
    std::vector<char> selected(static_cast<std::size_t>(num_devices), 0);
    ComplexMatrix residual = y;
    double prev_norm = residual.norm();
    result.residual_norms.push_back(prev_norm);

    for (;;) {
        const int committed = static_cast<int>(result.devices.size());
        if (opts.known_active && committed >= *opts.known_active) break;
        if (committed == num_devices) break;
        if (static_cast<Eigen::Index>(committed + 1) * num_maps > num_rx) break;

        // Block correlation energy, summed over MAPs and slots.
        const ComplexMatrix corr = h.adjoint() * residual;
        int best = -1;
        double best_energy = -1.0;
        for (int k = 0; k < num_devices; ++k) {
            if (selected[static_cast<std::size_t>(k)]) continue;
            const double energy =
                corr.middleRows(static_cast<Eigen::Index>(k) * num_maps, num_maps).squaredNorm();
            if (energy > best_energy) {
                best_energy = energy;
                best = k;
            }
        }

        ActiveSet candidate = result.devices;
        candidate.push_back(best);
        std::vector<ColumnIndex> cols;
        cols.reserve(candidate.size() * static_cast<std::size_t>(num_maps));
        for (const int k : candidate) detail::append_block(cols, k, num_maps);

        // Coarse estimate on every candidate MAP, all slots at once.
        const auto coarse = lstsq(gather_columns(h, cols), y);
        if (!coarse) {
            result.degenerate = true;
            break;
        }

        // Strongest MAP per device and slot, then per-slot refit.
        ComplexMatrix fitted(num_rx, num_slots);
        std::vector<ColumnIndex> support(candidate.size());
        bool ok = true;
        for (Eigen::Index j = 0; j < num_slots && ok; ++j) {
            for (std::size_t n = 0; n < candidate.size(); ++n) {
                const auto block = coarse->col(j).segment(static_cast<Eigen::Index>(n) * num_maps, num_maps);
                support[n] = static_cast<ColumnIndex>(candidate[n]) * num_maps + detail::argmax_abs2(block);
            }
            const ComplexMatrix hs = gather_columns(h, support);
            const auto fine = lstsq(hs, y.col(j));
            if (!fine) {
                ok = false;
                break;
            }
            fitted.col(j) = hs * (*fine);
        }
        if (!ok) {
            result.degenerate = true;
            break;
        }

        ComplexMatrix next_residual = y - fitted;
        const double norm = next_residual.norm();
        if (!opts.known_active && prev_norm - norm < opts.stop_threshold) break;

        if (norm > prev_norm * (1.0 + 1e-9)) ++result.monotonicity_violations;
        result.devices = std::move(candidate);
        selected[static_cast<std::size_t>(best)] = 1;
        residual = std::move(next_residual);
        prev_norm = norm;
        result.residual_norms.push_back(norm);
    }
    return result;
}

inline ActiveSet stromp(const ComplexMatrix& y, const ComplexMatrix& h, int num_maps, double stop_threshold)
{
    return run_stromp(y, h, num_maps, {.stop_threshold = stop_threshold, .known_active = std::nullopt}).devices;
}

/// StrOMP with the active count known: the AUD lower bound.
inline ActiveSet stromp_known_ka(const ComplexMatrix& y, const ComplexMatrix& h, int num_maps, int num_active)
{
    if (num_active < 0) throw std::invalid_argument("stromp_known_ka: negative active count");
    return run_stromp(y, h, num_maps, {.stop_threshold = 0.0, .known_active = num_active}).devices;
}

// ---------------------------------------------------------------------------
// Structured subspace pursuit (shared by SIC-SSP and GSP)
// ---------------------------------------------------------------------------

struct PursuitEstimate
{
    std::vector<int> maps;     // per device of the input set
    ComplexVector amplitudes;  // per device of the input set
    int iterations = 0;
    bool degenerate = false;
};

///
/// Structured subspace pursuit for one measurement vector over `devices`.
///
/// Per iteration: pick each device's best MAP by correlation with the
/// residual, merge with the previous pruned support, least-squares fit on the
/// merged columns, prune back to one MAP per device by fitted energy, refit on
/// the pruned support, update the residual. Stops once `max_iterations` is
/// reached or the pruned support repeats. On a rank-deficient fit the last
/// valid estimate is returned; if there is none, a per-column matched filter
/// on the first correlation picks is used.
///
inline PursuitEstimate structured_subspace_pursuit(const ComplexVector& measurement, const ComplexMatrix& h,
                                                   int num_maps, const std::vector<int>& devices,
                                                   int max_iterations)
{
    const std::size_t n_dev = devices.size();
    PursuitEstimate last;
    std::vector<ColumnIndex> prev_support;  // empty == no previous support
    ComplexVector residual = measurement;
    std::vector<ColumnIndex> first_picks;

    std::vector<ColumnIndex> all_cols;
    all_cols.reserve(n_dev * static_cast<std::size_t>(num_maps));
    for (const int k : devices) detail::append_block(all_cols, k, num_maps);
    const ComplexMatrix candidates = gather_columns(h, all_cols);

    std::vector<ColumnIndex> merged;
    merged.reserve(2 * n_dev);
    std::vector<ColumnIndex> support(n_dev);
    std::vector<int> maps(n_dev);
    for (int i = 1;; ++i) {
        const ComplexVector corr = candidates.adjoint() * residual;
        merged.clear();
        for (std::size_t n = 0; n < n_dev; ++n) {
            const auto block = corr.segment(static_cast<Eigen::Index>(n) * num_maps, num_maps);
            merged.push_back(static_cast<ColumnIndex>(devices[n]) * num_maps + detail::argmax_abs2(block));
        }
        if (i == 1) first_picks = merged;
        for (const ColumnIndex c : prev_support) {
            if (std::find(merged.begin(), merged.end(), c) == merged.end()) merged.push_back(c);
        }

        const auto coarse = lstsq(gather_columns(h, merged), measurement);
        if (!coarse) {
            last.degenerate = true;
            break;
        }

        // Columns outside the merged set have zero coarse amplitude.
        for (std::size_t n = 0; n < n_dev; ++n) {
            const ColumnIndex base = static_cast<ColumnIndex>(devices[n]) * num_maps;
            ColumnIndex best = -1;
            double best_energy = -1.0;
            for (std::size_t c = 0; c < merged.size(); ++c) {
                if (merged[c] < base || merged[c] >= base + num_maps) continue;
                const double e = std::norm((*coarse)(static_cast<Eigen::Index>(c)));
                if (e > best_energy || (e == best_energy && merged[c] < best)) {
                    best_energy = e;
                    best = merged[c];
                }
            }
            if (best_energy == 0.0) best = base;  // all-zero block: smallest MAP
            maps[n] = static_cast<int>(best - base);
            support[n] = best;
        }

        const ComplexMatrix hs = gather_columns(h, support);
        const auto fine = lstsq(hs, measurement);
        if (!fine) {
            last.degenerate = true;
            break;
        }
        residual = measurement - hs * (*fine);
        last.maps = maps;
        last.amplitudes = fine->col(0);
        last.iterations = i;

        if (i >= max_iterations || support == prev_support) break;
        prev_support = support;
    }

    if (last.iterations == 0) {
        last.maps.resize(n_dev);
        last.amplitudes = ComplexVector::Zero(static_cast<Eigen::Index>(n_dev));
        for (std::size_t n = 0; n < n_dev && n < first_picks.size(); ++n) {
            const auto col = h.col(first_picks[n]);
            last.maps[n] = static_cast<int>(first_picks[n] - static_cast<ColumnIndex>(devices[n]) * num_maps);
            const double energy = col.squaredNorm();
            last.amplitudes(static_cast<Eigen::Index>(n)) =
                energy > 0.0 ? Complex(col.dot(measurement) / energy) : Complex{};
        }
    }
    return last;
}

namespace detail
{
inline void require_devices(const ActiveSet& devices, int num_devices, const char* what)
{
    for (const int k : devices) {
        if (k < 0 || k >= num_devices) throw std::invalid_argument(std::string(what) + ": device index out of range");
    }
}
} // namespace detail

///
/// SIC-SSP data detection. For each slot, runs `|devices|` cancellation stages;
/// each stage runs structured subspace pursuit over the not-yet-finalized
/// devices, finalizes the device with the largest fitted energy, and subtracts
/// its contribution from the measurement.
///
inline Reconstruction sic_ssp(const ComplexMatrix& y, const ComplexMatrix& h, int num_maps,
                              const ActiveSet& devices)
{
    detail::require_same_rows(y.rows(), h.rows(), "sic_ssp");
    Reconstruction rec;
    rec.num_maps = num_maps;
    rec.num_devices = static_cast<int>(h.cols() / num_maps);
    detail::require_devices(devices, rec.num_devices, "sic_ssp");
    rec.slots.resize(static_cast<std::size_t>(y.cols()));
    const auto stages = static_cast<int>(devices.size());

    for (Eigen::Index j = 0; j < y.cols(); ++j) {
        ComplexVector v = y.col(j);
        std::vector<int> remaining = devices;
        auto& slot = rec.slots[static_cast<std::size_t>(j)];
        for (int s = 0; s < stages; ++s) {
            const PursuitEstimate est = structured_subspace_pursuit(v, h, num_maps, remaining, stages);
            const auto n_star = static_cast<std::size_t>(detail::argmax_abs2(est.amplitudes));
            const int device = remaining[n_star];
            const int map = est.maps[n_star];
            const Complex amp = est.amplitudes(static_cast<Eigen::Index>(n_star));
            v -= h.col(static_cast<Eigen::Index>(device) * num_maps + map) * amp;
            slot.push_back({device, map, amp});
            remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(n_star));
        }
    }
    return rec;
}

/// Group subspace pursuit baseline: one pursuit per slot over all devices, no cancellation.
inline Reconstruction gsp(const ComplexMatrix& y, const ComplexMatrix& h, int num_maps, const ActiveSet& devices)
{
    detail::require_same_rows(y.rows(), h.rows(), "gsp");
    Reconstruction rec;
    rec.num_maps = num_maps;
    rec.num_devices = static_cast<int>(h.cols() / num_maps);
    detail::require_devices(devices, rec.num_devices, "gsp");
    rec.slots.resize(static_cast<std::size_t>(y.cols()));
    if (devices.empty()) return rec;

    for (Eigen::Index j = 0; j < y.cols(); ++j) {
        const PursuitEstimate est = structured_subspace_pursuit(y.col(j), h, num_maps, devices,
                                                                static_cast<int>(devices.size()));
        auto& slot = rec.slots[static_cast<std::size_t>(j)];
        for (std::size_t n = 0; n < devices.size(); ++n) {
            slot.push_back({devices[n], est.maps[n], est.amplitudes(static_cast<Eigen::Index>(n))});
        }
    }
    return rec;
}

/// Least squares on the true active devices and their true MAPs.
inline Reconstruction oracle_ls(const ComplexMatrix& y, const ComplexMatrix& h, const GroundTruth& truth)
{
    detail::require_same_rows(y.rows(), h.rows(), "oracle_ls");
    Reconstruction rec;
    rec.num_maps = truth.num_maps;
    rec.num_devices = truth.num_devices;
    rec.slots.resize(static_cast<std::size_t>(y.cols()));
    const auto& active = truth.active_devices;
    std::vector<ColumnIndex> support(active.size());
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
        const int slot_index = static_cast<int>(j);
        for (std::size_t n = 0; n < active.size(); ++n) support[n] = truth.support(active[n], slot_index);
        const auto est = lstsq(gather_columns(h, support), y.col(j));
        auto& slot = rec.slots[static_cast<std::size_t>(j)];
        for (std::size_t n = 0; n < active.size(); ++n) {
            const Complex amp = est ? (*est)(static_cast<Eigen::Index>(n), 0) : Complex{};
            slot.push_back({active[n], truth.map_index[truth.at(active[n], slot_index)], amp});
        }
    }
    return rec;
}

// ---------------------------------------------------------------------------
// Zero-forcing benchmark
// ---------------------------------------------------------------------------

struct BitErrorCount
{
    std::uint64_t errors = 0;
    std::uint64_t total = 0;

    double rate() const noexcept
    {
        return total == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(total);
    }
};

///
/// Conventional massive-MIMO uplink with K_a single-antenna users sending
/// Gray-mapped 2^eta-QAM (same bits per channel use as the media-modulated
/// scheme), detected by zero forcing. Draws its own channel, symbols and noise
/// from `rng` under the same SNR convention.
///
inline BitErrorCount zf_benchmark(const SystemConfig& cfg, Rng& rng)
{
    cfg.validate();
    const QamConstellation qam(1 << cfg.bits_per_symbol());
    const Eigen::Index users = cfg.num_active;
    const Eigen::Index slots = cfg.num_slots;
    BitErrorCount count;
    count.total = static_cast<std::uint64_t>(users * slots) * static_cast<std::uint64_t>(qam.bits());
    if (users == 0) return count;

    const ComplexMatrix channel = complex_gaussian_matrix(rng, cfg.num_rx, users, 1.0);
    std::uniform_int_distribution<Word> label_dist(0, static_cast<Word>(qam.order() - 1));
    std::vector<Word> sent(static_cast<std::size_t>(users * slots));
    ComplexMatrix x(users, slots);
    for (Eigen::Index j = 0; j < slots; ++j) {
        for (Eigen::Index u = 0; u < users; ++u) {
            const Word w = label_dist(rng);
            sent[static_cast<std::size_t>(j * users + u)] = w;
            x(u, j) = qam.map(w);
        }
    }
    const ComplexMatrix y =
        channel * x + complex_gaussian_matrix(rng, cfg.num_rx, slots, cfg.noise_variance());
    const auto est = lstsq(channel, y);
    for (Eigen::Index j = 0; j < slots; ++j) {
        for (Eigen::Index u = 0; u < users; ++u) {
            const Word sent_word = sent[static_cast<std::size_t>(j * users + u)];
            if (!est) {
                count.errors += static_cast<std::uint64_t>(qam.bits());
                continue;
            }
            const Word got = qam.slice((*est)(u, j));
            count.errors += static_cast<std::uint64_t>(std::popcount(sent_word ^ got));
        }
    }
    return count;
}

} // namespace mmaccess

#endif // MMACCESS_DETECTORS_HPP
