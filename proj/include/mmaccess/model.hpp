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
/// \file model.hpp
///
/// Uplink frame generator for media-modulated machine-type devices.
///
/// Each of K devices owns an N_t = 2^M_r column block of the aggregate channel
/// H (N_r x K N_t). An active device sends, per slot, one M-QAM symbol on one
/// of its N_t mirror activation patterns (MAPs), so its block of the signal
/// matrix X carries exactly one nonzero per slot. The observation is
/// Y = H X + W.
///
/// Conventions (all indices are zero based):
///  - MAP bits are the natural binary value of the MAP index.
///  - QAM bits are Gray mapped per axis; the first half of the QAM bits selects
///    the in-phase level, the second half the quadrature level, and level 0 is
///    the most positive amplitude. Constellations have unit average energy.
///  - A symbol word packs the bits MSB first: MAP bits, then QAM bits.
///  - SNR is the per-device transmit SNR, snr_db = 10 log10(1 / sigma_w^2).
///
#ifndef MMACCESS_MODEL_HPP
#define MMACCESS_MODEL_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <mmaccess/numerics.hpp>

namespace mmaccess
{

using Rng = std::mt19937_64;
using Word = std::uint32_t;

/// Invalid configuration; `field()` names the offending parameter.
class ConfigError : public std::invalid_argument
{
  public:
    ConfigError(std::string field, const std::string& message)
        : std::invalid_argument(field + ": " + message), field_(std::move(field))
    {
    }
    const std::string& field() const noexcept { return field_; }

  private:
    std::string field_;
};

struct SystemConfig
{
    int num_devices = 100;       // K
    int num_active = 8;          // K_a
    int num_mirrors = 2;         // M_r
    int qam_order = 4;           // M
    int num_rx = 50;             // N_r
    int num_slots = 12;          // J
    double snr_db = 10.0;
    double stop_threshold = 2.0; // StrOMP residual-decrease threshold
    std::uint64_t master_seed = 1;

    int num_maps() const noexcept { return 1 << num_mirrors; }
    int qam_bits() const noexcept { return std::countr_zero(static_cast<unsigned>(qam_order)); }
    /// Throughput in bits per channel use: M_r + log2 M.
    int bits_per_symbol() const noexcept { return num_mirrors + qam_bits(); }
    Eigen::Index num_columns() const noexcept
    {
        return static_cast<Eigen::Index>(num_devices) * num_maps();
    }
    /// sigma_w^2; +inf dB gives exactly zero.
    double noise_variance() const noexcept { return std::pow(10.0, -snr_db / 10.0); }

    void validate() const
    {
        if (num_devices < 1) throw ConfigError("K", "must be >= 1");
        if (num_active < 0 || num_active > num_devices)
            throw ConfigError("Ka", "must satisfy 0 <= Ka <= K");
        if (num_mirrors < 0 || num_mirrors > 8) throw ConfigError("Mr", "must be in [0, 8]");
        if (qam_order != 4 && qam_order != 16)
            throw ConfigError("M", "QAM order must be 4 or 16");
        if (num_rx < 1) throw ConfigError("Nr", "must be >= 1");
        if (num_slots < 1) throw ConfigError("J", "must be >= 1");
        if (std::isnan(snr_db)) throw ConfigError("snr_db", "must be a number");
        if (!(stop_threshold > 0.0)) throw ConfigError("P_th", "must be > 0");
    }
};

///
/// Square Gray-mapped QAM constellation with unit average energy.
///
class QamConstellation
{
  public:
    explicit QamConstellation(int order) : order_(order)
    {
        const int side = static_cast<int>(std::lround(std::sqrt(order)));
        if (order < 4 || side * side != order || !std::has_single_bit(static_cast<unsigned>(order))) {
            throw ConfigError("M", "QAM order must be an even power of two");
        }
        axis_bits_ = std::countr_zero(static_cast<unsigned>(side));
        const double scale = std::sqrt(2.0 * (order - 1) / 3.0);
        points_.resize(static_cast<std::size_t>(order));
        for (int label = 0; label < order; ++label) {
            const int i_bits = label >> axis_bits_;
            const int q_bits = label & (side - 1);
            points_[static_cast<std::size_t>(label)] =
                Complex(level(i_bits, side), level(q_bits, side)) / scale;
        }
    }

    int order() const noexcept { return order_; }
    int bits() const noexcept { return 2 * axis_bits_; }
    std::span<const Complex> points() const noexcept { return points_; }

    Complex map(Word label) const { return points_.at(label); }

    /// Nearest point in Euclidean distance; ties go to the lower label.
    Word slice(Complex estimate) const noexcept
    {
        Word best = 0;
        double best_dist = std::numeric_limits<double>::infinity();
        for (std::size_t label = 0; label < points_.size(); ++label) {
            const double d = std::norm(estimate - points_[label]);
            if (d < best_dist) {
                best_dist = d;
                best = static_cast<Word>(label);
            }
        }
        return best;
    }

  private:
    // Gray label -> amplitude; position 0 is the most positive level.
    static double level(int gray, int side)
    {
        int position = 0;
        for (int g = gray; g != 0; g >>= 1) position ^= g;
        return static_cast<double>(side - 1 - 2 * position);
    }

    int order_;
    int axis_bits_ = 0;
    std::vector<Complex> points_;
};

struct ModulatedSymbol
{
    int map_index = 0;
    Complex symbol;
};

///
/// Media modulation plus QAM: maps a bits_per_symbol() word to a (MAP, QAM
/// symbol) pair and back.
///
class Modulator
{
  public:
    Modulator(int num_mirrors, int qam_order) : num_mirrors_(num_mirrors), qam_(qam_order) {}
    explicit Modulator(const SystemConfig& cfg) : Modulator(cfg.num_mirrors, cfg.qam_order) {}

    int bits_per_symbol() const noexcept { return num_mirrors_ + qam_.bits(); }
    int num_maps() const noexcept { return 1 << num_mirrors_; }
    const QamConstellation& constellation() const noexcept { return qam_; }

    ModulatedSymbol modulate(Word word) const
    {
        if (word >> bits_per_symbol() != 0) {
            throw std::invalid_argument("modulate: word wider than bits_per_symbol");
        }
        return {static_cast<int>(word >> qam_.bits()),
                qam_.map(word & qam_mask())};
    }

    /// `bits` holds one 0/1 value per entry, MAP bits first.
    ModulatedSymbol modulate(std::span<const std::uint8_t> bits) const
    {
        if (static_cast<int>(bits.size()) != bits_per_symbol()) {
            throw std::invalid_argument("modulate: expected " + std::to_string(bits_per_symbol()) +
                                        " bits, got " + std::to_string(bits.size()));
        }
        return modulate(pack(bits));
    }

    Word demodulate_word(int map_index, Complex qam_estimate) const
    {
        return (static_cast<Word>(map_index) << qam_.bits()) | qam_.slice(qam_estimate);
    }

    std::vector<std::uint8_t> demodulate(int map_index, Complex qam_estimate) const
    {
        return unpack(demodulate_word(map_index, qam_estimate), bits_per_symbol());
    }

    static Word pack(std::span<const std::uint8_t> bits)
    {
        Word w = 0;
        for (const auto b : bits) {
            if (b > 1) throw std::invalid_argument("pack: bit values must be 0 or 1");
            w = (w << 1) | b;
        }
        return w;
    }

    static std::vector<std::uint8_t> unpack(Word word, int width)
    {
        std::vector<std::uint8_t> bits(static_cast<std::size_t>(width));
        for (int i = 0; i < width; ++i) {
            bits[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((word >> (width - 1 - i)) & 1u);
        }
        return bits;
    }

  private:
    Word qam_mask() const noexcept { return (Word{1} << qam_.bits()) - 1; }

    int num_mirrors_;
    QamConstellation qam_;
};

///
/// Ground truth of one frame.
///
/// Per-device per-slot arrays are stored device-major: entry (k, j) lives at
/// k * J + j. Inactive devices carry map_index -1, word 0 and symbol 0.
///
struct GroundTruth
{
    int num_devices = 0;
    int num_slots = 0;
    int num_maps = 0;
    std::vector<std::uint8_t> activity;
    std::vector<int> active_devices;  // ascending
    std::vector<int> map_index;
    std::vector<Word> words;
    std::vector<Complex> symbols;
    ComplexMatrix X;  // (K N_t) x J

    std::size_t at(int device, int slot) const noexcept
    {
        return static_cast<std::size_t>(device) * static_cast<std::size_t>(num_slots) +
               static_cast<std::size_t>(slot);
    }
    ColumnIndex support(int device, int slot) const noexcept
    {
        return static_cast<ColumnIndex>(device) * num_maps + map_index[at(device, slot)];
    }
};

struct Observation
{
    ComplexMatrix Y;  // N_r x J
    double noise_variance = 0.0;
};

struct Frame
{
    GroundTruth truth;
    ComplexMatrix H;  // N_r x (K N_t); device k owns columns [k N_t, (k+1) N_t)
    Observation observation;
};

/// Draws a CN(0, variance) sample.
inline Complex complex_gaussian(Rng& rng, double variance)
{
    std::normal_distribution<double> dist(0.0, std::sqrt(variance / 2.0));
    const double re = dist(rng);
    const double im = dist(rng);
    return {re, im};
}

inline ComplexMatrix complex_gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                                             double variance)
{
    ComplexMatrix m(rows, cols);
    if (variance == 0.0) {
        m.setZero();
        return m;
    }
    std::normal_distribution<double> dist(0.0, std::sqrt(variance / 2.0));
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            const double re = dist(rng);
            const double im = dist(rng);
            m(r, c) = Complex(re, im);
        }
    }
    return m;
}

/// Exactly `cfg.num_active` ones, uniformly placed without replacement.
inline std::vector<std::uint8_t> generate_activity(const SystemConfig& cfg, Rng& rng)
{
    std::vector<int> all(static_cast<std::size_t>(cfg.num_devices));
    std::iota(all.begin(), all.end(), 0);
    std::vector<std::uint8_t> activity(all.size(), 0);
    for (int i = 0; i < cfg.num_active; ++i) {
        std::uniform_int_distribution<int> pick(i, cfg.num_devices - 1);
        std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng))]);
        activity[static_cast<std::size_t>(all[static_cast<std::size_t>(i)])] = 1;
    }
    return activity;
}

///
/// Draws one frame for a given activity pattern: per-slot words of active
/// devices, the signal matrix X, a Rayleigh channel H, and Y = H X + W.
///
inline Frame generate_frame(const SystemConfig& cfg, std::vector<std::uint8_t> activity, Rng& rng)
{
    cfg.validate();
    if (static_cast<int>(activity.size()) != cfg.num_devices) {
        throw std::invalid_argument("generate_frame: activity length must equal K");
    }
    const Modulator mod(cfg);
    const int K = cfg.num_devices;
    const int J = cfg.num_slots;

    Frame frame;
    GroundTruth& truth = frame.truth;
    truth.num_devices = K;
    truth.num_slots = J;
    truth.num_maps = cfg.num_maps();
    truth.activity = std::move(activity);
    const auto cells = static_cast<std::size_t>(K) * static_cast<std::size_t>(J);
    truth.map_index.assign(cells, -1);
    truth.words.assign(cells, 0);
    truth.symbols.assign(cells, Complex{});
    truth.X = ComplexMatrix::Zero(cfg.num_columns(), J);

    std::uniform_int_distribution<Word> word_dist(0, (Word{1} << cfg.bits_per_symbol()) - 1);
    for (int k = 0; k < K; ++k) {
        if (truth.activity[static_cast<std::size_t>(k)] == 0) continue;
        truth.active_devices.push_back(k);
        for (int j = 0; j < J; ++j) {
            const Word w = word_dist(rng);
            const ModulatedSymbol s = mod.modulate(w);
            const std::size_t cell = truth.at(k, j);
            truth.words[cell] = w;
            truth.map_index[cell] = s.map_index;
            truth.symbols[cell] = s.symbol;
            truth.X(truth.support(k, j), j) = s.symbol;
        }
    }

    frame.H = complex_gaussian_matrix(rng, cfg.num_rx, cfg.num_columns(), 1.0);
    const double sigma2 = cfg.noise_variance();
    frame.observation.noise_variance = sigma2;
    frame.observation.Y = frame.H * truth.X + complex_gaussian_matrix(rng, cfg.num_rx, J, sigma2);
    return frame;
}

/// Draws the activity pattern, then the rest of the frame.
inline Frame generate_frame(const SystemConfig& cfg, Rng& rng)
{
    cfg.validate();
    auto activity = generate_activity(cfg, rng);
    return generate_frame(cfg, std::move(activity), rng);
}

///
/// Checks the block and structured sparsity of a ground-truth X: each active
/// device has exactly one nonzero per slot at its recorded MAP, inactive
/// devices are all-zero, and the activity count matches.
///
inline bool verify_structure(const GroundTruth& truth)
{
    const int active = static_cast<int>(std::count(truth.activity.begin(), truth.activity.end(), 1));
    if (active != static_cast<int>(truth.active_devices.size())) return false;
    for (int j = 0; j < truth.num_slots; ++j) {
        int nonzeros = 0;
        for (int k = 0; k < truth.num_devices; ++k) {
            const auto block = truth.X.col(j).segment(static_cast<Eigen::Index>(k) * truth.num_maps,
                                                      truth.num_maps);
            int block_nnz = 0;
            for (Eigen::Index u = 0; u < block.size(); ++u) block_nnz += block(u) != Complex{} ? 1 : 0;
            nonzeros += block_nnz;
            if (truth.activity[static_cast<std::size_t>(k)] == 0) {
                if (block_nnz != 0) return false;
                continue;
            }
            const int m = truth.map_index[truth.at(k, j)];
            if (block_nnz != 1 || m < 0 || m >= truth.num_maps || block(m) != truth.symbols[truth.at(k, j)])
                return false;
        }
        if (nonzeros != active) return false;
    }
    return true;
}

} // namespace mmaccess

#endif // MMACCESS_MODEL_HPP
