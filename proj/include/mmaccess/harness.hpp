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
/// \file harness.hpp
///
/// Seeded Monte Carlo sweeps over SNR, frame length or receive antennas.
///
/// Every trial owns an RNG stream derived from (master seed, sweep point,
/// trial). All requested detectors run on the same frame. Results are stored
/// by (point, trial) index and reduced in that order, so output does not
/// depend on thread scheduling.
///
#ifndef MMACCESS_HARNESS_HPP
#define MMACCESS_HARNESS_HPP

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <mmaccess/detectors.hpp>
#include <mmaccess/metrics.hpp>
#include <mmaccess/model.hpp>

namespace mmaccess
{

enum class SweepVariable
{
    SnrDb,
    FrameLength,
    ReceiveAntennas,
};

enum class Pipeline
{
    StrompSicSsp,
    StrompGsp,
    AudLowerBound,
    OracleLs,
    ZfBenchmark,
};

inline constexpr std::array<Pipeline, 5> kAllPipelines = {
    Pipeline::StrompSicSsp, Pipeline::StrompGsp, Pipeline::AudLowerBound, Pipeline::OracleLs,
    Pipeline::ZfBenchmark,
};

inline std::string_view pipeline_name(Pipeline p) noexcept
{
    switch (p) {
    case Pipeline::StrompSicSsp: return "stromp+sic_ssp";
    case Pipeline::StrompGsp: return "stromp+gsp";
    case Pipeline::AudLowerBound: return "aud_lb";
    case Pipeline::OracleLs: return "oracle_ls";
    case Pipeline::ZfBenchmark: return "zf_benchmark";
    }
    return "?";
}

inline std::optional<Pipeline> parse_pipeline(std::string_view name) noexcept
{
    for (const Pipeline p : kAllPipelines) {
        if (pipeline_name(p) == name) return p;
    }
    return std::nullopt;
}

inline std::string_view sweep_variable_name(SweepVariable v) noexcept
{
    switch (v) {
    case SweepVariable::SnrDb: return "snr_db";
    case SweepVariable::FrameLength: return "J";
    case SweepVariable::ReceiveAntennas: return "Nr";
    }
    return "?";
}

inline std::optional<SweepVariable> parse_sweep_variable(std::string_view name) noexcept
{
    if (name == "snr" || name == "snr_db") return SweepVariable::SnrDb;
    if (name == "J") return SweepVariable::FrameLength;
    if (name == "Nr") return SweepVariable::ReceiveAntennas;
    return std::nullopt;
}

/// Default grids: SNR -10..12 dB step 2, J 2..16 step 2, N_r 10..100 step 10.
inline std::vector<double> default_sweep_values(SweepVariable v)
{
    std::vector<double> values;
    switch (v) {
    case SweepVariable::SnrDb:
        for (int s = -10; s <= 12; s += 2) values.push_back(s);
        break;
    case SweepVariable::FrameLength:
        for (int j = 2; j <= 16; j += 2) values.push_back(j);
        break;
    case SweepVariable::ReceiveAntennas:
        for (int n = 10; n <= 100; n += 10) values.push_back(n);
        break;
    }
    return values;
}

struct SweepSpec
{
    SweepVariable variable = SweepVariable::SnrDb;
    std::vector<double> values;
    int trials = 1000;
    std::vector<Pipeline> detectors{kAllPipelines.begin(), kAllPipelines.end()};
    SystemConfig base;

    /// Configuration at one sweep value.
    SystemConfig at(double value) const
    {
        SystemConfig cfg = base;
        switch (variable) {
        case SweepVariable::SnrDb: cfg.snr_db = value; break;
        case SweepVariable::FrameLength: cfg.num_slots = static_cast<int>(std::lround(value)); break;
        case SweepVariable::ReceiveAntennas: cfg.num_rx = static_cast<int>(std::lround(value)); break;
        }
        return cfg;
    }

    void validate() const
    {
        base.validate();
        if (values.empty()) throw ConfigError("values", "must not be empty");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (std::isnan(values[i])) throw ConfigError("values", "must be numbers");
            if (i > 0 && !(values[i] > values[i - 1])) throw ConfigError("values", "must be strictly increasing");
            if (variable != SweepVariable::SnrDb && values[i] != std::round(values[i]))
                throw ConfigError("values", "J and Nr sweeps need integer values");
            at(values[i]).validate();
        }
        if (trials < 1) throw ConfigError("trials", "must be >= 1");
        if (detectors.empty()) throw ConfigError("detectors", "must not be empty");
    }
};

struct ResultRow
{
    std::string sweep_var;
    double value = 0.0;
    std::string detector;
    double pe_mean = 0.0;  // NaN for detectors without activity detection
    double pe_ci = 0.0;
    double ber_mean = 0.0;
    double ber_ci = 0.0;
    int trials = 0;
    double wall_ms_mean = 0.0;
    double mult_estimate = 0.0;
};

/// Per-trial outcome of one pipeline.
struct TrialMetrics
{
    double pe = std::numeric_limits<double>::quiet_NaN();
    double ber = 0.0;
    double wall_seconds = 0.0;
    bool structure_ok = true;
};

struct SweepDiagnostics
{
    /// Frames or reconstructions failing the one-nonzero-per-block check.
    int structure_failures = 0;
    /// StrOMP committed iterations whose residual norm grew.
    int monotonicity_violations = 0;
    /// Trials where a frame changed while detectors consumed it.
    int frame_mismatches = 0;
};

/// Per-trial debugging record.
struct TrialLog
{
    std::size_t point = 0;
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::uint64_t checksum = 0;
    std::vector<int> true_devices;
    std::vector<int> stromp_devices;  // empty unless a StrOMP pipeline ran
};

struct SweepResult
{
    std::vector<ResultRow> rows;
    SweepDiagnostics diagnostics;
    /// One entry per (point, trial), point-major.
    std::vector<TrialLog> trials;
};

// ---------------------------------------------------------------------------
// Seeding
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t point, std::uint64_t trial) noexcept
{
    return splitmix64(splitmix64(splitmix64(master) ^ point) ^ trial);
}

/// FNV-1a over the raw bytes of Y and H.
inline std::uint64_t frame_checksum(const Frame& f) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto mix = [&h](const ComplexMatrix& m) {
        const auto* bytes = reinterpret_cast<const unsigned char*>(m.data());
        const auto n = static_cast<std::size_t>(m.size()) * sizeof(Complex);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= bytes[i];
            h *= 0x100000001b3ULL;
        }
    };
    mix(f.observation.Y);
    mix(f.H);
    return h;
}

// ---------------------------------------------------------------------------
// Trial evaluation
// ---------------------------------------------------------------------------

inline Algorithm aud_algorithm(Pipeline p)
{
    return p == Pipeline::AudLowerBound ? Algorithm::AudLowerBound : Algorithm::StrOMP;
}

/// Analytic multiplications per frame of a full pipeline.
inline double pipeline_complexity(const SystemConfig& cfg, Pipeline p)
{
    switch (p) {
    case Pipeline::StrompSicSsp:
        return complexity_eval(cfg, Algorithm::StrOMP) + complexity_eval(cfg, Algorithm::SicSsp);
    case Pipeline::StrompGsp:
        return complexity_eval(cfg, Algorithm::StrOMP) + complexity_eval(cfg, Algorithm::Gsp);
    case Pipeline::AudLowerBound:
        return complexity_eval(cfg, Algorithm::AudLowerBound) + complexity_eval(cfg, Algorithm::SicSsp);
    case Pipeline::OracleLs:
    case Pipeline::ZfBenchmark:
        return complexity_eval(cfg, Algorithm::LeastSquares);
    }
    return 0.0;
}

struct TrialRecord
{
    std::vector<TrialMetrics> metrics;  // one per requested detector
    std::uint64_t checksum = 0;
    int monotonicity_violations = 0;
    bool frame_ok = true;
    bool frame_changed = false;
    std::vector<int> true_devices;
    ActiveSet stromp_devices;
};

inline TrialRecord run_trial(const SystemConfig& cfg, const std::vector<Pipeline>& detectors, std::uint64_t seed)
{
    using clock = std::chrono::steady_clock;
    const auto seconds = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double>(b - a).count();
    };

    TrialRecord rec;
    Rng rng(seed);
    const Frame frame = generate_frame(cfg, rng);
    rec.checksum = frame_checksum(frame);
    rec.frame_ok = verify_structure(frame.truth);
    rec.true_devices = frame.truth.active_devices;
    const Modulator mod(cfg);
    const int Nt = cfg.num_maps();
    const ComplexMatrix& Y = frame.observation.Y;
    const ComplexMatrix& H = frame.H;

    std::optional<StrompResult> shared_aud;
    double shared_aud_seconds = 0.0;
    const auto evaluate = [&](const ActiveSet& devices, const Reconstruction& r, double secs) {
        TrialMetrics m;
        m.pe = aud_metrics(frame.truth.activity, devices).pe();
        m.ber = ber_metrics(frame.truth, devices, decode(r, mod), cfg).ber();
        m.wall_seconds = secs;
        m.structure_ok = verify_reconstruction(r, devices);
        return m;
    };

    for (const Pipeline p : detectors) {
        const auto t0 = clock::now();
        switch (p) {
        case Pipeline::StrompSicSsp:
        case Pipeline::StrompGsp: {
            if (!shared_aud) {
                shared_aud = run_stromp(Y, H, Nt, {.stop_threshold = cfg.stop_threshold, .known_active = std::nullopt});
                shared_aud_seconds = seconds(t0, clock::now());
                rec.monotonicity_violations += shared_aud->monotonicity_violations;
                rec.stromp_devices = shared_aud->devices;
            }
            const auto t1 = clock::now();
            const Reconstruction r = p == Pipeline::StrompSicSsp ? sic_ssp(Y, H, Nt, shared_aud->devices)
                                                                 : gsp(Y, H, Nt, shared_aud->devices);
            rec.metrics.push_back(evaluate(shared_aud->devices, r, shared_aud_seconds + seconds(t1, clock::now())));
            break;
        }
        case Pipeline::AudLowerBound: {
            const ActiveSet devices = stromp_known_ka(Y, H, Nt, cfg.num_active);
            const Reconstruction r = sic_ssp(Y, H, Nt, devices);
            rec.metrics.push_back(evaluate(devices, r, seconds(t0, clock::now())));
            break;
        }
        case Pipeline::OracleLs: {
            const Reconstruction r = oracle_ls(Y, H, frame.truth);
            rec.metrics.push_back(evaluate(frame.truth.active_devices, r, seconds(t0, clock::now())));
            break;
        }
        case Pipeline::ZfBenchmark: {
            Rng zf_rng(splitmix64(seed ^ 0x7a665f62656e6368ULL));
            TrialMetrics m;
            m.ber = zf_benchmark(cfg, zf_rng).rate();
            m.wall_seconds = seconds(t0, clock::now());
            rec.metrics.push_back(m);
            break;
        }
        }
    }
    rec.frame_changed = frame_checksum(frame) != rec.checksum;
    return rec;
}

/// Worker count: MM_ACCESS_THREADS if set and positive, else hardware concurrency.
inline unsigned worker_count()
{
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("MM_ACCESS_THREADS")) {
        unsigned cap = 0;
        const std::string_view s(env);
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), cap);
        if (ec == std::errc{} && ptr == s.data() + s.size() && cap > 0) n = std::min(n, cap);
    }
    return n;
}

namespace detail
{
struct MeanCi
{
    double mean = 0.0;
    double half_width = 0.0;
};

// Normal-approximation 95% interval; accumulates in index order.
inline MeanCi mean_ci(const std::vector<double>& xs)
{
    MeanCi r;
    if (xs.empty()) return r;
    double sum = 0.0;
    for (const double x : xs) sum += x;
    r.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (const double x : xs) ss += (x - r.mean) * (x - r.mean);
        const double var = ss / static_cast<double>(xs.size() - 1);
        r.half_width = 1.96 * std::sqrt(var / static_cast<double>(xs.size()));
    }
    return r;
}
} // namespace detail

///
/// Runs every (sweep point, trial) job on `threads` workers (0 = worker_count())
/// and reduces the per-trial metrics into one row per (point, detector).
///
inline SweepResult run_sweep(const SweepSpec& spec, unsigned threads = 0)
{
    spec.validate();
    const std::size_t points = spec.values.size();
    const auto trials = static_cast<std::size_t>(spec.trials);
    const std::size_t jobs = points * trials;
    std::vector<TrialRecord> records(jobs);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto work = [&] {
        for (std::size_t job = next++; job < jobs; job = next++) {
            try {
                const std::size_t point = job / trials;
                const std::size_t trial = job % trials;
                const SystemConfig cfg = spec.at(spec.values[point]);
                records[job] = run_trial(cfg, spec.detectors, trial_seed(spec.base.master_seed, point, trial));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };

    const unsigned n = std::max(1u, threads == 0 ? worker_count() : threads);
    if (n == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n);
        for (unsigned t = 0; t < n; ++t) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);

    SweepResult result;
    result.trials.reserve(jobs);
    for (std::size_t job = 0; job < jobs; ++job) {
        auto& r = records[job];
        const std::size_t point = job / trials;
        const std::size_t trial = job % trials;
        result.trials.push_back({point, trial, trial_seed(spec.base.master_seed, point, trial), r.checksum,
                                 std::move(r.true_devices), std::move(r.stromp_devices)});
        result.diagnostics.monotonicity_violations += r.monotonicity_violations;
        result.diagnostics.frame_mismatches += r.frame_changed ? 1 : 0;
        result.diagnostics.structure_failures += r.frame_ok ? 0 : 1;
        for (const auto& m : r.metrics) result.diagnostics.structure_failures += m.structure_ok ? 0 : 1;
    }

    const std::string var(sweep_variable_name(spec.variable));
    for (std::size_t point = 0; point < points; ++point) {
        const SystemConfig cfg = spec.at(spec.values[point]);
        for (std::size_t d = 0; d < spec.detectors.size(); ++d) {
            std::vector<double> pe, ber, wall;
            pe.reserve(trials);
            ber.reserve(trials);
            wall.reserve(trials);
            for (std::size_t t = 0; t < trials; ++t) {
                const TrialMetrics& m = records[point * trials + t].metrics[d];
                pe.push_back(m.pe);
                ber.push_back(m.ber);
                wall.push_back(m.wall_seconds);
            }
            ResultRow row;
            row.sweep_var = var;
            row.value = spec.values[point];
            row.detector = std::string(pipeline_name(spec.detectors[d]));
            const auto pe_stats = detail::mean_ci(pe);
            const auto ber_stats = detail::mean_ci(ber);
            row.pe_mean = pe_stats.mean;
            row.pe_ci = std::isnan(pe_stats.mean) ? std::numeric_limits<double>::quiet_NaN() : pe_stats.half_width;
            row.ber_mean = ber_stats.mean;
            row.ber_ci = ber_stats.half_width;
            row.trials = spec.trials;
            row.wall_ms_mean = 1e3 * detail::mean_ci(wall).mean;
            row.mult_estimate = pipeline_complexity(cfg, spec.detectors[d]);
            result.rows.push_back(std::move(row));
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Plain-text configuration
// ---------------------------------------------------------------------------

namespace detail
{
inline std::string_view trim(std::string_view s) noexcept
{
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

inline double parse_double(std::string_view field, std::string_view text)
{
    text = trim(text);
    if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw ConfigError(std::string(field), "not a number: '" + std::string(text) + "'");
    }
    return v;
}

template <typename Int>
Int parse_int(std::string_view field, std::string_view text)
{
    text = trim(text);
    Int v{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw ConfigError(std::string(field), "not an integer: '" + std::string(text) + "'");
    }
    return v;
}

inline std::vector<std::string_view> split_list(std::string_view text)
{
    std::vector<std::string_view> items;
    while (!text.empty()) {
        const auto comma = text.find(',');
        const auto item = trim(text.substr(0, comma));
        if (!item.empty()) items.push_back(item);
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    return items;
}
} // namespace detail

///
/// Applies one `key = value` setting to `spec`. Keys: K, Ka, Mr, M, Nr, J,
/// snr_db, P_th, seed, trials, sweep, values (comma list), detectors (comma
/// list).
///
inline void apply_setting(SweepSpec& spec, std::string_view key, std::string_view value)
{
    using detail::parse_double;
    using detail::parse_int;
    const std::string k(detail::trim(key));
    SystemConfig& c = spec.base;
    if (k == "K") c.num_devices = parse_int<int>(k, value);
    else if (k == "Ka") c.num_active = parse_int<int>(k, value);
    else if (k == "Mr") c.num_mirrors = parse_int<int>(k, value);
    else if (k == "M") c.qam_order = parse_int<int>(k, value);
    else if (k == "Nr") c.num_rx = parse_int<int>(k, value);
    else if (k == "J") c.num_slots = parse_int<int>(k, value);
    else if (k == "snr_db") c.snr_db = parse_double(k, value);
    else if (k == "P_th") c.stop_threshold = parse_double(k, value);
    else if (k == "seed") c.master_seed = parse_int<std::uint64_t>(k, value);
    else if (k == "trials") spec.trials = parse_int<int>(k, value);
    else if (k == "sweep") {
        const auto v = parse_sweep_variable(detail::trim(value));
        if (!v) throw ConfigError(k, "expected snr, J or Nr");
        spec.variable = *v;
    } else if (k == "values") {
        spec.values.clear();
        for (const auto item : detail::split_list(value)) spec.values.push_back(parse_double(k, item));
    } else if (k == "detectors") {
        spec.detectors.clear();
        for (const auto item : detail::split_list(value)) {
            const auto p = parse_pipeline(item);
            if (!p) throw ConfigError(k, "unknown detector '" + std::string(item) + "'");
            spec.detectors.push_back(*p);
        }
    } else {
        throw ConfigError(k, "unknown configuration key");
    }
}

/// Parses `key = value` lines; '#' starts a comment.
inline SweepSpec parse_config(std::istream& in)
{
    SweepSpec spec;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view(line);
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = detail::trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
        }
        apply_setting(spec, view.substr(0, eq), view.substr(eq + 1));
    }
    return spec;
}

/// Fills an empty value list with the sweep variable's default grid.
inline void fill_default_values(SweepSpec& spec)
{
    if (spec.values.empty()) spec.values = default_sweep_values(spec.variable);
}

inline SweepSpec load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    return parse_config(in);
}

} // namespace mmaccess

#endif // MMACCESS_HARNESS_HPP
