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

#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include <mmaccess/metrics.hpp>

using namespace mmaccess;

namespace
{
std::vector<std::uint8_t> first_n_active(int k, int n)
{
    std::vector<std::uint8_t> a(static_cast<std::size_t>(k), 0);
    for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i)] = 1;
    return a;
}

// Ground truth with devices 0..ka-1 active and word (k + j) mod 16 everywhere.
GroundTruth make_truth(int k, int ka, int slots)
{
    SystemConfig c;
    c.num_devices = k;
    c.num_active = ka;
    c.num_slots = slots;
    const Modulator mod(c);
    GroundTruth t;
    t.num_devices = k;
    t.num_slots = slots;
    t.num_maps = c.num_maps();
    t.activity = first_n_active(k, ka);
    const auto cells = static_cast<std::size_t>(k * slots);
    t.map_index.assign(cells, -1);
    t.words.assign(cells, 0);
    t.symbols.assign(cells, Complex{});
    for (int d = 0; d < ka; ++d) {
        t.active_devices.push_back(d);
        for (int j = 0; j < slots; ++j) {
            const Word w = static_cast<Word>((d + j) % 16);
            const auto s = mod.modulate(w);
            t.words[t.at(d, j)] = w;
            t.map_index[t.at(d, j)] = s.map_index;
            t.symbols[t.at(d, j)] = s.symbol;
        }
    }
    return t;
}

DecodedWords perfect_decode(const GroundTruth& t, const ActiveSet& devices)
{
    DecodedWords out;
    for (const int d : devices) {
        auto& w = out[d];
        for (int j = 0; j < t.num_slots; ++j) w.push_back(t.words[t.at(d, j)]);
    }
    return out;
}

SystemConfig table_config(int nr)
{
    SystemConfig c;
    c.num_slots = 12;
    c.num_mirrors = 2;
    c.num_devices = 100;
    c.num_active = 8;
    c.num_rx = nr;
    return c;
}
} // namespace

TEST(AudMetrics, PerfectDetection)
{
    const auto a = first_n_active(100, 8);
    const auto c = aud_metrics(a, {0, 1, 2, 3, 4, 5, 6, 7});
    EXPECT_EQ(c.missed, 0);
    EXPECT_EQ(c.false_alarms, 0);
    EXPECT_EQ(c.pe(), 0.0);
}

TEST(AudMetrics, OneMissOneFalseAlarm)
{
    const auto c = aud_metrics(first_n_active(100, 8), {0, 1, 2, 3, 4, 5, 6, 8});
    EXPECT_EQ(c.missed, 1);
    EXPECT_EQ(c.false_alarms, 1);
    EXPECT_DOUBLE_EQ(c.pe(), 0.02);
}

TEST(AudMetrics, EmptyDetection)
{
    const auto c = aud_metrics(first_n_active(100, 8), {});
    EXPECT_EQ(c.missed, 8);
    EXPECT_DOUBLE_EQ(c.pe(), 0.08);
}

TEST(AudMetrics, RejectsInvalidSets)
{
    EXPECT_THROW(aud_metrics(first_n_active(10, 2), {10}), std::invalid_argument);
    EXPECT_THROW(aud_metrics(first_n_active(10, 2), {1, 1}), std::invalid_argument);
}

TEST(BerMetrics, PerfectDecoding)
{
    const GroundTruth t = make_truth(100, 8, 12);
    const auto c = ber_metrics(t, t.active_devices, perfect_decode(t, t.active_devices), 2, 2);
    EXPECT_EQ(c.ber(), 0.0);
    EXPECT_EQ(c.total_bits, 384u);
}

TEST(BerMetrics, SplitsMapAndQamErrors)
{
    const GroundTruth t = make_truth(100, 8, 12);
    DecodedWords d = perfect_decode(t, t.active_devices);
    d[0][0] ^= 0b1000;  // one MAP bit
    d[1][3] ^= 0b1100;  // two MAP bits
    d[2][5] ^= 0b0011;  // two QAM bits
    d[7][11] ^= 0b0001; // one QAM bit
    d[4][2] ^= 0b0010;  // one QAM bit
    d[5][6] ^= 0b0001;  // one QAM bit
    const auto c = ber_metrics(t, t.active_devices, d, 2, 2);
    EXPECT_EQ(c.missed, 0);
    EXPECT_EQ(c.map_bit_errors, 3u);
    EXPECT_EQ(c.qam_bit_errors, 5u);
    EXPECT_DOUBLE_EQ(c.ber(), 8.0 / 384.0);
    EXPECT_NEAR(c.ber(), 0.02083, 1e-5);
}

TEST(BerMetrics, EmptyDetectionLosesEverything)
{
    const GroundTruth t = make_truth(100, 8, 12);
    const auto c = ber_metrics(t, {}, {}, 2, 2);
    EXPECT_EQ(c.missed, 8);
    EXPECT_EQ(c.error_bits(), 384u);
    EXPECT_DOUBLE_EQ(c.ber(), 1.0);
}

TEST(BerMetrics, FalseAlarmsCostNoBits)
{
    const GroundTruth t = make_truth(20, 4, 3);
    ActiveSet detected = t.active_devices;
    detected.push_back(10);
    DecodedWords d = perfect_decode(t, t.active_devices);
    d[10] = {15, 15, 15};
    EXPECT_EQ(ber_metrics(t, detected, d, 2, 2).ber(), 0.0);
    EXPECT_DOUBLE_EQ(aud_metrics(t.activity, detected).pe(), 1.0 / 20.0);
}

TEST(BerMetrics, MissingWordCountsAsAllBitsWrong)
{
    const GroundTruth t = make_truth(10, 2, 2);
    DecodedWords d = perfect_decode(t, t.active_devices);
    d[1][1] = kMissingWord;
    const auto c = ber_metrics(t, t.active_devices, d, 2, 2);
    EXPECT_EQ(c.map_bit_errors, 2u);
    EXPECT_EQ(c.qam_bit_errors, 2u);
}

TEST(MetricsProperties, RatesStayInUnitIntervalAndZeroBerMeansPerfect)
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 500; ++trial) {
        const GroundTruth t = make_truth(30, 1 + trial % 8, 1 + trial % 5);
        ActiveSet detected;
        for (int k = 0; k < 30; ++k) {
            if (std::bernoulli_distribution(0.3)(rng)) detected.push_back(k);
        }
        DecodedWords d;
        bool perfect = true;
        for (const int k : detected) {
            auto& w = d[k];
            for (int j = 0; j < t.num_slots; ++j) {
                const Word flip = std::bernoulli_distribution(0.2)(rng) ? static_cast<Word>(rng() % 16) : 0;
                w.push_back(t.words[t.at(k, j)] ^ flip);
                if (t.activity[static_cast<std::size_t>(k)] && flip) perfect = false;
            }
        }
        const auto aud = aud_metrics(t.activity, detected);
        const auto ber = ber_metrics(t, detected, d, 2, 2);
        EXPECT_GE(aud.pe(), 0.0);
        EXPECT_LE(aud.pe(), 1.0);
        EXPECT_GE(ber.ber(), 0.0);
        EXPECT_LE(ber.ber(), 1.0);
        EXPECT_EQ(aud.missed, ber.missed);
        EXPECT_EQ(ber.ber() == 0.0, aud.missed == 0 && perfect);
    }
}

// ---------------------------------------------------------------------------
// Complexity
// ---------------------------------------------------------------------------

TEST(Complexity, StrompMatchesTable)
{
    const double v50 = complexity_eval(table_config(50), "StrOMP");
    EXPECT_NEAR(v50, 9.5805e6, 1.0);
    EXPECT_NEAR(v50 / 9.6e6, 1.0, 0.01);
    EXPECT_NEAR(complexity_eval(table_config(100), "StrOMP") / 17.6e6, 1.0, 0.01);
}

TEST(Complexity, SicSspMatchesTable)
{
    EXPECT_NEAR(complexity_eval(table_config(50), "SIC-SSP"), 2.100672e6, 1.0);
    EXPECT_NEAR(complexity_eval(table_config(50), "SIC-SSP") / 2.1e6, 1.0, 0.01);
}

TEST(Complexity, TableRowsWithinFivePercent)
{
    struct Row { const char* name; double at50; double at100; };
    // LS/Benchmark1 is printed as 0.01 / 0.02 and is checked by the acceptance suite.
    const Row rows[] = {
        {"StrOMP", 9.6, 17.6}, {"TLSSCS-AUD", 12.5, 44.2}, {"AUD-LB", 7.1, 13.2},
        {"SIC-SSP", 2.1, 4.0}, {"TLSSCS-data", 0.15, 0.28}, {"GSP", 0.65, 1.2},
    };
    for (const auto& r : rows) {
        EXPECT_NEAR(complexity_eval(table_config(50), r.name) / 1e6 / r.at50, 1.0, 0.05) << r.name;
        EXPECT_NEAR(complexity_eval(table_config(100), r.name) / 1e6 / r.at100, 1.0, 0.05) << r.name;
    }
}

TEST(Complexity, GspSupportSizeReading)
{
    // The GSP expression's s evaluated at K_a reproduces the tabulated 0.65 / 1.2;
    // summing that term over s = 1..K_a overshoots by more than 25%.
    for (const auto& [nr, printed] : {std::pair{50, 0.65}, std::pair{100, 1.2}}) {
        const SystemConfig c = table_config(nr);
        const double J = 12, Nt = 4, Ka = 8;
        double summed_term = 0.0;
        for (int s = 1; s <= 8; ++s) summed_term += 2.0 * s * nr * (Nt + 1);
        const double summed = J * (summed_term + 14.0 * nr * Ka * Ka + 11.0 * Ka * Ka * Ka);
        EXPECT_GT(summed / 1e6 / printed, 1.25);
        EXPECT_NEAR(complexity_eval(c, Algorithm::Gsp) / 1e6 / printed, 1.0, 0.05);
    }
}

TEST(Complexity, StrompGrowsLinearlyInAntennas)
{
    const double ratio = complexity_eval(table_config(100), "StrOMP") / complexity_eval(table_config(50), "StrOMP");
    EXPECT_GT(ratio, 1.5);
    EXPECT_LT(ratio, 2.0);
}

TEST(Complexity, UnknownAlgorithmThrows)
{
    EXPECT_THROW(complexity_eval(table_config(50), "OMP"), std::invalid_argument);
}

TEST(Complexity, NamesRoundTrip)
{
    for (const Algorithm a : kAllAlgorithms) EXPECT_EQ(parse_algorithm(algorithm_name(a)), a);
}
