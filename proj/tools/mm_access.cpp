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

// mm-access: Monte Carlo sweeps and complexity tables for the
// media-modulation massive-access receivers.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <mmaccess/harness.hpp>
#include <mmaccess/metrics.hpp>
#include <mmaccess/report.hpp>

namespace
{

using namespace mmaccess;

void write_dump(const std::string& path, const SweepSpec& spec, const SweepResult& result)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    for (const auto& t : result.trials) {
        nlohmann::json line = {
            {"point", t.point},
            {"value", spec.values[t.point]},
            {"trial", t.trial},
            {"seed", t.seed},
            {"frame_checksum", t.checksum},
            {"active", t.true_devices},
            {"stromp", t.stromp_devices},
        };
        out << line.dump() << '\n';
    }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

int run_sweep_command(const std::string& config_path, const std::optional<std::string>& sweep,
                      const std::optional<std::uint64_t>& seed, const std::optional<int>& trials,
                      const std::optional<double>& snr, const std::optional<std::string>& out_path,
                      const std::optional<std::string>& plot_path, const std::string& plot_metric,
                      const std::optional<std::string>& dump_path)
{
    SweepSpec spec = load_config(config_path);
    if (sweep) {
        const auto v = parse_sweep_variable(*sweep);
        if (!v) throw ConfigError("sweep", "expected snr, J or Nr");
        if (*v != spec.variable) spec.values.clear();
        spec.variable = *v;
    }
    if (seed) spec.base.master_seed = *seed;
    if (trials) spec.trials = *trials;
    if (snr) spec.base.snr_db = *snr;
    fill_default_values(spec);
    spec.validate();

    const SweepResult result = run_sweep(spec);
    const auto& diag = result.diagnostics;
    if (diag.structure_failures || diag.monotonicity_violations || diag.frame_mismatches) {
        std::cerr << "warning: structure_failures=" << diag.structure_failures
                  << " monotonicity_violations=" << diag.monotonicity_violations
                  << " frame_mismatches=" << diag.frame_mismatches << '\n';
    }

    if (out_path) {
        emit_csv(result.rows, spec, *out_path);
    } else {
        write_csv(std::cout, result.rows, spec);
    }
    if (plot_path) {
        emit_plot(result.rows, *plot_path, plot_metric == "pe" ? PlotMetric::Pe : PlotMetric::Ber);
    }
    if (dump_path) write_dump(*dump_path, spec, result);
    return 0;
}

int run_complexity_command(const std::string& config_path, const std::vector<int>& nr_values)
{
    const SweepSpec spec = load_config(config_path);
    spec.base.validate();
    std::vector<int> nrs = nr_values;
    if (nrs.empty()) nrs.push_back(spec.base.num_rx);

    const SystemConfig& c = spec.base;
    std::cout << "# complex multiplications (x1e6), J=" << c.num_slots << " Nt=" << c.num_maps()
              << " K=" << c.num_devices << " Ka=" << c.num_active << '\n';
    std::cout << std::left << std::setw(16) << "algorithm";
    for (const int nr : nrs) std::cout << std::right << std::setw(12) << ("Nr=" + std::to_string(nr));
    std::cout << '\n';
    for (const Algorithm a : kAllAlgorithms) {
        std::cout << std::left << std::setw(16) << algorithm_name(a);
        for (const int nr : nrs) {
            SystemConfig cfg = c;
            cfg.num_rx = nr;
            cfg.validate();
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6g", complexity_eval(cfg, a) / 1e6);
            std::cout << std::right << std::setw(12) << buf;
        }
        std::cout << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Media-modulation massive access: Monte Carlo sweeps and complexity tables"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> sweep;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<double> snr;
    std::optional<std::string> out_path;
    std::optional<std::string> plot_path;
    std::optional<std::string> dump_path;
    std::string plot_metric = "ber";
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a seeded Monte Carlo sweep");
    sweep_cmd->add_option("--config", config_path, "key = value configuration file")->required();
    sweep_cmd->add_option("--sweep", sweep, "Sweep variable: snr, J or Nr");
    sweep_cmd->add_option("--seed", seed, "Master seed");
    sweep_cmd->add_option("--trials", trials, "Trials per sweep point");
    sweep_cmd->add_option("--snr", snr, "Base SNR in dB (used by J and Nr sweeps)");
    sweep_cmd->add_option("--out", out_path, "CSV output path (default: stdout)");
    sweep_cmd->add_option("--plot", plot_path, "SVG plot output path");
    sweep_cmd->add_option("--plot-metric", plot_metric, "Metric to plot: ber or pe")
        ->check(CLI::IsMember({"ber", "pe"}));
    sweep_cmd->add_option("--dump", dump_path, "JSON-lines per-trial dump");

    std::string complexity_config;
    std::vector<int> nr_values;
    auto* complexity_cmd = app.add_subcommand("complexity", "Print analytic multiplication counts");
    complexity_cmd->add_option("--config", complexity_config, "key = value configuration file")->required();
    complexity_cmd->add_option("--nr", nr_values, "Receive-antenna counts to tabulate")->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sweep_cmd) {
            return run_sweep_command(config_path, sweep, seed, trials, snr, out_path, plot_path, plot_metric,
                                     dump_path);
        }
        return run_complexity_command(complexity_config, nr_values);
    } catch (const ConfigError& e) {
        std::cerr << "mm-access: invalid configuration: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "mm-access: " << e.what() << '\n';
        return 1;
    }
}
