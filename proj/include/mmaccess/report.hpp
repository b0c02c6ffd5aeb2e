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
/// \file report.hpp
///
/// CSV and SVG output for sweep results.
///
/// CSV layout: one '#' metadata line with the full configuration, a header
/// row, then one row per (sweep value, detector). Reals are written with 6
/// significant digits; "nan" marks a metric the detector does not produce.
///
#ifndef MMACCESS_REPORT_HPP
#define MMACCESS_REPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <mmaccess/harness.hpp>

namespace mmaccess
{

inline constexpr const char* kCsvHeader =
    "sweep_var,value,detector,pe_mean,pe_ci,ber_mean,ber_ci,trials,wall_ms_mean,mult_estimate";

inline std::string format_real(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string config_metadata(const SweepSpec& spec)
{
    const SystemConfig& c = spec.base;
    std::ostringstream os;
    os << "# mm-access sweep=" << sweep_variable_name(spec.variable) << " values=";
    for (std::size_t i = 0; i < spec.values.size(); ++i) os << (i ? "," : "") << format_real(spec.values[i]);
    os << " trials=" << spec.trials << " detectors=";
    for (std::size_t i = 0; i < spec.detectors.size(); ++i) os << (i ? "," : "") << pipeline_name(spec.detectors[i]);
    os << " K=" << c.num_devices << " Ka=" << c.num_active << " Mr=" << c.num_mirrors << " M=" << c.qam_order
       << " Nr=" << c.num_rx << " J=" << c.num_slots << " snr_db=" << format_real(c.snr_db)
       << " P_th=" << format_real(c.stop_threshold) << " seed=" << c.master_seed
       << " snr_convention=per_device_tx:snr_db=10log10(1/sigma_w^2)"
       << " map_bits=natural_binary qam_bits=gray_per_axis_msb_first";
    return os.str();
}

inline void write_csv(std::ostream& os, const std::vector<ResultRow>& rows, const SweepSpec& spec)
{
    if (rows.empty()) throw std::invalid_argument("write_csv: no rows");
    os << config_metadata(spec) << '\n' << kCsvHeader << '\n';
    for (const auto& r : rows) {
        os << r.sweep_var << ',' << format_real(r.value) << ',' << r.detector << ',' << format_real(r.pe_mean) << ','
           << format_real(r.pe_ci) << ',' << format_real(r.ber_mean) << ',' << format_real(r.ber_ci) << ','
           << r.trials << ',' << format_real(r.wall_ms_mean) << ',' << format_real(r.mult_estimate) << '\n';
    }
}

inline void emit_csv(const std::vector<ResultRow>& rows, const SweepSpec& spec, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    write_csv(out, rows, spec);
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline std::vector<ResultRow> parse_csv(std::istream& in)
{
    std::vector<ResultRow> rows;
    std::string line;
    bool header_seen = false;
    const auto real = [](const std::string& s) { return s == "nan" ? std::nan("") : std::stod(s); };
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (line != kCsvHeader) throw std::runtime_error("parse_csv: unexpected header");
            header_seen = true;
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (f.size() != 10) throw std::runtime_error("parse_csv: expected 10 fields");
        ResultRow r;
        r.sweep_var = f[0];
        r.value = real(f[1]);
        r.detector = f[2];
        r.pe_mean = real(f[3]);
        r.pe_ci = real(f[4]);
        r.ber_mean = real(f[5]);
        r.ber_ci = real(f[6]);
        r.trials = std::stoi(f[7]);
        r.wall_ms_mean = real(f[8]);
        r.mult_estimate = real(f[9]);
        rows.push_back(std::move(r));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// SVG line chart
// ---------------------------------------------------------------------------

enum class PlotMetric
{
    Ber,
    Pe,
};

/// Zero values are drawn at this floor on the log axis.
inline constexpr double kPlotFloor = 1e-6;

///
/// Log-scale line chart of one metric: one polyline per detector, x axis is the
/// sweep variable. Points clamped to the floor are drawn as hollow squares and
/// noted in the legend.
///
inline void write_plot(std::ostream& os, const std::vector<ResultRow>& rows, PlotMetric metric)
{
    std::vector<double> xs;
    std::vector<std::string> order;
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    for (const auto& r : rows) {
        const double y = metric == PlotMetric::Ber ? r.ber_mean : r.pe_mean;
        if (std::find(xs.begin(), xs.end(), r.value) == xs.end()) xs.push_back(r.value);
        if (std::isnan(y)) continue;
        if (!series.count(r.detector)) order.push_back(r.detector);
        series[r.detector].emplace_back(r.value, y);
    }
    if (xs.size() < 2) throw std::invalid_argument("plot needs at least two sweep values");
    const auto [xmin_it, xmax_it] = std::minmax_element(xs.begin(), xs.end());
    const double xmin = *xmin_it;
    const double xmax = *xmax_it;

    const double width = 720, height = 460, left = 80, right = 200, top = 30, bottom = 60;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;
    const int decades = 6;  // 1e-6 .. 1
    const auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * plot_w; };
    const auto py = [&](double y) {
        const double l = std::log10(std::clamp(y, kPlotFloor, 1.0));
        return top + (-l / decades) * plot_h;
    };
    const std::string var = rows.front().sweep_var;
    const char* metric_label = metric == PlotMetric::Ber ? "BER" : "Pe";
    static constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int d = 0; d <= decades; ++d) {
        const double y = top + d * plot_h / decades;
        os << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << left + plot_w << "\" y2=\"" << y
           << "\" stroke=\"#ddd\"/>\n";
        os << "<text x=\"" << left - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e-" << d << "</text>\n";
    }
    for (const double x : xs) {
        os << "<text x=\"" << px(x) << "\" y=\"" << top + plot_h + 18 << "\" text-anchor=\"middle\">"
           << format_real(x) << "</text>\n";
    }
    os << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\">" << var
       << "</text>\n";
    os << "<text x=\"20\" y=\"" << top + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
       << top + plot_h / 2 << ")\">" << metric_label << "</text>\n";

    bool any_clamped = false;
    for (std::size_t s = 0; s < order.size(); ++s) {
        const auto& pts = series[order[s]];
        const char* color = palette[s % std::size(palette)];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) os << (i ? " " : "") << px(pts[i].first) << ',' << py(pts[i].second);
        os << "\"/>\n";
        for (const auto& [x, y] : pts) {
            if (y <= 0.0) {
                any_clamped = true;
                os << "<rect class=\"clamped\" x=\"" << px(x) - 4 << "\" y=\"" << py(y) - 4
                   << "\" width=\"8\" height=\"8\" fill=\"white\" stroke=\"" << color << "\"/>\n";
            } else {
                os << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
            }
        }
        const double ly = top + 10 + 20.0 * static_cast<double>(s);
        os << "<line x1=\"" << left + plot_w + 15 << "\" y1=\"" << ly << "\" x2=\"" << left + plot_w + 40 << "\" y2=\""
           << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << left + plot_w + 45 << "\" y=\"" << ly + 4 << "\">" << order[s] << "</text>\n";
    }
    if (any_clamped) {
        os << "<text class=\"clamp-note\" x=\"" << left + plot_w + 15 << "\" y=\""
           << top + 20 + 20.0 * static_cast<double>(order.size()) << "\">hollow: zero, clamped to 1e-6</text>\n";
    }
    os << "</svg>\n";
}

inline void emit_plot(const std::vector<ResultRow>& rows, const std::string& path, PlotMetric metric = PlotMetric::Ber)
{
    std::ostringstream buf;
    write_plot(buf, rows, metric);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << buf.str();
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

} // namespace mmaccess

#endif // MMACCESS_REPORT_HPP
