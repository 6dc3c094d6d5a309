#include "geoflow/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "geoflow/error.hpp"

namespace geoflow {

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string cell(const std::optional<double>& v) {
    return v ? g17(*v) : std::string();
}

std::string f2(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string g4(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

}  // namespace

std::string csv_from_series(const std::vector<TimeSeriesRecord>& series) {
    std::string out =
        "t,diameter,energy,dissipation_residual,w2_to_mean,"
        "consensus_integral,rate_lhs,rate_rhs,weak_functional\n";
    for (const auto& r : series) {
        out += g17(r.t);
        out += ',';
        out += g17(r.diameter);
        out += ',';
        out += g17(r.energy);
        out += ',';
        out += cell(r.dissipation_residual);
        out += ',';
        out += cell(r.w2_to_mean);
        out += ',';
        out += cell(r.consensus_integral);
        out += ',';
        out += cell(r.rate_lhs);
        out += ',';
        out += cell(r.rate_rhs);
        out += ',';
        out += cell(r.weak_functional);
        out += '\n';
    }
    return out;
}

std::string jsonl_from_trajectory(const Trajectory& traj) {
    if (traj.times.size() != traj.states.size())
        throw UsageError("trajectory times/states length mismatch");
    std::string out;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const ParticleEnsemble& e = traj.states[k];
        nlohmann::json line;  // keys serialize sorted: masses, points, t
        line["masses"] = e.masses;
        auto& pts = line["points"] = nlohmann::json::array();
        for (const auto& p : e.points) pts.push_back(p.coords);
        line["t"] = traj.times[k];
        out += line.dump();
        out += '\n';
    }
    return out;
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
    namespace fs = std::filesystem;
    fs::path dir = path.parent_path();
    if (dir.empty()) dir = ".";
    std::error_code ec;
    fs::create_directories(dir, ec);  // ok if it already exists
    const fs::path tmp = dir / (path.filename().string() + ".tmp");
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw UsageError("cannot open " + tmp.string() + " for write");
        f.write(content.data(),
                static_cast<std::streamsize>(content.size()));
        if (!f) throw UsageError("short write to " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec)
        throw UsageError("cannot rename " + tmp.string() + " to " +
                         path.string() + ": " + ec.message());
}

std::string svg_rate_plot(const PlotInput& in) {
    const bool loglog = in.model == FitModel::power;

    // transform to plot coordinates, dropping points a log axis can't show
    std::vector<double> px, py;
    for (std::size_t i = 0; i < in.t.size() && i < in.y.size(); ++i) {
        if (in.y[i] <= 0.0) continue;
        if (loglog && in.t[i] <= 0.0) continue;
        px.push_back(loglog ? std::log(in.t[i]) : in.t[i]);
        py.push_back(std::log(in.y[i]));
    }
    if (px.size() < 2) throw UsageError("not enough positive data to plot");

    double x0 = px[0], x1 = px[0], y0 = py[0], y1 = py[0];
    for (std::size_t i = 1; i < px.size(); ++i) {
        x0 = std::min(x0, px[i]);
        x1 = std::max(x1, px[i]);
        y0 = std::min(y0, py[i]);
        y1 = std::max(y1, py[i]);
    }
    if (x1 - x0 < 1e-300) x1 = x0 + 1.0;
    if (y1 - y0 < 1e-300) y1 = y0 + 1.0;
    const double xpad = 0.04 * (x1 - x0), ypad = 0.06 * (y1 - y0);
    x0 -= xpad, x1 += xpad, y0 -= ypad, y1 += ypad;

    const double W = 640, H = 420, L = 72, R = 16, T = 40, B = 48;
    auto X = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto Y = [&](double y) {
        return H - B - (y - y0) / (y1 - y0) * (H - T - B);
    };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << W
      << " " << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect width=\"" << W << "\" height=\"" << H
      << "\" fill=\"white\"/>\n";
    s << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" "
         "font-size=\"14\">"
      << in.title << (loglog ? " (log-log)" : " (semi-log)") << "</text>\n";

    // axes box and ticks
    s << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R
      << "\" height=\"" << H - T - B
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
    const int nticks = 5;
    for (int i = 0; i <= nticks; ++i) {
        const double fx = x0 + (x1 - x0) * i / nticks;
        const double fy = y0 + (y1 - y0) * i / nticks;
        s << "<line x1=\"" << f2(X(fx)) << "\" y1=\"" << H - B << "\" x2=\""
          << f2(X(fx)) << "\" y2=\"" << H - B + 5
          << "\" stroke=\"#444\"/>\n";
        s << "<text x=\"" << f2(X(fx)) << "\" y=\"" << H - B + 18
          << "\" text-anchor=\"middle\">"
          << g4(loglog ? std::exp(fx) : fx) << "</text>\n";
        s << "<line x1=\"" << L - 5 << "\" y1=\"" << f2(Y(fy)) << "\" x2=\""
          << L << "\" y2=\"" << f2(Y(fy)) << "\" stroke=\"#444\"/>\n";
        s << "<text x=\"" << L - 8 << "\" y=\"" << f2(Y(fy) + 4)
          << "\" text-anchor=\"end\">" << g4(std::exp(fy)) << "</text>\n";
    }
    s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10
      << "\" text-anchor=\"middle\">t</text>\n";
    s << "<text x=\"16\" y=\"" << (T + H - B) / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (T + H - B) / 2 << ")\">diameter</text>\n";

    // data polyline
    s << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" "
         "points=\"";
    for (std::size_t i = 0; i < px.size(); ++i)
        s << (i ? " " : "") << f2(X(px[i])) << "," << f2(Y(py[i]));
    s << "\"/>\n";

    // fitted line over its window, dashed
    if (in.has_fit) {
        const double a = loglog ? std::log(std::max(in.fit.t_start, 1e-300))
                                : in.fit.t_start;
        const double b =
            loglog ? std::log(std::max(in.fit.t_end, 1e-300)) : in.fit.t_end;
        const double ya = in.fit.intercept + in.fit.slope * a;
        const double yb = in.fit.intercept + in.fit.slope * b;
        s << "<line x1=\"" << f2(X(a)) << "\" y1=\"" << f2(Y(ya))
          << "\" x2=\"" << f2(X(b)) << "\" y2=\"" << f2(Y(yb))
          << "\" stroke=\"#d62728\" stroke-width=\"1.5\" "
             "stroke-dasharray=\"6 4\"/>\n";
        s << "<text x=\"" << W - R - 6 << "\" y=\"" << T + 16
          << "\" text-anchor=\"end\" fill=\"#d62728\">slope "
          << g4(in.fit.slope) << ", r2 " << g4(in.fit.r_squared)
          << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace geoflow
