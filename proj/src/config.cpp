#include "geoflow/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "geoflow/error.hpp"

namespace geoflow {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (const auto& item : obj.items())
        if (!allowed.count(item.key()))
            throw UsageError("unknown key \"" + item.key() + "\" in " +
                             where);
}

double need_number(const json& obj, const char* key,
                   const std::string& where) {
    if (!obj.contains(key))
        throw UsageError("missing key \"" + std::string(key) + "\" in " +
                         where);
    const json& v = obj.at(key);
    if (!v.is_number())
        throw UsageError("key \"" + std::string(key) + "\" in " + where +
                         " must be a number");
    return v.get<double>();
}

std::string need_string(const json& obj, const char* key,
                        const std::string& where) {
    if (!obj.contains(key))
        throw UsageError("missing key \"" + std::string(key) + "\" in " +
                         where);
    const json& v = obj.at(key);
    if (!v.is_string())
        throw UsageError("key \"" + std::string(key) + "\" in " + where +
                         " must be a string");
    return v.get<std::string>();
}

std::vector<double> number_array(const json& v, const std::string& what) {
    if (!v.is_array()) throw UsageError(what + " must be an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& e : v) {
        if (!e.is_number())
            throw UsageError(what + " must contain only numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

PotentialSpec parse_potential(const json& j) {
    if (!j.is_object()) throw UsageError("\"potential\" must be an object");
    const std::string kind = need_string(j, "kind", "potential");
    PotentialSpec p;
    if (kind == "power_law") {
        reject_unknown(j, {"kind", "beta"}, "potential (power_law)");
        p.kind = PotentialKind::power_law;
        p.beta = need_number(j, "beta", "potential");
    } else if (kind == "truncated_power_law") {
        reject_unknown(j, {"kind", "beta", "zeta"},
                       "potential (truncated_power_law)");
        p.kind = PotentialKind::truncated_power_law;
        p.beta = need_number(j, "beta", "potential");
        p.zeta = need_number(j, "zeta", "potential");
    } else if (kind == "quadratic_plus_quartic") {
        reject_unknown(j, {"kind", "weights"},
                       "potential (quadratic_plus_quartic)");
        if (!j.contains("weights"))
            throw UsageError("missing key \"weights\" in potential");
        const auto w = number_array(j.at("weights"), "potential weights");
        if (w.size() != 2)
            throw UsageError("potential weights must have exactly 2 entries");
        p.kind = PotentialKind::quadratic_plus_quartic;
        p.weights[0] = w[0];
        p.weights[1] = w[1];
    } else if (kind == "custom_table") {
        reject_unknown(j, {"kind", "table_s", "table_gprime"},
                       "potential (custom_table)");
        if (!j.contains("table_s") || !j.contains("table_gprime"))
            throw UsageError(
                "custom_table potential needs table_s and table_gprime");
        p.kind = PotentialKind::custom_table;
        p.table_s = number_array(j.at("table_s"), "table_s");
        p.table_gprime = number_array(j.at("table_gprime"), "table_gprime");
    } else {
        throw UsageError("unknown potential kind \"" + kind + "\"");
    }
    validate(p);
    return p;
}

SamplingScheme parse_sampling(const json& j, std::uint64_t& seed) {
    if (!j.is_object()) throw UsageError("\"sampling\" must be an object");
    reject_unknown(j, {"kind", "radius", "seed"}, "sampling");
    SamplingScheme s;
    const std::string kind = need_string(j, "kind", "sampling");
    if (kind == "so3_angle_axis")
        s.kind = SamplingKind::so3_angle_axis;
    else if (kind == "tangent_uniform")
        s.kind = SamplingKind::tangent_uniform;
    else
        throw UsageError("unknown sampling kind \"" + kind + "\"");
    s.radius = need_number(j, "radius", "sampling");
    if (!(s.radius > 0.0))
        throw UsageError("sampling radius must be > 0");
    if (j.contains("seed")) {
        const json& v = j.at("seed");
        if (!v.is_number_unsigned())
            throw UsageError("sampling seed must be a nonnegative integer");
        seed = v.get<std::uint64_t>();
    }
    return s;
}

OutputPaths parse_outputs(const json& j) {
    if (!j.is_object()) throw UsageError("\"outputs\" must be an object");
    reject_unknown(j, {"csv", "jsonl", "report", "svg"}, "outputs");
    OutputPaths o;
    if (j.contains("csv")) o.csv = need_string(j, "csv", "outputs");
    if (j.contains("jsonl")) o.jsonl = need_string(j, "jsonl", "outputs");
    if (j.contains("report")) o.report = need_string(j, "report", "outputs");
    if (j.contains("svg")) o.svg = need_string(j, "svg", "outputs");
    return o;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw UsageError(std::string("config is not valid JSON: ") +
                         e.what());
    }
    if (!j.is_object()) throw UsageError("config root must be an object");
    reject_unknown(j,
                   {"manifold", "potential", "n", "masses", "sampling",
                    "center", "ball_radius", "dt", "t_end",
                    "snapshot_stride", "outputs"},
                   "config");

    ExperimentConfig c;
    c.manifold = need_string(j, "manifold", "config");
    make_manifold(c.manifold);  // validates the backend name early
    if (!j.contains("potential"))
        throw UsageError("missing key \"potential\" in config");
    c.potential = parse_potential(j.at("potential"));

    const double n_raw = need_number(j, "n", "config");
    c.n = static_cast<int>(n_raw);
    if (c.n < 1 || c.n != n_raw)
        throw UsageError("n must be a positive integer");

    if (j.contains("masses")) {
        const json& mj = j.at("masses");
        if (mj.is_string()) {
            if (mj.get<std::string>() != "uniform")
                throw UsageError(
                    "masses must be \"uniform\" or an array of numbers");
        } else {
            c.masses = number_array(mj, "masses");
            if (static_cast<int>(c.masses.size()) != c.n)
                throw UsageError("masses array length must equal n");
        }
    }

    if (!j.contains("sampling"))
        throw UsageError("missing key \"sampling\" in config");
    c.sampling = parse_sampling(j.at("sampling"), c.seed);

    if (j.contains("center"))
        c.center = number_array(j.at("center"), "center");

    if (j.contains("ball_radius")) {
        c.ball_radius = need_number(j, "ball_radius", "config");
        if (!(c.ball_radius > 0.0))
            throw UsageError("ball_radius must be > 0");
    }

    c.dt = need_number(j, "dt", "config");
    if (!(c.dt > 0.0)) throw UsageError("dt must be > 0");
    c.t_end = need_number(j, "t_end", "config");
    if (!(c.t_end >= 0.0)) throw UsageError("t_end must be >= 0");

    if (j.contains("snapshot_stride")) {
        const double s = need_number(j, "snapshot_stride", "config");
        c.snapshot_stride = static_cast<int>(s);
        if (c.snapshot_stride < 1 || c.snapshot_stride != s)
            throw UsageError("snapshot_stride must be a positive integer");
    }

    if (j.contains("outputs")) c.outputs = parse_outputs(j.at("outputs"));
    return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_experiment_config(ss.str());
}

}  // namespace geoflow
