#include <algorithm>
#include <cstdint>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "geoflow/config.hpp"
#include "geoflow/error.hpp"
#include "geoflow/runner.hpp"

int main(int argc, char** argv) {
    using namespace geoflow;

    CLI::App app{"particle aggregation dynamics on curved spaces"};
    app.require_subcommand(1);

    RunnerOptions opt;
    opt.workers = static_cast<int>(
        std::max(1u, std::thread::hardware_concurrency()));
    std::uint64_t seed_flag = 0;

    app.add_option("--workers", opt.workers, "worker threads")
        ->capture_default_str();
    app.add_option("--out", opt.out_dir, "output directory")
        ->capture_default_str();
    app.add_flag("--svg", opt.want_svg, "also write SVG plots");
    auto* seed_opt =
        app.add_option("--seed", seed_flag, "override the sampling seed");

    std::string config_path;
    auto* sim = app.add_subcommand("simulate",
                                   "run one experiment from a JSON config");
    sim->add_option("--config", config_path, "config file")->required();

    auto* fig = app.add_subcommand(
        "reproduce-figure1", "rerun the rotation-group decay-rate study");

    long long samples = 10000;
    auto* geo = app.add_subcommand("verify-geometry",
                                   "randomized geometric property suites");
    geo->add_option("--samples", samples, "samples per suite")
        ->capture_default_str();

    auto* weak = app.add_subcommand(
        "weak-demo", "plateau demonstration for a dead-zone potential");
    weak->add_option("--config", config_path, "config file")->required();

    std::string model_name = "exponential";
    double window = 0.25;
    std::string fit_csv;
    auto* fitc = app.add_subcommand("fit-rate",
                                    "fit a decay rate to an existing CSV");
    fitc->add_option("csv", fit_csv, "CSV with t and diameter columns")
        ->required();
    fitc->add_option("--model", model_name, "exponential|power")
        ->capture_default_str();
    fitc->add_option("--window", window, "trailing fraction of samples used")
        ->capture_default_str();

    // the shared flags (--out, --seed, ...) may appear after the subcommand
    for (CLI::App* s : {sim, fig, geo, weak, fitc}) s->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    opt.has_seed = seed_opt->count() > 0;
    opt.seed = seed_flag;

    try {
        if (sim->parsed())
            return cmd_simulate(load_experiment_config(config_path), opt);
        if (fig->parsed()) return cmd_reproduce_figure1(opt);
        if (geo->parsed()) return cmd_verify_geometry(samples, opt);
        if (weak->parsed())
            return cmd_weak_demo(load_experiment_config(config_path), opt);
        if (fitc->parsed()) {
            FitModel model;
            if (model_name == "exponential") {
                model = FitModel::exponential;
            } else if (model_name == "power") {
                model = FitModel::power;
            } else {
                throw UsageError("unknown fit model \"" + model_name +
                                 "\" (want exponential or power)");
            }
            return cmd_fit_rate(fit_csv, model, window, opt);
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
