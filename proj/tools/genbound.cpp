// genbound: train with bound tracing, sweeps, property checks, SVG rendering.
//
// Exit codes: 0 success, 1 config/usage error, 2 runtime failure,
// 3 property-suite failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "genbound/check.hpp"
#include "genbound/experiment.hpp"
#include "genbound/svg.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;
constexpr int kPropertyFailure = 3;

genbound::ExperimentConfig load_config(const std::string& path, std::optional<std::uint64_t> seed,
                                       const std::string& out) {
    genbound::ExperimentConfig c = path.empty() ? genbound::ExperimentConfig{} : genbound::load_experiment_config(path);
    if (seed) c.seed = *seed;
    if (!out.empty()) c.output_dir = out;
    c.validate();
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generalization-bound tracing for SGD-trained MLPs"};
    app.require_subcommand(1);

    std::string config_path, out_dir, axis, columns, x_column = "epoch", title;
    std::optional<std::uint64_t> seed;
    std::vector<double> values;
    bool inject_fault = false;
    std::string csv_path;

    auto* train = app.add_subcommand("train", "train an MLP and write trace.csv + summary.json");
    train->add_option("--config", config_path, "JSON experiment config");
    train->add_option("--seed", seed, "override config seed");
    train->add_option("--out", out_dir, "output directory");

    auto* sweep = app.add_subcommand("sweep", "sweep n, width or gamma and write sweep.csv");
    sweep->add_option("--config", config_path, "JSON experiment config");
    sweep->add_option("--seed", seed, "override config seed");
    sweep->add_option("--out", out_dir, "output directory");
    sweep->add_option("--axis", axis, "n | width | gamma")->required();
    sweep->add_option("--values", values, "axis values")->required()->delimiter(',');

    auto* check = app.add_subcommand("check", "run the property suite");
    check->add_option("--seed", seed, "seed for randomized properties");
    check->add_flag("--inject-fault", inject_fault, "negative control: break the delta integrand");

    auto* render = app.add_subcommand("render", "render trace columns as an SVG line chart");
    render->add_option("csv", csv_path, "input CSV")->required();
    render->add_option("--columns", columns, "comma-separated column names")->required();
    render->add_option("--out", out_dir, "output SVG path")->required();
    render->add_option("--x", x_column, "x-axis column");
    render->add_option("--title", title, "chart title");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*train) {
            const auto c = load_config(config_path, seed, out_dir);
            const auto r = genbound::cmd_train(c, c.output_dir);
            std::printf("wrote %s/trace.csv (%zu epochs, %s)\n", c.output_dir.c_str(), r.records.size(),
                        genbound::to_string(r.training.stop_reason));
            return r.training.stop_reason == genbound::StopReason::non_finite ? kRuntimeError : kOk;
        }
        if (*sweep) {
            const auto c = load_config(config_path, seed, out_dir);
            const auto r = genbound::cmd_sweep(c, genbound::parse_axis(axis), values, c.output_dir);
            std::cout << r.csv;
            if (r.summary.contains("slope")) std::printf("fitted slope %s\n", r.summary["slope"].dump().c_str());
            return kOk;
        }
        if (*check) {
            genbound::CheckOptions opt;
            opt.inject_fault = inject_fault;
            opt.seed = seed.value_or(0);
            const auto results = genbound::run_property_suite(opt);
            std::size_t failed = 0;
            for (const auto& p : results) {
                std::printf("%s  %-42s %s\n", p.passed ? "PASS" : "FAIL", p.name.c_str(), p.detail.c_str());
                failed += p.passed ? 0 : 1;
            }
            std::printf("%zu/%zu properties passed\n", results.size() - failed, results.size());
            return failed == 0 ? kOk : kPropertyFailure;
        }
        if (*render) {
            std::ifstream in(csv_path);
            if (!in) throw genbound::Error("cannot open " + csv_path);
            const auto table = genbound::read_csv(in);
            std::vector<std::string> cols;
            std::stringstream ss(columns);
            for (std::string c; std::getline(ss, c, ',');)
                if (!c.empty()) cols.push_back(c);
            genbound::SvgOptions opt;
            opt.x_column = x_column;
            opt.title = title;
            genbound::write_text(out_dir, genbound::render_svg(table, cols, opt));
            return kOk;
        }
    } catch (const genbound::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kRuntimeError;
    }
    return kConfigError;
}
