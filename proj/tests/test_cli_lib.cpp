#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "genbound/genbound.hpp"

using namespace genbound;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

ExperimentConfig synthetic_config(const fs::path& out) {
    ExperimentConfig c = parse_experiment_config(Json::parse(R"({
        "seed": 3,
        "dataset": {"kind": "synthetic", "train_size": 128, "test_size": 64, "probe_size": 32, "dims": 8, "classes": 3},
        "model": {"hidden": [16]},
        "train": {"epochs": 2, "batch_size": 16, "clip": 5},
        "bounds": {"flatness_samples": 4}
    })"));
    c.output_dir = out.string();
    return c;
}

fs::path temp(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("genbound_cli_" + std::to_string(::getpid())) / name;
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST(Config, DefaultsFollowProtocol) {
    const ExperimentConfig c = parse_experiment_config(Json::object());
    EXPECT_EQ(c.train.lr, std::vector<double>{0.01});
    EXPECT_EQ(c.noise.sigma, std::vector<double>{0.005});
    EXPECT_EQ(c.hidden, std::vector<std::size_t>{512});
    EXPECT_EQ(c.train.batch_size, 64u);
    EXPECT_EQ(c.train.early_stop_patience, 3u);
    EXPECT_EQ(c.dataset.train_size, 10000u);
    EXPECT_EQ(c.dataset.test_size, 2000u);
    EXPECT_EQ(c.dataset.probe_size, 512u);
    EXPECT_EQ(c.bounds.flatness_samples, 32u);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    EXPECT_THROW(parse_experiment_config(Json::parse(R"({"sed": 1})")), ConfigError);
    EXPECT_THROW(parse_experiment_config(Json::parse(R"({"train": {"learning_rate": 0.1}})")), ConfigError);
    EXPECT_THROW(parse_experiment_config(Json::parse(R"({"train": {"lr": "fast"}})")), ConfigError);
    EXPECT_THROW(parse_experiment_config(Json::parse(R"({"train": {"clip": -1}})")), ConfigError);
    EXPECT_THROW(parse_experiment_config(Json::parse(R"({"dataset": {"kind": "cifar"}})")), ConfigError);
    EXPECT_NO_THROW(parse_experiment_config(Json::parse(R"({"train": {"clip": null, "lr": [0.1, 0.05]}})")));
}

TEST(Train, SchemaAndDeterminism) {
    const fs::path a = temp("a"), b = temp("b");
    ExperimentConfig c = synthetic_config(a);
    cmd_train(c, a);
    c.output_dir = b.string();
    cmd_train(c, b);
    const std::string ta = slurp(a / "trace.csv");
    EXPECT_EQ(ta, slurp(b / "trace.csv"));
    std::istringstream in(ta);
    const CsvTable t = read_csv(in);
    EXPECT_EQ(t.header.size(), 13u);
    EXPECT_EQ(t.rows.size(), 2u);
    const Json s = Json::parse(slurp(a / "summary.json"));
    EXPECT_EQ(s["epochs"], 2);
    EXPECT_TRUE(s["final"]["test_accuracy"].is_number());
}

TEST(Sweep, RateAndWidthAndPrecondition) {
    const fs::path dir = temp("sweep");
    ExperimentConfig c = synthetic_config(dir);
    const std::vector<double> ns{1e2, 1e3, 1e4, 1e5};
    const SweepResult r = cmd_sweep(c, SweepAxis::n, ns, dir);
    EXPECT_NEAR(r.summary["slope"].get<double>(), -2.0 / 3.0, 0.05);
    const std::vector<double> widths{4, 8};
    const SweepResult w = cmd_sweep(c, SweepAxis::width, widths, dir);
    std::istringstream in(w.csv);
    EXPECT_EQ(read_csv(in).rows.size(), 2u);
    const std::vector<double> one{4};
    EXPECT_THROW(cmd_sweep(c, SweepAxis::width, one, dir), ConfigError);
    const std::vector<double> gammas{0.2, 1.0 / 3.0};
    EXPECT_NO_THROW(cmd_sweep(c, SweepAxis::gamma, gammas, dir));
}

TEST(Render, OnePolylineDeterministicAndMissingColumn) {
    std::istringstream in("epoch,train_loss\n1,0.5\n2,0.25\n");
    const CsvTable t = read_csv(in);
    const std::string svg = render_svg(t, {"train_loss"});
    EXPECT_EQ(svg, render_svg(t, {"train_loss"}));
    std::size_t count = 0, pos = 0;
    while ((pos = svg.find("<polyline", pos)) != std::string::npos) ++count, ++pos;
    EXPECT_EQ(count, 1u);
    const auto start = svg.find("points=\"") + 8;
    const std::string pts = svg.substr(start, svg.find('"', start) - start);
    EXPECT_EQ(std::count(pts.begin(), pts.end(), ','), 2);
    try {
        render_svg(t, {"test_loss"});
        FAIL() << "expected MissingColumnError";
    } catch (const MissingColumnError& e) {
        EXPECT_EQ(e.column(), "test_loss");
        EXPECT_NE(std::string(e.what()).find("test_loss"), std::string::npos);
    }
}
