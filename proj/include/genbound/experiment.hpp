#pragma once

// Experiment configuration (JSON) and orchestration for the CLI.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "genbound/bounds/rate.hpp"
#include "genbound/data.hpp"
#include "genbound/error.hpp"
#include "genbound/mlp.hpp"
#include "genbound/objective.hpp"
#include "genbound/trace.hpp"
#include "genbound/train.hpp"

namespace genbound {

using Json = nlohmann::json;

struct DatasetSpec {
    std::string kind = "mnist";  // mnist | synthetic
    std::string mnist_dir;       // empty: $GENBOUND_MNIST_DIR, then data/mnist
    std::size_t train_size = 10000;
    std::size_t test_size = 2000;
    std::size_t probe_size = 512;
    std::size_t dims = 20;  // synthetic only
    std::size_t classes = 4;  // synthetic only
};

struct NoiseSpec {
    std::vector<double> sigma{0.005};  // one value: constant; several: per step
    std::optional<double> scaling_c;   // sigma = c * n^-gamma
    double scaling_gamma = 1.0 / 3.0;
};

struct TrainSpec {
    std::vector<double> lr{0.01};
    std::size_t batch_size = 64;
    std::size_t epochs = 30;
    std::size_t max_steps = 0;  // 0: epochs * steps per epoch
    std::optional<double> clip;
    std::string sampling = "epoch_shuffle";
    std::size_t early_stop_patience = 3;
    double early_stop_tolerance = 1e-4;
    std::string loss = "cross_entropy";  // cross_entropy | truncated_cross_entropy | pure_quadratic
    double loss_c0 = 1.0;
};

struct BoundSpec {
    bool subgaussian = true;
    bool bounded = true;
    bool clipped = true;
    std::size_t flatness_samples = 32;
    double R = 1.0;
    double c0 = 1.0;
    double c1 = 1.0;
    double alpha = 0.5;
};

struct RateSpec {
    std::vector<double> n_values{1e2, 1e3, 1e4, 1e5};
    double gamma = 1.0 / 3.0;
    RateModel model{};
};

struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    DatasetSpec dataset;
    std::vector<std::size_t> hidden{512};
    TrainSpec train;
    NoiseSpec noise;
    BoundSpec bounds;
    RateSpec rate;

    void validate() const;
};

namespace detail {

inline void reject_unknown(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items())
        if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <class T>
void read(const Json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("bad value for '" + std::string(key) + "' in " + where);
    }
}

template <class T>
void read(const Json& j, const char* key, std::optional<T>& out, const std::string& where) {
    if (!j.contains(key)) return;
    if (j.at(key).is_null()) {
        out.reset();
        return;
    }
    T v{};
    read(j, key, v, where);
    out = v;
}

/// Accepts a number or an array of numbers.
inline void read_list(const Json& j, const char* key, std::vector<double>& out, const std::string& where) {
    if (!j.contains(key)) return;
    const Json& v = j.at(key);
    if (v.is_number()) {
        out = {v.get<double>()};
        return;
    }
    read(j, key, out, where);
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(const Json& j) {
    using detail::read;
    ExperimentConfig c;
    detail::reject_unknown(j, "config", {"seed", "output_dir", "dataset", "model", "train", "noise", "bounds", "rate"});
    read(j, "seed", c.seed, "config");
    read(j, "output_dir", c.output_dir, "config");
    if (j.contains("dataset")) {
        const Json& d = j.at("dataset");
        detail::reject_unknown(d, "dataset",
                               {"kind", "mnist_dir", "train_size", "test_size", "probe_size", "dims", "classes"});
        read(d, "kind", c.dataset.kind, "dataset");
        read(d, "mnist_dir", c.dataset.mnist_dir, "dataset");
        read(d, "train_size", c.dataset.train_size, "dataset");
        read(d, "test_size", c.dataset.test_size, "dataset");
        read(d, "probe_size", c.dataset.probe_size, "dataset");
        read(d, "dims", c.dataset.dims, "dataset");
        read(d, "classes", c.dataset.classes, "dataset");
    }
    if (j.contains("model")) {
        const Json& m = j.at("model");
        detail::reject_unknown(m, "model", {"hidden"});
        read(m, "hidden", c.hidden, "model");
    }
    if (j.contains("train")) {
        const Json& t = j.at("train");
        detail::reject_unknown(t, "train",
                               {"lr", "batch_size", "epochs", "max_steps", "clip", "sampling", "early_stop_patience",
                                "early_stop_tolerance", "loss", "loss_c0"});
        detail::read_list(t, "lr", c.train.lr, "train");
        read(t, "batch_size", c.train.batch_size, "train");
        read(t, "epochs", c.train.epochs, "train");
        read(t, "max_steps", c.train.max_steps, "train");
        read(t, "clip", c.train.clip, "train");
        read(t, "sampling", c.train.sampling, "train");
        read(t, "early_stop_patience", c.train.early_stop_patience, "train");
        read(t, "early_stop_tolerance", c.train.early_stop_tolerance, "train");
        read(t, "loss", c.train.loss, "train");
        read(t, "loss_c0", c.train.loss_c0, "train");
    }
    if (j.contains("noise")) {
        const Json& nz = j.at("noise");
        detail::reject_unknown(nz, "noise", {"sigma", "scaling_c", "scaling_gamma"});
        detail::read_list(nz, "sigma", c.noise.sigma, "noise");
        read(nz, "scaling_c", c.noise.scaling_c, "noise");
        read(nz, "scaling_gamma", c.noise.scaling_gamma, "noise");
    }
    if (j.contains("bounds")) {
        const Json& b = j.at("bounds");
        detail::reject_unknown(b, "bounds",
                               {"subgaussian", "bounded", "clipped", "flatness_samples", "R", "c0", "c1", "alpha"});
        read(b, "subgaussian", c.bounds.subgaussian, "bounds");
        read(b, "bounded", c.bounds.bounded, "bounds");
        read(b, "clipped", c.bounds.clipped, "bounds");
        read(b, "flatness_samples", c.bounds.flatness_samples, "bounds");
        read(b, "R", c.bounds.R, "bounds");
        read(b, "c0", c.bounds.c0, "bounds");
        read(b, "c1", c.bounds.c1, "bounds");
        read(b, "alpha", c.bounds.alpha, "bounds");
    }
    if (j.contains("rate")) {
        const Json& r = j.at("rate");
        detail::reject_unknown(r, "rate",
                               {"n_values", "gamma", "flatness_coeff", "sigma_coeff", "lr", "steps", "alpha", "c0", "c1"});
        read(r, "n_values", c.rate.n_values, "rate");
        read(r, "gamma", c.rate.gamma, "rate");
        read(r, "flatness_coeff", c.rate.model.flatness_coeff, "rate");
        read(r, "sigma_coeff", c.rate.model.sigma_coeff, "rate");
        read(r, "lr", c.rate.model.lr, "rate");
        read(r, "steps", c.rate.model.steps, "rate");
        read(r, "alpha", c.rate.model.alpha, "rate");
        read(r, "c0", c.rate.model.c0, "rate");
        read(r, "c1", c.rate.model.c1, "rate");
    }
    c.validate();
    return c;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_experiment_config(j);
}

inline void ExperimentConfig::validate() const {
    if (dataset.kind != "mnist" && dataset.kind != "synthetic")
        throw ConfigError("dataset.kind must be 'mnist' or 'synthetic'");
    if (dataset.train_size == 0) throw ConfigError("dataset.train_size must be positive");
    if (dataset.probe_size < 2) throw ConfigError("dataset.probe_size must be at least 2");
    if (dataset.kind == "synthetic" && (dataset.dims == 0 || dataset.classes == 0))
        throw ConfigError("synthetic dataset needs dims and classes");
    if (hidden.empty()) throw ConfigError("model.hidden must list at least one width");
    for (std::size_t w : hidden)
        if (w == 0) throw ConfigError("model widths must be positive");
    if (train.lr.empty()) throw ConfigError("train.lr is empty");
    for (double r : train.lr)
        if (!(r > 0.0)) throw ConfigError("train.lr entries must be positive");
    if (train.batch_size == 0 || train.batch_size > dataset.train_size)
        throw ConfigError("train.batch_size must lie in [1, train_size]");
    if (train.epochs == 0 && train.max_steps == 0) throw ConfigError("train.epochs or train.max_steps must be positive");
    if (train.clip && !(*train.clip > 0.0)) throw ConfigError("train.clip must be positive");
    if (train.sampling != "epoch_shuffle" && train.sampling != "with_replacement")
        throw ConfigError("train.sampling must be 'epoch_shuffle' or 'with_replacement'");
    if (train.loss != "cross_entropy" && train.loss != "truncated_cross_entropy" && train.loss != "pure_quadratic")
        throw ConfigError("train.loss must be cross_entropy, truncated_cross_entropy or pure_quadratic");
    if (!(train.loss_c0 > 0.0)) throw ConfigError("train.loss_c0 must be positive");
    if (!(train.early_stop_tolerance >= 0.0)) throw ConfigError("train.early_stop_tolerance must be non-negative");
    if (noise.sigma.empty()) throw ConfigError("noise.sigma is empty");
    for (double s : noise.sigma)
        if (!(s > 0.0)) throw ConfigError("noise.sigma entries must be positive");
    if (noise.scaling_c && !(*noise.scaling_c > 0.0)) throw ConfigError("noise.scaling_c must be positive");
    if (bounds.flatness_samples < 2) throw ConfigError("bounds.flatness_samples must be at least 2");
    if (!(bounds.R > 0.0) || !(bounds.c0 > 0.0) || !(bounds.c1 > 0.0))
        throw ConfigError("bounds.R, c0, c1 must be positive");
    if (!(bounds.alpha > 0.0 && bounds.alpha < 1.0)) throw ConfigError("bounds.alpha must lie in (0, 1)");
}

inline Json to_json(const ExperimentConfig& c) {
    Json j;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    j["dataset"] = {{"kind", c.dataset.kind},         {"mnist_dir", c.dataset.mnist_dir},
                    {"train_size", c.dataset.train_size}, {"test_size", c.dataset.test_size},
                    {"probe_size", c.dataset.probe_size}, {"dims", c.dataset.dims},
                    {"classes", c.dataset.classes}};
    j["model"] = {{"hidden", c.hidden}};
    j["train"] = {{"lr", c.train.lr},
                  {"batch_size", c.train.batch_size},
                  {"epochs", c.train.epochs},
                  {"max_steps", c.train.max_steps},
                  {"clip", c.train.clip ? Json(*c.train.clip) : Json(nullptr)},
                  {"sampling", c.train.sampling},
                  {"early_stop_patience", c.train.early_stop_patience},
                  {"early_stop_tolerance", c.train.early_stop_tolerance},
                  {"loss", c.train.loss},
                  {"loss_c0", c.train.loss_c0}};
    j["noise"] = {{"sigma", c.noise.sigma},
                  {"scaling_c", c.noise.scaling_c ? Json(*c.noise.scaling_c) : Json(nullptr)},
                  {"scaling_gamma", c.noise.scaling_gamma}};
    j["bounds"] = {{"subgaussian", c.bounds.subgaussian}, {"bounded", c.bounds.bounded},
                   {"clipped", c.bounds.clipped},         {"flatness_samples", c.bounds.flatness_samples},
                   {"R", c.bounds.R},                     {"c0", c.bounds.c0},
                   {"c1", c.bounds.c1},                   {"alpha", c.bounds.alpha}};
    j["rate"] = {{"n_values", c.rate.n_values},
                 {"gamma", c.rate.gamma},
                 {"flatness_coeff", c.rate.model.flatness_coeff},
                 {"sigma_coeff", c.rate.model.sigma_coeff},
                 {"lr", c.rate.model.lr},
                 {"steps", c.rate.model.steps},
                 {"alpha", c.rate.model.alpha},
                 {"c0", c.rate.model.c0},
                 {"c1", c.rate.model.c1}};
    return j;
}

// ---------------------------------------------------------------- data

struct ExperimentData {
    Dataset train;
    Dataset test;
    Dataset probe;
};

inline std::filesystem::path resolve_mnist_dir(const DatasetSpec& spec) {
    if (!spec.mnist_dir.empty()) return spec.mnist_dir;
    if (const char* env = std::getenv("GENBOUND_MNIST_DIR"); env && *env) return env;
    return "data/mnist";
}

/// Train and probe are disjoint slices of one seeded permutation of the
/// training pool; the test set comes from the held-out pool.
inline ExperimentData load_experiment_data(const DatasetSpec& spec, std::uint64_t seed) {
    ExperimentData out;
    if (spec.kind == "mnist") {
        const auto dir = resolve_mnist_dir(spec);
        const Dataset pool = load_mnist_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
        const Dataset held = load_mnist_idx(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte");
        if (spec.train_size + spec.probe_size > pool.size())
            throw ConfigError("train_size + probe_size exceeds the " + std::to_string(pool.size()) +
                              " available training images");
        if (spec.test_size > held.size()) throw ConfigError("test_size exceeds the available test images");
        out.train = pool.shuffled_slice(0, spec.train_size, seed);
        out.probe = pool.shuffled_slice(spec.train_size, spec.probe_size, seed);
        out.test = held.shuffled_subset(spec.test_size, seed);
    } else {
        const std::size_t total = spec.train_size + spec.probe_size + spec.test_size;
        const Dataset pool = synth_gaussian_mixture(total, spec.dims, spec.classes, seed);
        out.train = pool.shuffled_slice(0, spec.train_size, seed);
        out.probe = pool.shuffled_slice(spec.train_size, spec.probe_size, seed);
        out.test = pool.shuffled_slice(spec.train_size + spec.probe_size, spec.test_size, seed);
    }
    return out;
}

// ---------------------------------------------------------------- training

inline LossKind make_loss(const TrainSpec& t) {
    if (t.loss == "truncated_cross_entropy") return LossKind::truncated_cross_entropy(t.loss_c0);
    if (t.loss == "pure_quadratic") return LossKind::pure_quadratic();
    return LossKind::cross_entropy();
}

inline NoiseSchedule make_noise(const NoiseSpec& s, std::size_t n) {
    if (s.scaling_c) return NoiseSchedule::scaling_law(*s.scaling_c, s.scaling_gamma, n);
    if (s.sigma.size() == 1) return NoiseSchedule::isotropic(s.sigma.front());
    return NoiseSchedule::isotropic_steps(s.sigma);
}

inline std::vector<std::size_t> layer_dims(const ExperimentConfig& c, const Dataset& train) {
    std::vector<std::size_t> dims{train.dims()};
    dims.insert(dims.end(), c.hidden.begin(), c.hidden.end());
    dims.push_back(train.num_classes);
    return dims;
}

inline TrainConfig make_train_config(const ExperimentConfig& c, std::size_t n) {
    TrainConfig t;
    t.lr = c.train.lr.size() == 1 ? LearningRateSchedule::constant(c.train.lr.front())
                                  : LearningRateSchedule::per_step(c.train.lr);
    t.batch_size = c.train.batch_size;
    const std::size_t per_epoch = (n + t.batch_size - 1) / t.batch_size;
    t.max_steps = c.train.max_steps > 0 ? c.train.max_steps : c.train.epochs * per_epoch;
    t.clip = c.train.clip;
    t.sampling = c.train.sampling == "with_replacement" ? SamplingMode::with_replacement : SamplingMode::epoch_shuffle;
    t.seed = c.seed;
    t.early_stop_patience = c.train.early_stop_patience;
    t.early_stop_tolerance = c.train.early_stop_tolerance;
    t.R = c.bounds.R;
    t.c0 = c.bounds.c0;
    t.c1 = c.bounds.c1;
    t.alpha = c.bounds.alpha;
    return t;
}

struct TrainExperimentResult {
    std::vector<BoundRecord> records;
    TrainResult training;
    std::size_t param_count = 0;
    std::size_t train_size = 0;
    bool subgaussian = true;
};

inline TrainExperimentResult run_train_experiment(const ExperimentConfig& c, const ExperimentData& data) {
    c.validate();
    const LossKind kind = make_loss(c.train);
    const auto dims = layer_dims(c, data.train);
    const MlpModel init = MlpModel::he_uniform(dims, c.seed);
    const MlpLayout& layout = init.layout();
    const std::size_t n = data.train.size();
    const TrainConfig tc = make_train_config(c, n);
    const NoiseSchedule schedule = make_noise(c.noise, n);
    if (!schedule.is_constant() && schedule.defined_steps() < tc.max_steps)
        throw ConfigError("noise.sigma lists fewer steps than the run takes");

    const MlpProblem problem(layout, data.train, data.test.size() > 0 ? &data.test : nullptr, kind);
    const MlpObjective probe(layout, data.probe.features.view(), data.probe.labels, kind);
    BoundOptions opts;
    opts.subgaussian = c.bounds.subgaussian;
    opts.bounded = c.bounds.bounded;
    opts.clipped = c.bounds.clipped;
    opts.flatness_samples = c.bounds.flatness_samples;
    opts.seed = c.seed;
    BoundObserver<MlpObjective> observer(probe, schedule, tc, n, opts);
    TrainingObserver* observers[] = {&observer};

    TrainExperimentResult out;
    out.training = run_training(tc, init.params(), problem, observers);
    out.records = observer.records();
    out.param_count = layout.param_count();
    out.train_size = n;
    out.subgaussian = c.bounds.subgaussian;
    return out;
}

inline Json summary_json(const ExperimentConfig& c, const TrainExperimentResult& r) {
    Json j;
    j["config"] = to_json(c);
    j["param_count"] = r.param_count;
    j["train_size"] = r.train_size;
    j["steps"] = r.training.steps.size();
    j["epochs"] = r.records.size();
    j["stop_reason"] = to_string(r.training.stop_reason);
    if (r.training.diagnostic) {
        const auto& d = *r.training.diagnostic;
        j["non_finite"] = {{"step", d.step}, {"epoch", d.epoch}, {"batch_loss", format_value(d.batch_loss)},
                           {"grad_norm", format_value(d.grad_norm)}};
    }
    if (!r.records.empty()) {
        const BoundRecord& f = r.records.back();
        auto num = [](std::optional<double> v) { return v ? Json(std::stod(format_value(v))) : Json(nullptr); };
        j["final"] = {{"epoch", f.epoch},
                      {"step", f.step},
                      {"train_loss", num(f.train_loss)},
                      {"test_loss", num(f.test_loss)},
                      {"gap", num(f.gap)},
                      {"train_accuracy", num(f.train_accuracy)},
                      {"test_accuracy", num(f.test_accuracy)},
                      {"flatness_t2pm", num(f.flatness_t2pm)},
                      {"flatness_t2pm_std_error", num(f.flatness_t2pm_se)},
                      {"flatness_t1pm", num(f.flatness_t1pm)},
                      {"flatness_t1pm_std_error", num(f.flatness_t1pm_se)},
                      {"grad_var_trace", r.subgaussian ? num(f.grad_var_trace) : Json(nullptr)},
                      {"trajectory_subgaussian", r.subgaussian ? num(f.traj_subgaussian) : Json(nullptr)},
                      {"bound_subg_t2pm", r.subgaussian ? num(f.bound_subg_t2pm) : Json(nullptr)},
                      {"bound_subg_t1pm", r.subgaussian ? num(f.bound_subg_t1pm) : Json(nullptr)},
                      {"bound_bounded", num(f.bound_bounded)},
                      {"bound_clipped", num(f.bound_clipped)}};
    }
    return j;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed: " + path.string());
}

/// Runs one training experiment and writes trace.csv and summary.json into dir.
inline TrainExperimentResult cmd_train(const ExperimentConfig& c, const std::filesystem::path& dir) {
    const ExperimentData data = load_experiment_data(c.dataset, c.seed);
    TrainExperimentResult r = run_train_experiment(c, data);
    std::filesystem::create_directories(dir);
    std::ostringstream csv;
    write_trace_csv(csv, r.records, r.subgaussian);
    write_text(dir / "trace.csv", csv.str());
    write_text(dir / "summary.json", summary_json(c, r).dump(2) + "\n");
    return r;
}

// ---------------------------------------------------------------- sweeps

enum class SweepAxis { n, width, gamma };

inline SweepAxis parse_axis(const std::string& s) {
    if (s == "n") return SweepAxis::n;
    if (s == "width") return SweepAxis::width;
    if (s == "gamma") return SweepAxis::gamma;
    throw ConfigError("sweep axis must be n, width or gamma");
}

struct SweepResult {
    std::string csv;
    Json summary;
};

/// Width sweep: one training run per width, each with its own trace.
inline SweepResult sweep_width(const ExperimentConfig& base, std::span<const double> widths,
                               const std::filesystem::path& dir) {
    const ExperimentData data = load_experiment_data(base.dataset, base.seed);
    std::ostringstream csv;
    csv << "width,epochs,step,train_loss,test_loss,gap,test_accuracy,flatness_t2pm,flatness_t1pm,traj_subgaussian,"
           "bound_subg_t2pm,bound_subg_t1pm,bound_bounded,bound_clipped\n";
    Json runs = Json::array();
    for (double w : widths) {
        if (!(w >= 1.0) || w != std::floor(w)) throw ConfigError("widths must be positive integers");
        ExperimentConfig c = base;
        c.hidden.assign(c.hidden.size(), static_cast<std::size_t>(w));
        const TrainExperimentResult r = run_train_experiment(c, data);
        const auto sub = dir / ("width_" + std::to_string(static_cast<std::size_t>(w)));
        std::filesystem::create_directories(sub);
        std::ostringstream trace;
        write_trace_csv(trace, r.records, r.subgaussian);
        write_text(sub / "trace.csv", trace.str());
        write_text(sub / "summary.json", summary_json(c, r).dump(2) + "\n");
        runs.push_back(summary_json(c, r));
        if (r.records.empty()) {
            csv << static_cast<std::size_t>(w) << ",0,0,,,,,,,,,,,\n";
            continue;
        }
        const BoundRecord& f = r.records.back();
        auto sg = [&](double v) { return r.subgaussian ? std::optional<double>(v) : std::nullopt; };
        csv << static_cast<std::size_t>(w) << ',' << r.records.size() << ',' << f.step << ','
            << format_value(f.train_loss) << ',' << format_value(f.test_loss) << ',' << format_value(f.gap) << ','
            << format_value(f.test_accuracy) << ',' << format_value(f.flatness_t2pm) << ','
            << format_value(f.flatness_t1pm) << ',' << format_value(sg(f.traj_subgaussian)) << ','
            << format_value(sg(f.bound_subg_t2pm)) << ',' << format_value(sg(f.bound_subg_t1pm)) << ','
            << format_value(f.bound_bounded) << ',' << format_value(f.bound_clipped) << '\n';
    }
    return {csv.str(), Json{{"axis", "width"}, {"runs", runs}}};
}

/// Sample-size sweep of the analytic bounded-loss bound model.
inline SweepResult sweep_n(const ExperimentConfig& base, std::span<const double> n_values) {
    const RateSweepResult r = rate_sweep(n_values, base.rate.gamma, base.rate.model);
    std::ostringstream csv;
    csv << "n,sigma,flatness,trajectory,bound\n";
    for (std::size_t i = 0; i < r.n_values.size(); ++i) {
        const double sigma = base.rate.model.sigma_coeff * std::pow(r.n_values[i], -base.rate.gamma);
        csv << format_value(r.n_values[i]) << ',' << format_value(sigma) << ',' << format_value(r.flatness[i]) << ','
            << format_value(r.trajectory[i]) << ',' << format_value(r.bound[i]) << '\n';
    }
    Json s{{"axis", "n"},
           {"gamma", base.rate.gamma},
           {"slope", std::stod(format_value(r.slope))},
           {"tail_slope", std::stod(format_value(r.tail_slope))}};
    return {csv.str(), s};
}

/// Noise-exponent sweep: fitted slopes of the analytic model per gamma.
inline SweepResult sweep_gamma(const ExperimentConfig& base, std::span<const double> gammas) {
    std::ostringstream csv;
    csv << "gamma,slope,tail_slope,predicted_rate\n";
    Json rows = Json::array();
    for (double g : gammas) {
        const RateSweepResult r = rate_sweep(base.rate.n_values, g, base.rate.model);
        const double predicted = -std::min(2.0 * g, 1.0 - g);
        csv << format_value(g) << ',' << format_value(r.slope) << ',' << format_value(r.tail_slope) << ','
            << format_value(predicted) << '\n';
        rows.push_back({{"gamma", g}, {"slope", std::stod(format_value(r.slope))}});
    }
    return {csv.str(), Json{{"axis", "gamma"}, {"rows", rows}}};
}

inline SweepResult cmd_sweep(const ExperimentConfig& c, SweepAxis axis, std::span<const double> values,
                             const std::filesystem::path& dir) {
    if (values.size() < 2) throw ConfigError("a sweep needs at least 2 axis values");
    std::filesystem::create_directories(dir);
    SweepResult r;
    switch (axis) {
        case SweepAxis::n: r = sweep_n(c, values); break;
        case SweepAxis::width: r = sweep_width(c, values, dir); break;
        case SweepAxis::gamma: r = sweep_gamma(c, values); break;
    }
    write_text(dir / "sweep.csv", r.csv);
    write_text(dir / "sweep_summary.json", r.summary.dump(2) + "\n");
    return r;
}

}  // namespace genbound
