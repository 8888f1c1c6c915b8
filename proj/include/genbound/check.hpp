#pragma once

// Property suite run by `genbound check`. Helpers are shared with the tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "genbound/bounds/divergence.hpp"
#include "genbound/bounds/flatness.hpp"
#include "genbound/bounds/grad_stats.hpp"
#include "genbound/bounds/hutchinson.hpp"
#include "genbound/bounds/rate.hpp"
#include "genbound/bounds/step_integrals.hpp"
#include "genbound/bounds/trajectory.hpp"
#include "genbound/data.hpp"
#include "genbound/mlp.hpp"
#include "genbound/objective.hpp"
#include "genbound/optim.hpp"

namespace genbound {

struct PropertyResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct CheckOptions {
    bool inject_fault = false;  // flips the exponent sign inside delta
    std::uint64_t seed = 0;
};

// ---------------------------------------------------------------- helpers

struct GradientCheckResult {
    double max_rel_error = 0.0;
    std::size_t coordinates = 0;
};

/// Central differences at h = 1e-5 (1 + |theta_i|) against backprop on
/// `coords` random coordinates of a 2-hidden-layer MLP of the given width.
inline GradientCheckResult gradient_check(std::size_t width, std::size_t coords, std::uint64_t seed) {
    const std::vector<std::size_t> dims{12, width, width, 5};
    const Dataset ds = synth_gaussian_mixture(16, 12, 5, seed);
    MlpModel model = MlpModel::he_uniform(dims, seed);
    RngStream rng(seed, Stream::test_support, width);
    for (std::size_t l = 0; l < model.layout().layer_count(); ++l) {
        const std::size_t off = model.layout().bias_offset(l);
        for (std::size_t i = 0; i < model.layout().fan_out(l); ++i) model.params()[off + i] = 0.1 * rng.normal();
    }
    const MlpObjective f(model.layout(), ds.features.view(), ds.labels);
    ParamVector theta = model.params();
    ParamVector grad(theta.size());
    f.gradient(theta, grad);
    GradientCheckResult out;
    out.coordinates = coords;
    for (std::size_t c = 0; c < coords; ++c) {
        const std::size_t i = rng.uniform_index(theta.size());
        const double h = 1e-5 * (1.0 + std::abs(theta[i]));
        const double saved = theta[i];
        theta[i] = saved + h;
        const double fp = f.value(theta);
        theta[i] = saved - h;
        const double fm = f.value(theta);
        theta[i] = saved;
        const double fd = (fp - fm) / (2.0 * h);
        const double rel = std::abs(fd - grad[i]) / std::max({std::abs(fd), std::abs(grad[i]), 1e-6});
        out.max_rel_error = std::max(out.max_rel_error, rel);
    }
    return out;
}

/// 100 linear-Gaussian cases; the first two are the analytic ones
/// (shifted X with shared Y, and identical pairs).
inline std::vector<ConvolutionCase> convolution_grid(std::uint64_t seed, std::size_t count = 100) {
    std::vector<ConvolutionCase> out;
    out.push_back({{0.0, 1.0, 0.0, 0.0, 1.0}, {1.0, 1.0, 0.0, 0.0, 1.0}});
    out.push_back({{0.3, 2.0, 0.5, -0.2, 0.7}, {0.3, 2.0, 0.5, -0.2, 0.7}});
    RngStream rng(seed, Stream::test_support, 1);
    auto pair = [&] {
        LinearGaussianPair p;
        p.mean_x = 2.0 * rng.normal();
        p.var_x = std::exp(rng.normal());
        p.slope = rng.normal();
        p.offset = rng.normal();
        p.var_y = std::exp(rng.normal());
        return p;
    };
    while (out.size() < count) {
        ConvolutionCase c;
        c.reference = pair();
        c.perturbed = pair();
        out.push_back(c);
    }
    return out;
}

struct PinskerCase {
    double mu1, var1, mu2, var2, tv, kl;
};

inline std::vector<PinskerCase> pinsker_grid(std::uint64_t seed, std::size_t count = 100) {
    std::vector<PinskerCase> out;
    RngStream rng(seed, Stream::test_support, 2);
    for (std::size_t i = 0; i < count; ++i) {
        PinskerCase c{};
        c.mu1 = 2.0 * rng.normal();
        c.var1 = std::exp(rng.normal());
        c.mu2 = 2.0 * rng.normal();
        c.var2 = i % 10 == 0 ? c.var1 : std::exp(rng.normal());
        c.tv = tv_gaussian(c.mu1, c.var1, c.mu2, c.var2);
        c.kl = kl_gaussian(c.mu1, c.var1, c.mu2, c.var2);
        out.push_back(c);
    }
    return out;
}

/// Number of seeded trials whose flatness estimate on 0.5 ||theta||^2
/// (d = 10, sigma = 0.1, m samples) lies within 3 std errors of d sigma^2.
inline std::size_t flatness_oracle_hits(std::size_t trials, std::size_t m, std::uint64_t seed) {
    const QuadraticObjective q{10};
    const std::vector<double> theta(10, 0.5);
    std::size_t hits = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const FlatnessEstimate e = flatness_estimate(q, theta, 0.1, m, RngStream(seed + t, Stream::flatness_t2pm, 0));
        if (std::abs(e.value - 0.1) <= 3.0 * e.std_error) ++hits;
    }
    return hits;
}

/// flatness_t1pm(k) / flatness_t2pm(k) on the quadratic with constant sigma.
inline double flatness_ratio(std::size_t k, std::size_t m, std::uint64_t seed, double sigma = 0.005,
                             std::size_t d = 10) {
    const QuadraticObjective q{d};
    const std::vector<double> theta(d, 0.0);
    const NoiseSchedule s = NoiseSchedule::isotropic(sigma);
    const double t2 = flatness_estimate(q, theta, s, k, m, RngStream(seed, Stream::flatness_t2pm, k)).value;
    const double t1 = flatness_t1pm(q, theta, s, k, m, RngStream(seed, Stream::flatness_t1pm, k)).value;
    return t1 / t2;
}

// ---------------------------------------------------------------- suite

inline std::vector<PropertyResult> run_property_suite(const CheckOptions& opt = {}) {
    std::vector<PropertyResult> out;
    auto add = [&](std::string name, bool ok, std::string detail) {
        out.push_back({std::move(name), ok, std::move(detail)});
    };
    auto guarded = [&](const std::string& name, const std::function<void()>& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            add(name, false, std::string("exception: ") + e.what());
        }
    };
    auto fmt = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.6g", v);
        return std::string(buf);
    };
    const double sign = opt.inject_fault ? -1.0 : 1.0;
    auto delta = [&](double eta, double alpha) {
        detail::check_step_args(eta, alpha);
        return detail::step_integral(eta, alpha, 1.0, QuadratureSpec{}, sign);
    };

    guarded("backprop_matches_finite_differences", [&] {
        double worst = 0.0;
        for (std::size_t w : {4, 16, 64}) worst = std::max(worst, gradient_check(w, 200, opt.seed + w).max_rel_error);
        add("backprop_matches_finite_differences", worst < 1e-4, "max rel error " + fmt(worst));
    });

    guarded("delta_at_most_eta", [&] {
        bool ok = true;
        std::string worst;
        for (double eta : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0})
            for (double alpha : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
                const double d = delta(eta, alpha);
                if (!(d > 0.0 && d <= eta)) {
                    ok = false;
                    worst = "delta(" + fmt(eta) + ", " + fmt(alpha) + ") = " + fmt(d);
                }
            }
        add("delta_at_most_eta", ok, ok ? "63 grid points" : worst);
    });

    guarded("delta_closed_form", [&] {
        const double t = std::sqrt(0.01);
        const double closed = 2.0 * std::exp(-t) * ((t - 1.0) * std::exp(t) + 1.0);
        const double d = delta(0.01, 0.5);
        add("delta_closed_form", std::abs(d - closed) <= 1e-8, "|diff| " + fmt(std::abs(d - closed)));
    });

    guarded("zeta_equals_delta_at_unit_ratio", [&] {
        double worst = 0.0;
        for (double eta : {1e-4, 1e-2, 0.5})
            for (double alpha : {0.2, 0.5, 0.8})
                worst = std::max(worst, std::abs(zeta_s(eta, alpha, 2.0, 2.0) - delta_s(eta, alpha)));
        add("zeta_equals_delta_at_unit_ratio", worst <= 1e-10, "max |diff| " + fmt(worst));
    });

    guarded("diagonal_subgaussian_matches_isotropic", [&] {
        std::vector<SubGaussianStep> iso;
        std::vector<DiagonalSubGaussianStep> diag;
        for (std::size_t s = 0; s < 20; ++s) {
            const double sigma = 0.005 * (1.0 + 0.1 * static_cast<double>(s));
            iso.push_back({0.01, sigma * sigma, 2.5 + static_cast<double>(s), 64});
            diag.push_back({0.01, std::vector<double>(100, sigma * sigma), 2.5 + static_cast<double>(s), 64});
        }
        const double a = traj_subgaussian_bound(iso, 1.0, 100, 1000);
        const double b = traj_subgaussian_general(diag, 1.0, 1000);
        add("diagonal_subgaussian_matches_isotropic", std::abs(a - b) <= 1e-14, "|diff| " + fmt(std::abs(a - b)));
    });

    guarded("clipped_bound_sqrt_k_scaling", [&] {
        double worst = 0.0;
        const double A = 5.0, eta = 0.01, sigma = 0.005, d = 1000, n = 1e4;
        for (std::size_t k : {1, 10, 100, 1000}) {
            const std::vector<ClippedStep> steps(k, {eta, sigma * sigma});
            const double acc = clipped_subgaussian_bound(1.0, d, n, A, steps);
            const double closed =
                std::sqrt(d * static_cast<double>(k) * std::log1p(A * A * eta * eta / (sigma * sigma)) / n);
            worst = std::max(worst, std::abs(acc - closed));
        }
        add("clipped_bound_sqrt_k_scaling", worst <= 1e-12, "max |diff| " + fmt(worst));
    });

    guarded("kl_convolution_grid", [&] {
        const auto grid = convolution_grid(opt.seed);
        std::size_t held = 0;
        for (const auto& c : grid) held += lemma1_check(c).holds ? 1 : 0;
        const auto analytic = lemma1_check(grid.front());
        const bool exact = std::abs(analytic.lhs - 0.25) < 1e-12 && std::abs(analytic.rhs - 0.5) < 1e-12;
        add("kl_convolution_grid", held == grid.size() && exact,
            std::to_string(held) + "/" + std::to_string(grid.size()) + " hold; analytic lhs " + fmt(analytic.lhs) +
                " rhs " + fmt(analytic.rhs));
    });

    guarded("pinsker_tv_bound", [&] {
        std::size_t held = 0;
        const auto grid = pinsker_grid(opt.seed);
        for (const auto& c : grid) held += c.tv <= std::sqrt(c.kl / 2.0) + 1e-12 ? 1 : 0;
        add("pinsker_tv_bound", held == grid.size(), std::to_string(held) + "/" + std::to_string(grid.size()));
    });

    guarded("kl_gaussian_closed_forms", [&] {
        const double a = kl_gaussian(1, 1, 0, 1), b = kl_gaussian(0.3, 2, 0.3, 2), c = kl_gaussian(0, 2, 0, 1);
        const bool ok = std::abs(a - 0.5) < 1e-15 && b == 0.0 && std::abs(c - 0.5 * (1.0 - std::log(2.0))) < 1e-15;
        add("kl_gaussian_closed_forms", ok, "KL values " + fmt(a) + ", " + fmt(b) + ", " + fmt(c));
    });

    guarded("flatness_quadratic_oracle", [&] {
        const std::size_t hits = flatness_oracle_hits(100, 256, opt.seed);
        add("flatness_quadratic_oracle", hits >= 99, std::to_string(hits) + "/100 within 3 std errors");
    });

    guarded("flatness_t1pm_over_t2pm_equals_k", [&] {
        double worst = 0.0;
        for (std::size_t k : {10, 100}) {
            const double r = flatness_ratio(k, 256, opt.seed);
            worst = std::max(worst, std::abs(r / static_cast<double>(k) - 1.0));
        }
        add("flatness_t1pm_over_t2pm_equals_k", worst <= 0.10, "max relative deviation " + fmt(worst));
    });

    guarded("grad_variance_matches_bruteforce", [&] {
        RngStream rng(opt.seed, Stream::test_support, 3);
        std::vector<ParamVector> g(50, ParamVector(7));
        for (auto& v : g) rng.fill_normal(v);
        const GradStats st = grad_variance_trace(g);
        double brute = 0.0;
        for (std::size_t j = 0; j < 7; ++j) {
            double mean = 0.0;
            for (const auto& v : g) mean += v[j];
            mean /= 50.0;
            double var = 0.0;
            for (const auto& v : g) var += (v[j] - mean) * (v[j] - mean);
            brute += var / 50.0;
        }
        add("grad_variance_matches_bruteforce", std::abs(st.variance_trace - brute) <= 1e-12,
            "|diff| " + fmt(std::abs(st.variance_trace - brute)));
    });

    guarded("hutchinson_quadratic_trace", [&] {
        const QuadraticObjective q{25};
        const std::vector<double> theta(25, 0.3);
        const double t = hutchinson_trace(q, theta, 3, RngStream(opt.seed, Stream::hutchinson, 0)).value;
        add("hutchinson_quadratic_trace", std::abs(t - 25.0) <= 1e-6, "estimate " + fmt(t));
    });

    guarded("rate_sweep_slopes", [&] {
        const double ns[] = {1e2, 1e3, 1e4, 1e5};
        const double s1 = rate_sweep(ns, 1.0 / 3.0).slope;
        const double s2 = rate_sweep(ns, 0.2).tail_slope;
        add("rate_sweep_slopes", std::abs(s1 + 2.0 / 3.0) <= 0.05 && std::abs(s2 + 0.4) <= 0.05,
            "gamma=1/3 slope " + fmt(s1) + ", gamma=0.2 tail slope " + fmt(s2));
    });

    guarded("clip_gradient_idempotent", [&] {
        RngStream rng(opt.seed, Stream::test_support, 4);
        bool ok = true;
        for (int t = 0; t < 20; ++t) {
            ParamVector g(9);
            rng.fill_normal(g);
            for (double& v : g) v *= 3.0;
            const ParamVector once = clip_gradient(g, 2.0);
            ok = ok && clip_gradient(once, 2.0) == once;
        }
        add("clip_gradient_idempotent", ok, "20 random gradients");
    });

    guarded("t1pm_cumulative_noise_sum", [&] {
        const std::size_t d = 6;
        SurrogateState st(d);
        ParamVector manual(d, 0.0);
        const NoiseSchedule s = NoiseSchedule::isotropic(0.005);
        for (std::size_t k = 1; k <= 200; ++k) {
            const ParamVector eps = sample_noise(s, k, d, opt.seed);
            st.record(eps);
            for (std::size_t i = 0; i < d; ++i) manual[i] += eps[i];
        }
        double worst = 0.0;
        for (std::size_t i = 0; i < d; ++i) worst = std::max(worst, std::abs(manual[i] - st.cumulative_noise()[i]));
        add("t1pm_cumulative_noise_sum", worst <= 1e-12, "max |diff| " + fmt(worst));
    });

    return out;
}

}  // namespace genbound
