#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "genbound/error.hpp"

namespace genbound {

/// KL(N(mu1, var1) || N(mu2, var2)).
inline double kl_gaussian(double mu1, double var1, double mu2, double var2) {
    if (!(var1 > 0.0) || !(var2 > 0.0)) throw DomainError("Gaussian variances must be positive");
    const double dm = mu1 - mu2;
    return 0.5 * (var1 / var2 + dm * dm / var2 - 1.0 + std::log(var2 / var1));
}

/// KL between diagonal Gaussians: sum of per-coordinate terms.
inline double kl_gaussian(std::span<const double> mu1, std::span<const double> var1, std::span<const double> mu2,
                          std::span<const double> var2) {
    const std::size_t d = mu1.size();
    if (var1.size() != d || mu2.size() != d || var2.size() != d)
        throw DimensionError("diagonal Gaussian length", d, std::max({var1.size(), mu2.size(), var2.size()}));
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += kl_gaussian(mu1[i], var1[i], mu2[i], var2[i]);
    return s;
}

inline double normal_cdf(double x, double mu, double var) {
    return 0.5 * std::erfc(-(x - mu) / std::sqrt(2.0 * var));
}

/// Total variation between two 1-D Gaussians, from the CDFs at the
/// density crossing points.
inline double tv_gaussian(double mu1, double var1, double mu2, double var2) {
    if (!(var1 > 0.0) || !(var2 > 0.0)) throw DomainError("Gaussian variances must be positive");
    if (var1 == var2) {
        if (mu1 == mu2) return 0.0;
        const double mid = 0.5 * (mu1 + mu2);
        return std::abs(normal_cdf(mid, mu1, var1) - normal_cdf(mid, mu2, var2));
    }
    // log p1 = log p2  <=>  a x^2 + b x + c = 0
    const double a = 0.5 / var2 - 0.5 / var1;
    const double b = mu1 / var1 - mu2 / var2;
    const double c = 0.5 * mu2 * mu2 / var2 - 0.5 * mu1 * mu1 / var1 + 0.5 * std::log(var2 / var1);
    const double disc = std::max(0.0, b * b - 4.0 * a * c);
    const double sq = std::sqrt(disc);
    double r1 = (-b - sq) / (2.0 * a);
    double r2 = (-b + sq) / (2.0 * a);
    if (r1 > r2) std::swap(r1, r2);
    const double p_mass = normal_cdf(r2, mu1, var1) - normal_cdf(r1, mu1, var1);
    const double q_mass = normal_cdf(r2, mu2, var2) - normal_cdf(r1, mu2, var2);
    return std::abs(p_mass - q_mass);
}

/// One side of the convolution inequality: X ~ N(mean_x, var_x) and
/// Y | X = x ~ N(slope * x + offset, var_y), so Z = X + Y is Gaussian.
struct LinearGaussianPair {
    double mean_x = 0.0;
    double var_x = 1.0;
    double slope = 0.0;
    double offset = 0.0;
    double var_y = 1.0;

    double mean_z() const { return (1.0 + slope) * mean_x + offset; }
    double var_z() const { return (1.0 + slope) * (1.0 + slope) * var_x + var_y; }
};

/// One coordinate of the KL convolution check; coordinates are independent.
struct ConvolutionCase {
    LinearGaussianPair reference;  // (X, Y)
    LinearGaussianPair perturbed;  // (X', Y')
};

struct ConvolutionCheck {
    double lhs = 0.0;  // KL(P_Z' || P_Z)
    double rhs = 0.0;  // KL(P_X' || P_X) + E_{x~X'} KL(P_{Y'|x} || P_{Y|x})
    bool holds = false;
};

/// Evaluates KL(P_Z'||P_Z) <= KL(P_X'||P_X) + E_{X'} KL(P_{Y'|X'}||P_{Y|X})
/// in closed form over independent coordinates.
inline ConvolutionCheck lemma1_check(std::span<const ConvolutionCase> coordinates) {
    ConvolutionCheck out;
    for (const auto& c : coordinates) {
        const auto& p = c.perturbed;
        const auto& q = c.reference;
        out.lhs += kl_gaussian(p.mean_z(), p.var_z(), q.mean_z(), q.var_z());
        // E_{x ~ N(p.mean_x, p.var_x)} of the conditional KL, whose mean gap
        // (p.slope - q.slope) x + (p.offset - q.offset) is affine in x.
        const double ds = p.slope - q.slope;
        const double dc = p.offset - q.offset;
        const double gap_mean = ds * p.mean_x + dc;
        const double gap_sq = gap_mean * gap_mean + ds * ds * p.var_x;
        const double conditional = 0.5 * (p.var_y / q.var_y + gap_sq / q.var_y - 1.0 + std::log(q.var_y / p.var_y));
        out.rhs += kl_gaussian(p.mean_x, p.var_x, q.mean_x, q.var_x) + conditional;
    }
    out.holds = out.lhs <= out.rhs + 1e-12;
    return out;
}

inline ConvolutionCheck lemma1_check(const ConvolutionCase& single) {
    return lemma1_check(std::span<const ConvolutionCase>(&single, 1));
}

}  // namespace genbound
