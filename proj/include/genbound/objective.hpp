#pragma once

// Scalar objectives over a flat parameter vector. Bound estimators are
// templates over these concepts so the same code runs on an MLP and on
// the analytic oracle losses.

#include <concepts>
#include <cstddef>
#include <span>
#include <vector>

#include "genbound/mlp.hpp"
#include "genbound/tensor.hpp"

namespace genbound {

template <class F>
concept Objective = requires(const F& f, std::span<const double> theta) {
    { f.dimension() } -> std::convertible_to<std::size_t>;
    { f.value(theta) } -> std::convertible_to<double>;
};

/// gradient(theta, out) writes the gradient and returns the value.
template <class F>
concept DifferentiableObjective =
    Objective<F> && requires(const F& f, std::span<const double> theta, std::span<double> grad) {
        { f.gradient(theta, grad) } -> std::convertible_to<double>;
    };

/// Mean of per-sample losses with access to each sample's gradient.
template <class F>
concept PerSampleObjective =
    DifferentiableObjective<F> &&
    requires(const F& f, std::span<const double> theta, std::size_t i, std::span<double> grad) {
        { f.sample_count() } -> std::convertible_to<std::size_t>;
        { f.sample_gradient(theta, i, grad) } -> std::convertible_to<double>;
    };

/// f(theta) = 0.5 ||theta||^2, independent of data.
struct QuadraticObjective {
    std::size_t dims;

    std::size_t dimension() const noexcept { return dims; }
    double value(std::span<const double> theta) const {
        if (theta.size() != dims) throw DimensionError("quadratic objective", dims, theta.size());
        return 0.5 * squared_norm(theta);
    }
    double gradient(std::span<const double> theta, std::span<double> grad) const {
        if (grad.size() != dims) throw DimensionError("quadratic gradient", dims, grad.size());
        std::copy(theta.begin(), theta.end(), grad.begin());
        return value(theta);
    }
};

/// f(theta) = a . theta
struct LinearObjective {
    std::vector<double> coefficients;

    std::size_t dimension() const noexcept { return coefficients.size(); }
    double value(std::span<const double> theta) const { return dot(coefficients, theta); }
    double gradient(std::span<const double> theta, std::span<double> grad) const {
        if (grad.size() != coefficients.size()) throw DimensionError("linear gradient", coefficients.size(), grad.size());
        std::copy(coefficients.begin(), coefficients.end(), grad.begin());
        return value(theta);
    }
};

/// Mean loss of an MLP over a fixed batch. Holds views: the feature matrix
/// and labels must outlive the objective.
class MlpObjective {
   public:
    MlpObjective(MlpLayout layout, MatrixView features, std::span<const int> labels,
                 LossKind kind = LossKind::cross_entropy())
        : layout_(std::move(layout)), features_(features), labels_(labels), kind_(kind) {
        check_labels(features.rows, labels);
        if (features.cols != layout_.input_dim())
            throw DimensionError("objective feature columns", layout_.input_dim(), features.cols);
    }

    const MlpLayout& layout() const noexcept { return layout_; }
    const LossKind& loss_kind() const noexcept { return kind_; }
    std::size_t dimension() const noexcept { return layout_.param_count(); }
    std::size_t sample_count() const noexcept { return features_.rows; }

    double value(std::span<const double> theta) const {
        return evaluate_mlp(kind_, layout_, theta, features_, labels_).mean_loss;
    }

    double gradient(std::span<const double> theta, std::span<double> grad) const {
        return batch_gradient(theta, features_, labels_, grad);
    }

    double sample_gradient(std::span<const double> theta, std::size_t i, std::span<double> grad) const {
        return batch_gradient(theta, features_.row_block(i, 1), labels_.subspan(i, 1), grad);
    }

   private:
    double batch_gradient(std::span<const double> theta, MatrixView x, std::span<const int> y,
                          std::span<double> grad) const {
        if (grad.size() != dimension()) throw DimensionError("objective gradient", dimension(), grad.size());
        ForwardCache cache;
        const Tensor2 logits = mlp_forward(layout_, theta, x, cache);
        const ParamVector g = mlp_backward(layout_, theta, cache, y, kind_);
        std::copy(g.begin(), g.end(), grad.begin());
        if (kind_.type == LossKind::Type::pure_quadratic) return 0.5 * squared_norm(theta);
        double loss = 0.0;
        for (std::size_t i = 0; i < logits.rows(); ++i)
            loss += sample_loss(kind_, logits.row(i), static_cast<std::size_t>(y[i]));
        return loss / static_cast<double>(logits.rows());
    }

    MlpLayout layout_;
    MatrixView features_;
    std::span<const int> labels_;
    LossKind kind_;
};

}  // namespace genbound
