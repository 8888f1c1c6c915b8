#pragma once

// Multilayer perceptron with ReLU hidden layers and identity output.
//
// Canonical parameter layout: for each layer l (input side first) the
// weight matrix W_l of shape (dims[l] x dims[l+1]) in row-major order,
// followed by the bias b_l of length dims[l+1]. Logits are X W + b.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <span>
#include <vector>

#include "genbound/error.hpp"
#include "genbound/rng.hpp"
#include "genbound/tensor.hpp"

namespace genbound {

struct LossKind {
    enum class Type { cross_entropy, truncated_cross_entropy, pure_quadratic };

    Type type = Type::cross_entropy;
    double c0 = 0.0;  // truncation level, truncated_cross_entropy only

    static LossKind cross_entropy() { return {Type::cross_entropy, 0.0}; }
    static LossKind truncated_cross_entropy(double c0) {
        if (!(c0 > 0.0)) throw DomainError("truncated cross-entropy needs c0 > 0");
        return {Type::truncated_cross_entropy, c0};
    }
    static LossKind pure_quadratic() { return {Type::pure_quadratic, 0.0}; }
};

/// Layer dimensions plus parameter offsets.
class MlpLayout {
   public:
    MlpLayout() = default;
    explicit MlpLayout(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
        if (dims_.size() < 2) throw DomainError("MLP needs at least input and output dims");
        for (std::size_t d : dims_)
            if (d == 0) throw DomainError("MLP layer dims must be positive");
        std::size_t off = 0;
        for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
            weight_offsets_.push_back(off);
            off += dims_[l] * dims_[l + 1];
            bias_offsets_.push_back(off);
            off += dims_[l + 1];
        }
        param_count_ = off;
    }

    const std::vector<std::size_t>& dims() const noexcept { return dims_; }
    std::size_t layer_count() const noexcept { return dims_.size() - 1; }
    std::size_t input_dim() const noexcept { return dims_.front(); }
    std::size_t output_dim() const noexcept { return dims_.back(); }
    std::size_t param_count() const noexcept { return param_count_; }
    std::size_t weight_offset(std::size_t l) const { return weight_offsets_.at(l); }
    std::size_t bias_offset(std::size_t l) const { return bias_offsets_.at(l); }
    std::size_t fan_in(std::size_t l) const { return dims_.at(l); }
    std::size_t fan_out(std::size_t l) const { return dims_.at(l + 1); }

    bool operator==(const MlpLayout& o) const { return dims_ == o.dims_; }

   private:
    std::vector<std::size_t> dims_;
    std::vector<std::size_t> weight_offsets_;
    std::vector<std::size_t> bias_offsets_;
    std::size_t param_count_ = 0;
};

class MlpModel {
   public:
    explicit MlpModel(std::vector<std::size_t> dims)
        : layout_(std::move(dims)), params_(layout_.param_count(), 0.0) {}

    MlpModel(MlpLayout layout, ParamVector params) : layout_(std::move(layout)), params_(std::move(params)) {
        if (params_.size() != layout_.param_count())
            throw DimensionError("MLP parameter count", layout_.param_count(), params_.size());
    }

    /// Fan-in scaled uniform init: W ~ U(-sqrt(6/fan_in), sqrt(6/fan_in)), b = 0.
    static MlpModel he_uniform(std::vector<std::size_t> dims, std::uint64_t seed) {
        MlpModel m(std::move(dims));
        RngStream rng(seed, Stream::init);
        for (std::size_t l = 0; l < m.layout_.layer_count(); ++l) {
            const double limit = std::sqrt(6.0 / static_cast<double>(m.layout_.fan_in(l)));
            const std::size_t off = m.layout_.weight_offset(l);
            const std::size_t count = m.layout_.fan_in(l) * m.layout_.fan_out(l);
            for (std::size_t i = 0; i < count; ++i) m.params_[off + i] = limit * (2.0 * rng.uniform01() - 1.0);
        }
        return m;
    }

    static MlpModel unflatten(std::vector<std::size_t> dims, ParamVector params) {
        return MlpModel(MlpLayout(std::move(dims)), std::move(params));
    }
    const ParamVector& flatten() const noexcept { return params_; }

    const MlpLayout& layout() const noexcept { return layout_; }
    std::size_t param_count() const noexcept { return params_.size(); }
    ParamVector& params() noexcept { return params_; }
    const ParamVector& params() const noexcept { return params_; }

    MatrixView weights(std::size_t l) const {
        return {params_.data() + layout_.weight_offset(l), layout_.fan_in(l), layout_.fan_out(l)};
    }
    std::span<const double> bias(std::size_t l) const {
        return {params_.data() + layout_.bias_offset(l), layout_.fan_out(l)};
    }

   private:
    MlpLayout layout_;
    ParamVector params_;
};

/// Activations recorded by a forward pass; consumed by mlp_backward.
struct ForwardCache {
    std::vector<Tensor2> activations;  // [0] = input, then each hidden layer after ReLU
    Tensor2 logits;
    std::vector<std::size_t> dims;
    const double* params_origin = nullptr;
    std::uint64_t params_fingerprint = 0;
};

namespace detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstVectorMap = Eigen::Map<const Eigen::RowVectorXd>;
using VectorMap = Eigen::Map<Eigen::RowVectorXd>;

// Sampled fingerprint of the parameters: a cheap guard against reusing a
// cache after the parameters it was built from changed.
inline std::uint64_t fingerprint(std::span<const double> params) {
    std::uint64_t h = 1469598103934665603ULL ^ params.size();
    const std::size_t stride = std::max<std::size_t>(1, params.size() / 64);
    for (std::size_t i = 0; i < params.size(); i += stride) {
        std::uint64_t bits;
        std::memcpy(&bits, &params[i], sizeof bits);
        h = (h ^ bits) * 1099511628211ULL;
    }
    if (!params.empty()) {
        std::uint64_t bits;
        std::memcpy(&bits, &params.back(), sizeof bits);
        h = (h ^ bits) * 1099511628211ULL;
    }
    return h;
}

inline void check_params(const MlpLayout& layout, std::span<const double> params) {
    if (params.size() != layout.param_count())
        throw DimensionError("MLP parameter count", layout.param_count(), params.size());
}

inline void affine(const MlpLayout& layout, std::span<const double> params, std::size_t l,
                   const ConstMatrixMap& in, RowMatrix& out) {
    ConstMatrixMap w(params.data() + layout.weight_offset(l), layout.fan_in(l), layout.fan_out(l));
    ConstVectorMap b(params.data() + layout.bias_offset(l), layout.fan_out(l));
    out.resize(in.rows(), layout.fan_out(l));
    out.noalias() = in * w;
    out.rowwise() += b;
}

inline Tensor2 to_tensor(const RowMatrix& m) {
    Tensor2 t(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
    MatrixMap(t.data(), m.rows(), m.cols()) = m;
    return t;
}

}  // namespace detail

/// Logits without keeping activations.
inline Tensor2 mlp_logits(const MlpLayout& layout, std::span<const double> params, MatrixView batch) {
    detail::check_params(layout, params);
    if (batch.cols != layout.input_dim()) throw DimensionError("batch columns", layout.input_dim(), batch.cols);
    detail::RowMatrix cur = detail::ConstMatrixMap(batch.data, batch.rows, batch.cols);
    detail::RowMatrix next;
    for (std::size_t l = 0; l < layout.layer_count(); ++l) {
        detail::affine(layout, params, l, detail::ConstMatrixMap(cur.data(), cur.rows(), cur.cols()), next);
        if (l + 1 < layout.layer_count()) next = next.cwiseMax(0.0);
        cur.swap(next);
    }
    return detail::to_tensor(cur);
}

inline Tensor2 mlp_forward(const MlpLayout& layout, std::span<const double> params, MatrixView batch,
                           ForwardCache& cache) {
    detail::check_params(layout, params);
    if (batch.cols != layout.input_dim()) throw DimensionError("batch columns", layout.input_dim(), batch.cols);
    cache.activations.clear();
    cache.activations.emplace_back(batch.rows, batch.cols,
                                   std::vector<double>(batch.data, batch.data + batch.rows * batch.cols));
    detail::RowMatrix next;
    for (std::size_t l = 0; l < layout.layer_count(); ++l) {
        const Tensor2& in = cache.activations.back();
        detail::affine(layout, params, l, detail::ConstMatrixMap(in.data(), in.rows(), in.cols()), next);
        if (l + 1 < layout.layer_count()) {
            next = next.cwiseMax(0.0);
            cache.activations.push_back(detail::to_tensor(next));
        } else {
            cache.logits = detail::to_tensor(next);
        }
    }
    cache.dims = layout.dims();
    cache.params_origin = params.data();
    cache.params_fingerprint = detail::fingerprint(params);
    return cache.logits;
}

inline Tensor2 mlp_forward(const MlpModel& model, MatrixView batch, ForwardCache& cache) {
    return mlp_forward(model.layout(), model.params(), batch, cache);
}

/// Numerically stable per-sample softmax cross-entropy.
inline double cross_entropy(std::span<const double> logits, std::size_t label) {
    if (label >= logits.size()) throw DimensionError("label index bound", logits.size(), label);
    const auto top = std::max_element(logits.begin(), logits.end());
    const double mx = *top;
    double rest = 0.0;
    for (auto it = logits.begin(); it != logits.end(); ++it)
        if (it != top) rest += std::exp(*it - mx);
    // log1p keeps precision when the label holds the largest logit.
    return (mx - logits[label]) + std::log1p(rest);
}

inline double sample_loss(const LossKind& kind, std::span<const double> logits, std::size_t label) {
    const double ce = cross_entropy(logits, label);
    return kind.type == LossKind::Type::truncated_cross_entropy ? std::min(ce, kind.c0) : ce;
}

inline void check_labels(std::size_t rows, std::span<const int> labels) {
    if (labels.size() != rows) throw DimensionError("label count", rows, labels.size());
}

/// Gradient of the mean per-sample loss over the cached batch.
inline ParamVector mlp_backward(const MlpLayout& layout, std::span<const double> params, const ForwardCache& cache,
                                std::span<const int> labels, const LossKind& kind = LossKind::cross_entropy()) {
    detail::check_params(layout, params);
    if (cache.dims != layout.dims() || cache.activations.size() != layout.layer_count())
        throw StaleCacheError("forward cache was produced by a different architecture");
    if (cache.params_origin != params.data() || cache.params_fingerprint != detail::fingerprint(params))
        throw StaleCacheError("forward cache does not match the current parameters");
    const std::size_t batch = cache.logits.rows();
    check_labels(batch, labels);

    ParamVector grad(layout.param_count(), 0.0);
    if (kind.type == LossKind::Type::pure_quadratic) {
        std::copy(params.begin(), params.end(), grad.begin());
        return grad;
    }

    const double inv_b = 1.0 / static_cast<double>(batch);
    detail::RowMatrix delta(batch, layout.output_dim());
    for (std::size_t i = 0; i < batch; ++i) {
        const auto z = cache.logits.row(i);
        const std::size_t y = static_cast<std::size_t>(labels[i]);
        const double ce = cross_entropy(z, y);
        if (kind.type == LossKind::Type::truncated_cross_entropy && ce >= kind.c0) {
            delta.row(i).setZero();
            continue;
        }
        const double mx = *std::max_element(z.begin(), z.end());
        double s = 0.0;
        for (std::size_t c = 0; c < z.size(); ++c) s += std::exp(z[c] - mx);
        for (std::size_t c = 0; c < z.size(); ++c) {
            const double p = std::exp(z[c] - mx) / s;
            delta(i, c) = (p - (c == y ? 1.0 : 0.0)) * inv_b;
        }
    }

    for (std::size_t l = layout.layer_count(); l-- > 0;) {
        const Tensor2& a = cache.activations[l];
        detail::ConstMatrixMap in(a.data(), a.rows(), a.cols());
        detail::MatrixMap gw(grad.data() + layout.weight_offset(l), layout.fan_in(l), layout.fan_out(l));
        detail::VectorMap gb(grad.data() + layout.bias_offset(l), layout.fan_out(l));
        gw.noalias() = in.transpose() * delta;
        gb = delta.colwise().sum();
        if (l == 0) break;
        detail::ConstMatrixMap w(params.data() + layout.weight_offset(l), layout.fan_in(l), layout.fan_out(l));
        detail::RowMatrix prev = delta * w.transpose();
        prev.array() *= (in.array() > 0.0).cast<double>();
        delta.swap(prev);
    }
    return grad;
}

inline ParamVector mlp_backward(const MlpModel& model, const ForwardCache& cache, std::span<const int> labels,
                                const LossKind& kind = LossKind::cross_entropy()) {
    return mlp_backward(model.layout(), model.params(), cache, labels, kind);
}

struct BatchMetrics {
    double mean_loss = 0.0;
    double accuracy = 0.0;
};

/// Mean loss and accuracy, evaluated in row chunks to bound memory.
inline BatchMetrics evaluate_mlp(const LossKind& kind, const MlpLayout& layout, std::span<const double> params,
                                 MatrixView batch, std::span<const int> labels, std::size_t chunk = 1024) {
    check_labels(batch.rows, labels);
    if (kind.type == LossKind::Type::pure_quadratic) {
        detail::check_params(layout, params);
        return {0.5 * squared_norm(params), 0.0};
    }
    if (batch.rows == 0) throw DomainError("empty batch");
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t first = 0; first < batch.rows; first += chunk) {
        const std::size_t count = std::min(chunk, batch.rows - first);
        const Tensor2 logits = mlp_logits(layout, params, batch.row_block(first, count));
        for (std::size_t i = 0; i < count; ++i) {
            const auto z = logits.row(i);
            const std::size_t y = static_cast<std::size_t>(labels[first + i]);
            loss_sum += sample_loss(kind, z, y);
            if (static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin()) == y) ++correct;
        }
    }
    const double n = static_cast<double>(batch.rows);
    return {loss_sum / n, static_cast<double>(correct) / n};
}

inline double loss_eval(const LossKind& kind, const MlpModel& model, MatrixView batch, std::span<const int> labels) {
    return evaluate_mlp(kind, model.layout(), model.params(), batch, labels).mean_loss;
}

}  // namespace genbound
