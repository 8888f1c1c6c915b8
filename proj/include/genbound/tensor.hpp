#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "genbound/error.hpp"

namespace genbound {

/// Flattened model parameters in canonical layout.
using ParamVector = std::vector<double>;

/// Non-owning row-major matrix view.
struct MatrixView {
    const double* data = nullptr;
    std::size_t rows = 0;
    std::size_t cols = 0;

    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const { return {data + r * cols, cols}; }
    MatrixView row_block(std::size_t first, std::size_t count) const {
        return {data + first * cols, count, cols};
    }
};

/// Dense row-major matrix of doubles.
class Tensor2 {
   public:
    Tensor2() = default;
    Tensor2(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    Tensor2(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_)
            throw DimensionError("Tensor2 data length", rows_ * cols_, data_.size());
        for (double v : data_)
            if (!std::isfinite(v)) throw DomainError("Tensor2: non-finite entry");
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }
    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }

    MatrixView view() const noexcept { return {data_.data(), rows_, cols_}; }

    bool operator==(const Tensor2&) const = default;

   private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline Tensor2 gather_rows(MatrixView src, std::span<const std::size_t> rows) {
    Tensor2 out(rows.size(), src.cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = src.row(rows[i]);
        std::copy(r.begin(), r.end(), out.row(i).begin());
    }
    return out;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("dot", a.size(), b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_norm(std::span<const double> a) { return dot(a, a); }

}  // namespace genbound
