#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "genbound/error.hpp"
#include "genbound/rng.hpp"
#include "genbound/tensor.hpp"

namespace genbound {

/// Feature matrix (samples x dims, values in [0,1] for images) and labels.
struct Dataset {
    Tensor2 features;
    std::vector<int> labels;
    std::size_t num_classes = 0;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t dims() const noexcept { return features.cols(); }

    void validate() const {
        if (features.rows() != labels.size()) throw DimensionError("dataset labels", features.rows(), labels.size());
        for (int y : labels)
            if (y < 0 || static_cast<std::size_t>(y) >= num_classes)
                throw DomainError("dataset label " + std::to_string(y) + " outside [0, " +
                                  std::to_string(num_classes) + ")");
    }

    Dataset select(std::span<const std::size_t> rows) const {
        Dataset out;
        out.features = gather_rows(features.view(), rows);
        out.labels.reserve(rows.size());
        for (std::size_t r : rows) out.labels.push_back(labels.at(r));
        out.num_classes = num_classes;
        return out;
    }

    /// First m entries of a seeded permutation; subset(m1) is a prefix of subset(m2).
    Dataset shuffled_subset(std::size_t m, std::uint64_t seed) const { return shuffled_slice(0, m, seed); }

    /// Entries [first, first + count) of the same permutation, so slices
    /// taken with one seed are disjoint.
    Dataset shuffled_slice(std::size_t first, std::size_t count, std::uint64_t seed) const {
        if (first + count > size()) throw DimensionError("subset size", size(), first + count);
        const std::vector<std::size_t> order = seeded_permutation(size(), RngStream(seed, Stream::subset));
        return select(std::span<const std::size_t>(order).subspan(first, count));
    }

    static std::vector<std::size_t> seeded_permutation(std::size_t n, RngStream rng) {
        std::vector<std::size_t> p(n);
        std::iota(p.begin(), p.end(), std::size_t{0});
        for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.uniform_index(i)]);
        return p;
    }
};

// ---------------------------------------------------------------- IDX files

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

namespace detail {

inline std::vector<unsigned char> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IdxError(IdxError::Kind::open_failed, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::uint32_t read_be32(std::span<const unsigned char> bytes, std::size_t offset,
                               const std::filesystem::path& path) {
    if (offset + 4 > bytes.size())
        throw IdxError(IdxError::Kind::truncated, path.string() + ": truncated header");
    return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
           (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

inline void write_be32(std::ostream& out, std::uint32_t v) {
    const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                                static_cast<char>(v)};
    out.write(b.data(), 4);
}

inline void expect_magic(std::uint32_t got, std::uint32_t want, const std::filesystem::path& path) {
    if (got != want) {
        char buf[96];
        std::snprintf(buf, sizeof buf, ": wrong magic 0x%08x (expected 0x%08x)", got, want);
        throw IdxError(IdxError::Kind::wrong_magic, path.string() + buf);
    }
}

}  // namespace detail

struct IdxImages {
    std::size_t count = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<unsigned char> pixels;
};

inline IdxImages read_idx_images(const std::filesystem::path& path) {
    const auto bytes = detail::read_file(path);
    detail::expect_magic(detail::read_be32(bytes, 0, path), kIdxImagesMagic, path);
    IdxImages img;
    img.count = detail::read_be32(bytes, 4, path);
    img.rows = detail::read_be32(bytes, 8, path);
    img.cols = detail::read_be32(bytes, 12, path);
    const std::size_t payload = img.count * img.rows * img.cols;
    if (bytes.size() < 16 + payload)
        throw IdxError(IdxError::Kind::truncated, path.string() + ": truncated pixel payload");
    img.pixels.assign(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(payload));
    return img;
}

inline std::vector<unsigned char> read_idx_labels(const std::filesystem::path& path) {
    const auto bytes = detail::read_file(path);
    detail::expect_magic(detail::read_be32(bytes, 0, path), kIdxLabelsMagic, path);
    const std::size_t count = detail::read_be32(bytes, 4, path);
    if (bytes.size() < 8 + count) throw IdxError(IdxError::Kind::truncated, path.string() + ": truncated labels");
    return {bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(count)};
}

/// Loads an IDX image/label pair; pixels are divided by 255 and flattened.
inline Dataset load_mnist_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                              std::size_t num_classes = 10) {
    const IdxImages img = read_idx_images(images_path);
    const std::vector<unsigned char> labels = read_idx_labels(labels_path);
    if (labels.size() != img.count)
        throw IdxError(IdxError::Kind::dimension_mismatch,
                       "image count " + std::to_string(img.count) + " != label count " + std::to_string(labels.size()));
    Dataset ds;
    const std::size_t dims = img.rows * img.cols;
    std::vector<double> features(img.pixels.size());
    std::transform(img.pixels.begin(), img.pixels.end(), features.begin(),
                   [](unsigned char p) { return static_cast<double>(p) / 255.0; });
    ds.features = Tensor2(img.count, dims, std::move(features));
    ds.labels.reserve(labels.size());
    for (unsigned char y : labels) {
        if (y >= num_classes)
            throw IdxError(IdxError::Kind::bad_label, labels_path.string() + ": label " + std::to_string(y));
        ds.labels.push_back(y);
    }
    ds.num_classes = num_classes;
    return ds;
}

/// Writes features (rounded back to bytes) and labels as an IDX pair.
inline void write_mnist_idx(const Dataset& ds, std::size_t image_rows, std::size_t image_cols,
                            const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
    if (image_rows * image_cols != ds.dims())
        throw DimensionError("image shape", ds.dims(), image_rows * image_cols);
    {
        std::ofstream out(images_path, std::ios::binary);
        if (!out) throw IdxError(IdxError::Kind::open_failed, "cannot write " + images_path.string());
        detail::write_be32(out, kIdxImagesMagic);
        detail::write_be32(out, static_cast<std::uint32_t>(ds.size()));
        detail::write_be32(out, static_cast<std::uint32_t>(image_rows));
        detail::write_be32(out, static_cast<std::uint32_t>(image_cols));
        for (double v : ds.features.values()) {
            const long byte = std::lround(std::clamp(v, 0.0, 1.0) * 255.0);
            out.put(static_cast<char>(byte));
        }
    }
    std::ofstream out(labels_path, std::ios::binary);
    if (!out) throw IdxError(IdxError::Kind::open_failed, "cannot write " + labels_path.string());
    detail::write_be32(out, kIdxLabelsMagic);
    detail::write_be32(out, static_cast<std::uint32_t>(ds.size()));
    for (int y : ds.labels) out.put(static_cast<char>(y));
}

// ---------------------------------------------------------------- synthetic

/// Class-balanced Gaussian mixture: label i % classes, unit-variance noise
/// around per-class means drawn from N(0, I). Deterministic per seed.
inline Dataset synth_gaussian_mixture(std::size_t n, std::size_t dims, std::size_t classes, std::uint64_t seed) {
    if (classes == 0 || n < classes) throw DomainError("synth_gaussian_mixture needs n >= classes >= 1");
    RngStream means_rng(seed, Stream::synthetic_data, 0);
    RngStream noise_rng(seed, Stream::synthetic_data, 1);
    Tensor2 means(classes, dims);
    means_rng.fill_normal(means.values());
    Dataset ds;
    ds.features = Tensor2(n, dims);
    ds.labels.resize(n);
    ds.num_classes = classes;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = i % classes;
        ds.labels[i] = static_cast<int>(c);
        auto row = ds.features.row(i);
        for (std::size_t j = 0; j < dims; ++j) row[j] = means(c, j) + noise_rng.normal();
    }
    return ds;
}

// ---------------------------------------------------------------- batches

enum class SamplingMode { epoch_shuffle, with_replacement };

struct Batch {
    std::vector<std::size_t> indices;
    Tensor2 features;
    std::vector<int> labels;
};

/// Seeded mini-batch index source.
///
/// epoch_shuffle walks a concatenation of per-epoch permutations (epoch e
/// uses substream e), so every batch has exactly b rows and every window of
/// n consecutive draws aligned to an epoch covers each index once.
/// with_replacement draws b independent uniform indices per batch.
class BatchSampler {
   public:
    BatchSampler(std::uint64_t seed, std::size_t batch_size, std::size_t n,
                 SamplingMode mode = SamplingMode::epoch_shuffle)
        : seed_(seed), batch_size_(batch_size), n_(n), mode_(mode), rng_(seed, Stream::sampler) {
        if (batch_size == 0) throw DomainError("batch size must be positive");
        if (n == 0) throw DomainError("sample count must be positive");
        if (mode == SamplingMode::epoch_shuffle && batch_size > n) throw DimensionError("batch size must not exceed sample count", n, batch_size);
    }

    std::size_t batch_size() const noexcept { return batch_size_; }
    SamplingMode mode() const noexcept { return mode_; }

    std::vector<std::size_t> next_indices() {
        std::vector<std::size_t> out;
        out.reserve(batch_size_);
        if (mode_ == SamplingMode::with_replacement) {
            for (std::size_t i = 0; i < batch_size_; ++i) out.push_back(rng_.uniform_index(n_));
            return out;
        }
        while (out.size() < batch_size_) {
            if (cursor_ == order_.size()) {
                order_ = Dataset::seeded_permutation(n_, RngStream(seed_, Stream::sampler, epoch_ + 1));
                ++epoch_;
                cursor_ = 0;
            }
            out.push_back(order_[cursor_++]);
        }
        return out;
    }

    Batch next_batch(const Dataset& ds) {
        if (ds.size() != n_) throw DimensionError("sampler dataset size", n_, ds.size());
        Batch b;
        b.indices = next_indices();
        b.features = gather_rows(ds.features.view(), b.indices);
        b.labels.reserve(b.indices.size());
        for (std::size_t i : b.indices) b.labels.push_back(ds.labels[i]);
        return b;
    }

   private:
    std::uint64_t seed_;
    std::size_t batch_size_;
    std::size_t n_;
    SamplingMode mode_;
    RngStream rng_;
    std::vector<std::size_t> order_;
    std::size_t cursor_ = 0;
    std::uint64_t epoch_ = 0;
};

inline Batch next_batch(BatchSampler& sampler, const Dataset& ds) { return sampler.next_batch(ds); }

}  // namespace genbound
