#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lptem/error.hpp"

namespace lptem {

/// Dense row-major 2-D image. (x, y) = (column, row).
template <typename T>
class Image {
public:
    using value_type = T;

    Image() = default;
    Image(std::size_t width, std::size_t height, T fill = T{})
        : width_(width), height_(height), data_(width * height, fill) {}

    [[nodiscard]] std::size_t width() const noexcept { return width_; }
    [[nodiscard]] std::size_t height() const noexcept { return height_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    T& operator()(std::size_t x, std::size_t y) noexcept { return data_[y * width_ + x]; }
    const T& operator()(std::size_t x, std::size_t y) const noexcept {
        return data_[y * width_ + x];
    }

    [[nodiscard]] bool contains(std::ptrdiff_t x, std::ptrdiff_t y) const noexcept {
        return x >= 0 && y >= 0 && static_cast<std::size_t>(x) < width_ &&
               static_cast<std::size_t>(y) < height_;
    }

    std::span<T> pixels() noexcept { return data_; }
    std::span<const T> pixels() const noexcept { return data_; }

    [[nodiscard]] bool same_shape(const auto& other) const noexcept {
        return width_ == other.width() && height_ == other.height();
    }

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<T> data_;
};

using Image16 = Image<std::uint16_t>;
using ImageF = Image<double>;
/// 0 = background, k >= 1 = particle identity k.
using LabelImage = Image<std::uint16_t>;
using BinaryMask = Image<std::uint8_t>;

template <typename A, typename B>
void require_same_shape(const Image<A>& a, const Image<B>& b, const char* what) {
    if (!a.same_shape(b)) {
        throw InputError(std::string(what) + ": dimension mismatch (" + std::to_string(a.width()) +
                         "x" + std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                         "x" + std::to_string(b.height()) + ")");
    }
}

/// Pixels of `labels` equal to `id`.
inline BinaryMask select_label(const LabelImage& labels, std::uint16_t id) {
    BinaryMask out(labels.width(), labels.height());
    auto src = labels.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] == id ? 1 : 0;
    return out;
}

} // namespace lptem
