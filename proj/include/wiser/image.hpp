#ifndef WISER_IMAGE_HPP
#define WISER_IMAGE_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "wiser/errors.hpp"
#include "wiser/tensor.hpp"

namespace wiser {

// 3-band 8-bit color image, bands stored as planes in R, G, B order.
class PlanarImage {
public:
    PlanarImage() = default;
    PlanarImage(std::size_t height, std::size_t width)
        : height_(height), width_(width) {
        for (auto& b : bands_) b.assign(height * width, 0);
    }

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t pixels() const { return height_ * width_; }

    std::vector<std::uint8_t>& band(std::size_t i) { return bands_.at(i); }
    const std::vector<std::uint8_t>& band(std::size_t i) const { return bands_.at(i); }

    std::uint8_t at(std::size_t b, std::size_t r, std::size_t c) const {
        return bands_[b][r * width_ + c];
    }
    void set(std::size_t b, std::size_t r, std::size_t c, std::uint8_t v) {
        bands_[b][r * width_ + c] = v;
    }

    bool operator==(const PlanarImage& o) const {
        return height_ == o.height_ && width_ == o.width_ && bands_ == o.bands_;
    }

    // One band widened to a real-valued [H,W] tensor of raw intensities.
    template <typename T>
    Tensor<T> band_tensor(std::size_t i) const {
        Tensor<T> t({height_, width_});
        const auto& src = bands_.at(i);
        for (std::size_t k = 0; k < src.size(); ++k) t[k] = static_cast<T>(src[k]);
        return t;
    }

    // All bands as a [3,H,W] tensor.
    template <typename T>
    Tensor<T> as_tensor() const {
        Tensor<T> t({3, height_, width_});
        for (std::size_t b = 0; b < 3; ++b) {
            const auto& src = bands_[b];
            T* dst = t.data() + b * pixels();
            for (std::size_t k = 0; k < src.size(); ++k) dst[k] = static_cast<T>(src[k]);
        }
        return t;
    }

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::array<std::vector<std::uint8_t>, 3> bands_;
};

// Per-band ternary modification field, values in {-1, 0, +1}.
class NoiseField {
public:
    NoiseField() = default;
    NoiseField(std::size_t height, std::size_t width)
        : height_(height), width_(width) {
        for (auto& b : bands_) b.assign(height * width, 0);
    }

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t pixels() const { return height_ * width_; }

    std::vector<std::int8_t>& band(std::size_t i) { return bands_.at(i); }
    const std::vector<std::int8_t>& band(std::size_t i) const { return bands_.at(i); }

    bool operator==(const NoiseField& o) const {
        return height_ == o.height_ && width_ == o.width_ && bands_ == o.bands_;
    }

    template <typename T>
    Tensor<T> band_tensor(std::size_t i) const {
        Tensor<T> t({height_, width_});
        const auto& src = bands_.at(i);
        for (std::size_t k = 0; k < src.size(); ++k) t[k] = static_cast<T>(src[k]);
        return t;
    }

    template <typename T>
    Tensor<T> as_tensor() const {
        Tensor<T> t({3, height_, width_});
        for (std::size_t b = 0; b < 3; ++b) {
            const auto& src = bands_[b];
            T* dst = t.data() + b * pixels();
            for (std::size_t k = 0; k < src.size(); ++k) dst[k] = static_cast<T>(src[k]);
        }
        return t;
    }

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::array<std::vector<std::int8_t>, 3> bands_;
};

// out = in + n with sign reflection at the range ends: 0 with -1 becomes 1,
// 255 with +1 becomes 254, so |out - in| = 1 wherever n is nonzero.
PlanarImage apply_noise(const PlanarImage& img, const NoiseField& n);

}  // namespace wiser

#endif
