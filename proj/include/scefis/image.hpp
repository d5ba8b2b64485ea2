#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace scefis {

/**
 * Row-major grayscale image with luminance normalized to [0,1].
 *
 * Construction validates the invariants; instances are immutable afterwards
 * apart from assignment.
 */
class GrayImage {
public:
    GrayImage() = default;
    GrayImage(int width, int height, std::vector<double> data);
    /// Constant image.
    GrayImage(int width, int height, double fill);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    /// Replicated-border access.
    double clamped(int x, int y) const;

    std::span<const double> pixels() const { return data_; }

    /// Rectangle [x0, x0+w) x [y0, y0+h); must lie inside the image.
    GrayImage crop(int x0, int y0, int w, int h) const;

    bool operator==(const GrayImage&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

/// Row-major binary label image; true marks object pixels.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height, bool fill = false);
    BinaryMask(int width, int height, std::vector<std::uint8_t> data);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }

    bool at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x] != 0; }
    void set(int x, int y, bool v) { data_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }
    bool operator[](std::size_t i) const { return data_[i] != 0; }
    void set(std::size_t i, bool v) { data_[i] = v ? 1 : 0; }

    std::size_t count() const;
    bool same_shape(const BinaryMask& o) const { return width_ == o.width_ && height_ == o.height_; }
    bool same_shape(const GrayImage& img) const { return width_ == img.width() && height_ == img.height(); }

    std::span<const std::uint8_t> raw() const { return data_; }

    bool operator==(const BinaryMask&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Keeps only the largest 4-connected foreground component (first in raster order on ties).
BinaryMask largest_component(const BinaryMask& mask);

/// Labels 4-connected foreground components; returns the number of components (labels 1..n, 0 = background).
int label_components(const BinaryMask& mask, std::vector<int>& labels);

// --- file I/O ---------------------------------------------------------------

/// Loads 8/16-bit grayscale or RGB(A) PNG, or binary PGM (P5). Color is reduced
/// with luminance = 0.299R + 0.587G + 0.114B; values are scaled to [0,1].
GrayImage load_image(const std::filesystem::path& path);

/// Any nonzero pixel is object.
BinaryMask load_mask(const std::filesystem::path& path);

/// Writes an 8-bit PNG with 0/255 labels.
void save_mask(const BinaryMask& mask, const std::filesystem::path& path);

/// Writes an 8-bit grayscale PNG (values rounded from [0,1]).
void save_image(const GrayImage& img, const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const BinaryMask& mask);
std::vector<std::uint8_t> encode_png(const GrayImage& img);
GrayImage decode_image(std::span<const std::uint8_t> bytes);
BinaryMask decode_mask(std::span<const std::uint8_t> bytes);

}  // namespace scefis
