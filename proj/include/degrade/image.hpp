#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace degrade {

/// Interleaved 8-bit image, row-major, `channels` samples per pixel.
class Image {
public:
	Image() = default;
	Image(int width, int height, int channels, std::uint8_t fill = 0);
	Image(int width, int height, int channels, std::vector<std::uint8_t> samples);

	int width() const noexcept { return width_; }
	int height() const noexcept { return height_; }
	int channels() const noexcept { return channels_; }
	bool empty() const noexcept { return samples_.empty(); }

	std::size_t sample_count() const noexcept { return samples_.size(); }
	std::span<const std::uint8_t> samples() const noexcept { return samples_; }
	std::span<std::uint8_t> samples() noexcept { return samples_; }

	std::uint8_t& at(int x, int y, int c) noexcept {
		return samples_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
	}
	std::uint8_t at(int x, int y, int c) const noexcept {
		return samples_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
	}

	bool same_shape(const Image& other) const noexcept {
		return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
	}

	friend bool operator==(const Image&, const Image&) = default;

private:
	int width_ = 0;
	int height_ = 0;
	int channels_ = 0;
	std::vector<std::uint8_t> samples_;
};

struct ImageSize {
	int width = 0;
	int height = 0;
};

/// Reads any PNG and converts it to 8-bit RGB.
Image read_png_rgb(const std::filesystem::path& path);

/// Reads only the PNG header.
ImageSize read_png_size(const std::filesystem::path& path);

/// Writes an RGB or gray image as PNG. The file is written to a sibling
/// temporary and renamed, so readers never observe a partial file.
void write_png(const std::filesystem::path& path, const Image& image);

}  // namespace degrade
