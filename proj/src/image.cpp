#include "degrade/image.hpp"

#include "degrade/error.hpp"

#include <png.h>

#include <cstring>
#include <string>
#include <thread>
#include <unistd.h>

namespace degrade {

Image::Image(int width, int height, int channels, std::uint8_t fill)
	: width_(width), height_(height), channels_(channels),
	  samples_(static_cast<std::size_t>(width) * height * channels, fill) {
	if (width <= 0 || height <= 0 || channels <= 0)
		throw Error("image dimensions must be positive");
}

Image::Image(int width, int height, int channels, std::vector<std::uint8_t> samples)
	: width_(width), height_(height), channels_(channels), samples_(std::move(samples)) {
	if (width <= 0 || height <= 0 || channels <= 0)
		throw Error("image dimensions must be positive");
	if (samples_.size() != static_cast<std::size_t>(width) * height * channels)
		throw Error("sample buffer does not match image dimensions");
}

namespace {

struct PngImage {
	png_image image;

	PngImage() {
		std::memset(&image, 0, sizeof image);
		image.version = PNG_IMAGE_VERSION;
	}
	~PngImage() { png_image_free(&image); }
	PngImage(const PngImage&) = delete;
	PngImage& operator=(const PngImage&) = delete;

	void begin_read(const std::filesystem::path& path) {
		if (!png_image_begin_read_from_file(&image, path.c_str()))
			throw Error("cannot read PNG " + path.string() + ": " + image.message);
	}
};

}  // namespace

Image read_png_rgb(const std::filesystem::path& path) {
	PngImage png;
	png.begin_read(path);
	png.image.format = PNG_FORMAT_RGB;
	std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png.image));
	if (!png_image_finish_read(&png.image, nullptr, buffer.data(), 0, nullptr))
		throw Error("cannot decode PNG " + path.string() + ": " + png.image.message);
	return Image(static_cast<int>(png.image.width), static_cast<int>(png.image.height), 3, std::move(buffer));
}

ImageSize read_png_size(const std::filesystem::path& path) {
	PngImage png;
	png.begin_read(path);
	return {static_cast<int>(png.image.width), static_cast<int>(png.image.height)};
}

void write_png(const std::filesystem::path& path, const Image& image) {
	if (image.channels() != 1 && image.channels() != 3)
		throw Error("PNG output supports 1 or 3 channels");

	PngImage png;
	png.image.width = static_cast<png_uint_32>(image.width());
	png.image.height = static_cast<png_uint_32>(image.height());
	png.image.format = image.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;

	auto tmp = path;
	tmp += ".tmp" + std::to_string(::getpid()) + "-" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
	if (!png_image_write_to_file(&png.image, tmp.c_str(), 0, image.samples().data(), 0, nullptr)) {
		std::error_code ec;
		std::filesystem::remove(tmp, ec);
		throw Error("cannot write PNG " + path.string() + ": " + png.image.message);
	}
	std::filesystem::rename(tmp, path);
}

}  // namespace degrade
