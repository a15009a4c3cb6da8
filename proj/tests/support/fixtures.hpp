#pragma once

#include "degrade/bounding_box.hpp"
#include "degrade/image.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace degrade::testing {

/// Temporary directory removed on destruction.
class TempDir {
public:
	TempDir();
	~TempDir();
	TempDir(const TempDir&) = delete;
	TempDir& operator=(const TempDir&) = delete;

	const std::filesystem::path& path() const { return path_; }
	std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
	std::filesystem::path path_;
};

Image random_image(std::mt19937_64& rng, int width, int height, int channels = 3);

/// One KITTI label line with the given class and box; other fields are fixed
/// plausible values.
std::string kitti_line(const std::string& object_class, const BoundingBox& box);

struct SyntheticFrame {
	std::uint32_t frame_id = 0;
	int width = 64;
	int height = 48;
	std::vector<std::pair<std::string, BoundingBox>> objects;
};

/// Writes `images/<id>.png` (uniform noise) and `labels/<id>.txt` below `root`.
void write_dataset(const std::filesystem::path& root, const std::vector<SyntheticFrame>& frames,
                   std::uint64_t seed = 7);

/// `count` frames, each with a single pedestrian plus a car.
std::vector<SyntheticFrame> single_pedestrian_frames(std::size_t count, int width = 64, int height = 48);

/// Writes a config TOML for a dataset under `root` with output `root/out`.
/// `extra` is appended verbatim.
std::filesystem::path write_config(const std::filesystem::path& root, const std::string& extra);

// Oracles, independent of the library implementation.

/// IoU by counting unit cells of integer-coordinate boxes.
double iou_by_cell_count(int ax0, int ay0, int ax1, int ay1, int bx0, int by0, int bx1, int by1);

/// PSNR straight from the definition, long double accumulation.
/// Returns +inf for identical images.
double psnr_direct(const Image& a, const Image& b);

std::size_t count_lines(const std::filesystem::path& path);

}  // namespace degrade::testing
