#include "fixtures.hpp"

#include "degrade/text.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace degrade::testing {

TempDir::TempDir() {
	std::string pattern = (std::filesystem::temp_directory_path() / "degrade-test-XXXXXX").string();
	if (!::mkdtemp(pattern.data()))
		throw std::runtime_error("mkdtemp failed");
	path_ = pattern;
}

TempDir::~TempDir() {
	std::error_code ec;
	std::filesystem::remove_all(path_, ec);
}

Image random_image(std::mt19937_64& rng, int width, int height, int channels) {
	Image img(width, height, channels);
	std::uniform_int_distribution<int> dist(0, 255);
	for (auto& v : img.samples())
		v = static_cast<std::uint8_t>(dist(rng));
	return img;
}

std::string kitti_line(const std::string& object_class, const BoundingBox& box) {
	std::ostringstream ss;
	ss << object_class << " 0.00 0 -0.20 " << box.x_min << ' ' << box.y_min << ' ' << box.x_max << ' ' << box.y_max
	   << " 1.89 0.48 1.20 1.84 1.47 8.41 0.01";
	return ss.str();
}

void write_dataset(const std::filesystem::path& root, const std::vector<SyntheticFrame>& frames, std::uint64_t seed) {
	std::filesystem::create_directories(root / "images");
	std::filesystem::create_directories(root / "labels");
	std::mt19937_64 rng(seed);
	for (const auto& f : frames) {
		char stem[16];
		std::snprintf(stem, sizeof stem, "%06u", f.frame_id);
		write_png(root / "images" / (std::string(stem) + ".png"), random_image(rng, f.width, f.height));
		std::ofstream out(root / "labels" / (std::string(stem) + ".txt"));
		for (const auto& [cls, box] : f.objects)
			out << kitti_line(cls, box) << "\n";
	}
}

std::vector<SyntheticFrame> single_pedestrian_frames(std::size_t count, int width, int height) {
	std::vector<SyntheticFrame> frames;
	for (std::size_t i = 0; i < count; ++i) {
		SyntheticFrame f;
		f.frame_id = static_cast<std::uint32_t>(i * 3 + 1);
		f.width = width;
		f.height = height;
		const double x = 4.0 + static_cast<double>(i % 5) * 3.0;
		f.objects = {{"Pedestrian", {x, 6.0, x + 12.0, 30.0}}, {"Car", {30.0, 20.0, 60.0, 44.0}}};
		frames.push_back(f);
	}
	return frames;
}

std::filesystem::path write_config(const std::filesystem::path& root, const std::string& extra) {
	const auto path = root / "run.toml";
	std::ofstream out(path);
	out << "output = \"out\"\n"
	    << "workers = 2\n"
	    << "seed = 11\n\n"
	    << "[dataset]\nimages = \"images\"\nlabels = \"labels\"\n\n"
	    << extra;
	return path;
}

double iou_by_cell_count(int ax0, int ay0, int ax1, int ay1, int bx0, int by0, int bx1, int by1) {
	long inter = 0;
	long uni = 0;
	const int lo_x = std::min(ax0, bx0), hi_x = std::max(ax1, bx1);
	const int lo_y = std::min(ay0, by0), hi_y = std::max(ay1, by1);
	for (int y = lo_y; y < hi_y; ++y) {
		for (int x = lo_x; x < hi_x; ++x) {
			const bool in_a = x >= ax0 && x < ax1 && y >= ay0 && y < ay1;
			const bool in_b = x >= bx0 && x < bx1 && y >= by0 && y < by1;
			inter += in_a && in_b;
			uni += in_a || in_b;
		}
	}
	return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double psnr_direct(const Image& a, const Image& b) {
	long double sum = 0.0L;
	long double n = 0.0L;
	for (int y = 0; y < a.height(); ++y)
		for (int x = 0; x < a.width(); ++x)
			for (int c = 0; c < a.channels(); ++c) {
				const long double d = static_cast<long double>(a.at(x, y, c)) - static_cast<long double>(b.at(x, y, c));
				sum += d * d;
				n += 1.0L;
			}
	const long double mse = sum / n;
	if (mse == 0.0L)
		return std::numeric_limits<double>::infinity();
	return static_cast<double>(10.0L * std::log10(255.0L * 255.0L / mse));
}

std::size_t count_lines(const std::filesystem::path& path) {
	if (!std::filesystem::exists(path))
		return 0;
	const auto s = text::read_file(path);
	return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace degrade::testing
