#pragma once

#include "degrade/bounding_box.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

/// KITTI object labels, YOLO annotations and the single-pedestrian subset.
namespace degrade::dataset {

inline constexpr std::string_view kPedestrian = "Pedestrian";

/// One line of a KITTI object label file.
struct KittiObjectLabel {
	std::string object_class;
	double truncation = 0.0;
	int occlusion = 0;
	double alpha = 0.0;
	BoundingBox bbox;
	std::array<double, 3> dimensions_hwl{};
	std::array<double, 3> location_xyz{};
	double rotation_y = 0.0;

	friend bool operator==(const KittiObjectLabel&, const KittiObjectLabel&) = default;
};

struct ImageFrame {
	std::uint32_t frame_id = 0;
	int width = 0;
	int height = 0;
	std::filesystem::path source_path;

	/// File stem shared by the image and its label file, e.g. "000123".
	std::string stem() const { return source_path.stem().string(); }
};

/// Normalized box: center and size as fractions of the image extent.
struct YoloAnnotation {
	std::uint32_t class_id = 0;
	double x_center = 0.0;
	double y_center = 0.0;
	double box_width = 0.0;
	double box_height = 0.0;
};

using ClassMap = std::map<std::string, std::uint32_t, std::less<>>;

inline ClassMap default_class_map() { return {{std::string(kPedestrian), 0}}; }

struct LabeledFrame {
	ImageFrame frame;
	std::vector<KittiObjectLabel> labels;
};

/// Parses KITTI label text. Blank lines are ignored; any other line must hold
/// exactly 15 fields or a ParseError naming the line is thrown.
std::vector<KittiObjectLabel> parse_kitti_label_file(std::string_view text);

/// Inverse of the parser for a single label (shortest round-trip numbers).
std::string format_kitti_label(const KittiObjectLabel& label);

/// Clamps the box to the frame, then normalizes. Throws on unmapped class or
/// a box that is empty after clamping.
YoloAnnotation convert_to_yolo(const KittiObjectLabel& label, const ImageFrame& frame, const ClassMap& class_map);

BoundingBox invert_yolo(const YoloAnnotation& ann, const ImageFrame& frame);

/// `class_id x_center y_center width height`, six decimals.
std::string format_yolo_line(const YoloAnnotation& ann);
std::vector<YoloAnnotation> parse_yolo_file(std::string_view text);

/// Frames holding exactly one "Pedestrian" label, ordered by frame_id.
/// Labels of other classes do not disqualify a frame.
std::vector<LabeledFrame> select_single_pedestrian_frames(std::vector<LabeledFrame> frames);

/// The one pedestrian label of a selected frame.
const KittiObjectLabel& single_pedestrian(const LabeledFrame& frame);

/// Pairs `<stem>.txt` in `labels_dir` with `<stem>.png` in `images_dir`.
/// Stems must be decimal frame ids. Result ordered by frame_id.
std::vector<LabeledFrame> load_kitti_dataset(const std::filesystem::path& images_dir,
                                             const std::filesystem::path& labels_dir);

/// Reads dimensions from the PNG header.
ImageFrame load_frame(const std::filesystem::path& image_path);

std::uint32_t parse_frame_id(std::string_view stem);

/// Zero-padded six-digit stem used for candidate file names.
std::string frame_stem(std::uint32_t frame_id);

}  // namespace degrade::dataset
