#include "degrade/dataset.hpp"

#include "degrade/error.hpp"
#include "degrade/image.hpp"
#include "degrade/text.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

namespace degrade::dataset {

namespace {

constexpr std::size_t kKittiFieldCount = 15;

void validate_label(const KittiObjectLabel& l, std::size_t line_no) {
	if (!l.bbox.valid())
		throw ParseError(line_no, "bounding box has min > max");
	// DontCare regions carry the KITTI sentinels (-1, -1, -10) instead of
	// real truncation/occlusion/alpha values.
	if (l.object_class == "DontCare")
		return;
	if (l.truncation < 0.0 || l.truncation > 1.0)
		throw ParseError(line_no, "truncation outside [0,1]");
	if (l.occlusion < 0 || l.occlusion > 3)
		throw ParseError(line_no, "occlusion outside {0,1,2,3}");
	if (std::abs(l.alpha) > std::numbers::pi + 1e-9)
		throw ParseError(line_no, "alpha outside [-pi,pi]");
}

}  // namespace

std::vector<KittiObjectLabel> parse_kitti_label_file(std::string_view text) {
	std::vector<KittiObjectLabel> labels;
	std::size_t line_no = 0;
	for (std::string_view line : text::split_lines(text)) {
		++line_no;
		auto fields = text::split_whitespace(line);
		if (fields.empty())
			continue;
		if (fields.size() != kKittiFieldCount)
			throw ParseError(line_no, "expected 15 fields, found " + std::to_string(fields.size()));

		auto num = [&](std::size_t i) {
			auto v = text::parse_double(fields[i]);
			if (!v)
				throw ParseError(line_no, "field " + std::to_string(i + 1) + " is not numeric: '" + std::string(fields[i]) + "'");
			return *v;
		};

		KittiObjectLabel l;
		l.object_class = std::string(fields[0]);
		l.truncation = num(1);
		auto occ = text::parse_int(fields[2]);
		if (!occ)
			throw ParseError(line_no, "field 3 is not an integer: '" + std::string(fields[2]) + "'");
		l.occlusion = *occ;
		l.alpha = num(3);
		l.bbox = {num(4), num(5), num(6), num(7)};
		l.dimensions_hwl = {num(8), num(9), num(10)};
		l.location_xyz = {num(11), num(12), num(13)};
		l.rotation_y = num(14);
		validate_label(l, line_no);
		labels.push_back(std::move(l));
	}
	return labels;
}

std::string format_kitti_label(const KittiObjectLabel& l) {
	std::string out = l.object_class;
	auto put = [&](double v) {
		out += ' ';
		out += text::format_double(v);
	};
	put(l.truncation);
	out += ' ';
	out += std::to_string(l.occlusion);
	put(l.alpha);
	put(l.bbox.x_min);
	put(l.bbox.y_min);
	put(l.bbox.x_max);
	put(l.bbox.y_max);
	for (double v : l.dimensions_hwl)
		put(v);
	for (double v : l.location_xyz)
		put(v);
	put(l.rotation_y);
	return out;
}

YoloAnnotation convert_to_yolo(const KittiObjectLabel& label, const ImageFrame& frame, const ClassMap& class_map) {
	auto it = class_map.find(label.object_class);
	if (it == class_map.end())
		throw Error("class '" + label.object_class + "' is not in the class map");
	if (frame.width <= 0 || frame.height <= 0)
		throw Error("frame " + std::to_string(frame.frame_id) + " has no valid dimensions");
	if (!label.bbox.valid())
		throw Error("invalid bounding box");

	const double w = frame.width;
	const double h = frame.height;
	const BoundingBox b = label.bbox.clamped(w, h);
	if (b.width() <= 0.0 || b.height() <= 0.0)
		throw Error("bounding box is empty after clamping to frame " + std::to_string(frame.frame_id));

	return {
		it->second,
		(b.x_min + b.x_max) / (2.0 * w),
		(b.y_min + b.y_max) / (2.0 * h),
		(b.x_max - b.x_min) / w,
		(b.y_max - b.y_min) / h,
	};
}

BoundingBox invert_yolo(const YoloAnnotation& ann, const ImageFrame& frame) {
	const double w = frame.width;
	const double h = frame.height;
	const double cx = ann.x_center * w;
	const double cy = ann.y_center * h;
	const double half_w = ann.box_width * w / 2.0;
	const double half_h = ann.box_height * h / 2.0;
	return {cx - half_w, cy - half_h, cx + half_w, cy + half_h};
}

std::string format_yolo_line(const YoloAnnotation& ann) {
	char buf[128];
	std::snprintf(buf, sizeof buf, "%u %.6f %.6f %.6f %.6f", ann.class_id, ann.x_center, ann.y_center,
	              ann.box_width, ann.box_height);
	return buf;
}

std::vector<YoloAnnotation> parse_yolo_file(std::string_view text) {
	std::vector<YoloAnnotation> out;
	std::size_t line_no = 0;
	for (std::string_view line : text::split_lines(text)) {
		++line_no;
		auto fields = text::split_whitespace(line);
		if (fields.empty())
			continue;
		if (fields.size() != 5)
			throw ParseError(line_no, "expected 5 fields, found " + std::to_string(fields.size()));
		auto id = text::parse_int(fields[0]);
		if (!id || *id < 0)
			throw ParseError(line_no, "class id must be a non-negative integer");
		YoloAnnotation ann;
		ann.class_id = static_cast<std::uint32_t>(*id);
		double* dst[] = {&ann.x_center, &ann.y_center, &ann.box_width, &ann.box_height};
		for (std::size_t i = 0; i < 4; ++i) {
			auto v = text::parse_double(fields[i + 1]);
			if (!v || *v < 0.0 || *v > 1.0)
				throw ParseError(line_no, "field " + std::to_string(i + 2) + " must be a number in [0,1]");
			*dst[i] = *v;
		}
		out.push_back(ann);
	}
	return out;
}

std::vector<LabeledFrame> select_single_pedestrian_frames(std::vector<LabeledFrame> frames) {
	std::erase_if(frames, [](const LabeledFrame& f) {
		return std::ranges::count(f.labels, kPedestrian, &KittiObjectLabel::object_class) != 1;
	});
	std::ranges::stable_sort(frames, {}, [](const LabeledFrame& f) { return f.frame.frame_id; });
	return frames;
}

const KittiObjectLabel& single_pedestrian(const LabeledFrame& frame) {
	const KittiObjectLabel* found = nullptr;
	for (const auto& l : frame.labels) {
		if (l.object_class != kPedestrian)
			continue;
		if (found)
			throw Error("frame " + std::to_string(frame.frame.frame_id) + " has more than one pedestrian");
		found = &l;
	}
	if (!found)
		throw Error("frame " + std::to_string(frame.frame.frame_id) + " has no pedestrian");
	return *found;
}

std::uint32_t parse_frame_id(std::string_view stem) {
	if (stem.empty() || stem.size() > 9 || !std::ranges::all_of(stem, [](char c) { return c >= '0' && c <= '9'; }))
		throw Error("frame stem '" + std::string(stem) + "' is not a decimal frame id");
	return static_cast<std::uint32_t>(std::stoul(std::string(stem)));
}

std::string frame_stem(std::uint32_t frame_id) {
	char buf[16];
	std::snprintf(buf, sizeof buf, "%06u", frame_id);
	return buf;
}

ImageFrame load_frame(const std::filesystem::path& image_path) {
	ImageFrame f;
	f.frame_id = parse_frame_id(image_path.stem().string());
	f.source_path = image_path;
	auto size = read_png_size(image_path);
	f.width = size.width;
	f.height = size.height;
	return f;
}

std::vector<LabeledFrame> load_kitti_dataset(const std::filesystem::path& images_dir,
                                             const std::filesystem::path& labels_dir) {
	namespace fs = std::filesystem;
	if (!fs::is_directory(labels_dir))
		throw Error("label directory not found: " + labels_dir.string());
	if (!fs::is_directory(images_dir))
		throw Error("image directory not found: " + images_dir.string());

	std::vector<LabeledFrame> frames;
	std::set<std::uint32_t> seen;
	for (const auto& entry : fs::directory_iterator(labels_dir)) {
		if (!entry.is_regular_file() || entry.path().extension() != ".txt")
			continue;
		const auto stem = entry.path().stem().string();
		const auto image_path = images_dir / (stem + ".png");
		if (!fs::exists(image_path))
			throw Error("no image for label file " + entry.path().string());

		LabeledFrame lf;
		lf.frame = load_frame(image_path);
		if (!seen.insert(lf.frame.frame_id).second)
			throw Error("duplicate frame id " + std::to_string(lf.frame.frame_id));
		try {
			lf.labels = parse_kitti_label_file(text::read_file(entry.path()));
		} catch (const ParseError& e) {
			throw ParseError(0, entry.path().string() + ": " + e.what());
		}
		frames.push_back(std::move(lf));
	}
	std::ranges::sort(frames, {}, [](const LabeledFrame& f) { return f.frame.frame_id; });
	return frames;
}

}  // namespace degrade::dataset
