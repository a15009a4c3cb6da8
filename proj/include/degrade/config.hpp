#pragma once

#include "degrade/codec.hpp"
#include "degrade/dataset.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace degrade::app {

struct DetectorSettings {
	/// "subprocess" or one of the mock modes.
	std::string mode = "echo_gt";
	std::string command;
	double timeout_seconds = 60.0;
	int retries = 2;
	std::string target_class = "Pedestrian";
	/// Detector class name -> evaluation class name.
	std::map<std::string, std::string, std::less<>> class_map;
	double offset_x = 0.0;
	double offset_y = 0.0;
	double noise_sigma = 4.0;
};

struct RunConfig {
	std::filesystem::path images;
	std::filesystem::path labels;
	std::filesystem::path output;
	dataset::ClassMap class_map = dataset::default_class_map();

	/// External codec definitions; built-in mocks need none.
	std::vector<degradation::CommandCodecConfig> codec_definitions;
	/// Codecs swept, in any order.
	std::vector<std::string> codecs;
	std::vector<degradation::CrfValue> crf_values = degradation::crf_range(0, 51);
	std::vector<degradation::ColorSpace> colorspaces = {degradation::ColorSpace::rgb,
	                                                    degradation::ColorSpace::grayscale};
	double codec_timeout_seconds = 120.0;

	DetectorSettings detector;
	double confidence_threshold = 0.5;
	double iou_threshold = 0.5;
	std::size_t workers = 1;
	std::uint64_t seed = 0;
	/// Failed-candidate fraction above which `sweep` exits non-zero.
	double max_failure_fraction = 0.01;
};

/// Parses TOML. Relative paths are resolved against `base_dir`.
RunConfig parse_config(std::string_view toml_text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

/// Throws ConfigError on the first broken invariant.
void validate(const RunConfig& config);

/// Canonical JSON of every field that can change results (not workers, output
/// directory or sweep filters).
nlohmann::json identity_json(const RunConfig& config);
/// Hex SHA-256 of identity_json.
std::string configuration_hash(const RunConfig& config);

std::string sha256_hex(std::string_view data);

}  // namespace degrade::app
