#pragma once

#include "degrade/bounding_box.hpp"
#include "degrade/error.hpp"
#include "degrade/subprocess.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

/// Pluggable detectors and single-ground-truth matching.
namespace degrade::detector {

inline constexpr std::string_view kProtocolVersion = "degrade-bench/1";

/// The detector answered with an error for a request (e.g. unreadable image).
/// The handle itself stays usable.
class RequestRejected : public DetectorError {
public:
	using DetectorError::DetectorError;
};

struct Detection {
	std::string class_name;
	BoundingBox box;
	double confidence = 0.0;
};

struct MatchResult {
	bool matched = false;
	double iou = 0.0;
	std::optional<double> confidence;
	std::optional<std::size_t> chosen_index;
};

inline constexpr double kDefaultConfidenceThreshold = 0.5;
inline constexpr double kDefaultIouThreshold = 0.5;

/// Picks, among detections of `target_class` with confidence >= conf_threshold,
/// the one with the largest IoU against `gt`. Ties go to the higher confidence,
/// then the lower index.
MatchResult match_single_ground_truth(std::span<const Detection> detections, const BoundingBox& gt,
                                      std::string_view target_class,
                                      double conf_threshold = kDefaultConfidenceThreshold,
                                      double iou_threshold = kDefaultIouThreshold);

/// Everything a detector may need for one image. Only `id` and `image_path`
/// cross the process boundary; the rest feeds the in-process mock.
struct DetectionRequest {
	std::uint64_t id = 0;
	std::filesystem::path image_path;
	std::uint32_t frame_id = 0;
	std::string condition_key;
	BoundingBox ground_truth;
};

/// A detector handle serves one request at a time.
class Detector {
public:
	virtual ~Detector() = default;

	/// Throws DetectorError on timeout, malformed response or process death.
	virtual std::vector<Detection> detect(const DetectionRequest& request) = 0;

	virtual bool healthy() const noexcept { return true; }
	/// Brings an unhealthy handle back. No-op for in-process detectors.
	virtual void restart() {}

	/// Identity recorded in the run manifest.
	virtual nlohmann::json identity() const = 0;
};

enum class MockMode { echo_gt, offset, noisy, silent };

std::string_view to_string(MockMode mode) noexcept;
MockMode parse_mock_mode(std::string_view text);

struct MockDetectorConfig {
	MockMode mode = MockMode::echo_gt;
	double offset_x = 0.0;
	double offset_y = 0.0;
	/// Standard deviation in pixels of the per-edge jitter in noisy mode.
	double noise_sigma = 4.0;
	std::uint64_t seed = 0;
	std::string class_name = "Pedestrian";
};

/// In-process detector derived from the ground truth. Noisy mode draws from a
/// generator keyed by (seed, frame, condition), so results do not depend on
/// scheduling.
class MockDetector final : public Detector {
public:
	explicit MockDetector(MockDetectorConfig config) : config_(std::move(config)) {}

	std::vector<Detection> detect(const DetectionRequest& request) override;
	nlohmann::json identity() const override;

private:
	MockDetectorConfig config_;
};

// Wire format: one JSON object per line over the child's stdin/stdout.
std::string encode_handshake();
/// Returns the detector's metadata object. Throws DetectorError (id 0) on a
/// missing or mismatching protocol version.
nlohmann::json decode_handshake(std::string_view line);
std::string encode_request(std::uint64_t id, const std::filesystem::path& image_path);
/// Throws DetectorError on an id mismatch, an error response or a malformed body.
std::vector<Detection> decode_response(std::string_view line, std::uint64_t expected_id);
std::string encode_response(std::uint64_t id, std::span<const Detection> detections);

struct SubprocessDetectorConfig {
	std::string command;
	std::chrono::milliseconds timeout{std::chrono::seconds(60)};
	/// Detector class name -> evaluation class name, e.g. person -> Pedestrian.
	std::map<std::string, std::string, std::less<>> class_map;
};

/// External detector speaking the line protocol.
class SubprocessDetector final : public Detector {
public:
	/// Launches the process and performs the handshake.
	explicit SubprocessDetector(SubprocessDetectorConfig config);

	std::vector<Detection> detect(const DetectionRequest& request) override;
	bool healthy() const noexcept override { return healthy_; }
	void restart() override;
	nlohmann::json identity() const override;

	pid_t pid() const noexcept { return child_.pid(); }

private:
	void launch();

	SubprocessDetectorConfig config_;
	process::Child child_;
	nlohmann::json metadata_;
	bool healthy_ = false;
};

/// Restarts the wrapped handle and retries a failed request up to `retries` times.
class RetryingDetector final : public Detector {
public:
	RetryingDetector(std::unique_ptr<Detector> inner, int retries) : inner_(std::move(inner)), retries_(retries) {}

	std::vector<Detection> detect(const DetectionRequest& request) override;
	bool healthy() const noexcept override { return inner_->healthy(); }
	void restart() override { inner_->restart(); }
	nlohmann::json identity() const override { return inner_->identity(); }

private:
	std::unique_ptr<Detector> inner_;
	int retries_;
};

}  // namespace degrade::detector
