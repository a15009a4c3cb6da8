#include "degrade/detector.hpp"

#include "degrade/metrics.hpp"

#include <random>

namespace degrade::detector {

MatchResult match_single_ground_truth(std::span<const Detection> detections, const BoundingBox& gt,
                                      std::string_view target_class, double conf_threshold, double iou_threshold) {
	MatchResult best;
	for (std::size_t i = 0; i < detections.size(); ++i) {
		const auto& d = detections[i];
		if (d.class_name != target_class || d.confidence < conf_threshold)
			continue;
		const double v = metrics::iou(d.box, gt);
		const bool better = !best.chosen_index || v > best.iou || (v == best.iou && d.confidence > *best.confidence);
		if (better) {
			best.iou = v;
			best.confidence = d.confidence;
			best.chosen_index = i;
		}
	}
	best.matched = best.chosen_index && best.iou >= iou_threshold;
	return best;
}

std::string_view to_string(MockMode mode) noexcept {
	switch (mode) {
	case MockMode::echo_gt:
		return "echo_gt";
	case MockMode::offset:
		return "offset";
	case MockMode::noisy:
		return "noisy";
	case MockMode::silent:
		return "silent";
	}
	return "?";
}

MockMode parse_mock_mode(std::string_view text) {
	for (auto m : {MockMode::echo_gt, MockMode::offset, MockMode::noisy, MockMode::silent})
		if (to_string(m) == text)
			return m;
	throw Error("unknown mock detector mode '" + std::string(text) + "'");
}

namespace {

// FNV-1a; stable across platforms, unlike std::hash.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 1469598103934665603ull) {
	for (unsigned char c : bytes) {
		h ^= c;
		h *= 1099511628211ull;
	}
	return h;
}

}  // namespace

std::vector<Detection> MockDetector::detect(const DetectionRequest& request) {
	const BoundingBox& gt = request.ground_truth;
	switch (config_.mode) {
	case MockMode::silent:
		return {};
	case MockMode::echo_gt:
		return {{config_.class_name, gt, 1.0}};
	case MockMode::offset:
		return {{config_.class_name, gt.translated(config_.offset_x, config_.offset_y), 1.0}};
	case MockMode::noisy: {
		const std::string key = std::to_string(config_.seed) + "/" + std::to_string(request.frame_id) + "/" +
		                        request.condition_key;
		std::mt19937_64 rng(fnv1a(key));
		std::normal_distribution<double> jitter(0.0, config_.noise_sigma);
		std::uniform_real_distribution<double> conf(0.3, 1.0);
		BoundingBox b{gt.x_min + jitter(rng), gt.y_min + jitter(rng), gt.x_max + jitter(rng), gt.y_max + jitter(rng)};
		if (b.x_min > b.x_max)
			std::swap(b.x_min, b.x_max);
		if (b.y_min > b.y_max)
			std::swap(b.y_min, b.y_max);
		return {{config_.class_name, b, conf(rng)}};
	}
	}
	return {};
}

nlohmann::json MockDetector::identity() const {
	nlohmann::json j{{"kind", "mock"}, {"mode", to_string(config_.mode)}, {"seed", config_.seed}};
	if (config_.mode == MockMode::offset)
		j["offset"] = {config_.offset_x, config_.offset_y};
	if (config_.mode == MockMode::noisy)
		j["noise_sigma"] = config_.noise_sigma;
	return j;
}

std::string encode_handshake() {
	return nlohmann::json{{"type", "handshake"}, {"protocol", kProtocolVersion}}.dump();
}

nlohmann::json decode_handshake(std::string_view line) {
	auto j = nlohmann::json::parse(line, nullptr, false);
	if (j.is_discarded() || !j.is_object())
		throw DetectorError(0, "handshake response is not a JSON object");
	if (!j.contains("protocol") || !j["protocol"].is_string() || j["protocol"] != kProtocolVersion)
		throw DetectorError(0, "detector does not speak " + std::string(kProtocolVersion));
	return j.value("detector", nlohmann::json::object());
}

std::string encode_request(std::uint64_t id, const std::filesystem::path& image_path) {
	return nlohmann::json{{"id", id}, {"image_path", image_path.string()}}.dump();
}

std::string encode_response(std::uint64_t id, std::span<const Detection> detections) {
	nlohmann::json arr = nlohmann::json::array();
	for (const auto& d : detections)
		arr.push_back({{"class", d.class_name},
		               {"x_min", d.box.x_min},
		               {"y_min", d.box.y_min},
		               {"x_max", d.box.x_max},
		               {"y_max", d.box.y_max},
		               {"confidence", d.confidence}});
	return nlohmann::json{{"id", id}, {"detections", std::move(arr)}}.dump();
}

std::vector<Detection> decode_response(std::string_view line, std::uint64_t expected_id) {
	auto j = nlohmann::json::parse(line, nullptr, false);
	if (j.is_discarded() || !j.is_object())
		throw DetectorError(expected_id, "malformed response: not a JSON object");
	if (!j.contains("id") || !j["id"].is_number_unsigned() || j["id"].get<std::uint64_t>() != expected_id)
		throw DetectorError(expected_id, "response id does not match request");
	if (j.contains("error"))
		throw RequestRejected(expected_id, "detector reported: " + j["error"].dump());
	if (!j.contains("detections") || !j["detections"].is_array())
		throw DetectorError(expected_id, "malformed response: missing detections array");

	std::vector<Detection> out;
	for (const auto& d : j["detections"]) {
		auto number = [&](const char* key) {
			if (!d.is_object() || !d.contains(key) || !d[key].is_number())
				throw DetectorError(expected_id, std::string("malformed detection: missing numeric '") + key + "'");
			return d[key].get<double>();
		};
		if (!d.is_object() || !d.contains("class") || !d["class"].is_string())
			throw DetectorError(expected_id, "malformed detection: missing class");
		Detection det{d["class"].get<std::string>(),
		              {number("x_min"), number("y_min"), number("x_max"), number("y_max")},
		              number("confidence")};
		if (!det.box.valid())
			throw DetectorError(expected_id, "malformed detection: box has min > max");
		if (det.confidence < 0.0 || det.confidence > 1.0)
			throw DetectorError(expected_id, "malformed detection: confidence outside [0,1]");
		out.push_back(std::move(det));
	}
	return out;
}

SubprocessDetector::SubprocessDetector(SubprocessDetectorConfig config) : config_(std::move(config)) { launch(); }

void SubprocessDetector::launch() {
	healthy_ = false;
	child_ = process::Child(process::split_command(config_.command));
	if (!child_.write_line(encode_handshake()))
		throw DetectorError(0, "detector closed its input during handshake");
	std::optional<std::string> line;
	try {
		line = child_.read_line(config_.timeout);
	} catch (const Error& e) {
		throw DetectorError(0, std::string("detector exited during handshake: ") + e.what());
	}
	if (!line)
		throw DetectorError(0, "handshake timed out");
	metadata_ = decode_handshake(*line);
	healthy_ = true;
}

void SubprocessDetector::restart() {
	child_.terminate();
	launch();
}

std::vector<Detection> SubprocessDetector::detect(const DetectionRequest& request) {
	if (!healthy_)
		throw DetectorError(request.id, "detector handle is unhealthy");
	auto fail = [&](const std::string& why) -> DetectorError {
		healthy_ = false;
		return DetectorError(request.id, why);
	};

	if (!child_.write_line(encode_request(request.id, request.image_path)))
		throw fail("detector closed its input");
	std::optional<std::string> line;
	try {
		line = child_.read_line(config_.timeout);
	} catch (const Error& e) {
		throw fail(std::string("detector died: ") + e.what());
	}
	if (!line)
		throw fail("timed out after " + std::to_string(config_.timeout.count()) + " ms");

	std::vector<Detection> detections;
	try {
		detections = decode_response(*line, request.id);
	} catch (const RequestRejected&) {
		throw;
	} catch (const DetectorError&) {
		healthy_ = false;
		throw;
	}
	for (auto& d : detections)
		if (auto it = config_.class_map.find(d.class_name); it != config_.class_map.end())
			d.class_name = it->second;
	return detections;
}

nlohmann::json SubprocessDetector::identity() const {
	nlohmann::json map = nlohmann::json::object();
	for (const auto& [k, v] : config_.class_map)
		map[k] = v;
	return {{"kind", "subprocess"},
	        {"command", config_.command},
	        {"protocol", kProtocolVersion},
	        {"class_map", std::move(map)},
	        {"metadata", metadata_}};
}

std::vector<Detection> RetryingDetector::detect(const DetectionRequest& request) {
	for (int attempt = 0;; ++attempt) {
		try {
			if (!inner_->healthy())
				inner_->restart();
			return inner_->detect(request);
		} catch (const RequestRejected&) {
			throw;
		} catch (const DetectorError&) {
			if (attempt >= retries_)
				throw;
		}
	}
}

}  // namespace degrade::detector
