#include "degrade/records.hpp"

#include "degrade/error.hpp"
#include "degrade/text.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fcntl.h>
#include <unistd.h>

namespace degrade::results {

using degradation::ColorSpace;
using degradation::CrfValue;

std::string Condition::key() const {
	if (!degraded)
		return "baseline";
	char crf[8];
	std::snprintf(crf, sizeof crf, "crf%02d", degraded->crf.value());
	return degraded->codec + "/" + std::string(degradation::to_string(degraded->colorspace)) + "/" + crf;
}

void validate_record(const EvaluationRecord& r) {
	auto bad = [&](const std::string& why) {
		return Error("invalid record (frame " + std::to_string(r.frame_id) + ", " + r.condition.key() + "): " + why);
	};
	if (!(r.iou >= 0.0 && r.iou <= 1.0))
		throw bad("iou outside [0,1]");
	if (r.confidence && !(*r.confidence >= 0.0 && *r.confidence <= 1.0))
		throw bad("confidence outside [0,1]");
	if (r.condition.is_baseline()) {
		if (r.psnr_db || r.encoded_bytes)
			throw bad("baseline records carry no psnr or encoded bytes");
	} else if (!r.failed && (!r.psnr_db || !r.encoded_bytes)) {
		throw bad("degraded record needs psnr and encoded bytes unless failed");
	}
	if (r.psnr_db && std::isnan(r.psnr_db->db()))
		throw bad("psnr is NaN");
}

nlohmann::json to_json(const EvaluationRecord& r) {
	nlohmann::json j;
	j["frame_id"] = r.frame_id;
	if (r.condition.is_baseline())
		j["condition"] = "baseline";
	else
		j["condition"] = {{"codec", r.condition.degraded->codec},
		                  {"crf", r.condition.degraded->crf.value()},
		                  {"colorspace", degradation::to_string(r.condition.degraded->colorspace)}};
	j["iou"] = r.iou;
	j["confidence"] = r.confidence ? nlohmann::json(*r.confidence) : nlohmann::json();
	if (!r.psnr_db)
		j["psnr_db"] = nullptr;
	else if (r.psnr_db->is_infinite())
		j["psnr_db"] = "inf";
	else
		j["psnr_db"] = r.psnr_db->db();
	j["encoded_bytes"] = r.encoded_bytes ? nlohmann::json(*r.encoded_bytes) : nlohmann::json();
	j["failed"] = r.failed;
	if (!r.diagnostics.empty())
		j["diagnostics"] = r.diagnostics;
	return j;
}

EvaluationRecord record_from_json(const nlohmann::json& j) {
	EvaluationRecord r;
	r.frame_id = j.at("frame_id").get<std::uint32_t>();
	const auto& c = j.at("condition");
	if (c.is_string()) {
		if (c.get<std::string>() != "baseline")
			throw Error("unknown condition " + c.dump());
		r.condition = Condition::baseline();
	} else {
		r.condition = Condition::of(c.at("codec").get<std::string>(), CrfValue(c.at("crf").get<int>()),
		                            degradation::parse_colorspace(c.at("colorspace").get<std::string>()));
	}
	r.iou = j.at("iou").get<double>();
	if (auto it = j.find("confidence"); it != j.end() && !it->is_null())
		r.confidence = it->get<double>();
	if (auto it = j.find("psnr_db"); it != j.end() && !it->is_null()) {
		if (it->is_string()) {
			if (it->get<std::string>() != "inf")
				throw Error("psnr_db must be a number, \"inf\" or null");
			r.psnr_db = metrics::Psnr::infinite();
		} else {
			r.psnr_db = metrics::Psnr(it->get<double>());
		}
	}
	if (auto it = j.find("encoded_bytes"); it != j.end() && !it->is_null())
		r.encoded_bytes = it->get<std::uint64_t>();
	r.failed = j.value("failed", false);
	r.diagnostics = j.value("diagnostics", std::string{});
	validate_record(r);
	return r;
}

std::vector<EvaluationRecord> parse_records(std::string_view jsonl) {
	const bool torn = !jsonl.empty() && jsonl.back() != '\n';
	auto lines = text::split_lines(jsonl);
	if (torn)
		lines.pop_back();

	std::vector<EvaluationRecord> out;
	out.reserve(lines.size());
	for (std::size_t i = 0; i < lines.size(); ++i) {
		if (text::trim(lines[i]).empty())
			continue;
		try {
			out.push_back(record_from_json(nlohmann::json::parse(lines[i])));
		} catch (const std::exception& e) {
			throw ParseError(i + 1, std::string("bad record: ") + e.what());
		}
	}
	return out;
}

std::vector<EvaluationRecord> load_records(const std::filesystem::path& path) {
	return parse_records(text::read_file(path));
}

void sort_records(std::vector<EvaluationRecord>& records) {
	std::ranges::sort(records, [](const auto& a, const auto& b) { return a.key() < b.key(); });
}

nlohmann::json RunManifest::to_json() const {
	return {
		{"configuration_hash", configuration_hash},
		{"codec_versions", codec_versions},
		{"adapter_commands", adapter_commands},
		{"detector", detector},
		{"thresholds", thresholds},
		{"start_timestamp", start_timestamp},
		{"end_timestamp", end_timestamp ? nlohmann::json(*end_timestamp) : nlohmann::json()},
	};
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
	RunManifest m;
	m.configuration_hash = j.at("configuration_hash").get<std::string>();
	m.codec_versions = j.value("codec_versions", nlohmann::json::object());
	m.adapter_commands = j.value("adapter_commands", nlohmann::json::object());
	m.detector = j.value("detector", nlohmann::json::object());
	m.thresholds = j.value("thresholds", nlohmann::json::object());
	m.start_timestamp = j.value("start_timestamp", std::string{});
	if (auto it = j.find("end_timestamp"); it != j.end() && it->is_string())
		m.end_timestamp = it->get<std::string>();
	return m;
}

std::optional<RunManifest> read_manifest(const std::filesystem::path& dir) {
	const auto path = dir / kManifestFile;
	if (!std::filesystem::exists(path))
		return std::nullopt;
	try {
		return RunManifest::from_json(nlohmann::json::parse(text::read_file(path)));
	} catch (const nlohmann::json::exception& e) {
		throw StoreError("corrupt manifest " + path.string() + ": " + e.what());
	}
}

RunManifest ensure_manifest(const std::filesystem::path& dir, const RunManifest& manifest) {
	if (auto existing = read_manifest(dir)) {
		if (existing->configuration_hash != manifest.configuration_hash)
			throw StoreError(dir.string() + " holds a run with a different configuration (hash " +
			                 existing->configuration_hash + ", now " + manifest.configuration_hash + ")");
		return *existing;
	}
	std::filesystem::create_directories(dir);
	text::write_file_atomic(dir / kManifestFile, manifest.to_json().dump(2) + "\n");
	return manifest;
}

void finalize_manifest(const std::filesystem::path& dir, const std::string& end_timestamp) {
	auto m = read_manifest(dir);
	if (!m)
		throw StoreError("no manifest in " + dir.string());
	m->end_timestamp = end_timestamp;
	text::write_file_atomic(dir / kManifestFile, m->to_json().dump(2) + "\n");
}

std::string utc_timestamp() {
	const std::time_t now = std::time(nullptr);
	std::tm tm{};
	::gmtime_r(&now, &tm);
	char buf[32];
	std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
	return buf;
}

RecordStore::RecordStore(const std::filesystem::path& dir) : path_(dir / kRecordsFile) {
	if (!read_manifest(dir))
		throw StoreError("no manifest in " + dir.string() + "; records must follow a manifest");

	if (std::filesystem::exists(path_)) {
		const std::string content = text::read_file(path_);
		records_ = parse_records(content);
		const auto complete = content.rfind('\n') == std::string::npos ? 0 : content.rfind('\n') + 1;
		if (complete != content.size())
			std::filesystem::resize_file(path_, complete);
		for (const auto& r : records_)
			if (!keys_.insert(r.key()).second)
				throw StoreError("duplicate record for frame " + std::to_string(r.frame_id) + ", " + r.condition.key() +
				                 " in " + path_.string());
	}

	fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
	if (fd_ < 0)
		throw StoreError("cannot open " + path_.string() + ": " + std::strerror(errno));
}

RecordStore::~RecordStore() {
	if (fd_ >= 0)
		::close(fd_);
}

void RecordStore::append(const EvaluationRecord& record) {
	validate_record(record);
	const std::string line = to_json(record).dump() + "\n";

	std::lock_guard lock(mutex_);
	if (keys_.contains(record.key()))
		throw StoreError("duplicate record for frame " + std::to_string(record.frame_id) + ", " +
		                 record.condition.key());
	std::size_t off = 0;
	while (off < line.size()) {
		const ssize_t n = ::write(fd_, line.data() + off, line.size() - off);
		if (n < 0) {
			if (errno == EINTR)
				continue;
			throw StoreError("append to " + path_.string() + " failed: " + std::strerror(errno));
		}
		off += static_cast<std::size_t>(n);
	}
	keys_.insert(record.key());
	records_.push_back(record);
}

bool RecordStore::contains(std::uint32_t frame_id, const Condition& condition) const {
	std::lock_guard lock(mutex_);
	return keys_.contains({condition, frame_id});
}

std::size_t RecordStore::size() const {
	std::lock_guard lock(mutex_);
	return records_.size();
}

std::vector<EvaluationRecord> RecordStore::records() const {
	std::vector<EvaluationRecord> copy;
	{
		std::lock_guard lock(mutex_);
		copy = records_;
	}
	sort_records(copy);
	return copy;
}

}  // namespace degrade::results
