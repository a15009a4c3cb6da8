#pragma once

#include "degrade/codec.hpp"
#include "degrade/metrics.hpp"

#include <nlohmann/json.hpp>

#include <compare>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

/// Evaluation records, their JSONL store and the run manifest.
namespace degrade::results {

struct DegradedCondition {
	std::string codec;
	degradation::CrfValue crf;
	degradation::ColorSpace colorspace = degradation::ColorSpace::rgb;

	friend auto operator<=>(const DegradedCondition&, const DegradedCondition&) = default;
	friend bool operator==(const DegradedCondition&, const DegradedCondition&) = default;
};

/// Either the unmodified baseline or one (codec, crf, colorspace) point.
/// Baseline orders before every degraded condition.
struct Condition {
	std::optional<DegradedCondition> degraded;

	static Condition baseline() { return {}; }
	static Condition of(std::string codec, degradation::CrfValue crf, degradation::ColorSpace cs) {
		return {DegradedCondition{std::move(codec), crf, cs}};
	}

	bool is_baseline() const noexcept { return !degraded; }
	/// "baseline" or "<codec>/<colorspace>/crf<NN>".
	std::string key() const;

	friend auto operator<=>(const Condition&, const Condition&) = default;
	friend bool operator==(const Condition&, const Condition&) = default;
};

struct EvaluationRecord {
	std::uint32_t frame_id = 0;
	Condition condition;
	double iou = 0.0;
	std::optional<double> confidence;
	std::optional<metrics::Psnr> psnr_db;
	std::optional<std::uint64_t> encoded_bytes;
	bool failed = false;
	/// Free-form failure detail; not part of the record identity.
	std::string diagnostics;

	std::pair<Condition, std::uint32_t> key() const { return {condition, frame_id}; }
};

/// Throws Error when the record breaks an invariant: iou or confidence outside
/// [0,1], a baseline carrying psnr/bytes, or a successful degraded record
/// missing either.
void validate_record(const EvaluationRecord& record);

nlohmann::json to_json(const EvaluationRecord& record);
EvaluationRecord record_from_json(const nlohmann::json& j);

/// Parses JSONL text. An unterminated final line (torn write) is ignored;
/// any other malformed line is a ParseError.
std::vector<EvaluationRecord> parse_records(std::string_view jsonl);
std::vector<EvaluationRecord> load_records(const std::filesystem::path& path);

/// Sort by (condition, frame_id).
void sort_records(std::vector<EvaluationRecord>& records);

/// Provenance of a run. Written before the first record; only end_timestamp
/// may be filled in afterwards.
struct RunManifest {
	std::string configuration_hash;
	nlohmann::json codec_versions = nlohmann::json::object();
	nlohmann::json adapter_commands = nlohmann::json::object();
	nlohmann::json detector = nlohmann::json::object();
	nlohmann::json thresholds = nlohmann::json::object();
	std::string start_timestamp;
	std::optional<std::string> end_timestamp;

	nlohmann::json to_json() const;
	static RunManifest from_json(const nlohmann::json& j);
};

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kRecordsFile = "records.jsonl";

std::optional<RunManifest> read_manifest(const std::filesystem::path& dir);

/// Writes `manifest` if the directory has none. An existing manifest is kept
/// as-is when its configuration hash matches, otherwise StoreError.
RunManifest ensure_manifest(const std::filesystem::path& dir, const RunManifest& manifest);

/// Sets end_timestamp on the existing manifest.
void finalize_manifest(const std::filesystem::path& dir, const std::string& end_timestamp);

/// Current UTC time, ISO 8601 with seconds.
std::string utc_timestamp();

/// Append-only record file. A single mutex serializes appends; each record is
/// one write(2) of a complete line.
class RecordStore {
public:
	/// Requires a manifest in `dir`. Loads existing records and drops a torn
	/// final line left by an interrupted writer.
	explicit RecordStore(const std::filesystem::path& dir);
	~RecordStore();
	RecordStore(const RecordStore&) = delete;
	RecordStore& operator=(const RecordStore&) = delete;

	/// Validates and appends. Throws StoreError on a duplicate
	/// (frame, condition) or an I/O failure.
	void append(const EvaluationRecord& record);

	bool contains(std::uint32_t frame_id, const Condition& condition) const;
	std::size_t size() const;
	/// Snapshot sorted by (condition, frame_id).
	std::vector<EvaluationRecord> records() const;

private:
	std::filesystem::path path_;
	int fd_ = -1;
	mutable std::mutex mutex_;
	std::vector<EvaluationRecord> records_;
	std::set<std::pair<Condition, std::uint32_t>> keys_;
};

}  // namespace degrade::results
