#pragma once

#include "degrade/codec.hpp"
#include "degrade/image.hpp"
#include "degrade/metrics.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

/// Codec x CRF x colorspace sweep over the evaluation frames.
namespace degrade::degradation {

/// One (frame, codec, crf, colorspace) point of the sweep.
struct SweepTuple {
	std::uint32_t frame_id = 0;
	std::string codec;
	CrfValue crf;
	ColorSpace colorspace = ColorSpace::rgb;

	friend auto operator<=>(const SweepTuple&, const SweepTuple&) = default;
	friend bool operator==(const SweepTuple&, const SweepTuple&) = default;
};

/// Cartesian product of the four dimensions, each sorted ascending.
struct SweepPlan {
	std::vector<std::uint32_t> frames;
	std::vector<std::string> codecs;
	std::vector<CrfValue> crf_values;
	std::vector<ColorSpace> colorspaces;
	std::size_t expected_candidates = 0;

	std::size_t size() const noexcept { return expected_candidates; }
	/// Tuple at a position in (frame, codec, crf, colorspace) lexicographic order.
	SweepTuple at(std::size_t index) const;
};

/// Throws on an empty dimension, a duplicate entry or an unregistered codec.
SweepPlan plan_sweep(std::vector<std::uint32_t> frames, std::vector<std::string> codecs,
                     std::vector<CrfValue> crf_values, std::vector<ColorSpace> colorspaces);

/// BT.601 luma, rounded half up, replicated into all three channels.
Image grayscale_roundtrip(const Image& image);

struct DegradationCandidate {
	SweepTuple tuple;
	std::filesystem::path decoded_image_path;
	std::uint64_t encoded_bytes = 0;
	/// Absent when the adapter failed.
	std::optional<metrics::QualityMeasurement> quality;
	bool failed = false;
	std::string diagnostics;
};

/// `candidates/<codec>/<colorspace>/crf<NN>/<frame>.png` below `output_dir`.
std::filesystem::path candidate_path(const std::filesystem::path& output_dir, const SweepTuple& tuple);

struct SweepOptions {
	std::filesystem::path output_dir;
	/// Parent for per-worker scratch directories.
	std::filesystem::path scratch_root;
	std::size_t workers = 1;
	/// Tuples for which this returns true are not executed (resume).
	std::function<bool(const SweepTuple&)> skip;
	/// Called on the worker thread right after a candidate is produced.
	/// `decoded` is null for failed candidates.
	std::function<void(std::size_t worker, const DegradationCandidate&, const Image* decoded)> on_candidate;
	/// Keep every candidate in the returned vector.
	bool collect = true;
};

/// Executes the plan. Grayscale candidates are converted before encoding and
/// measured against the grayscale original; rgb candidates against the
/// original frame. Adapter failures yield flagged candidates. Throws before
/// doing any work if an original or an adapter is missing.
std::vector<DegradationCandidate> run_sweep(const SweepPlan& plan, const AdapterSet& adapters,
                                            const std::map<std::uint32_t, std::filesystem::path>& originals,
                                            const SweepOptions& options);

/// Owns a unique temporary directory and removes it on destruction.
class ScratchDir {
public:
	explicit ScratchDir(const std::filesystem::path& parent, std::string_view prefix = "degrade-bench");
	~ScratchDir();
	ScratchDir(const ScratchDir&) = delete;
	ScratchDir& operator=(const ScratchDir&) = delete;

	const std::filesystem::path& path() const noexcept { return path_; }

private:
	std::filesystem::path path_;
};

/// DEGRADE_BENCH_TMPDIR if set, otherwise the system temporary directory.
std::filesystem::path default_scratch_root();

}  // namespace degrade::degradation
