#include "degrade/degradation.hpp"

#include "degrade/dataset.hpp"
#include "degrade/error.hpp"
#include "degrade/worker_pool.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <unistd.h>

namespace degrade::degradation {

namespace {

template <typename T>
void sort_unique(std::vector<T>& values, std::string_view what) {
	if (values.empty())
		throw Error("sweep plan has no " + std::string(what));
	std::ranges::sort(values);
	if (std::ranges::adjacent_find(values) != values.end())
		throw Error("sweep plan lists a duplicate " + std::string(what));
}

}  // namespace

SweepPlan plan_sweep(std::vector<std::uint32_t> frames, std::vector<std::string> codecs,
                     std::vector<CrfValue> crf_values, std::vector<ColorSpace> colorspaces) {
	sort_unique(frames, "frame");
	sort_unique(codecs, "codec");
	sort_unique(crf_values, "CRF value");
	sort_unique(colorspaces, "colorspace");
	for (const auto& c : codecs)
		if (!is_registered_codec(c))
			throw Error("codec '" + c + "' is not registered");

	SweepPlan plan;
	plan.expected_candidates = frames.size() * codecs.size() * crf_values.size() * colorspaces.size();
	plan.frames = std::move(frames);
	plan.codecs = std::move(codecs);
	plan.crf_values = std::move(crf_values);
	plan.colorspaces = std::move(colorspaces);
	return plan;
}

SweepTuple SweepPlan::at(std::size_t index) const {
	if (index >= expected_candidates)
		throw Error("sweep index out of range");
	const std::size_t cs = index % colorspaces.size();
	index /= colorspaces.size();
	const std::size_t crf = index % crf_values.size();
	index /= crf_values.size();
	const std::size_t codec = index % codecs.size();
	index /= codecs.size();
	return {frames[index], codecs[codec], crf_values[crf], colorspaces[cs]};
}

Image grayscale_roundtrip(const Image& image) {
	if (image.channels() != 3)
		throw Error("grayscale roundtrip needs a 3-channel image, got " + std::to_string(image.channels()));
	Image out = image;
	auto px = out.samples();
	for (std::size_t i = 0; i < px.size(); i += 3) {
		// 0.299 R + 0.587 G + 0.114 B in thousandths; +500 rounds half up.
		const int luma = (299 * px[i] + 587 * px[i + 1] + 114 * px[i + 2] + 500) / 1000;
		const auto v = static_cast<std::uint8_t>(luma);
		px[i] = px[i + 1] = px[i + 2] = v;
	}
	return out;
}

std::filesystem::path candidate_path(const std::filesystem::path& output_dir, const SweepTuple& t) {
	char crf[8];
	std::snprintf(crf, sizeof crf, "crf%02d", t.crf.value());
	return output_dir / "candidates" / t.codec / std::string(to_string(t.colorspace)) / crf /
	       (dataset::frame_stem(t.frame_id) + ".png");
}

ScratchDir::ScratchDir(const std::filesystem::path& parent, std::string_view prefix) {
	std::filesystem::create_directories(parent);
	std::string pattern = (parent / (std::string(prefix) + "-XXXXXX")).string();
	if (!::mkdtemp(pattern.data()))
		throw Error("cannot create scratch directory under " + parent.string());
	path_ = pattern;
}

ScratchDir::~ScratchDir() {
	std::error_code ec;
	std::filesystem::remove_all(path_, ec);
}

std::filesystem::path default_scratch_root() {
	if (const char* env = std::getenv("DEGRADE_BENCH_TMPDIR"); env && *env)
		return env;
	return std::filesystem::temp_directory_path();
}

namespace {

struct WorkerState {
	std::unique_ptr<ScratchDir> scratch;
	std::optional<std::uint32_t> frame_id;
	Image original;
	std::optional<Image> gray;

	const Image& source(std::uint32_t id, const std::filesystem::path& path, ColorSpace cs) {
		if (frame_id != id) {
			original = read_png_rgb(path);
			gray.reset();
			frame_id = id;
		}
		if (cs == ColorSpace::rgb)
			return original;
		if (!gray)
			gray = grayscale_roundtrip(original);
		return *gray;
	}
};

}  // namespace

std::vector<DegradationCandidate> run_sweep(const SweepPlan& plan, const AdapterSet& adapters,
                                            const std::map<std::uint32_t, std::filesystem::path>& originals,
                                            const SweepOptions& options) {
	namespace fs = std::filesystem;
	for (auto id : plan.frames) {
		auto it = originals.find(id);
		if (it == originals.end() || !fs::exists(it->second))
			throw Error("original image for frame " + std::to_string(id) + " is missing");
	}
	for (const auto& c : plan.codecs)
		if (!adapters.contains(c))
			throw Error("no adapter configured for codec '" + c + "'");

	// Directory creation is hoisted so workers never race on it.
	for (const auto& codec : plan.codecs)
		for (auto cs : plan.colorspaces)
			for (auto crf : plan.crf_values)
				fs::create_directories(candidate_path(options.output_dir, {0, codec, crf, cs}).parent_path());

	const fs::path scratch_root = options.scratch_root.empty() ? default_scratch_root() : options.scratch_root;
	const std::size_t workers = std::max<std::size_t>(1, options.workers);
	std::vector<WorkerState> states(workers);
	std::vector<std::optional<DegradationCandidate>> slots(options.collect ? plan.size() : 0);

	parallel_for(plan.size(), workers, [&](std::size_t worker, std::size_t index) {
		SweepTuple tuple = plan.at(index);
		if (options.skip && options.skip(tuple))
			return;

		auto& state = states[worker];
		if (!state.scratch)
			state.scratch = std::make_unique<ScratchDir>(scratch_root);

		const Image& source = state.source(tuple.frame_id, originals.at(tuple.frame_id), tuple.colorspace);
		const EncoderAdapter& adapter = *adapters.find(tuple.codec)->second;

		DegradationCandidate candidate;
		candidate.tuple = std::move(tuple);
		std::optional<Image> decoded;
		try {
			auto result = encode_decode(adapter, source, candidate.tuple.crf, candidate.tuple.colorspace,
			                            state.scratch->path());
			auto quality = metrics::psnr(source, result.decoded);
			quality.encoded_bytes = result.encoded_bytes;
			candidate.encoded_bytes = result.encoded_bytes;
			candidate.quality = quality;
			candidate.decoded_image_path = candidate_path(options.output_dir, candidate.tuple);
			write_png(candidate.decoded_image_path, result.decoded);
			decoded = std::move(result.decoded);
		} catch (const AdapterError& e) {
			candidate.failed = true;
			candidate.quality.reset();
			candidate.decoded_image_path.clear();
			candidate.diagnostics = e.what();
		}

		if (options.on_candidate)
			options.on_candidate(worker, candidate, decoded ? &*decoded : nullptr);
		if (options.collect)
			slots[index] = std::move(candidate);
	});

	std::vector<DegradationCandidate> out;
	out.reserve(slots.size());
	for (auto& slot : slots)
		if (slot)
			out.push_back(std::move(*slot));
	return out;
}

}  // namespace degrade::degradation
