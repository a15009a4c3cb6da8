#include "degrade/pipeline.hpp"

#include "degrade/error.hpp"
#include "degrade/text.hpp"
#include "degrade/worker_pool.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>

namespace degrade::app {

namespace fs = std::filesystem;
using degradation::ColorSpace;
using results::Condition;
using results::EvaluationRecord;

namespace {

constexpr const char* kSubsetFile = "subset.txt";
constexpr const char* kYoloDir = "yolo";

void emit(const LogSink& log, const std::string& line) {
	if (log)
		log(line);
}

/// Rate-limited "n/total" progress lines.
class Progress {
public:
	Progress(const LogSink& log, std::string label, std::size_t total)
		: log_(log), label_(std::move(label)), total_(total) {}

	void tick() {
		const std::size_t done = ++done_;
		const std::size_t step = std::max<std::size_t>(1, total_ / 20);
		if (done % step == 0 || done == total_)
			emit(log_, label_ + ": " + std::to_string(done) + "/" + std::to_string(total_));
	}

private:
	const LogSink& log_;
	std::string label_;
	std::size_t total_;
	std::atomic<std::size_t> done_{0};
};

std::vector<std::unique_ptr<detector::Detector>> make_detectors(const RunConfig& config, std::size_t count) {
	std::vector<std::unique_ptr<detector::Detector>> out;
	for (std::size_t i = 0; i < std::max<std::size_t>(1, count); ++i)
		out.push_back(make_detector(config));
	return out;
}

struct Evaluation {
	double iou = 0.0;
	std::optional<double> confidence;
	bool failed = false;
	std::string diagnostics;
};

Evaluation evaluate(detector::Detector& det, const RunConfig& config, const detector::DetectionRequest& request) {
	Evaluation e;
	try {
		const auto detections = det.detect(request);
		const auto match = detector::match_single_ground_truth(detections, request.ground_truth,
		                                                       config.detector.target_class,
		                                                       config.confidence_threshold, config.iou_threshold);
		e.iou = match.iou;
		e.confidence = match.confidence;
	} catch (const DetectorError& err) {
		e.failed = true;
		e.diagnostics = err.what();
	}
	return e;
}

std::uint64_t request_id() {
	static std::atomic<std::uint64_t> next{1};
	return next++;
}

}  // namespace

ConvertSummary cmd_convert_labels(const RunConfig& config, const LogSink& log) {
	const auto frames = dataset::load_kitti_dataset(config.images, config.labels);
	const auto yolo_dir = config.output / kYoloDir;
	fs::create_directories(yolo_dir);

	for (const auto& lf : frames) {
		std::string body;
		for (const auto& label : lf.labels) {
			if (!config.class_map.contains(label.object_class))
				continue;
			body += dataset::format_yolo_line(dataset::convert_to_yolo(label, lf.frame, config.class_map));
			body += '\n';
		}
		text::write_file_atomic(yolo_dir / (lf.frame.stem() + ".txt"), body);
	}

	const auto selected = dataset::select_single_pedestrian_frames(frames);
	std::string list;
	for (const auto& lf : selected)
		list += lf.frame.stem() + "\n";
	text::write_file_atomic(config.output / kSubsetFile, list);

	if (selected.empty())
		emit(log, "warning: no frame contains exactly one pedestrian; the subset is empty");
	emit(log, "convert-labels: " + std::to_string(frames.size()) + " frames, " + std::to_string(selected.size()) +
	              " single-pedestrian frames");
	return {frames.size(), selected.size()};
}

std::vector<EvaluationFrame> load_evaluation_set(const RunConfig& config) {
	const auto subset_path = config.output / kSubsetFile;
	if (!fs::exists(subset_path))
		throw Error("no " + std::string(kSubsetFile) + " in " + config.output.string() + "; run convert-labels first");

	const auto target_id = config.class_map.at(config.detector.target_class);
	std::vector<EvaluationFrame> out;
	const auto subset = text::read_file(subset_path);
	for (auto line : text::split_lines(subset)) {
		const auto stem = std::string(text::trim(line));
		if (stem.empty())
			continue;
		EvaluationFrame ef;
		ef.frame = dataset::load_frame(config.images / (stem + ".png"));
		const auto annotations = dataset::parse_yolo_file(text::read_file(config.output / kYoloDir / (stem + ".txt")));
		const auto n = std::ranges::count(annotations, target_id, &dataset::YoloAnnotation::class_id);
		if (n != 1)
			throw Error("frame " + stem + " has " + std::to_string(n) + " target annotations, expected 1");
		ef.ground_truth =
			dataset::invert_yolo(*std::ranges::find(annotations, target_id, &dataset::YoloAnnotation::class_id),
			                     ef.frame);
		out.push_back(std::move(ef));
	}
	std::ranges::sort(out, {}, [](const EvaluationFrame& f) { return f.frame.frame_id; });
	return out;
}

std::unique_ptr<detector::Detector> make_detector(const RunConfig& config) {
	const auto& d = config.detector;
	if (d.mode == "subprocess") {
		detector::SubprocessDetectorConfig sc;
		sc.command = d.command;
		sc.timeout = std::chrono::milliseconds(static_cast<long long>(d.timeout_seconds * 1000.0));
		sc.class_map = d.class_map;
		return std::make_unique<detector::RetryingDetector>(std::make_unique<detector::SubprocessDetector>(sc),
		                                                    d.retries);
	}
	detector::MockDetectorConfig mc;
	mc.mode = detector::parse_mock_mode(d.mode);
	mc.offset_x = d.offset_x;
	mc.offset_y = d.offset_y;
	mc.noise_sigma = d.noise_sigma;
	mc.seed = config.seed;
	mc.class_name = d.target_class;
	return std::make_unique<detector::MockDetector>(mc);
}

degradation::AdapterSet make_adapters(const RunConfig& config) {
	degradation::AdapterSet set;
	for (const auto& id : config.codecs) {
		if (degradation::is_mock_codec(id)) {
			set[id] = degradation::make_mock_adapter(id);
			continue;
		}
		auto def = std::ranges::find(config.codec_definitions, id, &degradation::CommandCodecConfig::id);
		if (def == config.codec_definitions.end())
			throw ConfigError("codec '" + id + "' has no [[codec]] definition");
		auto cc = *def;
		cc.timeout = std::chrono::milliseconds(static_cast<long long>(config.codec_timeout_seconds * 1000.0));
		set[id] = std::make_shared<degradation::CommandAdapter>(std::move(cc));
	}
	return set;
}

results::RunManifest build_manifest(const RunConfig& config, const degradation::AdapterSet& adapters,
                                    const nlohmann::json& detector_identity) {
	results::RunManifest m;
	m.configuration_hash = configuration_hash(config);
	for (const auto& [id, adapter] : adapters) {
		m.codec_versions[id] = adapter->codec().version_string;
		m.adapter_commands[id] = adapter->describe();
	}
	m.detector = detector_identity;
	m.detector["target_class"] = config.detector.target_class;
	m.thresholds = {{"confidence", config.confidence_threshold}, {"iou", config.iou_threshold}};
	m.start_timestamp = results::utc_timestamp();
	return m;
}

BaselineSummary cmd_baseline(const RunConfig& config, const LogSink& log) {
	const auto frames = load_evaluation_set(config);
	const std::size_t workers = std::min(config.workers, std::max<std::size_t>(1, frames.size()));
	auto detectors = make_detectors(config, workers);

	results::ensure_manifest(config.output, build_manifest(config, make_adapters(config), detectors.front()->identity()));
	results::RecordStore store(config.output);

	std::vector<const EvaluationFrame*> pending;
	for (const auto& f : frames)
		if (!store.contains(f.frame.frame_id, Condition::baseline()))
			pending.push_back(&f);

	BaselineSummary summary{frames.size(), 0, 0};
	std::atomic<std::size_t> failed{0};
	Progress progress(log, "baseline", pending.size());
	parallel_for(pending.size(), workers, [&](std::size_t worker, std::size_t i) {
		const auto& ef = *pending[i];
		detector::DetectionRequest req{request_id(), ef.frame.source_path, ef.frame.frame_id, "baseline",
		                               ef.ground_truth};
		auto e = evaluate(*detectors[worker], config, req);
		EvaluationRecord r;
		r.frame_id = ef.frame.frame_id;
		r.condition = Condition::baseline();
		r.iou = e.iou;
		r.confidence = e.confidence;
		r.failed = e.failed;
		r.diagnostics = std::move(e.diagnostics);
		if (r.failed)
			++failed;
		store.append(r);
		progress.tick();
	});
	summary.evaluated = pending.size();
	summary.failed = failed;
	emit(log, "baseline: " + std::to_string(summary.evaluated) + " frames evaluated, " +
	              std::to_string(frames.size() - pending.size()) + " already recorded");
	return summary;
}

SweepSummary cmd_sweep(const RunConfig& config, const LogSink& log) {
	if (config.codecs.empty())
		throw ConfigError("no codecs enabled for the sweep");
	const auto frames = load_evaluation_set(config);
	if (frames.empty())
		throw Error("the evaluation subset is empty");
	if (!results::read_manifest(config.output))
		throw Error("no baseline in " + config.output.string() + "; run baseline first");

	const auto adapters = make_adapters(config);
	const std::size_t workers = config.workers;
	auto detectors = make_detectors(config, workers);
	results::ensure_manifest(config.output, build_manifest(config, adapters, detectors.front()->identity()));
	results::RecordStore store(config.output);

	std::map<std::uint32_t, const EvaluationFrame*> by_id;
	std::map<std::uint32_t, fs::path> originals;
	std::vector<std::uint32_t> ids;
	for (const auto& f : frames) {
		if (!store.contains(f.frame.frame_id, Condition::baseline()))
			throw Error("frame " + f.frame.stem() + " has no baseline record; run baseline first");
		by_id[f.frame.frame_id] = &f;
		originals[f.frame.frame_id] = f.frame.source_path;
		ids.push_back(f.frame.frame_id);
	}

	const auto plan = degradation::plan_sweep(ids, config.codecs, config.crf_values, config.colorspaces);
	auto condition_of = [](const degradation::SweepTuple& t) { return Condition::of(t.codec, t.crf, t.colorspace); };

	std::size_t already = 0;
	for (std::size_t i = 0; i < plan.size(); ++i) {
		const auto t = plan.at(i);
		if (store.contains(t.frame_id, condition_of(t)))
			++already;
	}
	emit(log, "sweep: " + std::to_string(plan.size()) + " candidates planned, " + std::to_string(already) +
	              " already recorded");

	Progress progress(log, "sweep", plan.size() - already);
	std::atomic<std::size_t> executed{0};

	degradation::SweepOptions options;
	options.output_dir = config.output;
	options.workers = workers;
	options.collect = false;
	options.skip = [&](const degradation::SweepTuple& t) { return store.contains(t.frame_id, condition_of(t)); };
	options.on_candidate = [&](std::size_t worker, const degradation::DegradationCandidate& c, const Image*) {
		const auto& ef = *by_id.at(c.tuple.frame_id);
		EvaluationRecord r;
		r.frame_id = c.tuple.frame_id;
		r.condition = condition_of(c.tuple);
		if (c.failed) {
			r.failed = true;
			r.diagnostics = c.diagnostics;
		} else {
			r.psnr_db = c.quality->psnr;
			r.encoded_bytes = c.encoded_bytes;
			detector::DetectionRequest req{request_id(), c.decoded_image_path, c.tuple.frame_id,
			                               r.condition.key(), ef.ground_truth};
			auto e = evaluate(*detectors[worker], config, req);
			r.iou = e.iou;
			r.confidence = e.confidence;
			r.failed = e.failed;
			r.diagnostics = std::move(e.diagnostics);
		}
		store.append(r);
		++executed;
		progress.tick();
	};
	degradation::run_sweep(plan, adapters, originals, options);

	SweepSummary s;
	s.planned = plan.size();
	s.executed = executed;
	s.skipped = already;
	for (const auto& r : store.records()) {
		if (r.condition.is_baseline())
			continue;
		++s.degraded_total;
		if (r.failed)
			++s.failed;
	}
	results::finalize_manifest(config.output, results::utc_timestamp());

	const double fraction =
		s.degraded_total ? static_cast<double>(s.failed) / static_cast<double>(s.degraded_total) : 0.0;
	s.failure_cap_exceeded = fraction > config.max_failure_fraction;
	emit(log, "sweep: " + std::to_string(s.executed) + " executed, " + std::to_string(s.failed) + " failed of " +
	              std::to_string(s.degraded_total) + " degraded records");
	if (s.failure_cap_exceeded)
		emit(log, "sweep: failure fraction " + text::format_fixed(fraction, 4) + " exceeds the cap of " +
		              text::format_fixed(config.max_failure_fraction, 4));
	return s;
}

results::SummaryTable cmd_report(const RunConfig& config, const LogSink& log) {
	const auto path = config.output / results::kRecordsFile;
	if (!fs::exists(path))
		throw Error("no records in " + config.output.string());
	auto records = results::load_records(path);
	results::sort_records(records);
	auto summary = results::summarize(records, config.iou_threshold);
	const auto files = results::render_report(summary, records, config.output);

	emit(log, "baseline match rate " + text::format_fixed(100.0 * summary.baseline.rate(), 1) + "% (" +
	              std::to_string(summary.baseline.matched) + "/" + std::to_string(summary.baseline.total) + ")");
	for (const auto& row : summary.rows)
		emit(log, "  " + row.codec + "/" + std::string(degradation::to_string(row.colorspace)) + ": best crf" +
		              std::to_string(row.best_crf.value()) + " " + text::format_fixed(100.0 * row.best.rate(), 1) +
		              "%, crf" + std::to_string(row.worst_crf.value()) + " " +
		              text::format_fixed(100.0 * row.worst.rate(), 1) + "%" +
		              (row.failed ? ", " + std::to_string(row.failed) + " failed" : ""));
	for (const auto& f : files)
		emit(log, "wrote " + f.string());
	return summary;
}

}  // namespace degrade::app
