#pragma once

#include "degrade/config.hpp"
#include "degrade/degradation.hpp"
#include "degrade/detector.hpp"
#include "degrade/records.hpp"
#include "degrade/report.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

/// Subcommand drivers. Each reads and writes only below the configured
/// dataset and output directories.
namespace degrade::app {

/// Receives human-readable progress lines (stderr in the CLI).
using LogSink = std::function<void(const std::string&)>;

struct ConvertSummary {
	std::size_t frames = 0;
	std::size_t selected = 0;
};

/// Writes `yolo/<stem>.txt` for every labeled frame (mapped classes only) and
/// `subset.txt`, one selected stem per line.
ConvertSummary cmd_convert_labels(const RunConfig& config, const LogSink& log = {});

/// A frame of the evaluation subset and its pixel-space ground truth, as
/// reconstructed from the written YOLO annotation.
struct EvaluationFrame {
	dataset::ImageFrame frame;
	BoundingBox ground_truth;
};

std::vector<EvaluationFrame> load_evaluation_set(const RunConfig& config);

/// One detector handle per call; retries per configuration.
std::unique_ptr<detector::Detector> make_detector(const RunConfig& config);

/// Adapters for the enabled codecs.
degradation::AdapterSet make_adapters(const RunConfig& config);

results::RunManifest build_manifest(const RunConfig& config, const degradation::AdapterSet& adapters,
                                    const nlohmann::json& detector_identity);

struct BaselineSummary {
	std::size_t frames = 0;
	std::size_t evaluated = 0;
	std::size_t failed = 0;
};

/// Appends one baseline record per subset frame not yet recorded.
BaselineSummary cmd_baseline(const RunConfig& config, const LogSink& log = {});

struct SweepSummary {
	std::size_t planned = 0;
	std::size_t executed = 0;
	std::size_t skipped = 0;
	/// Failed degraded records in the store after the run.
	std::size_t failed = 0;
	std::size_t degraded_total = 0;
	bool failure_cap_exceeded = false;
};

/// Executes the remaining part of the sweep plan and appends degraded records.
SweepSummary cmd_sweep(const RunConfig& config, const LogSink& log = {});

/// Recomputes the summary from records.jsonl and writes the report files.
results::SummaryTable cmd_report(const RunConfig& config, const LogSink& log = {});

}  // namespace degrade::app
