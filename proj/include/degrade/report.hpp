#pragma once

#include "degrade/records.hpp"

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace degrade::results {

/// IoU values of records sharing one condition, largest first.
/// Throws if the records mix conditions.
std::vector<double> sorted_iou_curve(std::span<const EvaluationRecord> records);

struct RateCount {
	std::size_t matched = 0;
	std::size_t total = 0;

	double rate() const noexcept { return total ? static_cast<double>(matched) / static_cast<double>(total) : 0.0; }
};

/// One (codec, colorspace) row.
struct CodecSummary {
	std::string codec;
	degradation::ColorSpace colorspace = degradation::ColorSpace::rgb;
	RateCount baseline;
	degradation::CrfValue best_crf;
	RateCount best;
	/// CRF 51 when swept, else the most lossy CRF present.
	degradation::CrfValue worst_crf;
	RateCount worst;
	std::map<degradation::CrfValue, RateCount> per_crf;
	/// Candidates flagged as failed; counted as unmatched in the rates.
	std::size_t failed = 0;
};

struct SummaryTable {
	double iou_threshold = 0.5;
	RateCount baseline;
	/// Ordered by (codec, colorspace).
	std::vector<CodecSummary> rows;
};

/// Throws Error when no baseline record is present.
SummaryTable summarize(std::span<const EvaluationRecord> records, double iou_threshold = 0.5);

struct ChartSeries {
	std::string name;
	std::string color;
	bool dashed = false;
	std::vector<double> values;
};

/// Display color per codec: baseline blue, h264 magenta, h265 yellow,
/// hevc_nvenc cyan, av1 black.
std::string series_color(std::string_view codec);

/// Baseline curve followed by each codec's best-CRF and worst-CRF curves.
std::vector<ChartSeries> chart_series(const SummaryTable& summary, std::span<const EvaluationRecord> records,
                                      degradation::ColorSpace colorspace);

std::string render_svg(std::span<const ChartSeries> series, std::string_view title);
std::string records_csv(std::span<const EvaluationRecord> records);
std::string summary_csv(const SummaryTable& summary);

/// Writes records.csv, summary.csv and curve_<colorspace>.svg. Charts are
/// produced for each colorspace with degraded records, or a single
/// baseline-only rgb chart when there are none. Returns the written paths.
std::vector<std::filesystem::path> render_report(const SummaryTable& summary,
                                                 std::span<const EvaluationRecord> records,
                                                 const std::filesystem::path& output_dir);

}  // namespace degrade::results
