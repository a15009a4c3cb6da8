#include "degrade/report.hpp"

#include "degrade/error.hpp"
#include "degrade/text.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

namespace degrade::results {

using degradation::ColorSpace;
using degradation::CrfValue;

std::vector<double> sorted_iou_curve(std::span<const EvaluationRecord> records) {
	std::vector<double> curve;
	curve.reserve(records.size());
	for (const auto& r : records) {
		if (r.condition != records.front().condition)
			throw Error("sorted_iou_curve: records mix conditions");
		curve.push_back(r.iou);
	}
	std::ranges::sort(curve, std::greater<>{});
	return curve;
}

namespace {

void count(RateCount& rc, const EvaluationRecord& r, double threshold) {
	++rc.total;
	if (r.iou >= threshold)
		++rc.matched;
}

}  // namespace

SummaryTable summarize(std::span<const EvaluationRecord> records, double iou_threshold) {
	SummaryTable table;
	table.iou_threshold = iou_threshold;

	std::map<std::pair<std::string, ColorSpace>, CodecSummary> rows;
	for (const auto& r : records) {
		if (r.condition.is_baseline()) {
			count(table.baseline, r, iou_threshold);
			continue;
		}
		const auto& c = *r.condition.degraded;
		auto& row = rows[{c.codec, c.colorspace}];
		row.codec = c.codec;
		row.colorspace = c.colorspace;
		count(row.per_crf[c.crf], r, iou_threshold);
		if (r.failed)
			++row.failed;
	}
	if (table.baseline.total == 0)
		throw Error("no baseline records; run the baseline first");

	for (auto& [key, row] : rows) {
		row.baseline = table.baseline;
		// Strict comparison keeps the lowest CRF on ties.
		bool first = true;
		for (const auto& [crf, rc] : row.per_crf) {
			if (first || rc.rate() > row.best.rate()) {
				row.best_crf = crf;
				row.best = rc;
				first = false;
			}
		}
		auto worst = row.per_crf.find(CrfValue(CrfValue::kMax));
		if (worst == row.per_crf.end())
			worst = std::prev(row.per_crf.end());
		row.worst_crf = worst->first;
		row.worst = worst->second;
		table.rows.push_back(std::move(row));
	}
	return table;
}

std::string series_color(std::string_view codec) {
	static const std::map<std::string, std::string, std::less<>> colors{
		{"baseline", "blue"},   {"h264", "magenta"},        {"h265", "yellow"},          {"hevc_nvenc", "cyan"},
		{"av1", "black"},       {"mock_identity", "green"}, {"mock_quantizer", "orange"},
	};
	auto it = colors.find(codec);
	return it == colors.end() ? "gray" : it->second;
}

std::vector<ChartSeries> chart_series(const SummaryTable& summary, std::span<const EvaluationRecord> records,
                                      ColorSpace colorspace) {
	std::map<Condition, std::vector<EvaluationRecord>> by_condition;
	for (const auto& r : records)
		by_condition[r.condition].push_back(r);

	auto curve_of = [&](const Condition& c) {
		auto it = by_condition.find(c);
		return it == by_condition.end() ? std::vector<double>{} : sorted_iou_curve(it->second);
	};

	std::vector<ChartSeries> series;
	series.push_back({"baseline", series_color("baseline"), false, curve_of(Condition::baseline())});
	for (const auto& row : summary.rows) {
		if (row.colorspace != colorspace)
			continue;
		char best[64];
		char worst[64];
		std::snprintf(best, sizeof best, "%s best crf%02d", row.codec.c_str(), row.best_crf.value());
		std::snprintf(worst, sizeof worst, "%s worst crf%02d", row.codec.c_str(), row.worst_crf.value());
		series.push_back({best, series_color(row.codec), false,
		                  curve_of(Condition::of(row.codec, row.best_crf, row.colorspace))});
		series.push_back({worst, series_color(row.codec), true,
		                  curve_of(Condition::of(row.codec, row.worst_crf, row.colorspace))});
	}
	return series;
}

std::string render_svg(std::span<const ChartSeries> series, std::string_view title) {
	constexpr double kWidth = 900, kHeight = 520;
	constexpr double kLeft = 60, kRight = 200, kTop = 40, kBottom = 50;
	constexpr double kPlotW = kWidth - kLeft - kRight;
	constexpr double kPlotH = kHeight - kTop - kBottom;

	std::size_t longest = 1;
	for (const auto& s : series)
		longest = std::max(longest, s.values.size());
	auto px = [&](std::size_t rank) {
		return kLeft + (longest > 1 ? kPlotW * static_cast<double>(rank) / static_cast<double>(longest - 1) : 0.0);
	};
	auto py = [&](double iou) { return kTop + kPlotH * (1.0 - iou); };
	auto fmt = [](double v) { return text::format_fixed(v, 2); };

	std::ostringstream out;
	out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
	    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
	    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
	// Exact series data, one comment per series, for machine checks.
	for (const auto& s : series) {
		out << "<!-- series name=\"" << s.name << "\" color=\"" << s.color << "\" dashed=\"" << (s.dashed ? 1 : 0)
		    << "\" values=\"";
		for (std::size_t i = 0; i < s.values.size(); ++i)
			out << (i ? " " : "") << text::format_double(s.values[i]);
		out << "\" -->\n";
	}
	out << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
	out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
	    << "font-size=\"16\">" << title << "</text>\n";
	out << "<g stroke=\"#999\" stroke-width=\"1\">\n";
	for (int i = 0; i <= 10; ++i) {
		const double y = py(i / 10.0);
		out << "<line x1=\"" << kLeft << "\" y1=\"" << fmt(y) << "\" x2=\"" << kLeft + kPlotW << "\" y2=\"" << fmt(y)
		    << "\" stroke-opacity=\"" << (i % 5 == 0 ? "0.6" : "0.2") << "\"/>\n";
	}
	out << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
	for (int i = 0; i <= 10; i += 5)
		out << "<text x=\"" << kLeft - 6 << "\" y=\"" << fmt(py(i / 10.0) + 4) << "\" text-anchor=\"end\">"
		    << text::format_fixed(i / 10.0, 1) << "</text>\n";
	out << "<text x=\"" << kLeft + kPlotW / 2 << "\" y=\"" << kHeight - 12
	    << "\" text-anchor=\"middle\">rank (frames sorted by IoU, descending)</text>\n"
	    << "<text x=\"16\" y=\"" << kTop + kPlotH / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
	    << kTop + kPlotH / 2 << ")\">IoU</text>\n</g>\n";

	for (const auto& s : series) {
		if (s.values.empty())
			continue;
		out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
		    << (s.dashed ? " stroke-dasharray=\"6 3\"" : "") << " points=\"";
		for (std::size_t i = 0; i < s.values.size(); ++i)
			out << (i ? " " : "") << fmt(px(i)) << ',' << fmt(py(s.values[i]));
		out << "\"/>\n";
	}

	out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
	for (std::size_t i = 0; i < series.size(); ++i) {
		const double y = kTop + 10 + 16 * static_cast<double>(i);
		const double x = kLeft + kPlotW + 15;
		out << "<line x1=\"" << x << "\" y1=\"" << y << "\" x2=\"" << x + 24 << "\" y2=\"" << y << "\" stroke=\""
		    << series[i].color << "\" stroke-width=\"2\"" << (series[i].dashed ? " stroke-dasharray=\"6 3\"" : "")
		    << "/>\n<text x=\"" << x + 30 << "\" y=\"" << y + 4 << "\">" << series[i].name << "</text>\n";
	}
	out << "</g>\n</svg>\n";
	return out.str();
}

std::string records_csv(std::span<const EvaluationRecord> records) {
	std::vector<EvaluationRecord> sorted(records.begin(), records.end());
	sort_records(sorted);

	std::string out = "frame_id,condition,codec,crf,colorspace,iou,confidence,psnr_db,encoded_bytes,failed\n";
	for (const auto& r : sorted) {
		out += std::to_string(r.frame_id) + ',' + r.condition.key() + ',';
		if (r.condition.degraded)
			out += r.condition.degraded->codec + ',' + std::to_string(r.condition.degraded->crf.value()) + ',' +
			       std::string(degradation::to_string(r.condition.degraded->colorspace));
		else
			out += ",,";
		out += ',' + text::format_double(r.iou) + ',';
		if (r.confidence)
			out += text::format_double(*r.confidence);
		out += ',';
		if (r.psnr_db)
			out += r.psnr_db->is_infinite() ? "inf" : text::format_double(r.psnr_db->db());
		out += ',';
		if (r.encoded_bytes)
			out += std::to_string(*r.encoded_bytes);
		out += r.failed ? ",1\n" : ",0\n";
	}
	return out;
}

std::string summary_csv(const SummaryTable& summary) {
	auto rate = [](const RateCount& rc) { return text::format_fixed(rc.rate(), 6); };
	std::string out =
		"codec,colorspace,baseline_matched,baseline_total,baseline_match_rate,best_crf,best_matched,best_total,"
		"best_match_rate,worst_crf,worst_matched,worst_total,worst_match_rate,failed,per_crf_match_rates\n";
	for (const auto& row : summary.rows) {
		out += row.codec + ',' + std::string(degradation::to_string(row.colorspace)) + ',';
		out += std::to_string(row.baseline.matched) + ',' + std::to_string(row.baseline.total) + ',' +
		       rate(row.baseline) + ',';
		out += std::to_string(row.best_crf.value()) + ',' + std::to_string(row.best.matched) + ',' +
		       std::to_string(row.best.total) + ',' + rate(row.best) + ',';
		out += std::to_string(row.worst_crf.value()) + ',' + std::to_string(row.worst.matched) + ',' +
		       std::to_string(row.worst.total) + ',' + rate(row.worst) + ',';
		out += std::to_string(row.failed) + ',';
		bool first = true;
		for (const auto& [crf, rc] : row.per_crf) {
			if (!first)
				out += ';';
			out += std::to_string(crf.value()) + ':' + rate(rc);
			first = false;
		}
		out += '\n';
	}
	return out;
}

std::vector<std::filesystem::path> render_report(const SummaryTable& summary,
                                                 std::span<const EvaluationRecord> records,
                                                 const std::filesystem::path& output_dir) {
	std::error_code ec;
	std::filesystem::create_directories(output_dir, ec);
	if (!std::filesystem::is_directory(output_dir))
		throw Error("cannot create report directory " + output_dir.string());

	std::vector<std::filesystem::path> written;
	auto emit = [&](const std::string& name, const std::string& content) {
		const auto path = output_dir / name;
		text::write_file_atomic(path, content);
		written.push_back(path);
	};

	emit("records.csv", records_csv(records));
	emit("summary.csv", summary_csv(summary));

	std::set<ColorSpace> colorspaces;
	for (const auto& row : summary.rows)
		colorspaces.insert(row.colorspace);
	if (colorspaces.empty())
		colorspaces.insert(ColorSpace::rgb);
	for (auto cs : colorspaces) {
		const auto series = chart_series(summary, records, cs);
		const std::string name(degradation::to_string(cs));
		emit("curve_" + name + ".svg", render_svg(series, "Sorted IoU per frame (" + name + ")"));
	}
	return written;
}

}  // namespace degrade::results
