#include "degrade/error.hpp"
#include "degrade/report.hpp"
#include "degrade/text.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

namespace r = degrade::results;
namespace dg = degrade::degradation;

namespace {

r::EvaluationRecord rec(std::uint32_t frame, const r::Condition& c, double iou) {
	r::EvaluationRecord x;
	x.frame_id = frame;
	x.condition = c;
	x.iou = iou;
	if (!c.is_baseline()) {
		x.psnr_db = degrade::metrics::Psnr(40.0 - c.degraded->crf.value() * 0.5);
		x.encoded_bytes = 1000 - c.degraded->crf.value();
	}
	return x;
}

r::Condition cond(const std::string& codec, int crf, dg::ColorSpace cs = dg::ColorSpace::rgb) {
	return r::Condition::of(codec, dg::CrfValue(crf), cs);
}

}  // namespace

TEST(Curve, SortedDescending) {
	const std::vector<r::EvaluationRecord> recs{rec(1, r::Condition::baseline(), 0.2),
	                                           rec(2, r::Condition::baseline(), 0.9),
	                                           rec(3, r::Condition::baseline(), 0.5)};
	EXPECT_EQ(r::sorted_iou_curve(recs), (std::vector<double>{0.9, 0.5, 0.2}));
	const std::vector<r::EvaluationRecord> mixed{rec(1, r::Condition::baseline(), 0.2), rec(1, cond("h264", 1), 0.1)};
	EXPECT_THROW(r::sorted_iou_curve(mixed), degrade::Error);
}

TEST(Summary, Example) {
	std::vector<r::EvaluationRecord> recs{rec(1, r::Condition::baseline(), 1.0), rec(2, r::Condition::baseline(), 0.0)};
	const auto s = r::summarize(recs);
	EXPECT_DOUBLE_EQ(s.baseline.rate(), 0.5);
	EXPECT_TRUE(s.rows.empty());
	EXPECT_THROW(r::summarize(std::vector<r::EvaluationRecord>{rec(1, cond("h264", 1), 0.5)}), degrade::Error);
}

TEST(Summary, BestTiesToLowerCrfAndWorstIs51) {
	std::vector<r::EvaluationRecord> recs{rec(1, r::Condition::baseline(), 0.9), rec(2, r::Condition::baseline(), 0.1)};
	for (int crf : {10, 20, 51}) {
		recs.push_back(rec(1, cond("h264", crf), crf == 51 ? 0.1 : 0.9));
		recs.push_back(rec(2, cond("h264", crf), crf == 51 ? 0.1 : 0.8));
	}
	const auto s = r::summarize(recs);
	ASSERT_EQ(s.rows.size(), 1u);
	EXPECT_EQ(s.rows[0].best_crf.value(), 10);
	EXPECT_DOUBLE_EQ(s.rows[0].best.rate(), 1.0);
	EXPECT_EQ(s.rows[0].worst_crf.value(), 51);
	EXPECT_DOUBLE_EQ(s.rows[0].worst.rate(), 0.0);
	EXPECT_DOUBLE_EQ(s.rows[0].baseline.rate(), 0.5);
}

TEST(Summary, WorstFallsBackToHighestCrfAndFailuresCountAsMisses) {
	std::vector<r::EvaluationRecord> recs{rec(1, r::Condition::baseline(), 0.9), rec(2, r::Condition::baseline(), 0.9)};
	recs.push_back(rec(1, cond("av1", 5), 0.9));
	recs.push_back(rec(2, cond("av1", 5), 0.9));
	recs.push_back(rec(1, cond("av1", 30), 0.9));
	auto failed = rec(2, cond("av1", 30), 0.0);
	failed.failed = true;
	failed.psnr_db.reset();
	failed.encoded_bytes.reset();
	recs.push_back(failed);
	const auto s = r::summarize(recs);
	ASSERT_EQ(s.rows.size(), 1u);
	EXPECT_EQ(s.rows[0].worst_crf.value(), 30);
	EXPECT_EQ(s.rows[0].worst.matched, 1u);
	EXPECT_EQ(s.rows[0].worst.total, 2u);
	EXPECT_EQ(s.rows[0].failed, 1u);
}

TEST(Summary, IdentityEqualsBaseline) {
	std::vector<r::EvaluationRecord> recs;
	const double ious[] = {0.1, 0.55, 0.7, 0.95};
	for (std::uint32_t f = 0; f < 4; ++f) {
		recs.push_back(rec(f, r::Condition::baseline(), ious[f]));
		for (int crf = 0; crf < 52; ++crf)
			for (auto cs : {dg::ColorSpace::rgb, dg::ColorSpace::grayscale})
				recs.push_back(rec(f, cond("mock_identity", crf, cs), ious[f]));
	}
	const auto s = r::summarize(recs);
	ASSERT_EQ(s.rows.size(), 2u);
	for (const auto& row : s.rows) {
		EXPECT_EQ(row.best.matched, s.baseline.matched);
		EXPECT_EQ(row.worst.matched, s.baseline.matched);
		EXPECT_EQ(row.per_crf.size(), 52u);
	}
	const auto series = r::chart_series(s, recs, dg::ColorSpace::rgb);
	ASSERT_EQ(series.size(), 3u);
	EXPECT_EQ(series[0].values, series[1].values);
	EXPECT_FALSE(series[1].dashed);
	EXPECT_TRUE(series[2].dashed);
}

TEST(Chart, SeriesPerCodecAndColors) {
	std::vector<r::EvaluationRecord> recs{rec(1, r::Condition::baseline(), 0.9)};
	for (const char* codec : {"h264", "h265", "av1"})
		for (int crf : {0, 51})
			recs.push_back(rec(1, cond(codec, crf), 0.5));
	const auto s = r::summarize(recs);
	const auto series = r::chart_series(s, recs, dg::ColorSpace::rgb);
	EXPECT_EQ(series.size(), 1u + 2u * 3u);
	EXPECT_EQ(series[0].color, r::series_color("baseline"));
	EXPECT_NE(r::series_color("h264"), r::series_color("h265"));
	const auto svg = r::render_svg(series, "t");
	EXPECT_NE(svg.find("<svg"), std::string::npos);
	EXPECT_NE(svg.find("dashed=\"1\""), std::string::npos);
}

TEST(Csv, DeterministicAndRecountable) {
	std::vector<r::EvaluationRecord> recs{rec(2, r::Condition::baseline(), 0.7), rec(1, r::Condition::baseline(), 0.3),
	                                      rec(1, cond("h264", 3), 0.5), rec(2, cond("h264", 3), 0.2)};
	auto shuffled = recs;
	std::swap(shuffled[0], shuffled[3]);
	r::sort_records(recs);
	r::sort_records(shuffled);
	EXPECT_EQ(r::records_csv(recs), r::records_csv(shuffled));
	const auto csv = r::summary_csv(r::summarize(recs));
	EXPECT_EQ(csv, r::summary_csv(r::summarize(shuffled)));
	const auto lines = degrade::text::split_lines(csv);
	ASSERT_EQ(lines.size(), 2u);
	EXPECT_EQ(lines[0].substr(0, 17), "codec,colorspace,");
	EXPECT_EQ(lines[1].substr(0, 23), "h264,rgb,1,2,0.500000,3");
}

TEST(Report, WritesFilesAndMatchesPersisted) {
	degrade::testing::TempDir dir;
	r::RunManifest m;
	m.configuration_hash = "h";
	r::ensure_manifest(dir.path(), m);
	std::vector<r::EvaluationRecord> recs;
	{
		r::RecordStore store(dir.path());
		for (std::uint32_t f = 0; f < 6; ++f) {
			auto b = rec(f, r::Condition::baseline(), f / 6.0);
			store.append(b);
			recs.push_back(b);
			for (int crf : {0, 25, 51}) {
				auto d = rec(f, cond("mock_quantizer", crf, f % 2 ? dg::ColorSpace::rgb : dg::ColorSpace::grayscale), (f + crf % 7) / 13.0);
				store.append(d);
				recs.push_back(d);
			}
		}
	}
	const auto loaded = r::load_records(dir / r::kRecordsFile);
	EXPECT_EQ(r::summary_csv(r::summarize(loaded)), r::summary_csv(r::summarize(recs)));
	auto sorted = loaded;
	r::sort_records(sorted);
	const auto paths = r::render_report(r::summarize(sorted), sorted, dir / "report");
	EXPECT_EQ(paths.size(), 4u);
	for (const auto& p : paths)
		EXPECT_TRUE(std::filesystem::exists(p)) << p;
	EXPECT_TRUE(std::filesystem::exists(dir / "report/curve_grayscale.svg"));
}
