#include "degrade/subprocess.hpp"
#include "degrade/text.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

namespace {

degrade::process::RunResult cli(std::vector<std::string> args) {
	args.insert(args.begin(), DEGRADE_BENCH_BIN);
	return degrade::process::run(args, std::chrono::seconds(60), true);
}

}  // namespace

TEST(Cli, ValidateConfigPrintsHash) {
	degrade::testing::TempDir dir;
	const auto cfg = degrade::testing::write_config(dir.path(), "[sweep]\ncodecs = ['mock_identity']\n");
	const auto r = cli({"--config", cfg.string(), "validate-config"});
	ASSERT_TRUE(r.ok()) << r.output_tail;
	EXPECT_EQ(degrade::text::trim(r.stdout_text).size(), 64u);
	const auto again = cli({"--config", cfg.string(), "--workers", "7", "validate-config"});
	EXPECT_EQ(again.stdout_text, r.stdout_text);
	const auto changed = cli({"--config", cfg.string(), "--iou-threshold", "0.7", "validate-config"});
	EXPECT_NE(changed.stdout_text, r.stdout_text);
}

TEST(Cli, ExitCodes) {
	degrade::testing::TempDir dir;
	EXPECT_NE(cli({}).exit_code, 0);
	EXPECT_EQ(cli({"--config", (dir / "missing.toml").string(), "validate-config"}).exit_code, 2);
	const auto cfg = degrade::testing::write_config(dir.path(), "[thresholds]\niou = 3.0\n");
	EXPECT_EQ(cli({"--config", cfg.string(), "validate-config"}).exit_code, 2);
	EXPECT_EQ(cli({"--config", cfg.string(), "--iou-threshold", "0.5", "--codec", "vp9", "validate-config"}).exit_code, 2);
	// No subset yet.
	EXPECT_EQ(cli({"--config", cfg.string(), "--iou-threshold", "0.5", "baseline"}).exit_code, 1);
}

TEST(Cli, FailureCapExitCode) {
	degrade::testing::TempDir dir;
	degrade::testing::write_dataset(dir.path(), degrade::testing::single_pedestrian_frames(1));
	const auto cfg = degrade::testing::write_config(dir.path(), R"(
[sweep]
codecs = ["h264"]
crf = "0..1"
colorspaces = ["rgb"]

[[codec]]
id = "h264"
encode = "false {input} {output} {crf}"
decode = "cp {input} {output}"
)");
	for (const char* step : {"convert-labels", "baseline"})
		ASSERT_TRUE(cli({"--config", cfg.string(), "--quiet", step}).ok());
	EXPECT_EQ(cli({"--config", cfg.string(), "--quiet", "sweep"}).exit_code, 3);
	EXPECT_TRUE(cli({"--config", cfg.string(), "--quiet", "report"}).ok());
	EXPECT_TRUE(std::filesystem::exists(dir / "out/summary.csv"));
}

TEST(Cli, FlagsWithoutConfig) {
	degrade::testing::TempDir dir;
	degrade::testing::write_dataset(dir.path(), degrade::testing::single_pedestrian_frames(2));
	const std::vector<std::string> common{"--images", (dir / "images").string(), "--labels", (dir / "labels").string(),
	                                      "--output", (dir / "o").string(), "--codec", "mock_quantizer", "--crf", "40..41",
	                                      "--colorspace", "gray", "--quiet"};
	for (const char* step : {"convert-labels", "baseline", "sweep", "report"}) {
		auto args = common;
		args.push_back(step);
		const auto r = cli(args);
		ASSERT_TRUE(r.ok()) << step << ": " << r.output_tail;
	}
	EXPECT_EQ(degrade::testing::count_lines(dir / "o/records.jsonl"), 2u + 4u);
	EXPECT_TRUE(std::filesystem::exists(dir / "o/curve_grayscale.svg"));
}
