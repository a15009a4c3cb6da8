#include "degrade/config.hpp"
#include "degrade/error.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

namespace app = degrade::app;
namespace dg = degrade::degradation;

namespace {

constexpr const char* kFull = R"(
output = "out"
workers = 4
seed = 9

[dataset]
images = "img"
labels = "/abs/labels"
class_map = { Pedestrian = 0, Cyclist = 1 }

[thresholds]
confidence = 0.25
iou = 0.4

[sweep]
codecs = ["h264", "mock_identity"]
crf = "10..20"
colorspaces = ["gray"]
timeout_seconds = 30
max_failure_fraction = 0.05

[[codec]]
id = "h264"
version = "x264 test"
encode = "enc {input} {output} {crf}"
decode = "dec {input} {output}"
extension = "mp4"

[detector]
mode = "subprocess"
command = "python3 detect.py"
retries = 1
class_map = { person = "Pedestrian" }
)";

}  // namespace

TEST(Config, ParsesEverySection) {
	const auto c = app::parse_config(kFull, "/base");
	EXPECT_EQ(c.output, "/base/out");
	EXPECT_EQ(c.images, "/base/img");
	EXPECT_EQ(c.labels, "/abs/labels");
	EXPECT_EQ(c.workers, 4u);
	EXPECT_EQ(c.seed, 9u);
	EXPECT_EQ(c.class_map.at("Cyclist"), 1u);
	EXPECT_DOUBLE_EQ(c.confidence_threshold, 0.25);
	EXPECT_DOUBLE_EQ(c.iou_threshold, 0.4);
	EXPECT_EQ(c.codecs, (std::vector<std::string>{"h264", "mock_identity"}));
	EXPECT_EQ(c.crf_values.size(), 11u);
	EXPECT_EQ(c.colorspaces, (std::vector<dg::ColorSpace>{dg::ColorSpace::grayscale}));
	ASSERT_EQ(c.codec_definitions.size(), 1u);
	EXPECT_EQ(c.codec_definitions[0].extension, "mp4");
	EXPECT_EQ(c.detector.mode, "subprocess");
	EXPECT_EQ(c.detector.class_map.at("person"), "Pedestrian");
	EXPECT_NO_THROW(app::validate(c));
}

TEST(Config, Defaults) {
	const auto c = app::parse_config("[dataset]\nimages='i'\nlabels='l'\noutput='o'\n", "/b");
	EXPECT_EQ(c.crf_values.size(), 52u);
	EXPECT_EQ(c.colorspaces.size(), 2u);
	EXPECT_EQ(c.detector.mode, "echo_gt");
	EXPECT_DOUBLE_EQ(c.max_failure_fraction, 0.01);
}

TEST(Config, SyntaxAndTypeErrors) {
	EXPECT_THROW(app::parse_config("output = ", "/"), degrade::ConfigError);
	EXPECT_THROW(app::parse_config("workers = \"two\"", "/"), degrade::ConfigError);
	EXPECT_THROW(app::parse_config("workers = 0", "/"), degrade::ConfigError);
	EXPECT_THROW(app::parse_config("[sweep]\ncrf = 1.5", "/"), degrade::ConfigError);
	EXPECT_THROW(app::parse_config("[sweep]\ncolorspaces = ['cmyk']", "/"), degrade::Error);
	EXPECT_THROW(app::parse_config("[[codec]]\nid = 'h264'", "/"), degrade::ConfigError);
}

TEST(Config, ValidationErrors) {
	auto base = app::parse_config(kFull, "/base");
	auto c = base;
	c.confidence_threshold = 1.5;
	EXPECT_THROW(app::validate(c), degrade::ConfigError);
	c = base;
	c.codecs.push_back("h265");
	EXPECT_THROW(app::validate(c), degrade::ConfigError);
	c = base;
	c.codecs.push_back("vp9");
	EXPECT_THROW(app::validate(c), degrade::ConfigError);
	c = base;
	c.detector.command.clear();
	EXPECT_THROW(app::validate(c), degrade::ConfigError);
	c = base;
	c.detector.target_class = "Car";
	EXPECT_THROW(app::validate(c), degrade::ConfigError);
	c = base;
	c.codec_definitions.push_back(c.codec_definitions[0]);
	EXPECT_THROW(app::validate(c), degrade::ConfigError);
	c = base;
	c.detector.mode = "psychic";
	EXPECT_THROW(app::validate(c), degrade::ConfigError);
}

TEST(Config, HashTracksResultAffectingFields) {
	const auto a = app::parse_config(kFull, "/base");
	auto b = a;
	b.workers = 1;
	b.output = "/elsewhere";
	b.codecs = {"h264"};
	EXPECT_EQ(app::configuration_hash(a), app::configuration_hash(b));
	b.iou_threshold = 0.6;
	EXPECT_NE(app::configuration_hash(a), app::configuration_hash(b));
	b = a;
	b.codec_definitions[0].encode += " -preset slow";
	EXPECT_NE(app::configuration_hash(a), app::configuration_hash(b));
	EXPECT_EQ(app::configuration_hash(a).size(), 64u);
	EXPECT_EQ(app::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Config, LoadResolvesAgainstFileDirectory) {
	degrade::testing::TempDir dir;
	const auto path = degrade::testing::write_config(dir.path(), "");
	const auto c = app::load_config(path);
	EXPECT_EQ(c.images, dir / "images");
	EXPECT_EQ(c.output, dir / "out");
	EXPECT_THROW(app::load_config(dir / "missing.toml"), degrade::ConfigError);
}
