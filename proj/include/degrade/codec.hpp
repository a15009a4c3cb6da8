#pragma once

#include "degrade/image.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace degrade::degradation {

/// Codec identifiers accepted in a sweep.
inline constexpr std::string_view kRegisteredCodecs[] = {
	"h264", "h265", "hevc_nvenc", "av1", "mock_identity", "mock_quantizer",
};

bool is_registered_codec(std::string_view id) noexcept;
bool is_mock_codec(std::string_view id) noexcept;

struct CodecId {
	std::string identifier;
	std::string version_string;
};

/// Constant-quality setting, 0 (best) to 51 (most lossy).
class CrfValue {
public:
	static constexpr int kMin = 0;
	static constexpr int kMax = 51;

	constexpr CrfValue() = default;
	explicit CrfValue(int value);

	constexpr int value() const noexcept { return value_; }

	friend constexpr auto operator<=>(CrfValue, CrfValue) = default;

private:
	int value_ = 0;
};

/// Every CRF from `first` to `last` inclusive.
std::vector<CrfValue> crf_range(int first, int last);
/// Parses "a..b" or a single integer.
std::vector<CrfValue> parse_crf_range(std::string_view text);

enum class ColorSpace { rgb, grayscale };

std::string_view to_string(ColorSpace cs) noexcept;
/// Accepts "rgb", "grayscale" and "gray".
ColorSpace parse_colorspace(std::string_view text);

struct EncodeResult {
	Image decoded;
	std::uint64_t encoded_bytes = 0;
};

/// One codec inside the sweep. Implementations must be safe to call from
/// several threads as long as each call gets its own scratch directory.
class EncoderAdapter {
public:
	virtual ~EncoderAdapter() = default;

	virtual const CodecId& codec() const noexcept = 0;

	/// Encodes `image` as a single intra-coded frame and decodes it back.
	/// Throws AdapterError on any failure.
	virtual EncodeResult encode_decode(const Image& image, CrfValue crf, ColorSpace colorspace,
	                                   const std::filesystem::path& scratch) const = 0;

	/// Provenance for the run manifest: invocation templates, CRF mapping.
	virtual nlohmann::json describe() const = 0;
};

/// Checks the adapter contract around EncoderAdapter::encode_decode: 3-channel
/// 8-bit output of the input's dimensions.
EncodeResult encode_decode(const EncoderAdapter& adapter, const Image& image, CrfValue crf, ColorSpace colorspace,
                           const std::filesystem::path& scratch);

/// Returns the input unchanged; encoded size is the raw sample count.
class MockIdentityAdapter final : public EncoderAdapter {
public:
	MockIdentityAdapter();
	const CodecId& codec() const noexcept override { return id_; }
	EncodeResult encode_decode(const Image& image, CrfValue crf, ColorSpace colorspace,
	                           const std::filesystem::path& scratch) const override;
	nlohmann::json describe() const override;

private:
	CodecId id_;
};

/// Uniform scalar quantizer with step s = 1 + crf. Each sample v becomes
/// floor(v/s)*s + s/2 (integer division, clamped to 255). The encoded size is
/// a 16-byte header plus the bin indices packed at the minimum bit width for
/// ceil(256/s) bins, so it never grows with the CRF.
///
/// PSNR is non-increasing in CRF for images whose samples are spread evenly
/// over [0,255], but not for every image: a frame of constant value 4 has
/// error 2 at s=4 and error 0 at s=9.
class MockQuantizerAdapter final : public EncoderAdapter {
public:
	MockQuantizerAdapter();
	const CodecId& codec() const noexcept override { return id_; }
	EncodeResult encode_decode(const Image& image, CrfValue crf, ColorSpace colorspace,
	                           const std::filesystem::path& scratch) const override;
	nlohmann::json describe() const override;

	static int step(CrfValue crf) noexcept { return 1 + crf.value(); }
	static std::uint8_t quantize(std::uint8_t v, int step) noexcept;
	static std::uint64_t packed_bytes(const Image& image, int step);

private:
	CodecId id_;
};

/// External encoder driven through command templates. Placeholders:
/// {input}, {output}, {crf}, {pixfmt}.
struct CommandCodecConfig {
	std::string id;
	std::string version;
	std::string version_command;
	std::string encode;
	std::string decode;
	std::string extension = "mkv";
	std::string pixfmt_rgb = "yuv444p";
	std::string pixfmt_grayscale = "yuv444p";
	std::chrono::milliseconds timeout{std::chrono::seconds(120)};
};

class CommandAdapter final : public EncoderAdapter {
public:
	/// Runs `version_command` (if any) once to capture the version string.
	explicit CommandAdapter(CommandCodecConfig config);

	const CodecId& codec() const noexcept override { return id_; }
	EncodeResult encode_decode(const Image& image, CrfValue crf, ColorSpace colorspace,
	                           const std::filesystem::path& scratch) const override;
	nlohmann::json describe() const override;

	/// Template expansion, exposed for the manifest and tests.
	std::vector<std::string> expand(std::string_view command_template, const std::filesystem::path& input,
	                                const std::filesystem::path& output, CrfValue crf, ColorSpace colorspace) const;

private:
	CommandCodecConfig config_;
	CodecId id_;
};

std::unique_ptr<EncoderAdapter> make_mock_adapter(std::string_view id);

/// Adapters keyed by codec identifier.
using AdapterSet = std::map<std::string, std::shared_ptr<const EncoderAdapter>, std::less<>>;

}  // namespace degrade::degradation
