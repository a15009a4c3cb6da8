#include "degrade/codec.hpp"

#include "degrade/error.hpp"
#include "degrade/subprocess.hpp"
#include "degrade/text.hpp"

#include <algorithm>
#include <bit>

namespace degrade::degradation {

bool is_registered_codec(std::string_view id) noexcept {
	return std::ranges::find(kRegisteredCodecs, id) != std::end(kRegisteredCodecs);
}

bool is_mock_codec(std::string_view id) noexcept { return id == "mock_identity" || id == "mock_quantizer"; }

CrfValue::CrfValue(int value) : value_(value) {
	if (value < kMin || value > kMax)
		throw Error("CRF " + std::to_string(value) + " outside [0, 51]");
}

std::vector<CrfValue> crf_range(int first, int last) {
	if (first > last)
		throw Error("empty CRF range " + std::to_string(first) + ".." + std::to_string(last));
	std::vector<CrfValue> out;
	for (int v = first; v <= last; ++v)
		out.emplace_back(v);
	return out;
}

std::vector<CrfValue> parse_crf_range(std::string_view text) {
	text = text::trim(text);
	if (auto dots = text.find(".."); dots != std::string_view::npos) {
		auto a = text::parse_int(text::trim(text.substr(0, dots)));
		auto b = text::parse_int(text::trim(text.substr(dots + 2)));
		if (!a || !b)
			throw Error("malformed CRF range '" + std::string(text) + "', expected a..b");
		return crf_range(*a, *b);
	}
	auto v = text::parse_int(text);
	if (!v)
		throw Error("malformed CRF value '" + std::string(text) + "'");
	return {CrfValue(*v)};
}

std::string_view to_string(ColorSpace cs) noexcept { return cs == ColorSpace::rgb ? "rgb" : "grayscale"; }

ColorSpace parse_colorspace(std::string_view text) {
	if (text == "rgb")
		return ColorSpace::rgb;
	if (text == "grayscale" || text == "gray")
		return ColorSpace::grayscale;
	throw Error("unknown colorspace '" + std::string(text) + "', expected rgb or gray");
}

EncodeResult encode_decode(const EncoderAdapter& adapter, const Image& image, CrfValue crf, ColorSpace colorspace,
                           const std::filesystem::path& scratch) {
	if (image.channels() != 3)
		throw AdapterError("encoder input must have 3 channels");
	auto result = adapter.encode_decode(image, crf, colorspace, scratch);
	if (!result.decoded.same_shape(image))
		throw AdapterError(adapter.codec().identifier + ": decoded image is " + std::to_string(result.decoded.width()) +
		                   "x" + std::to_string(result.decoded.height()) + "x" +
		                   std::to_string(result.decoded.channels()) + ", expected " + std::to_string(image.width()) +
		                   "x" + std::to_string(image.height()) + "x3");
	return result;
}

MockIdentityAdapter::MockIdentityAdapter() : id_{"mock_identity", "builtin"} {}

EncodeResult MockIdentityAdapter::encode_decode(const Image& image, CrfValue, ColorSpace,
                                                const std::filesystem::path&) const {
	return {image, image.sample_count()};
}

nlohmann::json MockIdentityAdapter::describe() const {
	return {{"kind", "builtin"}, {"crf_mapping", "ignored"}};
}

MockQuantizerAdapter::MockQuantizerAdapter() : id_{"mock_quantizer", "builtin"} {}

std::uint8_t MockQuantizerAdapter::quantize(std::uint8_t v, int step) noexcept {
	const int q = (v / step) * step + step / 2;
	return static_cast<std::uint8_t>(std::min(q, 255));
}

std::uint64_t MockQuantizerAdapter::packed_bytes(const Image& image, int step) {
	// Header: width, height, channels, step as 32-bit words.
	constexpr std::uint64_t kHeaderBytes = 16;
	const auto bins = static_cast<unsigned>((256 + step - 1) / step);
	const auto index_bits = static_cast<std::uint64_t>(std::max(1, static_cast<int>(std::bit_width(bins - 1))));
	return kHeaderBytes + (image.sample_count() * index_bits + 7) / 8;
}

EncodeResult MockQuantizerAdapter::encode_decode(const Image& image, CrfValue crf, ColorSpace,
                                                 const std::filesystem::path&) const {
	const int s = step(crf);
	Image out = image;
	for (auto& v : out.samples())
		v = quantize(v, s);
	return {std::move(out), packed_bytes(image, s)};
}

nlohmann::json MockQuantizerAdapter::describe() const {
	return {{"kind", "builtin"}, {"crf_mapping", "quantizer step = 1 + crf"}, {"size_model", "bit-packed bin indices"}};
}

CommandAdapter::CommandAdapter(CommandCodecConfig config) : config_(std::move(config)) {
	if (!is_registered_codec(config_.id) || is_mock_codec(config_.id))
		throw ConfigError("codec '" + config_.id + "' is not a registered external codec");
	if (config_.encode.empty() || config_.decode.empty())
		throw ConfigError("codec '" + config_.id + "' needs both encode and decode templates");
	for (const auto* tmpl : {&config_.encode, &config_.decode}) {
		if (tmpl->find("{input}") == std::string::npos || tmpl->find("{output}") == std::string::npos)
			throw ConfigError("codec '" + config_.id + "': templates must contain {input} and {output}");
		process::split_command(*tmpl);
	}
	if (config_.encode.find("{crf}") == std::string::npos)
		throw ConfigError("codec '" + config_.id + "': encode template must contain {crf}");

	id_.identifier = config_.id;
	id_.version_string = config_.version;
	if (!config_.version_command.empty()) {
		auto r = process::run(process::split_command(config_.version_command), std::chrono::seconds(30), true);
		if (r.ok()) {
			auto lines = text::split_lines(r.stdout_text);
			auto first = lines.empty() ? std::string_view{} : text::trim(lines.front());
			if (!first.empty())
				id_.version_string = id_.version_string.empty() ? std::string(first)
				                                                : id_.version_string + " (" + std::string(first) + ")";
		} else {
			id_.version_string += id_.version_string.empty() ? "unknown" : "";
			id_.version_string += " [version command failed: " + r.describe() + "]";
		}
	}
}

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
	for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size())
		s.replace(pos, from.size(), to);
}

}  // namespace

std::vector<std::string> CommandAdapter::expand(std::string_view command_template, const std::filesystem::path& input,
                                                const std::filesystem::path& output, CrfValue crf,
                                                ColorSpace colorspace) const {
	// Substitute per token so paths containing spaces stay single arguments.
	auto argv = process::split_command(command_template);
	const auto& pixfmt = colorspace == ColorSpace::rgb ? config_.pixfmt_rgb : config_.pixfmt_grayscale;
	for (auto& arg : argv) {
		replace_all(arg, "{input}", input.string());
		replace_all(arg, "{output}", output.string());
		replace_all(arg, "{crf}", std::to_string(crf.value()));
		replace_all(arg, "{pixfmt}", pixfmt);
	}
	return argv;
}

EncodeResult CommandAdapter::encode_decode(const Image& image, CrfValue crf, ColorSpace colorspace,
                                           const std::filesystem::path& scratch) const {
	namespace fs = std::filesystem;
	const auto input = scratch / "input.png";
	const auto encoded = scratch / ("encoded." + config_.extension);
	const auto decoded = scratch / "decoded.png";
	std::error_code ec;
	fs::remove(encoded, ec);
	fs::remove(decoded, ec);

	try {
		write_png(input, image);
	} catch (const Error& e) {
		throw AdapterError(e.what());
	}

	auto step = [&](std::string_view name, std::string_view tmpl, const fs::path& in, const fs::path& out) {
		const auto argv = expand(tmpl, in, out, crf, colorspace);
		const auto result = process::run(argv, config_.timeout);
		if (!result.ok())
			throw AdapterError(config_.id + " " + std::string(name) + " failed (" + result.describe() +
			                   "): " + process::join_command(argv));
		if (!fs::exists(out))
			throw AdapterError(config_.id + " " + std::string(name) + " produced no output: " +
			                   process::join_command(argv));
	};

	step("encode", config_.encode, input, encoded);
	const auto bytes = fs::file_size(encoded, ec);
	if (ec)
		throw AdapterError(config_.id + ": cannot stat encoded output: " + ec.message());
	step("decode", config_.decode, encoded, decoded);

	try {
		return {read_png_rgb(decoded), bytes};
	} catch (const Error& e) {
		throw AdapterError(config_.id + ": unreadable decoded image: " + e.what());
	}
}

nlohmann::json CommandAdapter::describe() const {
	return {
		{"kind", "command"},
		{"encode", config_.encode},
		{"decode", config_.decode},
		{"extension", config_.extension},
		{"pixfmt", {{"rgb", config_.pixfmt_rgb}, {"grayscale", config_.pixfmt_grayscale}}},
		{"crf_mapping", "identity: {crf} = CRF 0..51"},
		{"timeout_ms", config_.timeout.count()},
	};
}

std::unique_ptr<EncoderAdapter> make_mock_adapter(std::string_view id) {
	if (id == "mock_identity")
		return std::make_unique<MockIdentityAdapter>();
	if (id == "mock_quantizer")
		return std::make_unique<MockQuantizerAdapter>();
	throw ConfigError("'" + std::string(id) + "' is not a built-in codec");
}

}  // namespace degrade::degradation
