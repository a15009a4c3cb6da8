#include "degrade/config.hpp"

#include "degrade/detector.hpp"
#include "degrade/error.hpp"
#include "degrade/text.hpp"

#include <openssl/evp.h>
#include <toml++/toml.hpp>

#include <algorithm>
#include <cstdio>
#include <set>

namespace degrade::app {

namespace {

using degradation::ColorSpace;

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
	if (p.empty())
		return {};
	std::filesystem::path path(p);
	return path.is_absolute() ? path : base / path;
}

template <typename T>
T required(const toml::node_view<const toml::node>& node, std::string_view what) {
	auto v = node.value<T>();
	if (!v)
		throw ConfigError("config: '" + std::string(what) + "' is missing or has the wrong type");
	return *v;
}

template <typename T>
void read_opt(const toml::node_view<const toml::node>& node, std::string_view what, T& out) {
	if (!node)
		return;
	auto v = node.value<T>();
	if (!v)
		throw ConfigError("config: '" + std::string(what) + "' has the wrong type");
	out = *v;
}

std::vector<std::string> string_array(const toml::node_view<const toml::node>& node, std::string_view what) {
	const auto* arr = node.as_array();
	if (!arr)
		throw ConfigError("config: '" + std::string(what) + "' must be an array of strings");
	std::vector<std::string> out;
	for (const auto& el : *arr) {
		auto s = el.value<std::string>();
		if (!s)
			throw ConfigError("config: '" + std::string(what) + "' must be an array of strings");
		out.push_back(*s);
	}
	return out;
}

}  // namespace

RunConfig parse_config(std::string_view toml_text, const std::filesystem::path& base_dir) {
	toml::table root;
	try {
		root = toml::parse(toml_text);
	} catch (const toml::parse_error& e) {
		throw ConfigError("config: " + std::string(e.description()) + " at line " +
		                  std::to_string(e.source().begin.line));
	}
	const toml::table& t = root;

	RunConfig c;
	std::string s;
	if (t["output"]) {
		read_opt(t["output"], "output", s);
		c.output = resolve(base_dir, s);
	}
	if (t["workers"]) {
		auto w = required<std::int64_t>(t["workers"], "workers");
		if (w < 1)
			throw ConfigError("config: workers must be >= 1");
		c.workers = static_cast<std::size_t>(w);
	}
	if (t["seed"]) {
		auto seed = required<std::int64_t>(t["seed"], "seed");
		c.seed = static_cast<std::uint64_t>(seed);
	}

	if (const auto ds = t["dataset"]) {
		if (ds["images"])
			c.images = resolve(base_dir, required<std::string>(ds["images"], "dataset.images"));
		if (ds["labels"])
			c.labels = resolve(base_dir, required<std::string>(ds["labels"], "dataset.labels"));
		if (const auto* map = ds["class_map"].as_table()) {
			c.class_map.clear();
			for (const auto& [name, id] : *map) {
				auto v = id.value<std::int64_t>();
				if (!v || *v < 0)
					throw ConfigError("config: dataset.class_map values must be non-negative integers");
				c.class_map[std::string(name.str())] = static_cast<std::uint32_t>(*v);
			}
		}
	}

	if (const auto th = t["thresholds"]) {
		read_opt(th["confidence"], "thresholds.confidence", c.confidence_threshold);
		read_opt(th["iou"], "thresholds.iou", c.iou_threshold);
	}

	if (const auto sw = t["sweep"]) {
		if (sw["codecs"])
			c.codecs = string_array(sw["codecs"], "sweep.codecs");
		if (sw["crf"]) {
			if (auto text = sw["crf"].value<std::string>())
				c.crf_values = degradation::parse_crf_range(*text);
			else if (auto v = sw["crf"].value<std::int64_t>())
				c.crf_values = {degradation::CrfValue(static_cast<int>(*v))};
			else
				throw ConfigError("config: sweep.crf must be \"a..b\" or an integer");
		}
		if (sw["colorspaces"]) {
			c.colorspaces.clear();
			for (const auto& name : string_array(sw["colorspaces"], "sweep.colorspaces"))
				c.colorspaces.push_back(degradation::parse_colorspace(name));
		}
		read_opt(sw["timeout_seconds"], "sweep.timeout_seconds", c.codec_timeout_seconds);
		read_opt(sw["max_failure_fraction"], "sweep.max_failure_fraction", c.max_failure_fraction);
	}

	if (const auto* codecs = t["codec"].as_array()) {
		for (const auto& node : *codecs) {
			const auto* tbl = node.as_table();
			if (!tbl)
				throw ConfigError("config: [[codec]] entries must be tables");
			const toml::node_view<const toml::node> ct{tbl};
			degradation::CommandCodecConfig cc;
			cc.id = required<std::string>(ct["id"], "codec.id");
			read_opt(ct["version"], "codec.version", cc.version);
			read_opt(ct["version_command"], "codec.version_command", cc.version_command);
			cc.encode = required<std::string>(ct["encode"], "codec.encode");
			cc.decode = required<std::string>(ct["decode"], "codec.decode");
			read_opt(ct["extension"], "codec.extension", cc.extension);
			read_opt(ct["pixfmt_rgb"], "codec.pixfmt_rgb", cc.pixfmt_rgb);
			read_opt(ct["pixfmt_grayscale"], "codec.pixfmt_grayscale", cc.pixfmt_grayscale);
			c.codec_definitions.push_back(std::move(cc));
		}
	}

	if (const auto det = t["detector"]) {
		auto& d = c.detector;
		read_opt(det["mode"], "detector.mode", d.mode);
		read_opt(det["command"], "detector.command", d.command);
		read_opt(det["timeout_seconds"], "detector.timeout_seconds", d.timeout_seconds);
		if (det["retries"])
			d.retries = static_cast<int>(required<std::int64_t>(det["retries"], "detector.retries"));
		read_opt(det["target_class"], "detector.target_class", d.target_class);
		if (const auto* map = det["class_map"].as_table()) {
			for (const auto& [from, to] : *map) {
				auto v = to.value<std::string>();
				if (!v)
					throw ConfigError("config: detector.class_map values must be strings");
				d.class_map[std::string(from.str())] = *v;
			}
		}
		if (const auto* off = det["offset"].as_array()) {
			if (off->size() != 2 || !off->get(0)->value<double>() || !off->get(1)->value<double>())
				throw ConfigError("config: detector.offset must be [dx, dy]");
			d.offset_x = *off->get(0)->value<double>();
			d.offset_y = *off->get(1)->value<double>();
		}
		read_opt(det["noise_sigma"], "detector.noise_sigma", d.noise_sigma);
	}
	return c;
}

RunConfig load_config(const std::filesystem::path& path) {
	std::string contents;
	try {
		contents = text::read_file(path);
	} catch (const Error&) {
		throw ConfigError("cannot read config " + path.string());
	}
	return parse_config(contents, path.parent_path());
}

void validate(const RunConfig& c) {
	auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
	if (!in_unit(c.confidence_threshold))
		throw ConfigError("confidence threshold must be in [0,1]");
	if (!in_unit(c.iou_threshold))
		throw ConfigError("iou threshold must be in [0,1]");
	if (!in_unit(c.max_failure_fraction))
		throw ConfigError("max_failure_fraction must be in [0,1]");
	if (c.workers < 1)
		throw ConfigError("workers must be >= 1");
	if (c.output.empty())
		throw ConfigError("no output directory configured");
	if (c.images.empty() || c.labels.empty())
		throw ConfigError("dataset.images and dataset.labels are required");
	if (c.crf_values.empty())
		throw ConfigError("CRF range is empty");
	if (c.colorspaces.empty())
		throw ConfigError("no colorspaces configured");
	if (c.codec_timeout_seconds <= 0.0)
		throw ConfigError("sweep.timeout_seconds must be positive");
	if (!c.class_map.contains(c.detector.target_class))
		throw ConfigError("target class '" + c.detector.target_class + "' is not in dataset.class_map");

	std::set<std::string> defined;
	for (const auto& cc : c.codec_definitions) {
		if (!degradation::is_registered_codec(cc.id) || degradation::is_mock_codec(cc.id))
			throw ConfigError("[[codec]] id '" + cc.id + "' is not a registered external codec");
		if (!defined.insert(cc.id).second)
			throw ConfigError("codec '" + cc.id + "' is defined twice");
	}
	std::set<std::string> enabled;
	for (const auto& id : c.codecs) {
		if (!degradation::is_registered_codec(id))
			throw ConfigError("unknown codec '" + id + "'");
		if (!degradation::is_mock_codec(id) && !defined.contains(id))
			throw ConfigError("codec '" + id + "' is enabled but has no [[codec]] definition");
		if (!enabled.insert(id).second)
			throw ConfigError("codec '" + id + "' is listed twice");
	}

	const auto& d = c.detector;
	if (d.mode == "subprocess") {
		if (d.command.empty())
			throw ConfigError("detector.command is required in subprocess mode");
	} else {
		try {
			detector::parse_mock_mode(d.mode);
		} catch (const Error& e) {
			throw ConfigError(std::string("detector.mode: ") + e.what());
		}
	}
	if (d.timeout_seconds <= 0.0)
		throw ConfigError("detector.timeout_seconds must be positive");
	if (d.retries < 0)
		throw ConfigError("detector.retries must be >= 0");
}

nlohmann::json identity_json(const RunConfig& c) {
	auto abs = [](const std::filesystem::path& p) { return std::filesystem::weakly_canonical(p).string(); };
	nlohmann::json j;
	j["dataset"] = {{"images", abs(c.images)}, {"labels", abs(c.labels)}};
	for (const auto& [name, id] : c.class_map)
		j["dataset"]["class_map"][name] = id;
	nlohmann::json codecs = nlohmann::json::object();
	for (const auto& cc : c.codec_definitions)
		codecs[cc.id] = {{"version", cc.version},
		                 {"version_command", cc.version_command},
		                 {"encode", cc.encode},
		                 {"decode", cc.decode},
		                 {"extension", cc.extension},
		                 {"pixfmt_rgb", cc.pixfmt_rgb},
		                 {"pixfmt_grayscale", cc.pixfmt_grayscale}};
	j["codecs"] = std::move(codecs);
	const auto& d = c.detector;
	j["detector"] = {{"mode", d.mode},
	                 {"command", d.command},
	                 {"target_class", d.target_class},
	                 {"class_map", d.class_map},
	                 {"offset", {d.offset_x, d.offset_y}},
	                 {"noise_sigma", d.noise_sigma}};
	j["thresholds"] = {{"confidence", c.confidence_threshold}, {"iou", c.iou_threshold}};
	j["seed"] = c.seed;
	return j;
}

std::string sha256_hex(std::string_view data) {
	unsigned char digest[EVP_MAX_MD_SIZE];
	unsigned int len = 0;
	if (!EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr))
		throw Error("SHA-256 failed");
	std::string hex;
	char buf[3];
	for (unsigned int i = 0; i < len; ++i) {
		std::snprintf(buf, sizeof buf, "%02x", digest[i]);
		hex += buf;
	}
	return hex;
}

std::string configuration_hash(const RunConfig& config) { return sha256_hex(identity_json(config).dump()); }

}  // namespace degrade::app
