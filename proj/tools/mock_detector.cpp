// Line-protocol detector that answers from KITTI ground truth. Used to
// exercise the subprocess path end to end without a neural network.

#include "degrade/dataset.hpp"
#include "degrade/detector.hpp"
#include "degrade/text.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>

int main(int argc, char** argv) {
	CLI::App cli{"Ground-truth echo detector speaking degrade-bench/1"};
	std::string labels;
	std::string class_name = "person";
	double dx = 0.0;
	int die_after = -1;
	int stall_on = -1;
	int garbage_on = -1;
	bool skip_handshake = false;
	cli.add_option("--labels", labels, "KITTI label directory; responses echo its Pedestrian boxes")->required();
	cli.add_option("--class", class_name, "Class name to report");
	cli.add_option("--dx", dx, "Horizontal shift applied to every box");
	cli.add_option("--die-after", die_after, "Exit after answering this many requests");
	cli.add_option("--stall-on", stall_on, "Never answer the n-th request (1-based)");
	cli.add_option("--garbage-on", garbage_on, "Answer the n-th request with malformed text (1-based)");
	cli.add_flag("--skip-handshake", skip_handshake, "Answer the handshake with a wrong protocol");
	CLI11_PARSE(cli, argc, argv);

	std::string line;
	int served = 0;
	while (std::getline(std::cin, line)) {
		auto req = nlohmann::json::parse(line, nullptr, false);
		if (req.is_discarded())
			continue;
		if (req.value("type", "") == "handshake") {
			nlohmann::json resp{{"type", "handshake"},
			                    {"protocol", skip_handshake ? "other/0" : std::string(degrade::detector::kProtocolVersion)},
			                    {"detector", {{"name", "mock-detector"}, {"labels", labels}}}};
			std::cout << resp.dump() << std::endl;
			continue;
		}

		const auto id = req.value("id", std::uint64_t{0});
		++served;
		if (served == stall_on) {
			std::this_thread::sleep_for(std::chrono::hours(1));
		}
		if (served == garbage_on) {
			std::cout << "this is not json" << std::endl;
			continue;
		}

		const std::filesystem::path image = req.value("image_path", "");
		if (!std::filesystem::exists(image)) {
			std::cout << nlohmann::json{{"id", id}, {"error", "cannot read " + image.string()}}.dump() << std::endl;
			continue;
		}
		std::vector<degrade::detector::Detection> dets;
		const auto label_file = std::filesystem::path(labels) / (image.stem().string() + ".txt");
		if (std::filesystem::exists(label_file)) {
			for (const auto& l : degrade::dataset::parse_kitti_label_file(degrade::text::read_file(label_file)))
				if (l.object_class == degrade::dataset::kPedestrian)
					dets.push_back({class_name, l.bbox.translated(dx, 0.0), 0.9});
		}
		std::cout << degrade::detector::encode_response(id, dets) << std::endl;
		if (served == die_after)
			return 0;
	}
	return 0;
}
