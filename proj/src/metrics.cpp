#include "degrade/metrics.hpp"

#include "degrade/error.hpp"

#include <algorithm>
#include <cmath>

namespace degrade::metrics {

double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
	const double ix = std::max(0.0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
	const double iy = std::max(0.0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
	const double inter = ix * iy;
	const double uni = a.area() + b.area() - inter;
	if (uni <= 0.0)
		return 0.0;
	return std::clamp(inter / uni, 0.0, 1.0);
}

double mse(const Image& reference, const Image& candidate) {
	if (!reference.same_shape(candidate))
		throw Error("mse: image dimensions differ (" + std::to_string(reference.width()) + "x" +
		            std::to_string(reference.height()) + "x" + std::to_string(reference.channels()) + " vs " +
		            std::to_string(candidate.width()) + "x" + std::to_string(candidate.height()) + "x" +
		            std::to_string(candidate.channels()) + ")");
	if (reference.empty())
		throw Error("mse: empty image");

	auto ref = reference.samples();
	auto cand = candidate.samples();
	// 255^2 * 2^32 samples still fits in 64 bits.
	std::uint64_t sum = 0;
	for (std::size_t i = 0; i < ref.size(); ++i) {
		const int d = static_cast<int>(ref[i]) - static_cast<int>(cand[i]);
		sum += static_cast<std::uint64_t>(d * d);
	}
	return static_cast<double>(sum) / static_cast<double>(ref.size());
}

Psnr psnr_from_mse(double mse) noexcept {
	if (mse <= 0.0)
		return Psnr::infinite();
	return Psnr(10.0 * std::log10(kPeakValue * kPeakValue / mse));
}

QualityMeasurement psnr(const Image& reference, const Image& candidate) {
	QualityMeasurement q;
	q.mse = mse(reference, candidate);
	q.psnr = psnr_from_mse(q.mse);
	return q;
}

double match_rate(std::span<const double> ious, double iou_threshold) {
	if (ious.empty())
		throw Error("match rate of an empty record set is undefined");
	const auto matched = std::ranges::count_if(ious, [&](double v) { return v >= iou_threshold; });
	return static_cast<double>(matched) / static_cast<double>(ious.size());
}

}  // namespace degrade::metrics
