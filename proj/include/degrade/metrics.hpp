#pragma once

#include "degrade/bounding_box.hpp"
#include "degrade/image.hpp"

#include <cstdint>
#include <limits>
#include <span>

/// IoU, MSE/PSNR and match rates.
namespace degrade::metrics {

/// PSNR in decibels. Identical images carry the Infinite marker.
class Psnr {
public:
	constexpr Psnr() = default;
	constexpr explicit Psnr(double db) : db_(db) {}

	static constexpr Psnr infinite() { return Psnr(std::numeric_limits<double>::infinity()); }

	constexpr bool is_infinite() const noexcept { return db_ == std::numeric_limits<double>::infinity(); }
	constexpr double db() const noexcept { return db_; }

	friend constexpr bool operator==(Psnr, Psnr) = default;
	friend constexpr auto operator<=>(Psnr a, Psnr b) { return a.db_ <=> b.db_; }

private:
	double db_ = 0.0;
};

struct QualityMeasurement {
	double mse = 0.0;
	Psnr psnr;
	std::uint64_t encoded_bytes = 0;
};

inline constexpr double kPeakValue = 255.0;

/// Intersection over union. Returns 0 when the union is empty.
double iou(const BoundingBox& a, const BoundingBox& b) noexcept;

/// Mean squared error over every sample of every channel. Throws on shape mismatch.
double mse(const Image& reference, const Image& candidate);

Psnr psnr_from_mse(double mse) noexcept;

/// Fills mse and psnr; encoded_bytes is left to the caller.
QualityMeasurement psnr(const Image& reference, const Image& candidate);

/// Fraction of values with iou >= threshold. Throws on empty input.
double match_rate(std::span<const double> ious, double iou_threshold);

}  // namespace degrade::metrics
