#pragma once

#include <algorithm>

namespace degrade {

/// Axis-aligned rectangle in continuous pixel coordinates.
struct BoundingBox {
	double x_min = 0.0;
	double y_min = 0.0;
	double x_max = 0.0;
	double y_max = 0.0;

	double width() const noexcept { return x_max - x_min; }
	double height() const noexcept { return y_max - y_min; }
	double area() const noexcept { return width() * height(); }

	bool valid() const noexcept { return x_min <= x_max && y_min <= y_max; }

	BoundingBox translated(double dx, double dy) const noexcept {
		return {x_min + dx, y_min + dy, x_max + dx, y_max + dy};
	}

	BoundingBox clamped(double w, double h) const noexcept {
		return {std::clamp(x_min, 0.0, w), std::clamp(y_min, 0.0, h),
		        std::clamp(x_max, 0.0, w), std::clamp(y_max, 0.0, h)};
	}

	friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

}  // namespace degrade
