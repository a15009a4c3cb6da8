#include "degrade/error.hpp"
#include "degrade/metrics.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace m = degrade::metrics;
using degrade::BoundingBox;
using degrade::Image;

TEST(Iou, Examples) {
	EXPECT_DOUBLE_EQ(m::iou({0, 0, 10, 10}, {0, 0, 10, 10}), 1.0);
	EXPECT_DOUBLE_EQ(m::iou({0, 0, 10, 10}, {20, 20, 30, 30}), 0.0);
	EXPECT_DOUBLE_EQ(m::iou({0, 0, 10, 10}, {10, 0, 20, 10}), 0.0);
	EXPECT_DOUBLE_EQ(m::iou({0, 0, 10, 10}, {5, 0, 15, 10}), 1.0 / 3.0);
	EXPECT_DOUBLE_EQ(m::iou({0, 0, 10, 10}, {0, 0, 5, 10}), 0.5);
	EXPECT_DOUBLE_EQ(m::iou({0, 0, 0, 0}, {0, 0, 0, 0}), 0.0);
	EXPECT_DOUBLE_EQ(degrade::testing::iou_by_cell_count(0, 0, 10, 10, 5, 0, 15, 10), 1.0 / 3.0);
}

TEST(Iou, MatchesCellCountOracle) {
	std::mt19937_64 rng(101);
	std::uniform_int_distribution<int> c(0, 40);
	for (int i = 0; i < 300; ++i) {
		int a[4], b[4];
		for (int k = 0; k < 2; ++k) {
			a[k] = c(rng);
			a[k + 2] = a[k] + c(rng);
			b[k] = c(rng);
			b[k + 2] = b[k] + c(rng);
		}
		const double expected = degrade::testing::iou_by_cell_count(a[0], a[1], a[2], a[3], b[0], b[1], b[2], b[3]);
		const double got = m::iou({double(a[0]), double(a[1]), double(a[2]), double(a[3])},
		                          {double(b[0]), double(b[1]), double(b[2]), double(b[3])});
		EXPECT_NEAR(got, expected, 1e-12);
	}
}

TEST(Iou, Properties) {
	std::mt19937_64 rng(7);
	std::uniform_real_distribution<double> u(-50.0, 150.0), s(0.1, 80.0), t(-500.0, 500.0);
	for (int i = 0; i < 1000; ++i) {
		const double ax = u(rng), ay = u(rng), bx = u(rng), by = u(rng);
		const BoundingBox a{ax, ay, ax + s(rng), ay + s(rng)};
		const BoundingBox b{bx, by, bx + s(rng), by + s(rng)};
		const double v = m::iou(a, b);
		EXPECT_GE(v, 0.0);
		EXPECT_LE(v, 1.0);
		EXPECT_EQ(v, m::iou(b, a));
		EXPECT_DOUBLE_EQ(m::iou(a, a), 1.0);
		// Integer shifts keep the arithmetic exact enough for 1e-9.
		const double dx = std::round(t(rng)), dy = std::round(t(rng));
		EXPECT_NEAR(m::iou(a.translated(dx, dy), b.translated(dx, dy)), v, 1e-9);
	}
}

TEST(Mse, Examples) {
	EXPECT_DOUBLE_EQ(m::mse(Image(4, 4, 3, 0), Image(4, 4, 3, 255)), 65025.0);
	Image a(2, 2, 3, 10), b = a;
	for (std::size_t i = 0; i < b.sample_count(); i += 2)
		b.samples()[i] = 12;
	EXPECT_DOUBLE_EQ(m::mse(a, b), 2.0);
	EXPECT_THROW(m::mse(Image(2, 2, 3), Image(2, 3, 3)), degrade::Error);
	EXPECT_THROW(m::mse(Image(), Image()), degrade::Error);
}

TEST(Psnr, Examples) {
	const Image black(8, 8, 3, 0);
	EXPECT_TRUE(m::psnr(black, black).psnr.is_infinite());
	EXPECT_EQ(m::psnr(black, black).mse, 0.0);
	EXPECT_NEAR(m::psnr(black, Image(8, 8, 3, 255)).psnr.db(), 0.0, 1e-12);
	EXPECT_NEAR(m::psnr(black, Image(8, 8, 3, 16)).psnr.db(), 24.0486, 1e-3);
	EXPECT_LT(m::Psnr(30.0), m::Psnr::infinite());
}

TEST(Psnr, MatchesDirectFormula) {
	std::mt19937_64 rng(17);
	for (int i = 0; i < 50; ++i) {
		const int w = 1 + static_cast<int>(rng() % 64), h = 1 + static_cast<int>(rng() % 64);
		const auto a = degrade::testing::random_image(rng, w, h);
		const auto b = degrade::testing::random_image(rng, w, h);
		EXPECT_NEAR(m::psnr(a, b).psnr.db(), degrade::testing::psnr_direct(a, b), 1e-9);
	}
}

TEST(Psnr, DecreasesWithMse) {
	double prev = m::psnr_from_mse(1e-6).db();
	for (double e = 1e-3; e < 70000.0; e *= 1.7) {
		const double cur = m::psnr_from_mse(e).db();
		EXPECT_LT(cur, prev);
		prev = cur;
	}
	EXPECT_TRUE(m::psnr_from_mse(0.0).is_infinite());
}

TEST(MatchRate, ExamplesAndMonotonicity) {
	const std::vector<double> ious{0.2, 0.5, 0.9};
	EXPECT_DOUBLE_EQ(m::match_rate(ious, 0.5), 2.0 / 3.0);
	EXPECT_DOUBLE_EQ(m::match_rate(ious, 0.0), 1.0);
	EXPECT_THROW(m::match_rate({}, 0.5), degrade::Error);

	std::mt19937_64 rng(23);
	std::uniform_real_distribution<double> u(0.0, 1.0);
	std::vector<double> values(200);
	for (auto& v : values)
		v = u(rng);
	double prev = 1.0;
	for (double t = 0.0; t <= 1.0; t += 0.01) {
		const double r = m::match_rate(values, t);
		EXPECT_LE(r, prev);
		prev = r;
	}
}
