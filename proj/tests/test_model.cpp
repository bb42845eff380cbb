#include "pcpt/errors.hpp"
#include "pcpt/model.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace pcpt;

TEST(DiscretizeControls, Examples)
{
	const auto two = discretize_controls(0.0, 1.0, 2);
	ASSERT_EQ(two.size(), 2u);
	EXPECT_EQ(two[0], 0.0);
	EXPECT_EQ(two[1], 1.0);
	EXPECT_EQ(two.delta, 1.0);

	const auto many = discretize_controls(0.0, 1.0, 21);
	ASSERT_EQ(many.size(), 21u);
	for (std::size_t j = 0; j < 21; ++j) {
		EXPECT_NEAR(many[j], 0.05 * j, 1e-15);
	}
	EXPECT_EQ(many[20], 1.0);
	EXPECT_NEAR(many.delta, 0.05, 1e-15);

	const auto one = discretize_controls(0.3, 0.3, 1);
	ASSERT_EQ(one.size(), 1u);
	EXPECT_EQ(one[0], 0.3);
	EXPECT_EQ(one.delta, 0.0);
}

TEST(DiscretizeControls, Errors)
{
	EXPECT_THROW(discretize_controls(0.0, 1.0, 0), ConfigError);
	EXPECT_THROW(discretize_controls(0.0, 1.0, 1), ConfigError);
	EXPECT_THROW(discretize_controls(1.0, 0.0, 3), ConfigError);
	EXPECT_THROW(discretize_controls(0.5, 0.5, 3), ConfigError);
}

TEST(DiscretizeControls, SortedWithinIntervalAndDelta)
{
	for (std::size_t J : {2u, 3u, 7u, 11u, 41u, 81u}) {
		const double lo = -0.4, hi = 1.7;
		const auto c = discretize_controls(lo, hi, J);
		ASSERT_EQ(c.size(), J);
		EXPECT_EQ(c[0], lo);
		EXPECT_EQ(c[J - 1], hi);
		double gap = 0.0;
		for (std::size_t j = 1; j < J; ++j) {
			ASSERT_GT(c[j], c[j - 1]);
			gap = std::max(gap, c[j] - c[j - 1]);
		}
		EXPECT_NEAR(c.delta, gap, 1e-14);
	}
}

TEST(RecursiveUtility, Examples)
{
	const BenchmarkParams p;
	EXPECT_EQ(p.beta, 0.2);
	EXPECT_EQ(p.kappa, 1.0);
	EXPECT_EQ(p.b, 0.1);
	EXPECT_EQ(p.sigma, 0.15);
	EXPECT_EQ(p.mu, 6.0);
	EXPECT_EQ(p.T, 1.0);
	EXPECT_EQ(p.x0, 1.0);
	const auto s = recursive_utility_spec(p);
	EXPECT_NO_THROW(s.validate());
	EXPECT_NEAR(s.driver(1.0, 1.0, 0.0, 0.0, 0.0, 0.0), 0.8, 1e-15);
	EXPECT_NEAR(s.payoff(1.0), 0.63212055882855767, 1e-15);
	EXPECT_NEAR(s.payoff(1.0), 1.0 - std::exp(-1.0), 1e-15);
	EXPECT_EQ(s.x_lo, 0.0);
	EXPECT_EQ(s.x_hi, 2.0);

	EXPECT_NEAR(s.drift(1.0, 2.0), 0.2, 1e-15);
	EXPECT_NEAR(s.drift(0.0, 2.0), 0.0, 1e-15);
	EXPECT_NEAR(s.diffusion(0.5, 2.0), 0.15, 1e-15);
	EXPECT_NEAR(s.jump(0.5, 2.0, -3.0), 1.0, 1e-15);
	EXPECT_NEAR(s.jump(1.0, 1.0, 0.25), 0.25, 1e-15);
	EXPECT_NEAR(s.driver(1.0, 0.5, 1.0, 0.3, -0.4, 0.0),
			0.8 * std::exp(-0.5) * std::exp(-0.5) - 0.2 * 0.3 - 0.4, 1e-15);
	// Extension outside the domain is g.
	EXPECT_NEAR(s.extension(0.3, 2.7), 1.0 - std::exp(-2.7), 1e-15);
	EXPECT_EQ(s.extension(0.3, -0.5), 0.0);
}

TEST(RecursiveUtility, AssumptionBoundsOnDomain)
{
	const auto s = recursive_utility_spec(BenchmarkParams{});
	for (int ia = 0; ia <= 10; ++ia) {
		const double a = ia / 10.0;
		for (int ix = 1; ix < 200; ++ix) {
			const double x = ix / 100.0;
			for (double e : {-7.0, -1.0, -0.3, -0.001, 0.002, 0.5, 1.0, 4.0}) {
				ASSERT_LE(std::abs(s.jump(a, x, e)),
						2.0 * std::min(1.0, std::abs(e)) + 1e-15);
			}
			const double g = s.payoff(x);
			ASSERT_GE(g, 0.0);
			ASSERT_LE(g, 1.0);
			ASSERT_EQ(s.obstacle(0.0, x), g);
			ASSERT_GE(s.obstacle(0.7, x), 0.0);
			ASSERT_LE(s.obstacle(0.7, x), 1.0);
		}
	}
}

TEST(RecursiveUtility, ValidateRejectsBadParams)
{
	BenchmarkParams p;
	p.sigma = 0.0;
	EXPECT_THROW(p.validate(), ConfigError);
	p = BenchmarkParams{};
	p.mu = -1.0;
	EXPECT_THROW(p.validate(), ConfigError);
}

TEST(DriverLipschitz, Examples)
{
	const SpaceTimeGrid grid(0.0, 2.0, 0.01, 1.0, 0.01 / 15.0);
	const auto controls = discretize_controls(0.0, 1.0, 2);
	BenchmarkParams p;
	auto s = recursive_utility_spec(p);
	// kappa * sigma_tilde(1, 2) with sigma_tilde^2 = 0.3^2 + 4 * 2 int s e^{-6s}.
	const double var = 2.0 * (1.0 - std::exp(-0.06) * 1.06) / 36.0;
	const double expected = std::sqrt(0.09 + 4.0 * var);
	const double cp = driver_lipschitz_in_p(s, controls, grid, 0.01);
	EXPECT_NEAR(cp, expected, 1e-10);
	EXPECT_NEAR(cp, 0.301, 5e-4);

	p.kappa = 0.0;
	EXPECT_EQ(driver_lipschitz_in_p(recursive_utility_spec(p), controls, grid,
			0.01), 0.0);

	const auto still = linear_decay_spec(LinearDecayParams{});
	const SpaceTimeGrid unit(0.0, 1.0, 0.1, 1.0, 0.1);
	EXPECT_EQ(driver_lipschitz_in_p(still, discretize_controls(0, 0, 1), unit,
			0.1), 0.0);
}

TEST(LinearDecay, ExactSolution)
{
	const LinearDecayParams p;
	EXPECT_NEAR(linear_decay_exact(p, 1.0),
			0.5 * std::exp(-0.2) + (0.2 / 0.2) * (1.0 - std::exp(-0.2)), 1e-15);
	EXPECT_NEAR(linear_decay_exact(p, 1.0), 0.590635, 1e-6);
	EXPECT_EQ(linear_decay_exact(p, 0.0), 0.5);
	const auto s = linear_decay_spec(p);
	EXPECT_NO_THROW(s.validate());
	EXPECT_EQ(s.driver(0, 0, 0, 1.0, 5.0, 5.0), 0.0);
}
