#include "oracles.hpp"

#include "pcpt/errors.hpp"
#include "pcpt/solver.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace pcpt;

namespace {

SchemeParams flat_params(double c = 0.02)
{
	SchemeParams p;
	p.h = 0.1;
	p.dt = 0.1;
	p.epsilon = 0.1;
	p.switching_cost = c;
	return p;
}

SchemeParams benchmark_params(double h, double c = 1.0 / 640.0)
{
	SchemeParams p;
	p.h = h;
	p.dt = h / 15.0;
	p.epsilon = h;
	p.switching_cost = c;
	return p;
}

ComponentValues constant_components(const std::vector<double> &levels,
		std::size_t n)
{
	ComponentValues U;
	for (double v : levels) {
		U.emplace_back(n, v);
	}
	return U;
}

double sup_norm(const std::vector<double> &v)
{
	double m = 0.0;
	for (double x : v) {
		m = std::max(m, std::abs(x));
	}
	return m;
}

}  // namespace

TEST(SwitchingStep, Examples)
{
	const auto controls = discretize_controls(0.0, 1.0, 3);
	{
		const SwitchingScheme s(oracle::flat_spec(0.5, 0.6), controls,
				flat_params());
		const auto U = constant_components({0.4, 0.47, 0.3}, s.grid().size());
		const auto half = s.switching_step(U, 0.1);
		// Boundary nodes hold the extension; check the interior.
		for (std::size_t i = 1; i + 1 < s.grid().size(); ++i) {
			EXPECT_EQ(half[0][i], 0.5);
		}
	}
	{
		const SwitchingScheme s(oracle::flat_spec(0.1, 0.6), controls,
				flat_params());
		const auto U = constant_components({0.4, 0.47, 0.3}, s.grid().size());
		const auto half = s.switching_step(U, 0.1);
		for (std::size_t i = 1; i + 1 < s.grid().size(); ++i) {
			EXPECT_NEAR(half[0][i], 0.45, 1e-15);
			EXPECT_EQ(half[1][i], 0.47);
			EXPECT_NEAR(half[2][i], 0.45, 1e-15);
		}
	}
	{
		const SwitchingScheme s(oracle::flat_spec(0.35, 0.6),
				discretize_controls(0.2, 0.2, 1), flat_params());
		const auto n = s.grid().size();
		ComponentValues U(1, std::vector<double>(n, 0.3));
		U[0][2] = 0.9;
		const auto half = s.switching_step(U, 0.1);
		for (std::size_t i = 1; i + 1 < n; ++i) {
			EXPECT_EQ(half[0][i], i == 2 ? 0.9 : 0.35);
		}
	}
}

TEST(PicardMap, ConstantsAreFixed)
{
	const double c0 = 0.73;
	const SwitchingScheme s(oracle::flat_spec(-10.0, c0), discretize_controls(
			0.0, 1.0, 2), flat_params());
	const std::vector<double> U(s.grid().size(), c0);
	for (double v : s.picard_map(1, U, U, 0.1)) {
		EXPECT_EQ(v, c0);
	}
}

TEST(PicardMap, ZeroDynamicsSubstitution)
{
	const double beta = 0.2;
	const auto params = flat_params();
	const SwitchingScheme s(oracle::flat_spec(-10.0, 0.5, 0.0, beta),
			discretize_controls(0.0, 1.0, 2), params);
	const auto n = s.grid().size();
	std::vector<double> guess(n), half(n);
	for (std::size_t i = 0; i < n; ++i) {
		guess[i] = 0.1 * i;
		half[i] = 1.0 - 0.05 * i;
	}
	const auto out = s.picard_map(0, guess, half, 0.1);
	for (std::size_t i = 1; i + 1 < n; ++i) {
		EXPECT_NEAR(out[i], half[i] - params.dt * beta * guess[i], 1e-15);
	}
	// Boundary nodes carry the extension.
	EXPECT_EQ(out[0], 0.5);
	EXPECT_EQ(out[n - 1], 0.5);
}

TEST(PicardMap, EmpiricalContractionWithinBound)
{
	const auto params = benchmark_params(1.0 / 25.0);
	const SwitchingScheme s(recursive_utility_spec(BenchmarkParams{}),
			discretize_controls(0.0, 1.0, 2), params);
	EXPECT_LT(s.contraction_bound(), 1.0);
	std::mt19937_64 rng(9);
	std::uniform_real_distribution<double> u(0.0, 1.0);
	const auto n = s.grid().size();
	for (int trial = 0; trial < 200; ++trial) {
		std::vector<double> U(n), V(n), half(n);
		for (std::size_t i = 0; i < n; ++i) {
			U[i] = u(rng);
			V[i] = U[i] + 0.1 * (u(rng) - 0.5);
			half[i] = u(rng);
		}
		double dist = 0.0, image = 0.0;
		const std::size_t j = trial % 2;
		const auto tu = s.picard_map(j, U, half, 0.5);
		const auto tv = s.picard_map(j, V, half, 0.5);
		for (std::size_t i = 0; i < n; ++i) {
			dist = std::max(dist, std::abs(U[i] - V[i]));
			image = std::max(image, std::abs(tu[i] - tv[i]));
		}
		ASSERT_LE(image, s.contraction_bound() * dist * (1 + 1e-12));
	}
}

TEST(ImplicitStep, ScalarFixedPoint)
{
	const double c0 = 0.2, beta = 0.2, u_half = 0.8;
	const auto params = flat_params();
	const double expected = (u_half + params.dt * c0)
			/ (1.0 + params.dt * beta);
	// Extension set to the fixed point so the Dirichlet nodes agree with it.
	const SwitchingScheme s(oracle::flat_spec(-10.0, expected, c0, beta),
			discretize_controls(0.0, 1.0, 2), params);
	std::vector<double> half(s.grid().size(), u_half);
	const auto step = s.implicit_step(0, half, 0.1);
	for (double v : step.values) {
		EXPECT_NEAR(v, expected, params.picard_tol);
	}
	EXPECT_LE(step.stats.last_increment, params.picard_tol);
}

TEST(ImplicitStep, StillProblemConvergesImmediately)
{
	// Affine data: the Lax-Friedrichs viscosity vanishes too.
	auto spec = oracle::flat_spec(-10.0, 0.5);
	spec.extension = {[](double, double x) { return 0.25 + 0.5 * x; }, false};
	const SwitchingScheme s(spec, discretize_controls(0.0, 1.0, 2),
			flat_params());
	std::vector<double> half(s.grid().size());
	for (std::size_t i = 0; i < half.size(); ++i) {
		half[i] = 0.25 + 0.5 * s.grid().x(i);
	}
	const auto step = s.implicit_step(1, half, 0.1);
	EXPECT_EQ(step.stats.iterations, 1u);
	for (std::size_t i = 0; i < half.size(); ++i) {
		EXPECT_NEAR(step.values[i], half[i], 1e-15);
	}
}

TEST(ImplicitStep, BenchmarkIterationCount)
{
	const SwitchingScheme s(recursive_utility_spec(BenchmarkParams{}),
			discretize_controls(0.0, 1.0, 2), benchmark_params(1.0 / 50.0));
	const auto result = s.solve();
	EXPECT_LE(result.max_picard_iterations, 10u);
	EXPECT_LT(result.contraction_bound, 0.11);
}

TEST(ImplicitStep, ExhaustedIterationsThrow)
{
	auto params = benchmark_params(1.0 / 25.0);
	params.picard_max = 1;
	const SwitchingScheme s(recursive_utility_spec(BenchmarkParams{}),
			discretize_controls(0.0, 1.0, 2), params);
	const auto U0 = s.initial_values();
	const auto half = s.switching_step(U0, s.grid().t(1));
	try {
		s.implicit_step(1, half[1], s.grid().t(1));
		FAIL() << "expected ConvergenceError";
	} catch (const ConvergenceError &e) {
		EXPECT_GT(e.last_increment, params.picard_tol);
	}
	EXPECT_THROW(s.solve(), ConvergenceError);
}

TEST(Solve, ZeroDynamicsClosedForm)
{
	const LinearDecayParams p;
	SchemeParams params;
	params.h = 0.1;
	params.dt = 1e-3;
	params.epsilon = 0.1;
	const auto result = solve(linear_decay_spec(p),
			discretize_controls(0.0, 0.0, 1), params);
	for (double v : result.final_values[0]) {
		EXPECT_NEAR(v, 0.590635, 1e-3);
		EXPECT_NEAR(v, linear_decay_exact(p, 1.0), 2.0 * params.dt);
	}
}

TEST(Solve, RejectsUnstableParameters)
{
	const auto spec = recursive_utility_spec(BenchmarkParams{});
	const auto controls = discretize_controls(0.0, 1.0, 2);
	auto params = benchmark_params(1.0 / 25.0);
	params.theta = 0.001;
	EXPECT_THROW(SwitchingScheme(spec, controls, params), ConfigError);
	params = benchmark_params(1.0 / 25.0);
	params.theta = 0.3;
	EXPECT_THROW(SwitchingScheme(spec, controls, params), ConfigError);
	params = benchmark_params(1.0 / 25.0);
	params.switching_cost = 0.0;
	EXPECT_THROW(SwitchingScheme(spec, controls, params), ConfigError);
}

TEST(ExtractPolicy, Examples)
{
	const ComponentValues U = {{0.3}, {0.5}};
	const std::vector<double> zeta = {0.2};
	const auto f = extract_policy(U, zeta);
	EXPECT_EQ(f.control_index[0], 1);
	EXPECT_EQ(f.stopped[0], 0);

	const ComponentValues tied = {{0.2}, {0.2}, {0.2}};
	const auto g = extract_policy(tied, zeta);
	EXPECT_EQ(g.control_index[0], 0);
	EXPECT_EQ(g.stopped[0], 1);
}

TEST(ExtractPolicy, BenchmarkHasStoppingAndContinuationRegions)
{
	auto params = benchmark_params(1.0 / 50.0);
	params.record_policy = true;
	const auto result = solve(recursive_utility_spec(BenchmarkParams{}),
			discretize_controls(0.0, 1.0, 2), params);
	ASSERT_EQ(result.policy.size(), result.grid.steps() + 1);
	std::size_t stopped = 0, running = 0;
	for (std::size_t n = 1; n < result.policy.size(); ++n) {
		for (std::size_t i = 1; i + 1 < result.grid.size(); ++i) {
			(result.policy[n].stopped[i] ? stopped : running) += 1;
			ASSERT_LT(result.policy[n].control_index[i], 2);
		}
	}
	EXPECT_GT(stopped, 0u);
	EXPECT_GT(running, 0u);
}

TEST(SchemeResidual, BenchmarkStepsAndNegativeControl)
{
	const auto params = benchmark_params(1.0 / 25.0);
	const SwitchingScheme s(recursive_utility_spec(BenchmarkParams{}),
			discretize_controls(0.0, 1.0, 2), params);
	double worst = 0.0;
	s.solve([&](const StepRecord &r) {
		for (std::size_t j = 0; j < 2; ++j) {
			const auto res = s.scheme_residual(j, (*r.next)[j], *r.previous,
					r.t_next);
			worst = std::max(worst, sup_norm(res));
		}
	});
	EXPECT_LE(worst, 10.0 * params.picard_tol);

	// One Picard application from the switched state is not a solution.
	const auto U0 = s.initial_values();
	const double t1 = s.grid().t(1);
	const auto half = s.switching_step(U0, t1);
	const auto once = s.picard_map(1, half[1], half[1], t1);
	EXPECT_GT(sup_norm(s.scheme_residual(1, once, U0, t1)),
			1e3 * params.picard_tol);
}

TEST(SchemeResidual, ConstantModelIsExactlyZero)
{
	const SwitchingScheme s(oracle::flat_spec(0.4, 0.4),
			discretize_controls(0.0, 1.0, 2), flat_params());
	s.solve([&](const StepRecord &r) {
		for (std::size_t j = 0; j < 2; ++j) {
			for (double v : s.scheme_residual(j, (*r.next)[j], *r.previous,
					r.t_next)) {
				ASSERT_EQ(v, 0.0);
			}
		}
	});
}

// Step invariants on the benchmark: switching dominance, Picard ratio,
// stability bound.
TEST(SolverProperties, BenchmarkStepInvariants)
{
	const auto params = benchmark_params(1.0 / 50.0);
	const SwitchingScheme s(recursive_utility_spec(BenchmarkParams{}),
			discretize_controls(0.0, 1.0, 3), params);
	std::size_t steps = 0;
	const auto result = s.solve([&](const StepRecord &r) {
		++steps;
		const auto zeta = s.obstacle_at(r.t_next);
		const auto &prev = *r.previous;
		const auto &half = *r.half;
		for (std::size_t j = 0; j < prev.size(); ++j) {
			for (std::size_t i = 0; i < zeta.size(); ++i) {
				ASSERT_GE(half[j][i], zeta[i]);
				for (std::size_t k = 0; k < prev.size(); ++k) {
					if (k != j) {
						ASSERT_GE(half[j][i],
								prev[k][i] - params.switching_cost);
					}
				}
			}
			ASSERT_LE((*r.picard)[j].max_ratio, s.contraction_bound());
			ASSERT_LE(sup_norm((*r.next)[j]), r.stability_bound);
		}
	});
	EXPECT_EQ(steps, s.grid().steps());
	EXPECT_LE(result.max_contraction_ratio, result.contraction_bound);
	EXPECT_LE(result.max_stability_excess, 0.0);
}

TEST(SolverProperties, InitialDataDominateObstacle)
{
	const SwitchingScheme s(recursive_utility_spec(BenchmarkParams{}),
			discretize_controls(0.0, 1.0, 2), benchmark_params(1.0 / 25.0));
	const auto U0 = s.initial_values();
	const auto zeta = s.obstacle_at(0.0);
	for (const auto &u : U0) {
		for (std::size_t i = 0; i < zeta.size(); ++i) {
			ASSERT_GE(u[i], zeta[i]);
		}
	}
}

TEST(SolverProperties, DiscreteComparisonOnRandomModels)
{
	std::mt19937_64 rng(31337);
	std::uniform_real_distribution<double> u(0.0, 1.0);
	for (int trial = 0; trial < 50; ++trial) {
		const oracle::RandomModel m(rng);
		const std::size_t N = 10 + static_cast<std::size_t>(30 * u(rng));
		SchemeParams params;
		params.h = 1.0 / N;
		params.dt = params.h / 10.0;
		params.epsilon = params.h;
		params.theta = 0.15;
		params.switching_cost = 0.01 + 0.05 * u(rng);
		const std::size_t J = 2 + trial % 3;
		const auto controls = discretize_controls(0.0, 1.0, J);

		auto low = m.spec(0.0, params.h);
		auto high = m.spec(0.2 * u(rng), params.h);
		low.horizon = high.horizon = 20 * params.dt;

		const SwitchingScheme a(low, controls, params);
		const SwitchingScheme b(high, controls, params);
		std::vector<ComponentValues> path;
		a.solve([&](const StepRecord &r) {
			path.push_back(*r.next);
			for (std::size_t j = 0; j < J; ++j) {
				ASSERT_LE((*r.picard)[j].max_ratio, a.contraction_bound());
				ASSERT_LE(sup_norm((*r.next)[j]), r.stability_bound);
				ASSERT_LE(sup_norm(a.scheme_residual(j, (*r.next)[j],
						*r.previous, r.t_next)), 10.0 * params.picard_tol);
			}
		});
		ASSERT_EQ(path.size(), 20u);
		b.solve([&](const StepRecord &r) {
			const auto &lo = path[r.n];
			for (std::size_t j = 0; j < J; ++j) {
				for (std::size_t i = 0; i <= N; ++i) {
					ASSERT_LE(lo[j][i], (*r.next)[j][i] + 1e-9)
							<< "trial " << trial << " step " << r.n;
				}
			}
		});
	}
}

TEST(SolverProperties, BitwiseDeterministicAcrossThreads)
{
	const auto spec = recursive_utility_spec(BenchmarkParams{});
	const auto controls = discretize_controls(0.0, 1.0, 5);
	auto params = benchmark_params(1.0 / 25.0);
	const auto serial = solve(spec, controls, params);
	for (std::size_t threads : {1u, 2u, 4u}) {
		params.parallel_components = true;
		params.threads = threads;
		const auto parallel = solve(spec, controls, params);
		ASSERT_EQ(parallel.final_values, serial.final_values) << threads;
		ASSERT_EQ(parallel.total_picard_iterations,
				serial.total_picard_iterations);
	}
}
