#include "pcpt/model.hpp"

#include "pcpt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pcpt {

void ProblemSpec::validate() const
{
	const char *missing = nullptr;
	if (!drift) {
		missing = "drift";
	} else if (!diffusion) {
		missing = "diffusion";
	} else if (!jump) {
		missing = "jump amplitude";
	} else if (!driver) {
		missing = "driver";
	} else if (!obstacle) {
		missing = "obstacle";
	} else if (!payoff) {
		missing = "payoff";
	} else if (!extension.value) {
		missing = "exterior extension";
	} else if (!measure.density) {
		missing = "Levy density";
	}
	if (missing != nullptr) {
		throw ConfigError(std::string("problem '") + name + "' has no "
				+ missing);
	}
	if (!(a_hi >= a_lo)) {
		throw ConfigError("control interval must satisfy a_lo <= a_hi");
	}
	if (!(x_hi > x_lo) || !(horizon > 0.0)) {
		throw ConfigError("problem domain or horizon is empty");
	}
	const auto &c = driver_constants;
	if (c.monotonicity_y < 0.0 || c.lipschitz_y < 0.0 || c.lipschitz_z < 0.0
			|| c.lipschitz_k < 0.0 || c.bound_at_zero < 0.0) {
		throw ConfigError("driver constants must be nonnegative");
	}
}

ControlGrid discretize_controls(double a_lo, double a_hi, std::size_t J)
{
	if (J == 0) {
		throw ConfigError("control grid needs at least one value");
	}
	if (!(a_hi >= a_lo)) {
		throw ConfigError("control interval must satisfy a_lo <= a_hi");
	}
	ControlGrid grid;
	if (J == 1) {
		if (a_hi != a_lo) {
			throw ConfigError(
					"a single control value only discretises a degenerate "
					"interval");
		}
		grid.values = {a_lo};
		grid.delta = 0.0;
		return grid;
	}
	if (a_hi == a_lo) {
		throw ConfigError("a degenerate control interval takes exactly one "
				"control value");
	}
	const double delta = (a_hi - a_lo) / static_cast<double>(J - 1);
	grid.values.resize(J);
	for (std::size_t j = 0; j < J; ++j) {
		grid.values[j] = a_lo + static_cast<double>(j) * delta;
	}
	grid.values.back() = a_hi;
	grid.delta = delta;
	return grid;
}

void BenchmarkParams::validate() const
{
	for (double v : {beta, kappa, b, sigma, mu, T, x0, r, psi_scale, x_lo,
			 x_hi, e_max, bins_per_unit}) {
		if (!std::isfinite(v)) {
			throw ConfigError("benchmark parameters must be finite");
		}
	}
	if (!(sigma > 0.0) || !(mu > 0.0) || !(T > 0.0)) {
		throw ConfigError("benchmark needs sigma > 0, mu > 0 and T > 0");
	}
	if (!(beta >= 0.0) || !(kappa >= 0.0)) {
		throw ConfigError("benchmark needs beta >= 0 and kappa >= 0");
	}
	if (!(x_hi > x_lo) || x_lo < 0.0) {
		throw ConfigError("benchmark domain must be a nonempty subset of "
				"[0, inf)");
	}
}

ProblemSpec recursive_utility_spec(const BenchmarkParams &p)
{
	p.validate();

	ProblemSpec s;
	s.name = "recursive_utility";
	s.drift = [b = p.b, r = p.r](double a, double x) {
		return (a * b + (1.0 - a) * r) * x;
	};
	s.diffusion = [sigma = p.sigma](double a, double x) {
		return a * sigma * x;
	};
	s.jump = [](double a, double x, double e) {
		return a * x * std::min(1.0, std::abs(e));
	};
	s.driver = [beta = p.beta, kappa = p.kappa, scale = p.psi_scale,
			T = p.T](double, double t, double x, double y, double z, double) {
		const double psi = scale * std::exp(-(T - t)) * std::exp(-0.5 * x);
		return psi - beta * y - kappa * std::abs(z);
	};
	s.driver_constants = {
		.monotonicity_y = p.beta,
		.lipschitz_y = p.beta,
		.lipschitz_z = p.kappa,
		.lipschitz_k = 0.0,
		.bound_at_zero = std::abs(p.psi_scale) * std::exp(-0.5 * p.x_lo),
	};

	const auto g = [](double x) { return std::max(0.0, 1.0 - std::exp(-x)); };
	s.payoff = g;
	s.obstacle = [g](double, double x) { return g(x); };
	s.extension = {[g](double, double x) { return g(x); }, false};

	s.a_lo = 0.0;
	s.a_hi = 1.0;
	s.measure = tempered_stable_measure(p.mu, std::min(0.5, p.e_max / 2.0),
			p.e_max, p.bins_per_unit);
	s.x_lo = p.x_lo;
	s.x_hi = p.x_hi;
	s.horizon = p.T;
	return s;
}

double linear_decay_exact(const LinearDecayParams &p, double t)
{
	if (p.beta == 0.0) {
		return p.g0 + p.c0 * t;
	}
	const double decay = std::exp(-p.beta * t);
	return p.g0 * decay + p.c0 / p.beta * (1.0 - decay);
}

ProblemSpec linear_decay_spec(const LinearDecayParams &p)
{
	ProblemSpec s;
	s.name = "linear_decay";
	s.drift = [](double, double) { return 0.0; };
	s.diffusion = [](double, double) { return 0.0; };
	s.jump = [](double, double, double) { return 0.0; };
	s.driver = [c0 = p.c0, beta = p.beta](double, double, double, double y,
			double, double) { return c0 - beta * y; };
	s.driver_constants = {
		.monotonicity_y = p.beta,
		.lipschitz_y = p.beta,
		.lipschitz_z = 0.0,
		.lipschitz_k = 0.0,
		.bound_at_zero = std::abs(p.c0),
	};
	s.payoff = [g0 = p.g0](double) { return g0; };
	s.obstacle = [z = p.obstacle](double, double) { return z; };
	s.extension = {[p](double t, double) {
		return std::max(p.obstacle, linear_decay_exact(p, t));
	}, true};
	s.a_lo = 0.0;
	s.a_hi = 0.0;
	s.measure = zero_measure();
	s.x_lo = p.x_lo;
	s.x_hi = p.x_hi;
	s.horizon = p.T;
	return s;
}

double modified_diffusion(const ProblemSpec &spec, const LevyMeasure &nu,
		double alpha, double x)
{
	const double sigma = spec.diffusion(alpha, x);
	const double v = small_jump_variance(nu,
			[&](double e) { return spec.jump(alpha, x, e); });
	return std::sqrt(sigma * sigma + v);
}

double driver_lipschitz_in_p(const ProblemSpec &spec,
		const ControlGrid &controls, const SpaceTimeGrid &grid,
		double epsilon)
{
	const double lz = spec.driver_constants.lipschitz_z;
	if (lz == 0.0) {
		return 0.0;
	}
	LevyMeasure nu = spec.measure;
	nu.epsilon = epsilon;
	double sup = 0.0;
	for (double alpha : controls.values) {
		for (std::size_t i = 0; i < grid.size(); ++i) {
			sup = std::max(sup, std::abs(modified_diffusion(spec, nu, alpha,
					grid.x(i))));
		}
	}
	return lz * sup;
}

} // namespace pcpt
