#pragma once

#include "pcpt/grid.hpp"
#include "pcpt/levy.hpp"
#include "pcpt/ops.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace pcpt {

/// Constants of the driver used for scheme validation and a-priori bounds.
struct DriverConstants {
	/// f(y) - f(y') >= monotonicity_y (y' - y) for y' >= y.
	double monotonicity_y = 0.0;
	double lipschitz_y = 0.0;
	/// Lipschitz constant in the z slot (z = sigma~ p).
	double lipschitz_z = 0.0;
	/// Lipschitz constant in the k slot; f is nondecreasing in k.
	double lipschitz_k = 0.0;
	/// sup |f(alpha, t, x, 0, 0, 0)|.
	double bound_at_zero = 0.0;
};

/// Continuous problem data for a one-dimensional controlled jump diffusion
/// with a nonlinear-expectation (BSDE) criterion and optimal stopping. Time
/// runs forward from the initial condition u(0, .) = g.
struct ProblemSpec {
	std::string name;

	std::function<double(double alpha, double x)> drift;
	std::function<double(double alpha, double x)> diffusion;
	std::function<double(double alpha, double x, double e)> jump;
	/// gamma(x, e) >= 0; empty means identically zero.
	std::function<double(double x, double e)> driver_weight;
	Driver driver;
	DriverConstants driver_constants;

	std::function<double(double t, double x)> obstacle;
	std::function<double(double x)> payoff;

	double a_lo = 0.0;
	double a_hi = 1.0;
	/// Density, e_max and quadrature resolution; epsilon is set by the scheme.
	LevyMeasure measure;

	double x_lo = 0.0;
	double x_hi = 1.0;
	double horizon = 1.0;
	ExteriorExtension extension;

	/// Throws ConfigError if a required function is missing or the interval
	/// data are inconsistent.
	void validate() const;
};

/// Finite control set alpha_1 < ... < alpha_J and its resolution delta.
struct ControlGrid {
	std::vector<double> values;
	double delta = 0.0;

	std::size_t size() const { return values.size(); }
	double operator[](std::size_t j) const { return values[j]; }
};

/// J == 1 requires a_lo == a_hi; otherwise a uniform grid including both end
/// points. Throws ConfigError for J == 0 or an empty interval.
ControlGrid discretize_controls(double a_lo, double a_hi, std::size_t J);

/// Recursive-utility portfolio problem: wealth x, fraction alpha in [0, 1]
/// held in a risky asset with tempered-stable jumps.
struct BenchmarkParams {
	double beta = 0.2;    ///< discount in the driver
	double kappa = 1.0;   ///< ambiguity aversion
	double b = 0.1;       ///< risky drift
	double sigma = 0.15;  ///< volatility
	double mu = 6.0;      ///< tempering
	double T = 1.0;
	double x0 = 1.0;
	double r = 0.0;
	double psi_scale = 0.8;
	double x_lo = 0.0;
	double x_hi = 2.0;
	double e_max = 5.0;
	double bins_per_unit = 400.0;

	void validate() const;
};

ProblemSpec recursive_utility_spec(const BenchmarkParams &p);

/// u' = c0 - beta u with no dynamics, u(0) = g0 and a constant obstacle.
/// Closed form u(t) = g0 e^{-beta t} + c0/beta (1 - e^{-beta t}) while the
/// obstacle is inactive.
struct LinearDecayParams {
	double g0 = 0.5;
	double c0 = 0.2;
	double beta = 0.2;
	double T = 1.0;
	double obstacle = -10.0;
	double x_lo = 0.0;
	double x_hi = 1.0;
};

ProblemSpec linear_decay_spec(const LinearDecayParams &p);

double linear_decay_exact(const LinearDecayParams &p, double t);

/// Modified diffusion sqrt(sigma^2 + int_{|e|<eps} eta^2 dnu) at (alpha, x).
/// nu.epsilon must already hold the truncation level.
double modified_diffusion(const ProblemSpec &spec, const LevyMeasure &nu,
		double alpha, double x);

/// Upper bound on the Lipschitz constant of p -> f(., sigma~ p, .): the sup of
/// lipschitz_z |sigma~(alpha, x)| over grid nodes and controls.
double driver_lipschitz_in_p(const ProblemSpec &spec,
		const ControlGrid &controls, const SpaceTimeGrid &grid,
		double epsilon);

} // namespace pcpt
