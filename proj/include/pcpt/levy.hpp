#pragma once

#include <functional>
#include <vector>

namespace pcpt {

/// Radial density of a one-dimensional Levy measure on R\{0}, with the jump
/// truncation level and the controls of the midpoint quadrature.
///
/// Jumps with |e| < epsilon are replaced by a diffusion correction, jumps with
/// epsilon <= |e| <= e_max are integrated numerically and the mass beyond
/// e_max is lumped into two point masses at +-e_max.
struct LevyMeasure {
	std::function<double(double)> density;
	double epsilon = 0.01;
	double e_max = 5.0;
	double bins_per_unit = 400.0;
	double tail_mass_plus = 0.0;   ///< nu({e > e_max})
	double tail_mass_minus = 0.0;  ///< nu({e < -e_max})

	/// Throws ConfigError unless epsilon > 0, e_max > max(epsilon, 1),
	/// bins_per_unit >= 1 and the tail masses are nonnegative.
	void validate() const;
};

/// nu(de) = exp(-mu |e|) / |e| de, tails set from a numerical integral of the
/// density over [e_max, inf).
LevyMeasure tempered_stable_measure(double mu, double epsilon,
		double e_max = 5.0, double bins_per_unit = 400.0);

/// The zero measure.
LevyMeasure zero_measure(double epsilon = 0.01);

/// Integral of the density over [from, inf) (exp-sinh quadrature).
double density_tail_mass(const std::function<double(double)> &density,
		double from);

/// Jump amplitude e -> eta(e) for one state component at a fixed (alpha, x).
using JumpAmplitude = std::function<double(double)>;

/// nu({|e| >= epsilon}), tails included.
double truncated_mass(const LevyMeasure &nu);

/// int_{|e| < epsilon} eta(e)^2 nu(de); added to sigma^2 to form the modified
/// diffusion coefficient.
double small_jump_variance(const LevyMeasure &nu, const JumpAmplitude &eta);

/// -int_{|e| >= epsilon} eta(e) nu(de), the drift produced by removing the
/// compensator from the truncated integro-differential operator. Tail mass is
/// charged at eta(+-e_max).
double drift_correction(const LevyMeasure &nu, const JumpAmplitude &eta);

/// Midpoint quadrature of nu restricted to epsilon <= |e| <= e_max.
struct QuadratureSet {
	struct Tail {
		double mass = 0.0;
		double mark = 0.0;
	};

	std::vector<double> nodes;
	std::vector<double> weights;
	Tail tail_plus;
	Tail tail_minus;

	double total_mass() const;
};

/// Uniform bins of width (e_max - epsilon) / ceil((e_max - epsilon) *
/// bins_per_unit) on each half line. Throws ConfigError if epsilon >= e_max.
QuadratureSet build_quadrature(const LevyMeasure &nu);

} // namespace pcpt
