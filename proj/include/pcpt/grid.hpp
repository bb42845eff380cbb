#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>

namespace pcpt {

/// Uniform nodes x_i = x_lo + i h, i = 0..intervals, and uniform timesteps
/// t^n = n dt, n = 0..steps.
class SpaceTimeGrid {
public:
	/// Throws ConfigError unless h, dt > 0 and (x_hi - x_lo)/h, T/dt are
	/// integers to 1e-12 relative.
	SpaceTimeGrid(double x_lo, double x_hi, double h, double T, double dt);

	double x_lo() const { return x_lo_; }
	double x_hi() const { return x_hi_; }
	double h() const { return h_; }
	double dt() const { return dt_; }
	double horizon() const { return T_; }
	std::size_t intervals() const { return intervals_; }
	std::size_t steps() const { return steps_; }
	std::size_t size() const { return intervals_ + 1; }

	double x(std::size_t i) const
	{
		return i == intervals_ ? x_hi_ : x_lo_ + static_cast<double>(i) * h_;
	}
	double t(std::size_t n) const
	{
		return n == steps_ ? T_ : static_cast<double>(n) * dt_;
	}

	bool contains(double x) const;

private:
	double x_lo_;
	double x_hi_;
	double h_;
	double T_;
	double dt_;
	std::size_t intervals_;
	std::size_t steps_;
};

inline constexpr std::ptrdiff_t kExterior = -1;

struct TentWeight {
	std::ptrdiff_t node = kExterior;  ///< grid index or kExterior
	double weight = 0.0;
};

/// Nonzero tent-function weights of a point. In 1-D at most two entries; a
/// point outside [x_lo, x_hi] gets the single entry (kExterior, 1).
struct TentWeights {
	std::array<TentWeight, 2> entries{};
	std::size_t count = 0;

	auto begin() const { return entries.begin(); }
	auto end() const { return entries.begin() + count; }
};

TentWeights tent_weights(double x, const SpaceTimeGrid &grid);

/// Values used wherever an evaluation point leaves the computational domain.
struct ExteriorExtension {
	std::function<double(double t, double x)> value;
	/// When false the solver evaluates exterior data once and reuses it.
	bool time_dependent = false;

	double operator()(double t, double x) const { return value(t, x); }
};

/// Piecewise-linear interpolant of node values U, extended by ext outside the
/// domain.
double interp(std::span<const double> U, double x,
		const ExteriorExtension &ext, double t, const SpaceTimeGrid &grid);

} // namespace pcpt
