#include "pcpt/grid.hpp"

#include "pcpt/errors.hpp"

#include <cmath>
#include <sstream>

namespace pcpt {

namespace {

std::size_t integer_ratio(double length, double step, const char *what)
{
	const double ratio = length / step;
	const double rounded = std::round(ratio);
	if (!(rounded >= 1.0) || std::abs(ratio - rounded) > 1e-12 * rounded) {
		std::ostringstream os;
		os << what << ": " << length << " is not an integer multiple of "
		   << step;
		throw ConfigError(os.str());
	}
	return static_cast<std::size_t>(rounded);
}

} // namespace

SpaceTimeGrid::SpaceTimeGrid(double x_lo, double x_hi, double h, double T,
		double dt)
	: x_lo_(x_lo), x_hi_(x_hi), h_(h), T_(T), dt_(dt)
{
	if (!(h > 0.0) || !(dt > 0.0) || !(x_hi > x_lo) || !(T > 0.0)) {
		throw ConfigError("grid needs h > 0, dt > 0, x_hi > x_lo and T > 0");
	}
	intervals_ = integer_ratio(x_hi - x_lo, h, "spatial grid");
	steps_ = integer_ratio(T, dt, "time grid");
}

bool SpaceTimeGrid::contains(double x) const
{
	const double slack = 1e-12 * h_;
	return x >= x_lo_ - slack && x <= x_hi_ + slack;
}

TentWeights tent_weights(double x, const SpaceTimeGrid &grid)
{
	TentWeights out;
	if (!grid.contains(x)) {
		out.entries[0] = {kExterior, 1.0};
		out.count = 1;
		return out;
	}
	const double s = (x - grid.x_lo()) / grid.h();
	const auto last = static_cast<std::ptrdiff_t>(grid.intervals());
	auto cell = static_cast<std::ptrdiff_t>(std::floor(s));
	double frac = s - static_cast<double>(cell);
	if (cell >= last) {
		cell = last;
		frac = 0.0;
	} else if (cell < 0) {
		cell = 0;
		frac = 0.0;
	}
	if (frac < 1e-12) {
		out.entries[0] = {cell, 1.0};
		out.count = 1;
	} else if (frac > 1.0 - 1e-12) {
		out.entries[0] = {cell + 1, 1.0};
		out.count = 1;
	} else {
		out.entries[0] = {cell, 1.0 - frac};
		out.entries[1] = {cell + 1, frac};
		out.count = 2;
	}
	return out;
}

double interp(std::span<const double> U, double x,
		const ExteriorExtension &ext, double t, const SpaceTimeGrid &grid)
{
	double value = 0.0;
	for (const auto &[node, weight] : tent_weights(x, grid)) {
		value += weight * (node == kExterior ? ext(t, x)
		                                     : U[static_cast<std::size_t>(node)]);
	}
	return value;
}

} // namespace pcpt
