#include "pcpt/levy.hpp"

#include "pcpt/errors.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pcpt {

namespace {

constexpr double kRelTol = 1e-11;
constexpr unsigned kMaxDepth = 20;

// Adaptive Gauss-Kronrod on [a, b] with a hard failure when the error
// estimate does not come down.
template <class F>
double integrate(F f, double a, double b, const char *what)
{
	if (!(b > a)) {
		return 0.0;
	}
	double error = 0.0;
	double l1 = 0.0;
	const double value = boost::math::quadrature::gauss_kronrod<double, 31>
			::integrate(f, a, b, kMaxDepth, kRelTol, &error, &l1);
	if (!std::isfinite(value) || !std::isfinite(error)
			|| error > 1e-7 * std::max(1.0, l1)) {
		std::ostringstream os;
		os << what << ": quadrature on [" << a << ", " << b
		   << "] failed (value " << value << ", error estimate " << error
		   << ")";
		throw IntegrationError(os.str());
	}
	return value;
}

// Splits [a, b] at 1 so the kink of min(1, |e|)-type amplitudes is a
// breakpoint.
template <class F>
double integrate_split(F f, double a, double b, const char *what)
{
	if (a < 1.0 && b > 1.0) {
		return integrate(f, a, 1.0, what) + integrate(f, 1.0, b, what);
	}
	return integrate(f, a, b, what);
}

} // namespace

void LevyMeasure::validate() const
{
	std::ostringstream os;
	if (!density) {
		os << "Levy measure has no density";
	} else if (!(epsilon > 0.0)) {
		os << "truncation level epsilon must be positive, got " << epsilon;
	} else if (!(e_max > epsilon) || !(e_max >= 1.0)) {
		os << "outer radius e_max must exceed epsilon and be >= 1, got "
		   << e_max;
	} else if (!(bins_per_unit >= 1.0)) {
		os << "bins_per_unit must be >= 1, got " << bins_per_unit;
	} else if (!(tail_mass_plus >= 0.0) || !(tail_mass_minus >= 0.0)) {
		os << "tail masses must be nonnegative";
	} else {
		return;
	}
	throw ConfigError(os.str());
}

double density_tail_mass(const std::function<double(double)> &density,
		double from)
{
	boost::math::quadrature::exp_sinh<double> integrator;
	double error = 0.0;
	double l1 = 0.0;
	const double value = integrator.integrate(
			[&](double e) { return density(e); }, from,
			std::numeric_limits<double>::infinity(), kRelTol, &error, &l1);
	if (!std::isfinite(value) || value < 0.0) {
		throw IntegrationError("tail mass of the Levy density is not finite");
	}
	return value;
}

LevyMeasure tempered_stable_measure(double mu, double epsilon, double e_max,
		double bins_per_unit)
{
	if (!(mu > 0.0)) {
		throw ConfigError("tempering parameter mu must be positive");
	}
	LevyMeasure nu;
	nu.density = [mu](double e) {
		const double a = std::abs(e);
		return std::exp(-mu * a) / a;
	};
	nu.epsilon = epsilon;
	nu.e_max = e_max;
	nu.bins_per_unit = bins_per_unit;
	const double tail = density_tail_mass(
			[mu](double e) { return std::exp(-mu * e) / e; }, e_max);
	nu.tail_mass_plus = tail;
	nu.tail_mass_minus = tail;
	nu.validate();
	return nu;
}

LevyMeasure zero_measure(double epsilon)
{
	LevyMeasure nu;
	nu.density = [](double) { return 0.0; };
	nu.epsilon = epsilon;
	nu.e_max = std::max(1.0, 2.0 * epsilon);
	nu.bins_per_unit = 1.0;
	return nu;
}

double truncated_mass(const LevyMeasure &nu)
{
	nu.validate();
	const auto &rho = nu.density;
	const double plus = integrate_split(
			[&](double e) { return rho(e); }, nu.epsilon, nu.e_max,
			"truncated_mass");
	const double minus = integrate_split(
			[&](double e) { return rho(-e); }, nu.epsilon, nu.e_max,
			"truncated_mass");
	return plus + minus + nu.tail_mass_plus + nu.tail_mass_minus;
}

double small_jump_variance(const LevyMeasure &nu, const JumpAmplitude &eta)
{
	nu.validate();
	const auto &rho = nu.density;
	const double plus = integrate(
			[&](double e) {
				const double a = eta(e);
				return a * a * rho(e);
			},
			0.0, nu.epsilon, "small_jump_variance");
	const double minus = integrate(
			[&](double e) {
				const double a = eta(-e);
				return a * a * rho(-e);
			},
			0.0, nu.epsilon, "small_jump_variance");
	return plus + minus;
}

double drift_correction(const LevyMeasure &nu, const JumpAmplitude &eta)
{
	nu.validate();
	const auto &rho = nu.density;
	const double plus = integrate_split(
			[&](double e) { return eta(e) * rho(e); }, nu.epsilon, nu.e_max,
			"drift_correction");
	const double minus = integrate_split(
			[&](double e) { return eta(-e) * rho(-e); }, nu.epsilon,
			nu.e_max, "drift_correction");
	const double tails = nu.tail_mass_plus * eta(nu.e_max)
			+ nu.tail_mass_minus * eta(-nu.e_max);
	return -(plus + minus + tails);
}

double QuadratureSet::total_mass() const
{
	double sum = tail_plus.mass + tail_minus.mass;
	for (double w : weights) {
		sum += w;
	}
	return sum;
}

QuadratureSet build_quadrature(const LevyMeasure &nu)
{
	if (!(nu.epsilon < nu.e_max)) {
		throw ConfigError("quadrature needs epsilon < e_max");
	}
	nu.validate();

	const double span = nu.e_max - nu.epsilon;
	const auto bins = static_cast<std::size_t>(
			std::max(1.0, std::ceil(span * nu.bins_per_unit - 1e-9)));
	const double width = span / static_cast<double>(bins);

	QuadratureSet q;
	q.nodes.reserve(2 * bins);
	q.weights.reserve(2 * bins);
	for (std::size_t b = 0; b < bins; ++b) {
		const double mark = nu.epsilon + (static_cast<double>(b) + 0.5) * width;
		for (double e : {-mark, mark}) {
			const double w = nu.density(e) * width;
			if (!std::isfinite(w) || w < 0.0) {
				throw IntegrationError(
						"Levy density produced a negative or non-finite "
						"quadrature weight");
			}
			q.nodes.push_back(e);
			q.weights.push_back(w);
		}
	}
	q.tail_plus = {nu.tail_mass_plus, nu.e_max};
	q.tail_minus = {nu.tail_mass_minus, -nu.e_max};
	return q;
}

} // namespace pcpt
