#pragma once

#include "pcpt/grid.hpp"
#include "pcpt/levy.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace pcpt {

/// Monotone operator in difference form,
///
///   (S U)_i = sum_m c_{m,i} (U_m - U_i) + sum_q w_{q,i} (ext(t, y_{q,i}) - U_i),
///
/// stored row-compressed. Interpolation weight that lands back on x_i is kept
/// in self_weight for bookkeeping; it cancels in the difference form.
/// Every coefficient is nonnegative.
struct DifferenceStencil {
	std::vector<std::size_t> row_start{0};
	std::vector<std::size_t> col;
	std::vector<double> coef;

	std::vector<std::size_t> ext_start{0};
	std::vector<double> ext_landing;
	std::vector<double> ext_weight;

	std::vector<double> self_weight;

	std::size_t rows() const { return row_start.size() - 1; }

	/// sum_m c_{m,i} over grid nodes other than i.
	double node_mass(std::size_t i) const;
	/// sum_q w_{q,i} over exterior landings.
	double exterior_mass(std::size_t i) const;
	/// Everything, self weight included.
	double total_mass(std::size_t i) const
	{
		return node_mass(i) + exterior_mass(i) + self_weight[i];
	}
};

/// Per-row sums sum_q w_{q,i} ext(t, y_{q,i}).
std::vector<double> exterior_sums(const DifferenceStencil &st,
		const ExteriorExtension &ext, double t);

/// out_i = (S U)_i given precomputed exterior sums.
void apply_difference(const DifferenceStencil &st, std::span<const double> U,
		std::span<const double> ext_sums, std::span<double> out);

std::vector<double> apply_difference(const DifferenceStencil &st,
		std::span<const double> U, const ExteriorExtension &ext, double t);

/// Monotone interpolated jump operators for one control value: kappa drives
/// the truncated integro-differential term, beta the driver's jump argument.
struct NonlocalStencil {
	DifferenceStencil kappa;
	DifferenceStencil beta;
	std::size_t control = 0;
};

/// eta(x, e) and gamma(x, e) at a frozen control.
using StateJump = std::function<double(double x, double e)>;

/// kappa_{m,i} = sum_q w_q omega_m(x_i + eta(x_i, e_q)) and
/// beta_{m,i} = sum_q w_q gamma(x_i, e_q) omega_m(x_i + eta(x_i, e_q)), the
/// two tail point masses included. An empty gamma means gamma = 0.
NonlocalStencil build_nonlocal(const QuadratureSet &quad, const StateJump &eta,
		const StateJump &gamma, const SpaceTimeGrid &grid,
		std::size_t control = 0);

std::vector<double> apply_K1(const NonlocalStencil &st,
		std::span<const double> U, const ExteriorExtension &ext, double t);
std::vector<double> apply_B(const NonlocalStencil &st,
		std::span<const double> U, const ExteriorExtension &ext, double t);

/// Semi-Lagrangian discretisation of 1/2 sigma~^2 u'' + b~ u'.
struct LocalStencil {
	DifferenceStencil d;
	double k_sl = 0.0;
	std::vector<double> sigma_tilde;
	std::vector<double> b_tilde;
};

/// Displaced points x_i +- k sigma~(x_i) carry weight 1/(2k^2) each and
/// x_i + k^2 b~(x_i) carries 1/k^2; each is spread over the grid with tent
/// weights. Throws ConfigError unless k_sl > 0.
LocalStencil build_local(std::span<const double> sigma_tilde,
		std::span<const double> b_tilde, const SpaceTimeGrid &grid,
		double k_sl);

std::vector<double> apply_A(const LocalStencil &st, std::span<const double> U,
		const ExteriorExtension &ext, double t);

/// BSDE driver f(alpha, t, x, y, z, k).
using Driver = std::function<double(double alpha, double t, double x,
		double y, double z, double k)>;

/// Lax-Friedrichs flux
///
///   f(alpha, t, x, u, sigma~ (U+ - U-)/(2h), k) + (theta/lambda)(U+ - 2U0 + U-)/h
///
/// with lambda = dt/h.
double lf_flux(const Driver &driver, double alpha, double t, double x,
		double u, double u_minus, double u_center, double u_plus,
		double k_value, double sigma_tilde, double theta, double lambda,
		double h);

/// theta > C_p lambda: the flux is monotone in the neighbours.
bool lf_flux_is_monotone(double theta, double lipschitz_p, double lambda);

} // namespace pcpt
