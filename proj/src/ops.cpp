#include "pcpt/ops.hpp"

#include "pcpt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace pcpt {

namespace {

// Collects one row of a DifferenceStencil at a time. Node weights go to a
// dense scratch array; exterior landings are sorted and merged when the row
// is closed.
class RowBuilder {
public:
	explicit RowBuilder(const SpaceTimeGrid &grid)
		: grid_(grid), dense_(grid.size(), 0.0)
	{}

	void begin(std::size_t row)
	{
		row_ = row;
		self_ = 0.0;
	}

	void add(double landing, double weight)
	{
		if (weight == 0.0) {
			return;
		}
		for (const auto &[node, w] : tent_weights(landing, grid_)) {
			if (node == kExterior) {
				exterior_.emplace_back(landing, weight * w);
				continue;
			}
			const auto m = static_cast<std::size_t>(node);
			if (m == row_) {
				self_ += weight * w;
			} else {
				if (dense_[m] == 0.0) {
					touched_.push_back(m);
				}
				dense_[m] += weight * w;
			}
		}
	}

	void close(DifferenceStencil &st)
	{
		std::sort(touched_.begin(), touched_.end());
		for (std::size_t m : touched_) {
			st.col.push_back(m);
			st.coef.push_back(dense_[m]);
			dense_[m] = 0.0;
		}
		touched_.clear();
		st.row_start.push_back(st.col.size());

		std::sort(exterior_.begin(), exterior_.end());
		for (std::size_t q = 0; q < exterior_.size();) {
			const double y = exterior_[q].first;
			double w = 0.0;
			for (; q < exterior_.size() && exterior_[q].first == y; ++q) {
				w += exterior_[q].second;
			}
			st.ext_landing.push_back(y);
			st.ext_weight.push_back(w);
		}
		exterior_.clear();
		st.ext_start.push_back(st.ext_landing.size());
		st.self_weight.push_back(self_);
	}

private:
	const SpaceTimeGrid &grid_;
	std::vector<double> dense_;
	std::vector<std::size_t> touched_;
	std::vector<std::pair<double, double>> exterior_;
	std::size_t row_ = 0;
	double self_ = 0.0;
};

void reserve_rows(DifferenceStencil &st, std::size_t rows)
{
	st.row_start.reserve(rows + 1);
	st.ext_start.reserve(rows + 1);
	st.self_weight.reserve(rows);
}

} // namespace

double DifferenceStencil::node_mass(std::size_t i) const
{
	double sum = 0.0;
	for (std::size_t p = row_start[i]; p < row_start[i + 1]; ++p) {
		sum += coef[p];
	}
	return sum;
}

double DifferenceStencil::exterior_mass(std::size_t i) const
{
	double sum = 0.0;
	for (std::size_t p = ext_start[i]; p < ext_start[i + 1]; ++p) {
		sum += ext_weight[p];
	}
	return sum;
}

std::vector<double> exterior_sums(const DifferenceStencil &st,
		const ExteriorExtension &ext, double t)
{
	std::vector<double> sums(st.rows(), 0.0);
	for (std::size_t i = 0; i < st.rows(); ++i) {
		double s = 0.0;
		for (std::size_t p = st.ext_start[i]; p < st.ext_start[i + 1]; ++p) {
			s += st.ext_weight[p] * ext(t, st.ext_landing[p]);
		}
		sums[i] = s;
	}
	return sums;
}

void apply_difference(const DifferenceStencil &st, std::span<const double> U,
		std::span<const double> ext_sums, std::span<double> out)
{
	for (std::size_t i = 0; i < st.rows(); ++i) {
		const double ui = U[i];
		// Difference form so that constants cancel exactly on node entries.
		double acc = 0.0;
		for (std::size_t p = st.row_start[i]; p < st.row_start[i + 1]; ++p) {
			acc += st.coef[p] * (U[st.col[p]] - ui);
		}
		double ext_mass = 0.0;
		for (std::size_t p = st.ext_start[i]; p < st.ext_start[i + 1]; ++p) {
			ext_mass += st.ext_weight[p];
		}
		out[i] = acc + (ext_sums[i] - ext_mass * ui);
	}
}

std::vector<double> apply_difference(const DifferenceStencil &st,
		std::span<const double> U, const ExteriorExtension &ext, double t)
{
	const auto sums = exterior_sums(st, ext, t);
	std::vector<double> out(st.rows());
	apply_difference(st, U, sums, out);
	return out;
}

NonlocalStencil build_nonlocal(const QuadratureSet &quad, const StateJump &eta,
		const StateJump &gamma, const SpaceTimeGrid &grid,
		std::size_t control)
{
	if (quad.nodes.size() != quad.weights.size()) {
		throw ConfigError("quadrature nodes and weights differ in length");
	}
	const auto negative = [](double w) { return !(w >= 0.0); };
	if (std::any_of(quad.weights.begin(), quad.weights.end(), negative)
			|| negative(quad.tail_plus.mass)
			|| negative(quad.tail_minus.mass)) {
		throw ConfigError("quadrature weights must be nonnegative");
	}

	std::vector<double> marks = quad.nodes;
	std::vector<double> weights = quad.weights;
	for (const auto &tail : {quad.tail_plus, quad.tail_minus}) {
		if (tail.mass > 0.0) {
			marks.push_back(tail.mark);
			weights.push_back(tail.mass);
		}
	}

	NonlocalStencil st;
	st.control = control;
	reserve_rows(st.kappa, grid.size());
	reserve_rows(st.beta, grid.size());
	RowBuilder kappa_row(grid);
	RowBuilder beta_row(grid);
	for (std::size_t i = 0; i < grid.size(); ++i) {
		const double x = grid.x(i);
		kappa_row.begin(i);
		beta_row.begin(i);
		for (std::size_t q = 0; q < marks.size(); ++q) {
			const double landing = x + eta(x, marks[q]);
			kappa_row.add(landing, weights[q]);
			if (gamma) {
				const double g = gamma(x, marks[q]);
				if (!(g >= 0.0)) {
					throw ConfigError("driver jump weight gamma must be >= 0");
				}
				beta_row.add(landing, weights[q] * g);
			}
		}
		kappa_row.close(st.kappa);
		beta_row.close(st.beta);
	}
	return st;
}

std::vector<double> apply_K1(const NonlocalStencil &st,
		std::span<const double> U, const ExteriorExtension &ext, double t)
{
	return apply_difference(st.kappa, U, ext, t);
}

std::vector<double> apply_B(const NonlocalStencil &st,
		std::span<const double> U, const ExteriorExtension &ext, double t)
{
	return apply_difference(st.beta, U, ext, t);
}

LocalStencil build_local(std::span<const double> sigma_tilde,
		std::span<const double> b_tilde, const SpaceTimeGrid &grid,
		double k_sl)
{
	if (!(k_sl > 0.0)) {
		throw ConfigError("semi-Lagrangian step k must be positive");
	}
	if (sigma_tilde.size() != grid.size() || b_tilde.size() != grid.size()) {
		throw ConfigError("local coefficients must be given at every node");
	}
	LocalStencil st;
	st.k_sl = k_sl;
	st.sigma_tilde.assign(sigma_tilde.begin(), sigma_tilde.end());
	st.b_tilde.assign(b_tilde.begin(), b_tilde.end());
	reserve_rows(st.d, grid.size());

	const double k2 = k_sl * k_sl;
	RowBuilder row(grid);
	for (std::size_t i = 0; i < grid.size(); ++i) {
		const double x = grid.x(i);
		row.begin(i);
		row.add(x + k_sl * sigma_tilde[i], 0.5 / k2);
		row.add(x - k_sl * sigma_tilde[i], 0.5 / k2);
		row.add(x + k2 * b_tilde[i], 1.0 / k2);
		row.close(st.d);
	}
	return st;
}

std::vector<double> apply_A(const LocalStencil &st, std::span<const double> U,
		const ExteriorExtension &ext, double t)
{
	return apply_difference(st.d, U, ext, t);
}

double lf_flux(const Driver &driver, double alpha, double t, double x,
		double u, double u_minus, double u_center, double u_plus,
		double k_value, double sigma_tilde, double theta, double lambda,
		double h)
{
	const double p = (u_plus - u_minus) / (2.0 * h);
	const double viscosity = (theta / lambda)
			* ((u_plus - u_center) - (u_center - u_minus)) / h;
	return driver(alpha, t, x, u, sigma_tilde * p, k_value) + viscosity;
}

bool lf_flux_is_monotone(double theta, double lipschitz_p, double lambda)
{
	return theta > lipschitz_p * lambda;
}

} // namespace pcpt
