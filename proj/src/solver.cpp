#include "pcpt/solver.hpp"

#include "pcpt/errors.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace pcpt {

namespace {

double sup_norm(std::span<const double> v)
{
	double m = 0.0;
	for (double x : v) {
		m = std::max(m, std::abs(x));
	}
	return m;
}

void validate_params(const SchemeParams &p)
{
	std::ostringstream os;
	if (!(p.h > 0.0) || !(p.dt > 0.0)) {
		os << "scheme needs h > 0 and dt > 0";
	} else if (!(p.epsilon > 0.0)) {
		os << "jump truncation epsilon must be positive";
	} else if (!(p.theta > 0.0)) {
		os << "Lax-Friedrichs parameter theta must be positive";
	} else if (!(p.switching_cost > 0.0)) {
		os << "switching cost c must be positive";
	} else if (!(p.picard_tol > 0.0) || p.picard_max == 0) {
		os << "Picard tolerance and iteration cap must be positive";
	} else if (p.k_sl < 0.0) {
		os << "semi-Lagrangian step k must be positive (or 0 for sqrt(h))";
	} else {
		return;
	}
	throw ConfigError(os.str());
}

} // namespace

struct SwitchingScheme::ExteriorTerms {
	std::vector<double> kappa;
	std::vector<double> beta;
	/// Exterior landings plus the Dirichlet nodes of the local stencil.
	std::vector<double> local;
};

struct SwitchingScheme::Component {
	double alpha = 0.0;
	NonlocalStencil nonlocal;
	LocalStencil local;
	bool has_beta = false;
	/// Exterior data cached when the extension does not depend on time.
	std::unique_ptr<ExteriorTerms> static_ext;
	Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
};



SwitchingScheme::SwitchingScheme(ProblemSpec spec, ControlGrid controls,
		SchemeParams params)
	: spec_(std::move(spec)), controls_(std::move(controls)),
	  params_(params),
	  grid_((spec_.validate(), validate_params(params_),
			  SpaceTimeGrid(spec_.x_lo, spec_.x_hi, params_.h,
					  spec_.horizon, params_.dt)))
{
	if (controls_.values.empty()) {
		throw ConfigError("control grid is empty");
	}
	if (controls_.values.size() > std::numeric_limits<std::uint16_t>::max()) {
		throw ConfigError("too many controls");
	}
	for (double a : controls_.values) {
		if (a < spec_.a_lo - 1e-12 || a > spec_.a_hi + 1e-12) {
			throw ConfigError("control value outside the control interval");
		}
	}
	if (params_.k_sl == 0.0) {
		params_.k_sl = std::sqrt(params_.h);
	}

	measure_ = spec_.measure;
	measure_.epsilon = params_.epsilon;
	measure_.validate();
	const QuadratureSet quad = build_quadrature(measure_);

	const std::size_t N = grid_.size();
	const double dt = params_.dt;
	double max_kappa = 0.0;
	double max_beta = 0.0;
	double max_sigma = 0.0;

	for (std::size_t j = 0; j < controls_.size(); ++j) {
		auto c = std::make_unique<Component>();
		const double alpha = controls_[j];
		c->alpha = alpha;

		const auto eta = [&](double x, double e) {
			return spec_.jump(alpha, x, e);
		};
		StateJump gamma;
		if (spec_.driver_weight) {
			gamma = spec_.driver_weight;
		}
		c->nonlocal = build_nonlocal(quad, eta, gamma, grid_, j);
		c->has_beta = !c->nonlocal.beta.coef.empty()
				|| !c->nonlocal.beta.ext_weight.empty();

		std::vector<double> sigma_tilde(N);
		std::vector<double> b_tilde(N);
		for (std::size_t i = 0; i < N; ++i) {
			const double x = grid_.x(i);
			const JumpAmplitude amp = [&](double e) { return eta(x, e); };
			const double s = spec_.diffusion(alpha, x);
			sigma_tilde[i] = std::sqrt(s * s
					+ small_jump_variance(measure_, amp));
			b_tilde[i] = spec_.drift(alpha, x)
					+ drift_correction(measure_, amp);
		}
		c->local = build_local(sigma_tilde, b_tilde, grid_, params_.k_sl);

		// interior rows only; the boundary nodes are Dirichlet
		for (std::size_t i = 1; i + 1 < N; ++i) {
			max_kappa = std::max(max_kappa,
					c->nonlocal.kappa.node_mass(i)
					+ c->nonlocal.kappa.exterior_mass(i));
			max_beta = std::max(max_beta,
					c->nonlocal.beta.node_mass(i)
					+ c->nonlocal.beta.exterior_mass(i));
			max_sigma = std::max(max_sigma, std::abs(sigma_tilde[i]));
		}

		// (I - dt A) on the interior unknowns 1..N-2
		const std::size_t n_int = N - 2;
		std::vector<Eigen::Triplet<double>> triplets;
		const auto &d = c->local.d;
		for (std::size_t i = 1; i + 1 < N; ++i) {
			const auto row = static_cast<int>(i - 1);
			double diag = 1.0 + dt * d.exterior_mass(i);
			for (std::size_t p = d.row_start[i]; p < d.row_start[i + 1]; ++p) {
				diag += dt * d.coef[p];
				const std::size_t m = d.col[p];
				if (m != 0 && m + 1 != N) {
					triplets.emplace_back(row, static_cast<int>(m - 1),
							-dt * d.coef[p]);
				}
			}
			triplets.emplace_back(row, row, diag);
		}
		Eigen::SparseMatrix<double> M(static_cast<Eigen::Index>(n_int),
				static_cast<Eigen::Index>(n_int));
		M.setFromTriplets(triplets.begin(), triplets.end());
		M.makeCompressed();
		c->lu.compute(M);
		if (c->lu.info() != Eigen::Success) {
			throw SolverError("factorisation of (I - dt A) failed for control "
					+ std::to_string(alpha));
		}
		components_.push_back(std::move(c));
		if (!spec_.extension.time_dependent) {
			components_.back()->static_ext = std::make_unique<ExteriorTerms>(
					compute_exterior_terms(j, 0.0));
		}
	}

	lipschitz_p_ = spec_.driver_constants.lipschitz_z * max_sigma;
	const double lambda = params_.dt / params_.h;
	if (lipschitz_p_ > 0.0
			&& !lf_flux_is_monotone(params_.theta, lipschitz_p_, lambda)) {
		std::ostringstream os;
		os << "theta = " << params_.theta << " does not exceed C_p dt/h = "
		   << lipschitz_p_ * lambda
		   << "; the Lax-Friedrichs flux would not be monotone";
		throw ConfigError(os.str());
	}

	const auto &dc = spec_.driver_constants;
	contraction_bound_ = 4.0 * params_.theta
			+ dt * (2.0 * max_kappa + dc.lipschitz_y
					+ 2.0 * dc.lipschitz_k * max_beta);
	if (!(contraction_bound_ < 1.0)) {
		std::ostringstream os;
		os << "Picard map is not a contraction: bound " << contraction_bound_
		   << " = 4 theta + dt (2 sum kappa + L_y + 2 L_k sum beta) >= 1";
		throw ConfigError(os.str());
	}

	// a-priori sup-norm bound
	double zeta_sup = 0.0;
	for (std::size_t n = 0; n <= grid_.steps(); ++n) {
		zeta_sup = std::max(zeta_sup, sup_norm(obstacle_at(grid_.t(n))));
	}
	double data_sup = zeta_sup;
	for (std::size_t i = 0; i < N; ++i) {
		data_sup = std::max(data_sup, std::abs(spec_.payoff(grid_.x(i))));
	}
	for (double t : {0.0, spec_.horizon}) {
		data_sup = std::max({data_sup, std::abs(spec_.extension(t, grid_.x_lo())),
				std::abs(spec_.extension(t, grid_.x_hi()))});
		for (const auto &c : components_) {
			for (const auto *st : {&c->nonlocal.kappa, &c->local.d}) {
				for (double y : st->ext_landing) {
					data_sup = std::max(data_sup, std::abs(spec_.extension(t, y)));
				}
			}
		}
	}
	a0_ = data_sup;
	c1_ = dc.monotonicity_y * zeta_sup + dc.bound_at_zero;
}

SwitchingScheme::~SwitchingScheme() = default;

const NonlocalStencil &SwitchingScheme::nonlocal(std::size_t j) const
{
	return components_.at(j)->nonlocal;
}

const LocalStencil &SwitchingScheme::local(std::size_t j) const
{
	return components_.at(j)->local;
}

std::vector<double> SwitchingScheme::obstacle_at(double t) const
{
	std::vector<double> z(grid_.size());
	for (std::size_t i = 0; i < z.size(); ++i) {
		z[i] = spec_.obstacle(t, grid_.x(i));
	}
	return z;
}

void SwitchingScheme::set_boundary(std::span<double> U, double t) const
{
	U.front() = spec_.extension(t, grid_.x_lo());
	U.back() = spec_.extension(t, grid_.x_hi());
}

ComponentValues SwitchingScheme::initial_values() const
{
	std::vector<double> g(grid_.size());
	for (std::size_t i = 0; i < g.size(); ++i) {
		g[i] = spec_.payoff(grid_.x(i));
	}
	set_boundary(g, 0.0);
	return ComponentValues(controls_.size(), g);
}

double SwitchingScheme::stability_bound(std::size_t n) const
{
	const double C = spec_.driver_constants.monotonicity_y;
	const double dt = params_.dt;
	const double nd = static_cast<double>(n);
	if (C == 0.0) {
		return a0_ + nd * dt * c1_;
	}
	const double r = 1.0 / (1.0 + dt * C);
	const double rn = std::pow(r, nd);
	return a0_ * rn + dt * c1_ * (1.0 - rn) / (1.0 - r);
}

ComponentValues SwitchingScheme::switching_step(const ComponentValues &U,
		double t_next) const
{
	const std::size_t J = U.size();
	const std::size_t N = grid_.size();
	const double c = params_.switching_cost;
	const auto zeta = obstacle_at(t_next);

	ComponentValues half(J, std::vector<double>(N));
	for (std::size_t i = 0; i < N; ++i) {
		// best and runner-up over components give max_{k != j} in O(J)
		std::size_t best = 0;
		double first = -std::numeric_limits<double>::infinity();
		double second = first;
		for (std::size_t k = 0; k < J; ++k) {
			const double v = U[k][i];
			if (v > first) {
				second = first;
				first = v;
				best = k;
			} else if (v > second) {
				second = v;
			}
		}
		for (std::size_t j = 0; j < J; ++j) {
			const double others = (j == best ? second : first) - c;
			half[j][i] = std::max({zeta[i], U[j][i], others});
		}
	}
	for (auto &h : half) {
		set_boundary(h, t_next);
	}
	return half;
}

const SwitchingScheme::ExteriorTerms &SwitchingScheme::exterior_terms(
		std::size_t j, double t, ExteriorTerms &scratch) const
{
	const auto &c = *components_[j];
	if (c.static_ext) {
		return *c.static_ext;
	}
	scratch = compute_exterior_terms(j, t);
	return scratch;
}

SwitchingScheme::ExteriorTerms SwitchingScheme::compute_exterior_terms(
		std::size_t j, double t) const
{
	const auto &c = *components_[j];
	ExteriorTerms ext;
	ext.kappa = exterior_sums(c.nonlocal.kappa, spec_.extension, t);
	if (c.has_beta) {
		ext.beta = exterior_sums(c.nonlocal.beta, spec_.extension, t);
	}
	const auto &d = c.local.d;
	ext.local = exterior_sums(d, spec_.extension, t);
	const std::size_t N = grid_.size();
	const double lo = spec_.extension(t, grid_.x_lo());
	const double hi = spec_.extension(t, grid_.x_hi());
	for (std::size_t i = 1; i + 1 < N; ++i) {
		for (std::size_t p = d.row_start[i]; p < d.row_start[i + 1]; ++p) {
			if (d.col[p] == 0) {
				ext.local[i] += d.coef[p] * lo;
			} else if (d.col[p] + 1 == N) {
				ext.local[i] += d.coef[p] * hi;
			}
		}
	}
	return ext;
}

void SwitchingScheme::picard_map_impl(std::size_t j, const ExteriorTerms &ext,
		std::span<const double> guess, std::span<const double> half,
		double t_next, std::span<double> out) const
{
	const auto &c = *components_[j];
	const std::size_t N = grid_.size();
	const double dt = params_.dt;
	const double h = params_.h;
	const double lambda = dt / h;

	std::vector<double> k1(N);
	apply_difference(c.nonlocal.kappa, guess, ext.kappa, k1);
	std::vector<double> bval(N, 0.0);
	if (c.has_beta) {
		apply_difference(c.nonlocal.beta, guess, ext.beta, bval);
	}

	Eigen::VectorXd rhs(static_cast<Eigen::Index>(N - 2));
	for (std::size_t i = 1; i + 1 < N; ++i) {
		const double flux = lf_flux(spec_.driver, c.alpha, t_next, grid_.x(i),
				guess[i], guess[i - 1], guess[i], guess[i + 1], bval[i],
				c.local.sigma_tilde[i], params_.theta, lambda, h);
		rhs[static_cast<Eigen::Index>(i - 1)] = dt * (k1[i] + flux)
				+ half[i] + dt * ext.local[i];
	}
	const Eigen::VectorXd v = c.lu.solve(rhs);
	if (c.lu.info() != Eigen::Success) {
		throw SolverError("sparse solve of (I - dt A) failed");
	}
	for (std::size_t i = 1; i + 1 < N; ++i) {
		out[i] = v[static_cast<Eigen::Index>(i - 1)];
	}
	set_boundary(out, t_next);
}

std::vector<double> SwitchingScheme::picard_map(std::size_t j,
		std::span<const double> guess, std::span<const double> half,
		double t_next) const
{
	ExteriorTerms scratch;
	const auto &ext = exterior_terms(j, t_next, scratch);
	std::vector<double> out(grid_.size());
	picard_map_impl(j, ext, guess, half, t_next, out);
	return out;
}

ImplicitStepResult SwitchingScheme::implicit_step(std::size_t j,
		std::span<const double> half, double t_next) const
{
	ExteriorTerms scratch;
	const auto &ext = exterior_terms(j, t_next, scratch);
	const std::size_t N = grid_.size();

	ImplicitStepResult result;
	auto &stats = result.stats;
	std::vector<double> current(half.begin(), half.end());
	set_boundary(current, t_next);
	std::vector<double> next(N);

	double previous_increment = 0.0;
	for (std::size_t k = 0; k < params_.picard_max; ++k) {
		picard_map_impl(j, ext, current, half, t_next, next);
		double increment = 0.0;
		double scale = 0.0;
		for (std::size_t i = 1; i + 1 < N; ++i) {
			increment = std::max(increment, std::abs(next[i] - current[i]));
			scale = std::max(scale, std::abs(next[i]));
		}
		std::swap(current, next);
		++stats.iterations;
		stats.increments.push_back(increment);
		stats.last_increment = increment;
		if (k > 0 && previous_increment > 1e-12 * std::max(1.0, scale)) {
			stats.max_ratio = std::max(stats.max_ratio,
					increment / previous_increment);
		}
		previous_increment = increment;

		const double tol = scale > 10.0 ? params_.picard_tol * scale
		                                : params_.picard_tol;
		if (increment < tol) {
			result.values = std::move(current);
			return result;
		}
	}
	std::ostringstream os;
	os << "Picard iteration did not converge in " << params_.picard_max
	   << " maps (last increment " << stats.last_increment << ")";
	throw ConvergenceError(os.str(), stats.last_increment, stats.max_ratio);
}

std::vector<double> SwitchingScheme::scheme_residual(std::size_t j,
		std::span<const double> next, const ComponentValues &previous,
		double t_next) const
{
	const auto &c = *components_[j];
	const std::size_t N = grid_.size();
	const double dt = params_.dt;
	const double h = params_.h;
	const double lambda = dt / h;
	const double cost = params_.switching_cost;

	const auto a = apply_A(c.local, next, spec_.extension, t_next);
	const auto k1 = apply_K1(c.nonlocal, next, spec_.extension, t_next);
	std::vector<double> bval(N, 0.0);
	if (c.has_beta) {
		bval = apply_B(c.nonlocal, next, spec_.extension, t_next);
	}
	const auto zeta = obstacle_at(t_next);

	std::vector<double> residual(N, 0.0);
	for (std::size_t i = 1; i + 1 < N; ++i) {
		const double flux = lf_flux(spec_.driver, c.alpha, t_next, grid_.x(i),
				next[i], next[i - 1], next[i], next[i + 1], bval[i],
				c.local.sigma_tilde[i], params_.theta, lambda, h);
		const double update = dt * (a[i] + k1[i] + flux);
		double others = std::numeric_limits<double>::infinity();
		if (previous.size() > 1) {
			double m = -std::numeric_limits<double>::infinity();
			for (std::size_t k = 0; k < previous.size(); ++k) {
				if (k != j) {
					m = std::max(m, previous[k][i] - cost);
				}
			}
			others = next[i] - m - update;
		}
		residual[i] = std::min({next[i] - zeta[i] - update,
				next[i] - previous[j][i] - update, others});
	}
	return residual;
}

PolicyField extract_policy(const ComponentValues &U,
		std::span<const double> zeta)
{
	const std::size_t N = zeta.size();
	PolicyField field;
	field.control_index.resize(N);
	field.stopped.resize(N);
	for (std::size_t i = 0; i < N; ++i) {
		std::size_t best = 0;
		for (std::size_t k = 1; k < U.size(); ++k) {
			if (U[k][i] > U[best][i]) {
				best = k;
			}
		}
		field.control_index[i] = static_cast<std::uint16_t>(best);
		field.stopped[i] = U[best][i] <= zeta[i] ? 1 : 0;
	}
	return field;
}

void SwitchingScheme::advance(const ComponentValues &previous, double t_next,
		ComponentValues &half, ComponentValues &next,
		std::vector<PicardStats> &stats) const
{
	half = switching_step(previous, t_next);
	const std::size_t J = controls_.size();
	next.resize(J);
	stats.resize(J);
	const auto component = [&](std::size_t j) {
		ImplicitStepResult step;
		try {
			step = implicit_step(j, half[j], t_next);
		} catch (const ConvergenceError &e) {
			std::ostringstream os;
			os << e.what() << " in component " << j << " (alpha = "
			   << controls_[j] << ")";
			throw ConvergenceError(os.str(), e.last_increment,
					e.contraction_ratio);
		}
		next[j] = std::move(step.values);
		stats[j] = std::move(step.stats);
	};
	if (params_.parallel_components && J > 1) {
		tbb::parallel_for(std::size_t(0), J, component);
	} else {
		for (std::size_t j = 0; j < J; ++j) {
			component(j);
		}
	}
}

SolveResult SwitchingScheme::solve(const StepObserver &observer) const
{
	const auto start = std::chrono::steady_clock::now();
	const std::size_t steps = grid_.steps();

	SolveResult result{.grid = grid_, .controls = controls_};
	result.extension = spec_.extension;
	result.contraction_bound = contraction_bound_;

	ComponentValues U = initial_values();
	ComponentValues half;
	ComponentValues next;
	std::vector<PicardStats> stats;

	const std::size_t stride = params_.snapshot_stride > 0
			? params_.snapshot_stride
			: std::max<std::size_t>(1, steps / 100);
	const auto record = [&](std::size_t n) {
		if (!params_.record_policy) {
			return;
		}
		result.policy.push_back(extract_policy(U, obstacle_at(grid_.t(n))));
		if (n % stride == 0 || n == steps) {
			result.snapshot_times.push_back(grid_.t(n));
			result.snapshots.push_back(U);
		}
	};
	const auto excess = [&](std::size_t n) {
		double norm = 0.0;
		for (const auto &u : U) {
			norm = std::max(norm, sup_norm(u));
		}
		return norm - stability_bound(n);
	};

	if (params_.record_policy) {
		result.policy.reserve(steps + 1);
	}
	result.max_stability_excess = excess(0);
	record(0);

	std::unique_ptr<tbb::task_arena> arena;
	if (params_.parallel_components) {
		arena = params_.threads > 0
				? std::make_unique<tbb::task_arena>(
						static_cast<int>(params_.threads))
				: std::make_unique<tbb::task_arena>();
	}

	for (std::size_t n = 0; n < steps; ++n) {
		const double t_next = grid_.t(n + 1);
		try {
			if (arena) {
				arena->execute([&] { advance(U, t_next, half, next, stats); });
			} else {
				advance(U, t_next, half, next, stats);
			}
		} catch (const ConvergenceError &e) {
			std::ostringstream os;
			os << e.what() << " at step " << n + 1 << " of " << steps;
			throw ConvergenceError(os.str(), e.last_increment,
					e.contraction_ratio);
		}

		for (const auto &s : stats) {
			result.total_picard_iterations += s.iterations;
			result.max_picard_iterations = std::max(
					result.max_picard_iterations, s.iterations);
			result.max_contraction_ratio = std::max(
					result.max_contraction_ratio, s.max_ratio);
		}
		if (observer) {
			StepRecord rec;
			rec.n = n;
			rec.t_next = t_next;
			rec.previous = &U;
			rec.half = &half;
			rec.next = &next;
			rec.picard = &stats;
			rec.stability_bound = stability_bound(n + 1);
			observer(rec);
		}
		std::swap(U, next);
		result.max_stability_excess = std::max(result.max_stability_excess,
				excess(n + 1));
		record(n + 1);
	}

	result.final_values = std::move(U);
	result.wall_seconds = std::chrono::duration<double>(
			std::chrono::steady_clock::now() - start).count();
	return result;
}

bool SolveResult::on_grid(double x) const
{
	const double s = (x - grid.x_lo()) / grid.h();
	return grid.contains(x) && std::abs(s - std::round(s)) < 1e-9;
}

double SolveResult::value(std::size_t j, double x) const
{
	return interp(final_values.at(j), x, extension, grid.horizon(), grid);
}

double SolveResult::max_value(double x) const
{
	double best = -std::numeric_limits<double>::infinity();
	for (std::size_t j = 0; j < final_values.size(); ++j) {
		best = std::max(best, value(j, x));
	}
	return best;
}

SolveResult solve(const ProblemSpec &spec, const ControlGrid &controls,
		const SchemeParams &params, const StepObserver &observer)
{
	SwitchingScheme scheme(spec, controls, params);
	return scheme.solve(observer);
}

} // namespace pcpt
