#pragma once

#include "pcpt/grid.hpp"
#include "pcpt/levy.hpp"
#include "pcpt/model.hpp"
#include "pcpt/ops.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace pcpt {

/// Discretisation parameters of the switching scheme.
struct SchemeParams {
	double h = 0.01;
	double dt = 0.01 / 15.0;
	/// Semi-Lagrangian step; 0 selects sqrt(h).
	double k_sl = 0.0;
	double epsilon = 0.01;
	double theta = 1.0 / 40.0;
	double switching_cost = 1.0 / 640.0;
	double picard_tol = 1e-10;
	std::size_t picard_max = 200;
	bool record_policy = false;
	/// Stride between stored value snapshots when record_policy is set; 0
	/// keeps about a hundred slices.
	std::size_t snapshot_stride = 0;
	bool parallel_components = false;
	/// Worker threads for component parallelism; 0 uses the TBB default.
	std::size_t threads = 0;
};

/// One value array per switching component; entries 0 and N are Dirichlet
/// nodes that carry the exterior extension.
using ComponentValues = std::vector<std::vector<double>>;

struct PicardStats {
	std::size_t iterations = 0;
	double last_increment = 0.0;
	/// Largest observed ratio of consecutive increments (0 if fewer than two
	/// increments were above round-off).
	double max_ratio = 0.0;
	std::vector<double> increments;
};

struct ImplicitStepResult {
	std::vector<double> values;
	PicardStats stats;
};

/// Optimal control and stopping indicator on one time slice.
struct PolicyField {
	std::vector<std::uint16_t> control_index;
	std::vector<std::uint8_t> stopped;
};

/// alpha* = argmax_k U_k (lowest index on ties); stopped iff
/// max_k U_k <= zeta.
PolicyField extract_policy(const ComponentValues &U,
		std::span<const double> zeta);

/// Everything a test or driver might want to inspect after a step.
struct StepRecord {
	std::size_t n = 0;  ///< step taken: t^n -> t^{n+1}
	double t_next = 0.0;
	const ComponentValues *previous = nullptr;
	const ComponentValues *half = nullptr;
	const ComponentValues *next = nullptr;
	const std::vector<PicardStats> *picard = nullptr;
	double stability_bound = 0.0;  ///< a_{n+1}
};

using StepObserver = std::function<void(const StepRecord &)>;

struct SolveResult {
	SpaceTimeGrid grid;
	ControlGrid controls;
	ComponentValues final_values{};

	/// Present when record_policy was set.
	std::vector<double> snapshot_times{};
	std::vector<ComponentValues> snapshots{};
	/// policy[n] for n = 0..steps, present when record_policy was set.
	std::vector<PolicyField> policy{};

	std::size_t total_picard_iterations = 0;
	std::size_t max_picard_iterations = 0;
	double max_contraction_ratio = 0.0;
	double contraction_bound = 0.0;
	/// max_n (|U^n|_inf - a_n); nonpositive when the a-priori bound holds.
	double max_stability_excess = 0.0;
	double wall_seconds = 0.0;

	/// Final-slice value of component j at x (linear interpolation between
	/// nodes; exterior points return the extension).
	double value(std::size_t j, double x) const;
	/// max_j value(j, x).
	double max_value(double x) const;
	bool on_grid(double x) const;

	// copy of the exterior extension used to answer exterior queries
	ExteriorExtension extension{};
};

/// Piecewise constant policy timestepping for the switching system: an
/// obstacle/switching max followed by one fully implicit semi-linear solve per
/// frozen control. Stencils and factorisations are built once in the
/// constructor because the coefficients are time homogeneous.
class SwitchingScheme {
public:
	/// Throws ConfigError if the problem or parameters are invalid, if the
	/// Lax-Friedrichs flux would not be monotone (theta <= C_p dt/h), or if the
	/// Picard map would not contract.
	SwitchingScheme(ProblemSpec spec, ControlGrid controls,
			SchemeParams params);
	~SwitchingScheme();

	SwitchingScheme(const SwitchingScheme &) = delete;
	SwitchingScheme &operator=(const SwitchingScheme &) = delete;

	const SpaceTimeGrid &grid() const { return grid_; }
	const ControlGrid &controls() const { return controls_; }
	const SchemeParams &params() const { return params_; }
	const ProblemSpec &spec() const { return spec_; }
	const LevyMeasure &measure() const { return measure_; }

	const NonlocalStencil &nonlocal(std::size_t j) const;
	const LocalStencil &local(std::size_t j) const;

	double lipschitz_in_p() const { return lipschitz_p_; }
	/// Bound on the Lipschitz constant of the Picard map in the sup norm.
	double contraction_bound() const { return contraction_bound_; }

	/// U^0_j = g at interior nodes, extension at the two boundary nodes.
	ComponentValues initial_values() const;

	/// U^{n+1/2}_j = max(zeta(t_next), U^n_j, max_{k != j} U^n_k - c).
	ComponentValues switching_step(const ComponentValues &U,
			double t_next) const;

	/// One application of the Picard map of component j.
	std::vector<double> picard_map(std::size_t j,
			std::span<const double> guess, std::span<const double> half,
			double t_next) const;

	/// Picard iteration from the seed U^{n+1/2}_j until the sup-norm increment
	/// drops below picard_tol. Throws ConvergenceError after picard_max maps.
	ImplicitStepResult implicit_step(std::size_t j,
			std::span<const double> half, double t_next) const;

	/// Residual of the min-form scheme G_j at the interior nodes. The
	/// time-derivative branch is multiplied by dt so all three branches share
	/// the scale of the implicit equation.
	std::vector<double> scheme_residual(std::size_t j,
			std::span<const double> next, const ComponentValues &previous,
			double t_next) const;

	/// a_n from a_0 = max(|g|, |zeta|, |ext|) and
	/// a_n = a_{n-1}/(1 + dt C) + dt C_1.
	double stability_bound(std::size_t n) const;

	SolveResult solve(const StepObserver &observer = {}) const;

	std::vector<double> obstacle_at(double t) const;

private:
	struct Component;
	struct ExteriorTerms;

	const ExteriorTerms &exterior_terms(std::size_t j, double t,
			ExteriorTerms &scratch) const;
	ExteriorTerms compute_exterior_terms(std::size_t j, double t) const;
	void picard_map_impl(std::size_t j, const ExteriorTerms &ext,
			std::span<const double> guess, std::span<const double> half,
			double t_next, std::span<double> out) const;
	void set_boundary(std::span<double> U, double t) const;
	void advance(const ComponentValues &previous, double t_next,
			ComponentValues &half, ComponentValues &next,
			std::vector<PicardStats> &stats) const;

	ProblemSpec spec_;
	ControlGrid controls_;
	SchemeParams params_;
	SpaceTimeGrid grid_;
	LevyMeasure measure_;
	std::vector<std::unique_ptr<Component>> components_;
	double lipschitz_p_ = 0.0;
	double contraction_bound_ = 0.0;
	double a0_ = 0.0;
	double c1_ = 0.0;
};

/// Convenience wrapper around SwitchingScheme.
SolveResult solve(const ProblemSpec &spec, const ControlGrid &controls,
		const SchemeParams &params, const StepObserver &observer = {});

} // namespace pcpt
