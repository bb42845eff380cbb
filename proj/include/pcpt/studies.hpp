#pragma once

#include "pcpt/config.hpp"
#include "pcpt/solver.hpp"

#include <cstddef>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace pcpt {

/// Successive differences v[k] - v[k-1] and their ratios
/// (v[k-1] - v[k-2]) / (v[k] - v[k-1]). Undefined entries (the first
/// increment, the first two ratios, or a zero denominator) are NaN.
struct IncrementTable {
	std::vector<double> increments;
	std::vector<double> ratios;
};

IncrementTable increment_table(const std::vector<double> &values);

/// Value reported by a run: the last switching component at (T, x0).
double reported_value(const RunConfig &config, const SolveResult &result);

/// Solve one (h, c, J) cell of a configuration.
SolveResult run_case(const RunConfig &config, double h, double c,
		std::size_t J);

struct MeshStudyRow {
	double c = 0.0;
	std::vector<double> h;
	std::vector<double> values;  ///< NaN where the solve failed
	std::vector<std::string> errors;
	IncrementTable table;
};

struct MeshStudy {
	std::vector<MeshStudyRow> rows;
	/// Values at the finest h for each c, with differences between
	/// consecutive c and their ratios.
	double finest_h = 0.0;
	std::vector<double> cost_values;
	IncrementTable cost_table;
};

/// For every c in study.c_values (default scheme.c) solves every h in
/// study.h_values (at least three). A failed cell is recorded and the row
/// continues.
MeshStudy convergence_study(const RunConfig &config);

struct ControlStudyRow {
	std::size_t J = 0;
	double value = 0.0;
	double difference = 0.0;  ///< |value - value at the largest J|
	double serial_seconds = 0.0;
	double parallel_seconds = 0.0;
	double speedup = 0.0;
	std::string error;
};

struct ControlStudy {
	std::vector<ControlStudyRow> rows;
	std::size_t hardware_threads = 0;
};

/// Solves every J in study.J_values at scheme.h and scheme.c, once with
/// serial and once with parallel component solves (parallel skipped when
/// `time_parallel` is false).
ControlStudy control_study(const RunConfig &config, bool time_parallel = true);

void write_mesh_study_csv(std::ostream &os, const MeshStudy &study);
void print_mesh_study(std::ostream &os, const MeshStudy &study);
void write_control_study_csv(std::ostream &os, const ControlStudy &study);
void print_control_study(std::ostream &os, const ControlStudy &study);

/// surface.csv: t, x, U_1..U_J for every stored snapshot (the final slice
/// only when no snapshots were recorded).
void write_surface_csv(std::ostream &os, const SolveResult &result);
/// Blank-line separated blocks "t x max_j U_j alpha* stopped" for gnuplot's
/// splot.
void write_surface_gnuplot(std::ostream &os, const SolveResult &result,
		const SwitchingScheme &scheme);
/// policy.csv: t, x, alpha*, stopped for every recorded step (final slice
/// only when the policy was not recorded).
void write_policy_csv(std::ostream &os, const SolveResult &result,
		const SwitchingScheme &scheme);
void write_summary_csv(std::ostream &os, const RunConfig &config,
		const SchemeParams &params, const SolveResult &result);

/// Writes `contents` to `path` through a temporary file and a rename.
void write_file_atomically(const std::filesystem::path &path,
		const std::string &contents);

} // namespace pcpt
