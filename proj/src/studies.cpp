#include "pcpt/studies.hpp"

#include "pcpt/errors.hpp"

#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

namespace pcpt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string csv_number(double v)
{
	if (std::isnan(v)) {
		return "nan";
	}
	std::ostringstream os;
	os << std::setprecision(17) << v;
	return os.str();
}

// Runs body(k) for k < count, in parallel when threads > 1.
template <class Body>
void for_each_cell(std::size_t count, std::size_t threads, Body body)
{
	if (threads > 1) {
		tbb::task_arena arena(static_cast<int>(threads));
		arena.execute([&] {
			tbb::parallel_for(std::size_t(0), count, body);
		});
	} else {
		for (std::size_t k = 0; k < count; ++k) {
			body(k);
		}
	}
}

} // namespace

IncrementTable increment_table(const std::vector<double> &values)
{
	IncrementTable t;
	t.increments.assign(values.size(), kNaN);
	t.ratios.assign(values.size(), kNaN);
	for (std::size_t k = 1; k < values.size(); ++k) {
		t.increments[k] = values[k] - values[k - 1];
	}
	for (std::size_t k = 2; k < values.size(); ++k) {
		const double den = t.increments[k];
		if (den != 0.0 && !std::isnan(den)) {
			t.ratios[k] = t.increments[k - 1] / den;
		}
	}
	return t;
}

double reported_value(const RunConfig &config, const SolveResult &result)
{
	const double x0 = config.model.type == "recursive_utility"
			? config.model.benchmark.x0
			: 0.5 * (result.grid.x_lo() + result.grid.x_hi());
	return result.value(result.final_values.size() - 1, x0);
}

SolveResult run_case(const RunConfig &config, double h, double c,
		std::size_t J)
{
	const auto spec = make_problem(config);
	const auto controls = discretize_controls(spec.a_lo, spec.a_hi, J);
	return solve(spec, controls, make_scheme(config, h, c));
}

MeshStudy convergence_study(const RunConfig &config)
{
	const auto &hs = config.study.h_values;
	if (hs.size() < 3) {
		throw ConfigError("mesh study needs at least three h values");
	}
	std::vector<double> cs = config.study.c_values;
	if (cs.empty()) {
		cs.push_back(config.scheme.c);
	}

	MeshStudy study;
	study.rows.resize(cs.size());
	for (std::size_t r = 0; r < cs.size(); ++r) {
		auto &row = study.rows[r];
		row.c = cs[r];
		row.h = hs;
		row.values.assign(hs.size(), kNaN);
		row.errors.assign(hs.size(), "");
	}

	// Parallelism lives at the cell level here.
	RunConfig cell_config = config;
	cell_config.scheme.parallel_components = false;
	const std::size_t cells = cs.size() * hs.size();
	for_each_cell(cells, config.scheme.threads, [&](std::size_t k) {
		auto &row = study.rows[k / hs.size()];
		const std::size_t i = k % hs.size();
		try {
			const auto result = run_case(cell_config, hs[i], row.c,
					config.scheme.J);
			row.values[i] = reported_value(config, result);
		} catch (const std::exception &e) {
			row.errors[i] = e.what();
		}
	});

	for (auto &row : study.rows) {
		row.table = increment_table(row.values);
	}
	study.finest_h = hs.back();
	for (const auto &row : study.rows) {
		study.cost_values.push_back(row.values.back());
	}
	study.cost_table = increment_table(study.cost_values);
	return study;
}

ControlStudy control_study(const RunConfig &config, bool time_parallel)
{
	auto Js = config.study.J_values;
	if (Js.empty()) {
		throw ConfigError("control study needs study.J_values");
	}
	const std::size_t J_max = *std::max_element(Js.begin(), Js.end());

	ControlStudy study;
	study.hardware_threads = std::thread::hardware_concurrency();
	const auto spec = make_problem(config);
	for (std::size_t J : Js) {
		ControlStudyRow row;
		row.J = J;
		try {
			const auto controls = discretize_controls(spec.a_lo, spec.a_hi, J);
			auto params = make_scheme(config, config.scheme.h, config.scheme.c);
			params.record_policy = false;
			params.parallel_components = false;
			const auto serial = solve(spec, controls, params);
			row.value = reported_value(config, serial);
			row.serial_seconds = serial.wall_seconds;
			if (time_parallel) {
				params.parallel_components = true;
				const auto parallel = solve(spec, controls, params);
				row.parallel_seconds = parallel.wall_seconds;
				row.speedup = row.serial_seconds / row.parallel_seconds;
			}
		} catch (const std::exception &e) {
			row.value = kNaN;
			row.error = e.what();
		}
		study.rows.push_back(row);
	}
	double reference = kNaN;
	for (const auto &row : study.rows) {
		if (row.J == J_max) {
			reference = row.value;
		}
	}
	for (auto &row : study.rows) {
		row.difference = std::abs(row.value - reference);
	}
	return study;
}

void write_mesh_study_csv(std::ostream &os, const MeshStudy &study)
{
	os << "kind,c,h,value,increment,ratio,error\n";
	for (const auto &row : study.rows) {
		for (std::size_t i = 0; i < row.h.size(); ++i) {
			os << "mesh," << csv_number(row.c) << "," << csv_number(row.h[i])
			   << "," << csv_number(row.values[i]) << ","
			   << csv_number(row.table.increments[i]) << ","
			   << csv_number(row.table.ratios[i]) << ",\""
			   << row.errors[i] << "\"\n";
		}
	}
	for (std::size_t r = 0; r < study.rows.size(); ++r) {
		os << "cost," << csv_number(study.rows[r].c) << ","
		   << csv_number(study.finest_h) << ","
		   << csv_number(study.cost_values[r]) << ","
		   << csv_number(study.cost_table.increments[r]) << ","
		   << csv_number(study.cost_table.ratios[r]) << ",\"\"\n";
	}
}

void print_mesh_study(std::ostream &os, const MeshStudy &study)
{
	const auto cell = [&](double v, int precision) {
		std::ostringstream s;
		if (std::isnan(v)) {
			s << "-";
		} else {
			s << std::fixed << std::setprecision(precision) << v;
		}
		os << std::setw(12) << s.str();
	};
	os << std::setw(12) << "h" << std::setw(4) << "";
	for (double h : study.rows.front().h) {
		std::ostringstream s;
		s << "1/" << std::setprecision(6) << 1.0 / h;
		os << std::setw(12) << s.str();
	}
	os << "\n";
	for (const auto &row : study.rows) {
		std::ostringstream c;
		c << "c=1/" << std::setprecision(6) << 1.0 / row.c;
		os << std::setw(12) << c.str() << std::setw(4) << "(a)";
		for (double v : row.values) {
			cell(v, 5);
		}
		os << "\n" << std::setw(12) << "" << std::setw(4) << "(b)";
		for (double v : row.table.increments) {
			cell(v * 1e6, 2);
		}
		os << "\n" << std::setw(12) << "" << std::setw(4) << "(c)";
		for (double v : row.table.ratios) {
			cell(v, 4);
		}
		os << "\n";
		for (std::size_t i = 0; i < row.errors.size(); ++i) {
			if (!row.errors[i].empty()) {
				os << "    h=" << row.h[i] << " failed: " << row.errors[i]
				   << "\n";
			}
		}
	}
	os << "(a) value at (T, x0); (b) increments U_h - U_2h in 1e-6; "
	      "(c) ratio of consecutive increments\n";
	if (study.rows.size() > 1) {
		os << "cost sweep at h=" << study.finest_h << ":";
		for (std::size_t r = 1; r < study.rows.size(); ++r) {
			os << " diff=" << std::setprecision(5)
			   << study.cost_table.increments[r];
			if (!std::isnan(study.cost_table.ratios[r])) {
				os << " (ratio " << std::setprecision(4)
				   << study.cost_table.ratios[r] << ")";
			}
		}
		os << "\n";
	}
}

void write_control_study_csv(std::ostream &os, const ControlStudy &study)
{
	os << "J,value,difference,serial_seconds,parallel_seconds,speedup,error\n";
	for (const auto &r : study.rows) {
		os << r.J << "," << csv_number(r.value) << ","
		   << csv_number(r.difference) << "," << csv_number(r.serial_seconds)
		   << "," << csv_number(r.parallel_seconds) << ","
		   << csv_number(r.speedup) << ",\"" << r.error << "\"\n";
	}
}

void print_control_study(std::ostream &os, const ControlStudy &study)
{
	os << std::setw(6) << "J" << std::setw(14) << "value" << std::setw(14)
	   << "diff (1e-7)" << std::setw(12) << "serial s" << std::setw(12)
	   << "parallel s" << std::setw(10) << "speedup" << "\n";
	for (const auto &r : study.rows) {
		os << std::setw(6) << r.J << std::setw(14) << std::fixed
		   << std::setprecision(8) << r.value << std::setw(14)
		   << std::setprecision(4) << r.difference * 1e7 << std::setw(12)
		   << std::setprecision(3) << r.serial_seconds << std::setw(12)
		   << r.parallel_seconds << std::setw(10) << std::setprecision(2)
		   << r.speedup << "\n";
		if (!r.error.empty()) {
			os << "    failed: " << r.error << "\n";
		}
	}
	os << std::defaultfloat << "hardware threads: " << study.hardware_threads
	   << "\n";
}

void write_surface_csv(std::ostream &os, const SolveResult &result)
{
	const std::size_t J = result.final_values.size();
	os << "t,x";
	for (std::size_t j = 0; j < J; ++j) {
		os << ",U_" << j + 1;
	}
	os << "\n";
	const auto slice = [&](double t, const ComponentValues &U) {
		for (std::size_t i = 0; i < result.grid.size(); ++i) {
			os << csv_number(t) << "," << csv_number(result.grid.x(i));
			for (std::size_t j = 0; j < J; ++j) {
				os << "," << csv_number(U[j][i]);
			}
			os << "\n";
		}
	};
	if (result.snapshots.empty()) {
		slice(result.grid.horizon(), result.final_values);
	} else {
		for (std::size_t s = 0; s < result.snapshots.size(); ++s) {
			slice(result.snapshot_times[s], result.snapshots[s]);
		}
	}
}

void write_surface_gnuplot(std::ostream &os, const SolveResult &result,
		const SwitchingScheme &scheme)
{
	os << "# t x max_j U_j alpha stopped\n";
	const auto block = [&](double t, const ComponentValues &U) {
		const auto field = extract_policy(U, scheme.obstacle_at(t));
		for (std::size_t i = 0; i < result.grid.size(); ++i) {
			const auto k = field.control_index[i];
			os << csv_number(t) << " " << csv_number(result.grid.x(i)) << " "
			   << csv_number(U[k][i]) << " "
			   << csv_number(result.controls[k]) << " "
			   << static_cast<int>(field.stopped[i]) << "\n";
		}
		os << "\n";
	};
	if (result.snapshots.empty()) {
		block(result.grid.horizon(), result.final_values);
	} else {
		for (std::size_t s = 0; s < result.snapshots.size(); ++s) {
			block(result.snapshot_times[s], result.snapshots[s]);
		}
	}
}

void write_policy_csv(std::ostream &os, const SolveResult &result,
		const SwitchingScheme &scheme)
{
	os << "t,x,alpha,stopped\n";
	const auto slice = [&](double t, const PolicyField &field) {
		for (std::size_t i = 0; i < result.grid.size(); ++i) {
			os << csv_number(t) << "," << csv_number(result.grid.x(i)) << ","
			   << csv_number(result.controls[field.control_index[i]]) << ","
			   << static_cast<int>(field.stopped[i]) << "\n";
		}
	};
	if (result.policy.empty()) {
		const double T = result.grid.horizon();
		slice(T, extract_policy(result.final_values, scheme.obstacle_at(T)));
	} else {
		for (std::size_t n = 0; n < result.policy.size(); ++n) {
			slice(result.grid.t(n), result.policy[n]);
		}
	}
}

void write_summary_csv(std::ostream &os, const RunConfig &config,
		const SchemeParams &params, const SolveResult &result)
{
	os << "key,value\n";
	os << "model," << config.model.type << "\n";
	os << "h," << csv_number(params.h) << "\n";
	os << "dt," << csv_number(params.dt) << "\n";
	os << "epsilon," << csv_number(params.epsilon) << "\n";
	os << "theta," << csv_number(params.theta) << "\n";
	os << "c," << csv_number(params.switching_cost) << "\n";
	os << "J," << result.controls.size() << "\n";
	os << "x_lo," << csv_number(result.grid.x_lo()) << "\n";
	os << "x_hi," << csv_number(result.grid.x_hi()) << "\n";
	os << "value," << csv_number(reported_value(config, result)) << "\n";
	os << "picard_total," << result.total_picard_iterations << "\n";
	os << "picard_max," << result.max_picard_iterations << "\n";
	os << "max_contraction_ratio," << csv_number(result.max_contraction_ratio)
	   << "\n";
	os << "contraction_bound," << csv_number(result.contraction_bound) << "\n";
	os << "max_stability_excess," << csv_number(result.max_stability_excess)
	   << "\n";
	os << "wall_seconds," << csv_number(result.wall_seconds) << "\n";
}

void write_file_atomically(const std::filesystem::path &path,
		const std::string &contents)
{
	auto tmp = path;
	tmp += ".tmp";
	{
		std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
		if (!out) {
			throw std::runtime_error("cannot write " + tmp.string());
		}
		out << contents;
		if (!out) {
			throw std::runtime_error("write failed for " + tmp.string());
		}
	}
	std::filesystem::rename(tmp, path);
}

} // namespace pcpt
