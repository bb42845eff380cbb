#pragma once

#include "pcpt/model.hpp"
#include "pcpt/solver.hpp"

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace pcpt {

/// Resolved run configuration. The on-disk form is JSON:
///
///   {
///     "model":  {"type": "recursive_utility", "b": 0.1, ...},
///     "scheme": {"h": 0.01, "dt": "h/15", "epsilon": "h", "theta": 0.025,
///                "c": "1/640", "J": 2},
///     "study":  {"h_values": [...], "c_values": [...], "J_values": [...]},
///     "output": {"dir": "out"}
///   }
///
/// Numbers may be written as fractions ("1/640"); dt and epsilon are rules in
/// h ("h", "h/15", "2*h" or an absolute number).
struct RunConfig {
	struct Model {
		std::string type = "recursive_utility";  ///< or "linear_decay"
		BenchmarkParams benchmark;
		LinearDecayParams linear;
	};
	struct Scheme {
		double h = 0.01;
		std::string dt_rule = "h/15";
		std::string epsilon_rule = "h";
		double theta = 1.0 / 40.0;
		double c = 1.0 / 640.0;
		std::size_t J = 2;
		double k_sl = 0.0;
		double picard_tol = 1e-10;
		std::size_t picard_max = 200;
		bool record_policy = false;
		std::size_t snapshot_stride = 0;
		bool parallel_components = false;
		std::size_t threads = 0;
	};
	struct Study {
		std::vector<double> h_values;
		std::vector<double> c_values;
		std::vector<std::size_t> J_values;
		std::optional<double> x_lo;
		std::optional<double> x_hi;
	};
	struct Output {
		std::string dir = "out";
	};

	Model model;
	Scheme scheme;
	Study study;
	Output output;
};

/// Parses "1/640", "0.5" or a JSON number.
double parse_number(const nlohmann::json &value, const std::string &path);

/// Evaluates a step rule ("h", "h/15", "2*h", "0.001") at mesh size h.
double resolve_rule(const std::string &rule, double h);

/// Sets a dotted path ("scheme.h") to a value; the value is parsed as JSON
/// when possible and kept as a string otherwise.
void apply_override(nlohmann::json &config, const std::string &assignment);

/// Throws ConfigError (with the offending key path) on missing required keys,
/// unknown keys, wrong types or invalid values. Required: model.type,
/// scheme.h, scheme.theta, scheme.c, scheme.J.
RunConfig parse_config(const nlohmann::json &config);

/// Parses the file (reporting line and column of syntax errors), applies the
/// overrides and validates.
RunConfig load_config(const std::string &path,
		const std::vector<std::string> &overrides = {});

/// Fully resolved JSON; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const RunConfig &config);

ProblemSpec make_problem(const RunConfig &config);
ControlGrid make_controls(const RunConfig &config, std::size_t J);
SchemeParams make_scheme(const RunConfig &config, double h, double c);

} // namespace pcpt
