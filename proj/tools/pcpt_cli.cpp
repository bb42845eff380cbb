// pcpt: configuration-driven runner for the switching scheme.
//
//   pcpt solve --config run.json [--set scheme.h=0.005] [--out dir]
//   pcpt mesh-study --config study.json
//   pcpt control-study --config study.json
//   pcpt validate-config --config run.json
//
// Exit codes: 0 success, 1 other failure, 2 configuration error,
// 3 solver or integration failure.

#include "pcpt/config.hpp"
#include "pcpt/errors.hpp"
#include "pcpt/solver.hpp"
#include "pcpt/studies.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kSolver = 3 };

struct Options {
	std::string config_path;
	std::vector<std::string> overrides;
	std::string out_dir;
	std::size_t threads = 0;
	bool record_policy = false;
};

pcpt::RunConfig load(const Options &opt)
{
	auto overrides = opt.overrides;
	if (!opt.out_dir.empty()) {
		overrides.push_back("output.dir=\"" + opt.out_dir + "\"");
	}
	if (opt.threads > 0) {
		overrides.push_back("scheme.threads=" + std::to_string(opt.threads));
		if (opt.threads > 1) {
			overrides.push_back("scheme.parallel_components=true");
		}
	}
	if (opt.record_policy) {
		overrides.push_back("scheme.record_policy=true");
	}
	return pcpt::load_config(opt.config_path, overrides);
}

template <class Writer>
void emit(const fs::path &path, Writer writer)
{
	std::ostringstream os;
	writer(os);
	pcpt::write_file_atomically(path, os.str());
}

fs::path prepare_output(const pcpt::RunConfig &config)
{
	fs::path dir(config.output.dir);
	fs::create_directories(dir);
	emit(dir / "resolved_config.json", [&](std::ostream &os) {
		os << pcpt::to_json(config).dump(2) << "\n";
	});
	return dir;
}

int run_solve(const Options &opt)
{
	const auto config = load(opt);
	const auto spec = pcpt::make_problem(config);
	const auto controls = pcpt::make_controls(config, config.scheme.J);
	const auto params =
			pcpt::make_scheme(config, config.scheme.h, config.scheme.c);
	pcpt::SwitchingScheme scheme(spec, controls, params);
	const auto result = scheme.solve();

	const auto dir = prepare_output(config);
	emit(dir / "summary.csv", [&](std::ostream &os) {
		pcpt::write_summary_csv(os, config, params, result);
	});
	emit(dir / "surface.csv",
			[&](std::ostream &os) { pcpt::write_surface_csv(os, result); });
	emit(dir / "surface.dat", [&](std::ostream &os) {
		pcpt::write_surface_gnuplot(os, result, scheme);
	});
	emit(dir / "policy.csv", [&](std::ostream &os) {
		pcpt::write_policy_csv(os, result, scheme);
	});

	std::cout.precision(10);
	std::cout << "value " << pcpt::reported_value(config, result)
		  << "  picard " << result.total_picard_iterations << " (max "
		  << result.max_picard_iterations << ")  " << result.wall_seconds
		  << " s\n";
	return kOk;
}

int run_mesh_study(const Options &opt)
{
	const auto config = load(opt);
	const auto study = pcpt::convergence_study(config);
	const auto dir = prepare_output(config);
	emit(dir / "study.csv", [&](std::ostream &os) {
		pcpt::write_mesh_study_csv(os, study);
	});
	pcpt::print_mesh_study(std::cout, study);
	return kOk;
}

int run_control_study(const Options &opt)
{
	const auto config = load(opt);
	const auto study = pcpt::control_study(config);
	const auto dir = prepare_output(config);
	emit(dir / "study.csv", [&](std::ostream &os) {
		pcpt::write_control_study_csv(os, study);
	});
	pcpt::print_control_study(std::cout, study);
	return kOk;
}

int run_validate(const Options &opt)
{
	const auto config = load(opt);
	// Building the scheme checks the monotonicity and contraction conditions.
	const auto spec = pcpt::make_problem(config);
	const auto controls = pcpt::make_controls(config, config.scheme.J);
	pcpt::SwitchingScheme scheme(spec, controls,
			pcpt::make_scheme(config, config.scheme.h, config.scheme.c));
	std::cout << pcpt::to_json(config).dump(2) << "\n"
		  << "contraction bound " << scheme.contraction_bound() << "\n";
	return kOk;
}

} // namespace

int main(int argc, char **argv)
{
	CLI::App app{"Switching-system solver for nonlocal HJB variational "
		     "inequalities"};
	app.require_subcommand(1);

	Options opt;
	const auto add_common = [&](CLI::App *sub) {
		sub->add_option("--config", opt.config_path, "JSON config file")
				->required();
		sub->add_option("--set", opt.overrides,
				"override a key, e.g. --set scheme.h=1/200");
		sub->add_option("--out", opt.out_dir, "output directory");
		sub->add_option("--threads", opt.threads, "worker threads");
		sub->add_flag("--record-policy", opt.record_policy,
				"store the policy and value snapshots");
	};

	auto *solve = app.add_subcommand("solve", "single solve");
	auto *mesh = app.add_subcommand("mesh-study", "h and c refinement table");
	auto *control =
			app.add_subcommand("control-study", "control refinement table");
	auto *validate = app.add_subcommand("validate-config",
			"check a config and print it resolved");
	for (auto *sub : {solve, mesh, control, validate}) {
		add_common(sub);
	}

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError &e) {
		const int code = app.exit(e);
		return code == 0 ? kOk : kConfig;
	}

	try {
		if (solve->parsed()) {
			return run_solve(opt);
		}
		if (mesh->parsed()) {
			return run_mesh_study(opt);
		}
		if (control->parsed()) {
			return run_control_study(opt);
		}
		return run_validate(opt);
	} catch (const pcpt::ConfigError &e) {
		std::cerr << "config error: " << e.what() << "\n";
		return kConfig;
	} catch (const pcpt::SolverError &e) {
		std::cerr << "solver failure: " << e.what() << "\n";
		return kSolver;
	} catch (const pcpt::IntegrationError &e) {
		std::cerr << "integration failure: " << e.what() << "\n";
		return kSolver;
	} catch (const std::exception &e) {
		std::cerr << "error: " << e.what() << "\n";
		return kOther;
	}
}
