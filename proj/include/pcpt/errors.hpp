#pragma once

#include <stdexcept>
#include <string>

namespace pcpt {

/// Invalid parameters, grids or configuration files.
class ConfigError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/// An adaptive quadrature of the Levy measure did not reach its tolerance.
class IntegrationError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/// Failure inside the time-marching solver (linear solve or Picard loop).
class SolverError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/// Picard iteration hit its iteration cap.
class ConvergenceError : public SolverError {
public:
	ConvergenceError(const std::string &what, double last_increment,
			double contraction_ratio)
		: SolverError(what), last_increment(last_increment),
		  contraction_ratio(contraction_ratio) {}

	double last_increment;
	double contraction_ratio;
};

} // namespace pcpt
