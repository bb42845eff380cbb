#include "pcpt/config.hpp"

#include "pcpt/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace pcpt {

using nlohmann::json;

namespace {

double parse_plain(const std::string &text, const std::string &path)
{
	std::size_t used = 0;
	double value = 0.0;
	try {
		value = std::stod(text, &used);
	} catch (const std::exception &) {
		used = 0;
	}
	if (used == 0 || used != text.size() || !std::isfinite(value)) {
		throw ConfigError(path + ": '" + text + "' is not a number");
	}
	return value;
}

// Reads the members of one JSON object and rejects keys nobody asked for.
class Section {
public:
	Section(const json &object, std::string path)
		: object_(object), path_(std::move(path))
	{
		if (!object_.is_object()) {
			throw ConfigError(path_ + ": expected an object");
		}
	}

	bool has(const std::string &key) const { return object_.contains(key); }

	const json &at(const std::string &key)
	{
		if (!object_.contains(key)) {
			throw ConfigError("missing required key '" + key_path(key) + "'");
		}
		seen_.insert(key);
		return object_.at(key);
	}

	double number(const std::string &key, double fallback)
	{
		return has(key) ? number(key) : fallback;
	}
	double number(const std::string &key)
	{
		return parse_number(at(key), key_path(key));
	}

	std::size_t count(const std::string &key, std::size_t fallback)
	{
		return has(key) ? count(key) : fallback;
	}
	std::size_t count(const std::string &key)
	{
		const double v = number(key);
		if (v < 0.0 || v != std::floor(v)) {
			throw ConfigError(key_path(key) + ": expected a nonnegative integer");
		}
		return static_cast<std::size_t>(v);
	}

	bool flag(const std::string &key, bool fallback)
	{
		if (!has(key)) {
			return fallback;
		}
		const auto &v = at(key);
		if (!v.is_boolean()) {
			throw ConfigError(key_path(key) + ": expected true or false");
		}
		return v.get<bool>();
	}

	std::string text(const std::string &key, const std::string &fallback)
	{
		if (!has(key)) {
			return fallback;
		}
		const auto &v = at(key);
		if (v.is_string()) {
			return v.get<std::string>();
		}
		if (v.is_number()) {
			std::ostringstream os;
			os.precision(17);
			os << v.get<double>();
			return os.str();
		}
		throw ConfigError(key_path(key) + ": expected a string or number");
	}

	std::vector<double> numbers(const std::string &key)
	{
		std::vector<double> out;
		if (!has(key)) {
			return out;
		}
		const auto &v = at(key);
		if (!v.is_array()) {
			throw ConfigError(key_path(key) + ": expected a list");
		}
		for (std::size_t i = 0; i < v.size(); ++i) {
			out.push_back(parse_number(v[i],
					key_path(key) + "[" + std::to_string(i) + "]"));
		}
		return out;
	}

	Section child(const std::string &key)
	{
		return Section(at(key), key_path(key));
	}

	void finish() const
	{
		for (const auto &[key, value] : object_.items()) {
			if (!seen_.count(key)) {
				throw ConfigError("unknown key '" + key_path(key) + "'");
			}
		}
	}

	std::string key_path(const std::string &key) const
	{
		return path_.empty() ? key : path_ + "." + key;
	}

private:
	const json &object_;
	std::string path_;
	std::set<std::string> seen_;
};

json number_or_string(const std::string &text)
{
	try {
		return json::parse(text);
	} catch (const json::parse_error &) {
		return text;
	}
}

} // namespace

double parse_number(const json &value, const std::string &path)
{
	if (value.is_number()) {
		const double v = value.get<double>();
		if (!std::isfinite(v)) {
			throw ConfigError(path + ": value is not finite");
		}
		return v;
	}
	if (!value.is_string()) {
		throw ConfigError(path + ": expected a number");
	}
	const auto text = value.get<std::string>();
	const auto slash = text.find('/');
	if (slash == std::string::npos) {
		return parse_plain(text, path);
	}
	const double num = parse_plain(text.substr(0, slash), path);
	const double den = parse_plain(text.substr(slash + 1), path);
	if (den == 0.0) {
		throw ConfigError(path + ": division by zero in '" + text + "'");
	}
	return num / den;
}

double resolve_rule(const std::string &rule, double h)
{
	std::string r;
	for (char ch : rule) {
		if (ch != ' ') {
			r.push_back(ch);
		}
	}
	const auto bad = [&] {
		return ConfigError("cannot resolve step rule '" + rule
				+ "' (use h, h/<n>, <n>*h or a number)");
	};
	if (r == "h") {
		return h;
	}
	if (r.rfind("h/", 0) == 0) {
		try {
			return h / parse_number(json(r.substr(2)), rule);
		} catch (const ConfigError &) {
			throw bad();
		}
	}
	if (r.size() > 2 && r.compare(r.size() - 2, 2, "*h") == 0) {
		try {
			return parse_number(json(r.substr(0, r.size() - 2)), rule) * h;
		} catch (const ConfigError &) {
			throw bad();
		}
	}
	try {
		return parse_number(json(r), rule);
	} catch (const ConfigError &) {
		throw bad();
	}
}

void apply_override(json &config, const std::string &assignment)
{
	const auto eq = assignment.find('=');
	if (eq == std::string::npos || eq == 0) {
		throw ConfigError("override '" + assignment + "' is not key=value");
	}
	const auto key = assignment.substr(0, eq);
	json *node = &config;
	std::size_t start = 0;
	while (true) {
		const auto dot = key.find('.', start);
		const auto part = key.substr(start, dot - start);
		if (part.empty()) {
			throw ConfigError("override '" + assignment + "' has an empty key");
		}
		if (!node->is_object()) {
			if (!node->is_null()) {
				throw ConfigError("override '" + key + "' descends into a "
						"non-object value");
			}
			*node = json::object();
		}
		node = &(*node)[part];
		if (dot == std::string::npos) {
			break;
		}
		start = dot + 1;
	}
	*node = number_or_string(assignment.substr(eq + 1));
}

RunConfig parse_config(const json &config)
{
	RunConfig out;
	Section root(config, "");

	{
		auto model = root.child("model");
		out.model.type = model.at("type").is_string()
				? model.at("type").get<std::string>()
				: throw ConfigError("model.type: expected a string");
		if (out.model.type == "recursive_utility") {
			auto &b = out.model.benchmark;
			b.beta = model.number("beta", b.beta);
			b.kappa = model.number("kappa", b.kappa);
			b.b = model.number("b", b.b);
			b.sigma = model.number("sigma", b.sigma);
			b.mu = model.number("mu", b.mu);
			b.T = model.number("T", b.T);
			b.x0 = model.number("x0", b.x0);
			b.r = model.number("r", b.r);
			b.psi_scale = model.number("psi_scale", b.psi_scale);
			b.x_lo = model.number("x_lo", b.x_lo);
			b.x_hi = model.number("x_hi", b.x_hi);
			b.e_max = model.number("e_max", b.e_max);
			b.bins_per_unit = model.number("bins_per_unit", b.bins_per_unit);
			b.validate();
		} else if (out.model.type == "linear_decay") {
			auto &l = out.model.linear;
			l.g0 = model.number("g0", l.g0);
			l.c0 = model.number("c0", l.c0);
			l.beta = model.number("beta", l.beta);
			l.T = model.number("T", l.T);
			l.obstacle = model.number("obstacle", l.obstacle);
			l.x_lo = model.number("x_lo", l.x_lo);
			l.x_hi = model.number("x_hi", l.x_hi);
			if (!(l.T > 0.0) || !(l.x_hi > l.x_lo) || l.beta < 0.0) {
				throw ConfigError("model: linear_decay needs T > 0, beta >= 0 "
						"and x_hi > x_lo");
			}
		} else {
			throw ConfigError("model.type: unknown model '" + out.model.type
					+ "' (recursive_utility or linear_decay)");
		}
		model.finish();
	}

	{
		auto s = root.child("scheme");
		auto &o = out.scheme;
		o.h = s.number("h");
		o.dt_rule = s.text("dt", o.dt_rule);
		o.epsilon_rule = s.text("epsilon", o.epsilon_rule);
		o.theta = s.number("theta");
		o.c = s.number("c");
		o.J = s.count("J");
		o.k_sl = s.number("k_sl", o.k_sl);
		o.picard_tol = s.number("picard_tol", o.picard_tol);
		o.picard_max = s.count("picard_max", o.picard_max);
		o.record_policy = s.flag("record_policy", o.record_policy);
		o.snapshot_stride = s.count("snapshot_stride", o.snapshot_stride);
		o.parallel_components = s.flag("parallel_components",
				o.parallel_components);
		o.threads = s.count("threads", o.threads);
		s.finish();
		if (!(o.h > 0.0) || !(o.theta > 0.0) || !(o.c > 0.0) || o.J == 0) {
			throw ConfigError("scheme: need h > 0, theta > 0, c > 0, J >= 1");
		}
		resolve_rule(o.dt_rule, o.h);
		resolve_rule(o.epsilon_rule, o.h);
	}

	if (root.has("study")) {
		auto s = root.child("study");
		auto &o = out.study;
		o.h_values = s.numbers("h_values");
		o.c_values = s.numbers("c_values");
		for (double J : s.numbers("J_values")) {
			if (J < 1.0 || J != std::floor(J)) {
				throw ConfigError("study.J_values: expected positive integers");
			}
			o.J_values.push_back(static_cast<std::size_t>(J));
		}
		if (s.has("x_lo")) {
			o.x_lo = s.number("x_lo");
		}
		if (s.has("x_hi")) {
			o.x_hi = s.number("x_hi");
		}
		s.finish();
		for (std::size_t i = 1; i < o.h_values.size(); ++i) {
			if (o.h_values[i] > o.h_values[i - 1]) {
				throw ConfigError("study.h_values must be sorted descending");
			}
		}
	}

	if (root.has("output")) {
		auto s = root.child("output");
		out.output.dir = s.text("dir", out.output.dir);
		s.finish();
	}
	root.finish();
	return out;
}

RunConfig load_config(const std::string &path,
		const std::vector<std::string> &overrides)
{
	std::ifstream in(path);
	if (!in) {
		throw ConfigError("cannot open config file '" + path + "'");
	}
	std::stringstream buffer;
	buffer << in.rdbuf();
	const std::string text = buffer.str();

	json config;
	try {
		config = json::parse(text);
	} catch (const json::parse_error &e) {
		std::size_t line = 1;
		std::size_t column = 1;
		const std::size_t stop = std::min(e.byte, text.size());
		for (std::size_t i = 0; i + 1 < stop; ++i) {
			if (text[i] == '\n') {
				++line;
				column = 1;
			} else {
				++column;
			}
		}
		std::ostringstream os;
		os << path << ":" << line << ":" << column << ": " << e.what();
		throw ConfigError(os.str());
	}
	for (const auto &o : overrides) {
		apply_override(config, o);
	}
	return parse_config(config);
}

json to_json(const RunConfig &c)
{
	json model;
	model["type"] = c.model.type;
	if (c.model.type == "recursive_utility") {
		const auto &b = c.model.benchmark;
		model.update({{"beta", b.beta}, {"kappa", b.kappa}, {"b", b.b},
				{"sigma", b.sigma}, {"mu", b.mu}, {"T", b.T}, {"x0", b.x0},
				{"r", b.r}, {"psi_scale", b.psi_scale}, {"x_lo", b.x_lo},
				{"x_hi", b.x_hi}, {"e_max", b.e_max},
				{"bins_per_unit", b.bins_per_unit}});
	} else {
		const auto &l = c.model.linear;
		model.update({{"g0", l.g0}, {"c0", l.c0}, {"beta", l.beta},
				{"T", l.T}, {"obstacle", l.obstacle}, {"x_lo", l.x_lo},
				{"x_hi", l.x_hi}});
	}
	const auto &s = c.scheme;
	json scheme = {{"h", s.h}, {"dt", s.dt_rule}, {"epsilon", s.epsilon_rule},
			{"theta", s.theta}, {"c", s.c}, {"J", s.J}, {"k_sl", s.k_sl},
			{"picard_tol", s.picard_tol}, {"picard_max", s.picard_max},
			{"record_policy", s.record_policy},
			{"snapshot_stride", s.snapshot_stride},
			{"parallel_components", s.parallel_components},
			{"threads", s.threads}};
	json study = {{"h_values", c.study.h_values},
			{"c_values", c.study.c_values}, {"J_values", c.study.J_values}};
	if (c.study.x_lo) {
		study["x_lo"] = *c.study.x_lo;
	}
	if (c.study.x_hi) {
		study["x_hi"] = *c.study.x_hi;
	}
	return {{"model", model}, {"scheme", scheme}, {"study", study},
			{"output", {{"dir", c.output.dir}}}};
}

ProblemSpec make_problem(const RunConfig &config)
{
	if (config.model.type == "linear_decay") {
		auto p = config.model.linear;
		p.x_lo = config.study.x_lo.value_or(p.x_lo);
		p.x_hi = config.study.x_hi.value_or(p.x_hi);
		return linear_decay_spec(p);
	}
	auto p = config.model.benchmark;
	p.x_lo = config.study.x_lo.value_or(p.x_lo);
	p.x_hi = config.study.x_hi.value_or(p.x_hi);
	return recursive_utility_spec(p);
}

ControlGrid make_controls(const RunConfig &config, std::size_t J)
{
	const auto spec = make_problem(config);
	return discretize_controls(spec.a_lo, spec.a_hi, J);
}

SchemeParams make_scheme(const RunConfig &config, double h, double c)
{
	const auto &s = config.scheme;
	SchemeParams p;
	p.h = h;
	p.dt = resolve_rule(s.dt_rule, h);
	p.epsilon = resolve_rule(s.epsilon_rule, h);
	p.k_sl = s.k_sl;
	p.theta = s.theta;
	p.switching_cost = c;
	p.picard_tol = s.picard_tol;
	p.picard_max = s.picard_max;
	p.record_policy = s.record_policy;
	p.snapshot_stride = s.snapshot_stride;
	p.parallel_components = s.parallel_components;
	p.threads = s.threads;
	return p;
}

} // namespace pcpt
