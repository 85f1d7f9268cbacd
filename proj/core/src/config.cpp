#include "fracback/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fracback/errors.hpp"

namespace fracback {

namespace {

std::string trim(const std::string& s) {
  std::size_t first = 0;
  std::size_t last = s.size();
  while (first < last && std::isspace(static_cast<unsigned char>(s[first]))) {
    ++first;
  }
  while (last > first &&
         std::isspace(static_cast<unsigned char>(s[last - 1]))) {
    --last;
  }
  return s.substr(first, last - first);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) {
      throw std::invalid_argument(value);
    }
    return v;
  } catch (const std::exception&) {
    throw validation_error("key '" + key + "' needs a number, got '" + value +
                           "'");
  }
}

std::size_t to_size(const std::string& key, const std::string& value) {
  try {
    if (!value.empty() && value.front() == '-') {
      throw std::invalid_argument(value);
    }
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) {
      throw std::invalid_argument(value);
    }
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw validation_error("key '" + key +
                           "' needs a nonnegative integer, got '" + value +
                           "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  return static_cast<std::uint64_t>(to_size(key, value));
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string::size_type start = 0;
  while (start <= text.size()) {
    const auto end = text.find(sep, start);
    if (end == std::string::npos) {
      parts.push_back(trim(text.substr(start)));
      break;
    }
    parts.push_back(trim(text.substr(start, end - start)));
    start = end + 1;
  }
  return parts;
}

std::vector<double> to_double_list(const std::string& key,
                                   const std::string& value) {
  std::vector<double> out;
  for (const std::string& part : split(value, ',')) {
    out.push_back(to_double(key, part));
  }
  return out;
}

std::vector<std::size_t> to_size_list(const std::string& key,
                                      const std::string& value) {
  std::vector<std::size_t> out;
  for (const std::string& part : split(value, ',')) {
    out.push_back(to_size(key, part));
  }
  return out;
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap map;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw validation_error("configuration line " + std::to_string(line_no) +
                             ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw validation_error("configuration line " + std::to_string(line_no) +
                             ": empty key or value");
    }
    if (!map.emplace(key, value).second) {
      throw validation_error("duplicate configuration key '" + key + "'");
    }
  }
  return map;
}

ConfigMap parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw validation_error("cannot read configuration file '" + path + "'");
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

std::string method_name(Method method) {
  switch (method) {
    case Method::first_truncation:
      return "first_truncation";
    case Method::second_truncation:
      return "second_truncation";
    case Method::quasi_reversibility:
      return "quasi_reversibility";
  }
  throw validation_error("unknown method selector");
}

Method method_by_name(const std::string& name) {
  if (name == "first_truncation") {
    return Method::first_truncation;
  }
  if (name == "second_truncation") {
    return Method::second_truncation;
  }
  if (name == "quasi_reversibility") {
    return Method::quasi_reversibility;
  }
  throw validation_error(
      "unknown method '" + name +
      "'; expected first_truncation | second_truncation | "
      "quasi_reversibility");
}

ExperimentConfig config_from_map(const ConfigMap& map) {
  ExperimentConfig c;
  for (const auto& [key, value] : map) {
    if (key == "problem.id") {
      c.id = value;
    } else if (key == "method") {
      c.method = method_by_name(value);
    } else if (key == "problem.beta") {
      c.beta = to_double(key, value);
    } else if (key == "problem.T") {
      c.T = to_double(key, value);
    } else if (key == "problem.a0") {
      c.a0 = to_double(key, value);
    } else if (key == "problem.coefficient") {
      c.coefficient_text = value;
    } else if (key == "problem.nonlinearity") {
      c.nonlinearity_name = value;
    } else if (key == "problem.nonlinearity_scale") {
      c.nonlinearity_scale = to_double(key, value);
    } else if (key == "problem.u0") {
      c.u0_text = value;
    } else if (key == "problem.source") {
      c.source_text = value;
    } else if (key == "n") {
      c.n = to_size(key, value);
    } else if (key == "noise.sigma") {
      c.noise_sigma = to_double(key, value);
    } else if (key == "noise.V_max") {
      c.V_max = to_double(key, value);
    } else if (key == "noise.vartheta") {
      c.vartheta = to_double(key, value);
    } else if (key == "noise.eps") {
      c.eps = to_double(key, value);
    } else if (key == "seed") {
      c.seed = to_u64(key, value);
    } else if (key == "params.M_n") {
      c.M_n = to_size(key, value);
    } else if (key == "params.sigma_rate") {
      c.sigma_rate = to_double(key, value);
    } else if (key == "params.Q_n") {
      c.Q_n = to_double(key, value);
    } else if (key == "params.picard_tol") {
      c.picard_tol = to_double(key, value);
    } else if (key == "params.picard_max_iters") {
      c.picard_max_iters = to_size(key, value);
    } else if (key == "grid.steps") {
      c.grid_steps = to_size(key, value);
    } else if (key == "grid.cap") {
      c.cap = to_size(key, value);
    } else if (key == "trials") {
      c.trials = to_size(key, value);
    } else if (key == "workers") {
      c.workers = to_size(key, value);
    } else if (key == "sweep.n_list") {
      c.sweep_n = to_size_list(key, value);
    } else if (key == "eval.times") {
      c.eval_times = to_double_list(key, value);
    } else if (key == "out.dir") {
      c.out_dir = value;
    } else if (key == "bounds.kind") {
      c.bound_kind = value;
    } else if (key == "bounds.alpha") {
      c.alpha = to_double(key, value);
    } else if (key == "bounds.gamma_source") {
      c.gamma_source = to_double(key, value);
    } else if (key == "bounds.E2") {
      c.E2 = to_double(key, value);
    } else if (key == "bounds.P1") {
      c.P1 = to_double(key, value);
    } else if (key == "bounds.P2") {
      c.P2 = to_double(key, value);
    } else if (key == "bounds.gamma_u") {
      c.gamma_u = to_double(key, value);
    } else if (key == "bounds.delta") {
      c.delta = to_double(key, value);
    } else {
      throw validation_error("unknown configuration key '" + key + "'");
    }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  ExperimentConfig config = config_from_map(parse_config_file(path));
  validate(config);
  return config;
}

void validate(const ExperimentConfig& config) {
  if (config.trials < 1) {
    throw validation_error("trials must be at least 1");
  }
  if (config.n < 2) {
    throw validation_error("sample count n must be at least 2");
  }
  if (config.grid_steps < 1) {
    throw validation_error("grid.steps must be at least 1");
  }
  if (config.cap < 1) {
    throw validation_error("grid.cap must be at least 1");
  }
  for (std::size_t i = 1; i < config.sweep_n.size(); ++i) {
    if (config.sweep_n[i] <= config.sweep_n[i - 1]) {
      throw validation_error("sweep.n_list must be strictly increasing");
    }
  }
  for (double t : config.eval_times) {
    if (t < -1e-12 || t > config.T + 1e-12) {
      throw validation_error("evaluation time " + std::to_string(t) +
                             " lies outside [0, T]");
    }
  }
  if (config.bound_kind != "estimate1" && config.bound_kind != "estimate2" &&
      config.bound_kind != "second" && config.bound_kind != "qr") {
    throw validation_error(
        "bounds.kind must be estimate1 | estimate2 | second | qr");
  }
  // Materialization must succeed; throws with a named key otherwise.
  (void)parse_field(config.u0_text);
  (void)parse_field(config.source_text);
  (void)parse_coefficient(config.coefficient_text);
  (void)nonlinearity_by_name(config.nonlinearity_name,
                             config.nonlinearity_scale);
}

SpectralField parse_field(const std::string& text) {
  if (text == "zero") {
    return SpectralField(0);
  }
  if (text.rfind("phi:", 0) == 0) {
    const std::size_t p = to_size("field", text.substr(4));
    return SpectralField::mode(p);
  }
  if (text.rfind("modes:", 0) == 0) {
    const std::string body = text.substr(6);
    std::size_t cap = 0;
    std::vector<std::pair<std::size_t, double>> entries;
    for (const std::string& part : split(body, ',')) {
      const auto eq = part.find('=');
      if (eq == std::string::npos) {
        throw validation_error("field entry '" + part +
                               "' must look like p=c");
      }
      const std::size_t p = to_size("field", trim(part.substr(0, eq)));
      const double value = to_double("field", trim(part.substr(eq + 1)));
      entries.emplace_back(p, value);
      cap = std::max(cap, p);
    }
    SpectralField field(cap);
    for (const auto& [p, value] : entries) {
      field.coeffs[p] = value;
    }
    return field;
  }
  throw validation_error("unparseable field '" + text +
                         "'; expected zero | phi:p | modes:p=c,...");
}

std::function<double(double)> parse_coefficient(const std::string& text) {
  if (text == "one") {
    return [](double) { return 1.0; };
  }
  if (text.rfind("constant:", 0) == 0) {
    const double v = to_double("coefficient", text.substr(9));
    return [v](double) { return v; };
  }
  if (text.rfind("affine:", 0) == 0) {
    const auto parts = split(text.substr(7), ',');
    if (parts.size() != 2) {
      throw validation_error("affine coefficient needs 'affine:p,q'");
    }
    const double p = to_double("coefficient", parts[0]);
    const double q = to_double("coefficient", parts[1]);
    return [p, q](double t) { return p + q * t; };
  }
  throw validation_error("unparseable coefficient '" + text +
                         "'; expected one | constant:v | affine:p,q");
}

ProblemInstance build_instance(const ExperimentConfig& config) {
  ProblemInstance instance;
  instance.beta = config.beta;
  instance.T = config.T;
  instance.a0 = config.a0;
  instance.coefficient = parse_coefficient(config.coefficient_text);
  instance.nonlinearity = nonlinearity_by_name(config.nonlinearity_name,
                                               config.nonlinearity_scale);
  instance.initial_state = parse_field(config.u0_text);
  const SpectralField g = parse_field(config.source_text);
  bool zero_source = true;
  for (double c : g.coeffs) {
    if (c != 0.0) {
      zero_source = false;
      break;
    }
  }
  if (!zero_source) {
    instance.source = [g](double) { return g; };
  }
  return instance;
}

}  // namespace fracback
