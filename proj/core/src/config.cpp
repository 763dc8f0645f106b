#include "conformax/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "conformax/errors.hpp"

namespace conformax {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    throw ConfigurationError("config: bad numeric value for '" + key + "': " + value);
  }
  if (used != value.size()) {
    throw ConfigurationError("config: trailing characters in value for '" + key + "'");
  }
  return out;
}

int parse_int(const std::string& key, const std::string& value) {
  const double d = parse_double(key, value);
  const int i = static_cast<int>(d);
  if (static_cast<double>(i) != d) {
    throw ConfigurationError("config: '" + key + "' must be an integer");
  }
  return i;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const std::uint64_t out = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    return out;
  } catch (const std::exception&) {
    throw ConfigurationError("config: bad unsigned value for '" + key + "': " + value);
  }
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) {
      throw ConfigurationError("config: empty element in list for '" + key + "'");
    }
    out.push_back(parse_double(key, item));
  }
  if (out.empty()) throw ConfigurationError("config: empty list for '" + key + "'");
  return out;
}

}  // namespace

void RunConfig::validate() const {
  if (surface != "sphere" && surface != "torus") {
    throw ConfigurationError("config: surface must be 'sphere' or 'torus'");
  }
  if (surface == "sphere" && (subdivision < 0 || subdivision > 8)) {
    throw ConfigurationError("config: subdivision outside [0, 8]");
  }
  if (surface == "torus" && (nx < 3 || ny < 3 || width <= 0.0 || height <= 0.0)) {
    throw ConfigurationError("config: torus needs nx, ny >= 3 and positive size");
  }
  if (k < 1) throw ConfigurationError("config: k must be >= 1");
  if (caps.empty()) throw ConfigurationError("config: cap schedule is empty");
  for (std::size_t i = 0; i < caps.size(); ++i) {
    if (caps[i] <= 0.0) throw ConfigurationError("config: caps must be positive");
    if (i > 0 && caps[i] <= caps[i - 1]) {
      throw ConfigurationError("config: cap schedule must be strictly increasing");
    }
  }
  if (lower_bound_mode != "zero" && lower_bound_mode != "paper") {
    throw ConfigurationError("config: lower_bound_mode must be 'zero' or 'paper'");
  }
  if (budget < 1) throw ConfigurationError("config: budget must be positive");
  if (!(solver_tol > 0.0) || solver_tol > 1e-2) {
    throw ConfigurationError("config: solver_tol outside (0, 1e-2]");
  }
  if (!(group_gap > 0.0)) throw ConfigurationError("config: group_gap must be positive");
  if (threads < 1) throw ConfigurationError("config: threads must be >= 1");
  if (!(atom_threshold > 0.0) || !(atom_radius_edges > 0.0) ||
      !(quantization_tol > 0.0) || !(membership_tol > 0.0) ||
      !(certificate_tol > 0.0)) {
    throw ConfigurationError("config: analysis tolerances must be positive");
  }
  if (class_table_mode != "bootstrap" && class_table_mode != "reference") {
    throw ConfigurationError("config: class_table_mode must be 'bootstrap' or 'reference'");
  }
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      std::ostringstream msg;
      msg << "config: line " << line_number << " is not 'key = value'";
      throw ConfigurationError(msg.str());
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      std::ostringstream msg;
      msg << "config: line " << line_number << " has empty key or value";
      throw ConfigurationError(msg.str());
    }

    if (key == "surface") {
      config.surface = value;
    } else if (key == "subdivision") {
      config.subdivision = parse_int(key, value);
    } else if (key == "nx") {
      config.nx = parse_int(key, value);
    } else if (key == "ny") {
      config.ny = parse_int(key, value);
    } else if (key == "width") {
      config.width = parse_double(key, value);
    } else if (key == "height") {
      config.height = parse_double(key, value);
    } else if (key == "k") {
      config.k = parse_int(key, value);
    } else if (key == "caps") {
      config.caps = parse_list(key, value);
    } else if (key == "lower_bound_mode") {
      config.lower_bound_mode = value;
    } else if (key == "budget") {
      config.budget = parse_int(key, value);
    } else if (key == "solver_tol") {
      config.solver_tol = parse_double(key, value);
    } else if (key == "group_gap") {
      config.group_gap = parse_double(key, value);
    } else if (key == "seed") {
      config.seed = parse_u64(key, value);
    } else if (key == "threads") {
      config.threads = parse_int(key, value);
    } else if (key == "out") {
      config.out_dir = value;
    } else if (key == "atom_threshold") {
      config.atom_threshold = parse_double(key, value);
    } else if (key == "atom_radius_edges") {
      config.atom_radius_edges = parse_double(key, value);
    } else if (key == "quantization_tol") {
      config.quantization_tol = parse_double(key, value);
    } else if (key == "membership_tol") {
      config.membership_tol = parse_double(key, value);
    } else if (key == "certificate_tol") {
      config.certificate_tol = parse_double(key, value);
    } else if (key == "class_table_mode") {
      config.class_table_mode = value;
    } else {
      throw ConfigurationError("config: unknown key '" + key + "'");
    }
  }
  config.validate();
  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("config: cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str());
}

std::string format_run_config(const RunConfig& config) {
  std::ostringstream out;
  out.precision(17);
  out << "surface = " << config.surface << '\n';
  if (config.surface == "sphere") {
    out << "subdivision = " << config.subdivision << '\n';
  } else {
    out << "nx = " << config.nx << '\n'
        << "ny = " << config.ny << '\n'
        << "width = " << config.width << '\n'
        << "height = " << config.height << '\n';
  }
  out << "k = " << config.k << '\n';
  out << "caps = ";
  for (std::size_t i = 0; i < config.caps.size(); ++i) {
    out << (i ? "," : "") << config.caps[i];
  }
  out << '\n';
  out << "lower_bound_mode = " << config.lower_bound_mode << '\n'
      << "budget = " << config.budget << '\n'
      << "solver_tol = " << config.solver_tol << '\n'
      << "group_gap = " << config.group_gap << '\n'
      << "seed = " << config.seed << '\n'
      << "threads = " << config.threads << '\n'
      << "out = " << config.out_dir << '\n'
      << "atom_threshold = " << config.atom_threshold << '\n'
      << "atom_radius_edges = " << config.atom_radius_edges << '\n'
      << "quantization_tol = " << config.quantization_tol << '\n'
      << "membership_tol = " << config.membership_tol << '\n'
      << "certificate_tol = " << config.certificate_tol << '\n'
      << "class_table_mode = " << config.class_table_mode << '\n';
  return out.str();
}

}  // namespace conformax
