#include "qrc/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace qrc {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

long long parse_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(value, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': expected an integer, got '" + value + "'");
  }
  if (used != value.size())
    throw std::invalid_argument("config key '" + key + "': expected an integer, got '" + value + "'");
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': expected a number, got '" + value + "'");
  }
  if (used != value.size())
    throw std::invalid_argument("config key '" + key + "': expected a number, got '" + value + "'");
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ',')) {
    item = trim(item);
    if (item.empty())
      throw std::invalid_argument("config key '" + key + "': empty list element");
    out.push_back(static_cast<int>(parse_int(key, item)));
  }
  if (out.empty())
    throw std::invalid_argument("config key '" + key + "': empty list");
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"task", [](ExperimentConfig& c, const std::string& v) { c.task = v; }},
      {"n", [](ExperimentConfig& c, const std::string& v) { c.n = static_cast<int>(parse_int("n", v)); }},
      {"m", [](ExperimentConfig& c, const std::string& v) { c.m = static_cast<int>(parse_int("m", v)); }},
      {"tau", [](ExperimentConfig& c, const std::string& v) { c.tau = static_cast<int>(parse_int("tau", v)); }},
      {"advance",
       [](ExperimentConfig& c, const std::string& v) { c.advance = static_cast<int>(parse_int("advance", v)); }},
      {"spatial",
       [](ExperimentConfig& c, const std::string& v) { c.spatial = static_cast<int>(parse_int("spatial", v)); }},
      {"temporal",
       [](ExperimentConfig& c, const std::string& v) { c.temporal = static_cast<int>(parse_int("temporal", v)); }},
      {"channel_nodes",
       [](ExperimentConfig& c, const std::string& v) {
         c.channel_nodes = static_cast<int>(parse_int("channel_nodes", v));
       }},
      {"triplets",
       [](ExperimentConfig& c, const std::string& v) { c.triplets = static_cast<int>(parse_int("triplets", v)); }},
      {"taus", [](ExperimentConfig& c, const std::string& v) { c.taus = parse_int_list("taus", v); }},
      {"dt", [](ExperimentConfig& c, const std::string& v) { c.dt = parse_real("dt", v); }},
      {"realizations",
       [](ExperimentConfig& c, const std::string& v) {
         c.realizations = static_cast<int>(parse_int("realizations", v));
       }},
      {"seed",
       [](ExperimentConfig& c, const std::string& v) {
         c.seed = static_cast<std::uint64_t>(parse_int("seed", v));
       }},
      {"out", [](ExperimentConfig& c, const std::string& v) { c.out_dir = v; }},
      {"dataset", [](ExperimentConfig& c, const std::string& v) { c.dataset = v; }},
      {"omega0", [](ExperimentConfig& c, const std::string& v) { c.omega0 = parse_real("omega0", v); }},
      {"g_max", [](ExperimentConfig& c, const std::string& v) { c.g_max = parse_real("g_max", v); }},
      {"rho_limit", [](ExperimentConfig& c, const std::string& v) { c.rho_limit = parse_real("rho_limit", v); }},
      {"channel_rho_limit",
       [](ExperimentConfig& c, const std::string& v) { c.channel_rho_limit = parse_real("channel_rho_limit", v); }},
      {"ridge_lambda",
       [](ExperimentConfig& c, const std::string& v) { c.ridge_lambda = parse_real("ridge_lambda", v); }},
      {"preparation",
       [](ExperimentConfig& c, const std::string& v) {
         c.preparation = static_cast<int>(parse_int("preparation", v));
       }},
      {"training",
       [](ExperimentConfig& c, const std::string& v) { c.training = static_cast<int>(parse_int("training", v)); }},
      {"test", [](ExperimentConfig& c, const std::string& v) { c.test = static_cast<int>(parse_int("test", v)); }},
      {"de_population",
       [](ExperimentConfig& c, const std::string& v) {
         c.de_population = static_cast<int>(parse_int("de_population", v));
       }},
      {"de_max_generations",
       [](ExperimentConfig& c, const std::string& v) {
         c.de_max_generations = static_cast<int>(parse_int("de_max_generations", v));
       }},
      {"de_f_tol", [](ExperimentConfig& c, const std::string& v) { c.de_f_tol = parse_real("de_f_tol", v); }},
      {"de_x_tol", [](ExperimentConfig& c, const std::string& v) { c.de_x_tol = parse_real("de_x_tol", v); }},
      {"de_stall",
       [](ExperimentConfig& c, const std::string& v) { c.de_stall = static_cast<int>(parse_int("de_stall", v)); }},
  };
  return table;
}

void apply_key(ExperimentConfig& config, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw std::invalid_argument("unknown config key '" + key + "'");
  it->second(config, value);
}

std::string json_scalar_to_string(const nlohmann::json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_boolean()) return value.get<bool>() ? "1" : "0";
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  if (value.is_number_unsigned()) return std::to_string(value.get<unsigned long long>());
  if (value.is_number_float()) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value.get<double>());
    return buf;
  }
  throw std::invalid_argument("config JSON: unsupported value type " + std::string(value.type_name()));
}

ExperimentConfig parse_config_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& err) {
    throw std::invalid_argument(std::string("config JSON parse error: ") + err.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("config JSON must be an object");
  ExperimentConfig config;
  for (const auto& [key, value] : doc.items()) {
    if (value.is_array()) {
      std::string joined;
      for (const auto& item : value) {
        if (!joined.empty()) joined += ",";
        joined += json_scalar_to_string(item);
      }
      apply_key(config, key, joined);
    } else {
      apply_key(config, key, json_scalar_to_string(value));
    }
  }
  return config;
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig config;
  std::stringstream stream(text);
  std::string line;
  int line_number = 0;
  while (std::getline(stream, line)) {
    ++line_number;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_number) + ": expected 'key = value', got '" +
                                  line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(line_number) + ": missing key before '='");
    if (value.empty())
      throw std::invalid_argument("config line " + std::to_string(line_number) + ": missing value for '" + key + "'");
    try {
      apply_key(config, key, value);
    } catch (const std::invalid_argument& err) {
      throw std::invalid_argument("config line " + std::to_string(line_number) + ": " + err.what());
    }
  }
  return config;
}

void require_positive(const std::string& key, int value) {
  if (value <= 0) throw std::invalid_argument("config key '" + key + "' must be positive, got " + std::to_string(value));
}

void require_non_negative(const std::string& key, int value) {
  if (value < 0)
    throw std::invalid_argument("config key '" + key + "' must be non-negative, got " + std::to_string(value));
}

std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  std::size_t first = 0;
  while (first < text.size() && std::isspace(static_cast<unsigned char>(text[first]))) ++first;
  ExperimentConfig config =
      (first < text.size() && text[first] == '{') ? parse_config_json(text) : parse_config_text(text);
  finalize_config(config);
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

void finalize_config(ExperimentConfig& config) {
  static const std::vector<std::string> known_tasks = {"stqm", "qce", "entangler", "state_preparation", "entropy"};
  if (config.task.empty()) throw std::invalid_argument("config is missing the required key 'task'");
  if (std::find(known_tasks.begin(), known_tasks.end(), config.task) == known_tasks.end()) {
    std::string names;
    for (const auto& name : known_tasks) {
      if (!names.empty()) names += ", ";
      names += name;
    }
    throw std::invalid_argument("unknown task '" + config.task + "' (expected one of: " + names + ")");
  }

  const bool entropy = config.task == "entropy";
  if (config.preparation < 0) config.preparation = entropy ? 500 : 40;
  if (config.training < 0) config.training = entropy ? 2000 : 80;
  if (config.test < 0) config.test = entropy ? 500 : 40;
  if (entropy && config.taus.empty()) config.taus = {0, 1, 2, 3, 4, 5};
  if (entropy && config.n < 0) config.n = 2 * config.triplets;
  if (config.n < 0) throw std::invalid_argument("config is missing the required key 'n'");

  require_positive("n", config.n);
  require_positive("m", config.m);
  require_non_negative("tau", config.tau);
  require_non_negative("advance", config.advance);
  require_positive("spatial", config.spatial);
  require_positive("temporal", config.temporal);
  require_positive("channel_nodes", config.channel_nodes);
  require_positive("triplets", config.triplets);
  require_positive("realizations", config.realizations);
  require_positive("preparation", config.preparation);
  require_positive("training", config.training);
  require_positive("test", config.test);
  require_non_negative("de_population", config.de_population);
  require_positive("de_max_generations", config.de_max_generations);
  require_positive("de_stall", config.de_stall);
  for (const int tau : config.taus) require_non_negative("taus", tau);
  if (config.omega0 <= 0) throw std::invalid_argument("config key 'omega0' must be positive");
  if (config.g_max <= 0) throw std::invalid_argument("config key 'g_max' must be positive");
  if (config.rho_limit <= 0) throw std::invalid_argument("config key 'rho_limit' must be positive");
  if (config.channel_rho_limit <= 0) throw std::invalid_argument("config key 'channel_rho_limit' must be positive");
  if (config.ridge_lambda < 0) throw std::invalid_argument("config key 'ridge_lambda' must be non-negative");
  if (config.de_f_tol <= 0) throw std::invalid_argument("config key 'de_f_tol' must be positive");
  if (config.de_x_tol <= 0) throw std::invalid_argument("config key 'de_x_tol' must be positive");
}

std::string canonical_config(const ExperimentConfig& config) {
  std::map<std::string, std::string> fields;
  fields["task"] = config.task;
  fields["n"] = std::to_string(config.n);
  fields["m"] = std::to_string(config.m);
  fields["tau"] = std::to_string(config.tau);
  fields["advance"] = std::to_string(config.advance);
  fields["spatial"] = std::to_string(config.spatial);
  fields["temporal"] = std::to_string(config.temporal);
  fields["channel_nodes"] = std::to_string(config.channel_nodes);
  fields["triplets"] = std::to_string(config.triplets);
  std::string taus;
  for (const int tau : config.taus) {
    if (!taus.empty()) taus += ",";
    taus += std::to_string(tau);
  }
  fields["taus"] = taus;
  fields["dt"] = format_real(config.dt);
  fields["seed"] = std::to_string(config.seed);
  fields["dataset"] = config.dataset;
  fields["omega0"] = format_real(config.omega0);
  fields["g_max"] = format_real(config.g_max);
  fields["rho_limit"] = format_real(config.rho_limit);
  fields["channel_rho_limit"] = format_real(config.channel_rho_limit);
  fields["ridge_lambda"] = format_real(config.ridge_lambda);
  fields["preparation"] = std::to_string(config.preparation);
  fields["training"] = std::to_string(config.training);
  fields["test"] = std::to_string(config.test);
  fields["de_population"] = std::to_string(config.de_population);
  fields["de_max_generations"] = std::to_string(config.de_max_generations);
  fields["de_f_tol"] = format_real(config.de_f_tol);
  fields["de_x_tol"] = format_real(config.de_x_tol);
  fields["de_stall"] = std::to_string(config.de_stall);

  std::string out;
  for (const auto& [key, value] : fields) {
    out += key;
    out += "=";
    out += value;
    out += "\n";
  }
  return out;
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  const std::string canonical = canonical_config(config);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const char ch : canonical) {
    hash ^= static_cast<unsigned char>(ch);
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

TaskSettings to_task_settings(const ExperimentConfig& config) {
  TaskSettings settings;
  settings.omega0 = config.omega0;
  settings.g_max = config.g_max;
  settings.rho_limit = config.rho_limit;
  settings.channel_rho_limit = config.channel_rho_limit;
  settings.ridge_lambda = config.ridge_lambda;
  settings.phases.preparation = config.preparation;
  settings.phases.training = config.training;
  settings.phases.test = config.test;
  if (config.dt > 0) {
    settings.dt_candidates = {config.dt};
    settings.qce_dt = config.dt;
  }
  settings.de.population_size = config.de_population;
  settings.de.max_generations = config.de_max_generations;
  settings.de.f_tolerance = config.de_f_tol;
  settings.de.x_tolerance = config.de_x_tol;
  settings.de.stall_generations = config.de_stall;
  settings.de.init_hi = config.g_max;
  return settings;
}

}  // namespace qrc
