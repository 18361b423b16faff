#include "qrc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include <nlohmann/json.hpp>

#include "qrc/rng.hpp"
#include "qrc/tasks.hpp"
#include "qrc/version.hpp"

namespace qrc {

namespace {

namespace fs = std::filesystem;

std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string hex16(std::uint64_t value) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (const char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(current);
      current.clear();
    } else if (ch != '\r') {
      current += ch;
    }
  }
  fields.push_back(current);
  return fields;
}

ResultRow parse_row(const std::vector<std::string>& fields) {
  if (fields.size() != 14) throw std::runtime_error("results CSV row has " + std::to_string(fields.size()) + " fields, expected 14");
  ResultRow row;
  row.config_hash = std::stoull(fields[0], nullptr, 16);
  row.task = fields[1];
  row.realization = std::stoi(fields[2]);
  row.seed = std::stoull(fields[3]);
  row.n = std::stoi(fields[4]);
  row.m = std::stoi(fields[5]);
  row.tau = std::stoi(fields[6]);
  row.advance = std::stoi(fields[7]);
  row.spatial = std::stoi(fields[8]);
  row.temporal = std::stoi(fields[9]);
  row.dt = std::stod(fields[10]);
  row.figure_of_merit = std::stod(fields[11]);
  row.cost = std::stod(fields[12]);
  row.generations = std::stoi(fields[13]);
  return row;
}

ResultRow to_row(const TaskResult& result, std::uint64_t hash, int realization, std::uint64_t seed) {
  ResultRow row;
  row.config_hash = hash;
  row.task = result.task;
  row.realization = realization;
  row.seed = seed;
  row.n = result.n;
  row.m = result.m;
  row.tau = result.tau;
  row.advance = result.advance;
  row.spatial = result.spatial;
  row.temporal = result.temporal;
  row.dt = result.dt;
  row.figure_of_merit = result.figure_of_merit;
  row.cost = result.cost_at_convergence;
  row.generations = result.generations;
  return row;
}

std::vector<double> resolve_series(const ExperimentConfig& config) {
  const int length = config.preparation + config.training + config.test + config.advance;
  if (!config.dataset.empty()) {
    std::vector<double> series = ingest_santa_fe(config.dataset);
    if (static_cast<int>(series.size()) < length)
      throw std::runtime_error("dataset '" + config.dataset + "' has " + std::to_string(series.size()) +
                               " samples, need " + std::to_string(length));
    return series;
  }
  if (const char* dir = std::getenv("QRC_DATA_DIR")) {
    const fs::path candidate = fs::path(dir) / "santa_fe.txt";
    std::error_code ec;
    if (fs::exists(candidate, ec)) {
      std::vector<double> series = ingest_santa_fe(candidate.string());
      if (static_cast<int>(series.size()) >= length) return series;
    }
  }
  return normalize_series(synthetic_laser_series(length, config.seed));
}

std::vector<ResultRow> compute_realization(const ExperimentConfig& config, std::uint64_t hash, int realization,
                                           const std::vector<double>& series) {
  Rng rng = derive_rng(config.seed, static_cast<std::uint64_t>(realization));
  const std::uint64_t seed = mix_seed(config.seed, static_cast<std::uint64_t>(realization));
  const TaskSettings settings = to_task_settings(config);

  if (config.task == "entropy") {
    const std::vector<EntropyResult> results = run_entropy_detection(config.taus, settings, rng, config.triplets);
    std::vector<ResultRow> rows;
    rows.reserve(results.size());
    for (const EntropyResult& result : results) {
      ResultRow row;
      row.config_hash = hash;
      row.task = config.task;
      row.realization = realization;
      row.seed = seed;
      row.n = config.n;
      row.m = 1;
      row.tau = result.tau;
      row.dt = result.dt;
      row.figure_of_merit = result.nmse_entropy;
      row.cost = result.nmse_determinant;
      rows.push_back(row);
    }
    return rows;
  }

  const NetworkSpec reservoir = random_reservoir(config.n, settings.g_max, settings.omega0, rng);
  TaskResult result;
  if (config.task == "stqm") {
    result = train_stqm(reservoir, config.m, config.tau, settings, rng);
  } else if (config.task == "qce") {
    result = run_qce(reservoir, config.channel_nodes, config.spatial, config.temporal, settings, rng);
  } else if (config.task == "entangler") {
    result = run_entangler(reservoir, config.tau, settings, rng);
  } else if (config.task == "state_preparation") {
    result = run_state_preparation(reservoir, config.advance, series, settings, rng);
  } else {
    throw std::logic_error("unhandled task '" + config.task + "'");
  }
  return {to_row(result, hash, realization, seed)};
}

nlohmann::json row_to_json(const ResultRow& row) {
  return nlohmann::json{{"task", row.task},
                        {"realization", row.realization},
                        {"seed", row.seed},
                        {"n", row.n},
                        {"m", row.m},
                        {"tau", row.tau},
                        {"advance", row.advance},
                        {"spatial", row.spatial},
                        {"temporal", row.temporal},
                        {"dt", row.dt},
                        {"figure_of_merit", row.figure_of_merit},
                        {"cost", row.cost},
                        {"generations", row.generations}};
}

}  // namespace

BoxStats box_stats(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("box_stats: empty sample");
  std::sort(values.begin(), values.end());
  const auto quantile = [&values](double p) {
    const double h = p * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + frac * (values[lo + 1] - values[lo]);
  };
  BoxStats stats;
  stats.min = values.front();
  stats.q1 = quantile(0.25);
  stats.median = quantile(0.5);
  stats.q3 = quantile(0.75);
  stats.max = values.back();
  return stats;
}

std::vector<double> normalize_series(std::vector<double> raw) {
  if (raw.size() < 2) throw std::invalid_argument("series must contain at least two samples");
  const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) throw std::invalid_argument("constant series cannot be normalized");
  const double span = hi - lo;
  for (double& value : raw) value = (value - lo) / span;
  return raw;
}

std::vector<double> ingest_santa_fe(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file '" + path + "'");
  std::vector<double> raw;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::size_t b = 0;
    std::size_t e = line.size();
    while (b < e && std::isspace(static_cast<unsigned char>(line[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(line[e - 1]))) --e;
    const std::string token = line.substr(b, e - b);
    if (token.empty())
      throw std::runtime_error(path + ":" + std::to_string(line_number) + ": empty line in dataset");
    std::size_t used = 0;
    long long value = 0;
    try {
      value = std::stoll(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size())
      throw std::runtime_error(path + ":" + std::to_string(line_number) + ": expected an integer sample, got '" +
                               token + "'");
    raw.push_back(static_cast<double>(value));
  }
  return normalize_series(std::move(raw));
}

std::vector<double> synthetic_laser_series(int length, std::uint64_t seed) {
  if (length < 2) throw std::invalid_argument("synthetic series needs at least two samples");
  Rng rng(mix_seed(seed, 0x5AFEDA7AULL));
  std::vector<double> series;
  series.reserve(static_cast<std::size_t>(length));
  double envelope = 40.0 + rng.uniform(0.0, 20.0);
  double threshold = rng.uniform(170.0, 250.0);
  double phase = rng.uniform(0.0, 2.0 * M_PI);
  const double omega = 2.0 * M_PI / 7.0;
  for (int k = 0; k < length; ++k) {
    phase += omega;
    const double pulse = 0.5 * (1.0 - std::cos(phase));
    double value = envelope * pulse + rng.uniform(-1.5, 1.5);
    value = std::clamp(std::round(value), 0.0, 255.0);
    series.push_back(value);
    envelope *= 1.0 + rng.uniform(0.035, 0.055);
    if (envelope > threshold) {
      envelope = rng.uniform(8.0, 30.0);
      threshold = rng.uniform(170.0, 250.0);
      phase = rng.uniform(0.0, 2.0 * M_PI);
    }
  }
  return series;
}

std::string results_csv_header() {
  return "config_hash,task,realization,seed,n,m,tau,advance,spatial,temporal,dt,figure_of_merit,cost,generations";
}

std::string to_csv_line(const ResultRow& row) {
  std::string out = hex16(row.config_hash);
  out += "," + csv_quote(row.task);
  out += "," + std::to_string(row.realization);
  out += "," + std::to_string(row.seed);
  out += "," + std::to_string(row.n);
  out += "," + std::to_string(row.m);
  out += "," + std::to_string(row.tau);
  out += "," + std::to_string(row.advance);
  out += "," + std::to_string(row.spatial);
  out += "," + std::to_string(row.temporal);
  out += std::string(",") + format_real(row.dt);
  out += std::string(",") + format_real(row.figure_of_merit);
  out += std::string(",") + format_real(row.cost);
  out += "," + std::to_string(row.generations);
  return out;
}

std::vector<ResultRow> read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) return {};
  std::vector<ResultRow> rows;
  std::string line;
  std::vector<std::string> pending_lines;
  while (std::getline(in, line)) pending_lines.push_back(line);
  for (std::size_t i = 0; i < pending_lines.size(); ++i) {
    const std::string& current = pending_lines[i];
    if (current.empty() || current.rfind("config_hash", 0) == 0) continue;
    try {
      rows.push_back(parse_row(split_csv_line(current)));
    } catch (const std::exception&) {
      // A torn final line from an interrupted flush is recoverable; anything
      // earlier means the file is corrupt.
      if (i + 1 != pending_lines.size())
        throw std::runtime_error(path + ":" + std::to_string(i + 1) + ": malformed results row");
    }
  }
  return rows;
}

void write_summary_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  using Key = std::tuple<std::string, int, int, int, int, int, int>;
  std::map<Key, std::vector<double>> groups;
  for (const ResultRow& row : rows)
    groups[{row.task, row.n, row.m, row.tau, row.advance, row.spatial, row.temporal}].push_back(row.figure_of_merit);

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open summary file '" + path + "'");
  out << "task,n,m,tau,advance,spatial,temporal,count,min,q1,median,q3,max\n";
  for (const auto& [key, figures] : groups) {
    const BoxStats stats = box_stats(figures);
    out << csv_quote(std::get<0>(key)) << "," << std::get<1>(key) << "," << std::get<2>(key) << ","
        << std::get<3>(key) << "," << std::get<4>(key) << "," << std::get<5>(key) << "," << std::get<6>(key) << ","
        << figures.size() << "," << format_real(stats.min) << "," << format_real(stats.q1) << ","
        << format_real(stats.median) << "," << format_real(stats.q3) << "," << format_real(stats.max) << "\n";
  }
}

std::string results_path(const ExperimentConfig& config) {
  return (fs::path(config.out_dir) / ("results_" + hex16(config_hash(config)) + ".csv")).string();
}

std::string summary_path(const ExperimentConfig& config) {
  return (fs::path(config.out_dir) / ("summary_" + hex16(config_hash(config)) + ".csv")).string();
}

std::string record_path(const ExperimentConfig& config) {
  return (fs::path(config.out_dir) / ("record_" + hex16(config_hash(config)) + ".json")).string();
}

RunRecord run_experiment(const ExperimentConfig& config, int threads) {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t hash = config_hash(config);
  fs::create_directories(config.out_dir);

  RunRecord record;
  record.config_hash = hash;
  record.version = kVersion;
  record.results_path = results_path(config);
  record.summary_path = summary_path(config);
  record.record_path = record_path(config);

  const std::size_t expected_rows =
      config.task == "entropy" ? std::max<std::size_t>(config.taus.size(), 1) : 1;

  const std::vector<ResultRow> parsed = read_results_csv(record.results_path);
  std::map<int, std::size_t> row_counts;
  for (const ResultRow& row : parsed)
    if (row.config_hash == hash) ++row_counts[row.realization];

  const auto complete = [&](const ResultRow& row) {
    return row.config_hash == hash && row_counts[row.realization] == expected_rows;
  };

  std::vector<int> pending;
  for (int r = 0; r < config.realizations; ++r) {
    const auto it = row_counts.find(r);
    if (it != row_counts.end() && it->second == expected_rows)
      ++record.skipped;
    else
      pending.push_back(r);
  }

  std::vector<double> series;
  if (config.task == "state_preparation" && !pending.empty()) series = resolve_series(config);

  // Rewriting the retained rows repairs a torn final line from an
  // interrupted flush and drops partial realizations, which are recomputed.
  std::ofstream out(record.results_path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open results file '" + record.results_path + "'");
  out << results_csv_header() << "\n";
  for (const ResultRow& row : parsed) {
    if (!complete(row)) continue;
    out << to_csv_line(row) << "\n";
    record.rows.push_back(row);
  }
  out.flush();

  const auto flush_rows = [&out, &record](const std::vector<ResultRow>& rows) {
    for (const ResultRow& row : rows) {
      out << to_csv_line(row) << "\n";
      record.rows.push_back(row);
    }
    out.flush();
    ++record.executed;
  };

  threads = std::max(1, threads);
  if (threads == 1 || pending.size() <= 1) {
    for (const int realization : pending) flush_rows(compute_realization(config, hash, realization, series));
  } else {
    std::mutex mu;
    std::condition_variable cv;
    std::map<int, std::vector<ResultRow>> ready;
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;

    const auto worker = [&]() {
      while (true) {
        const std::size_t index = next.fetch_add(1);
        if (index >= pending.size()) return;
        try {
          std::vector<ResultRow> rows = compute_realization(config, hash, pending[index], series);
          std::lock_guard<std::mutex> lock(mu);
          ready[pending[index]] = std::move(rows);
          cv.notify_all();
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!failure) failure = std::current_exception();
          ready[pending[index]] = {};
          cv.notify_all();
        }
      }
    };

    std::vector<std::thread> pool;
    const int workers = std::min<int>(threads, static_cast<int>(pending.size()));
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);

    for (const int realization : pending) {
      std::vector<ResultRow> rows;
      {
        std::unique_lock<std::mutex> lock(mu);
        cv.wait(lock, [&]() { return ready.count(realization) > 0; });
        rows = std::move(ready[realization]);
        ready.erase(realization);
        if (failure && rows.empty()) break;
      }
      flush_rows(rows);
    }
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::sort(record.rows.begin(), record.rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.realization, a.tau) < std::tie(b.realization, b.tau);
  });
  write_summary_csv(record.rows, record.summary_path);

  const auto stop = std::chrono::steady_clock::now();
  record.wall_seconds = std::chrono::duration<double>(stop - start).count();

  nlohmann::json doc;
  doc["config_hash"] = hex16(hash);
  doc["canonical_config"] = canonical_config(config);
  doc["version"] = record.version;
  doc["wall_seconds"] = record.wall_seconds;
  doc["executed"] = record.executed;
  doc["skipped"] = record.skipped;
  doc["rows"] = nlohmann::json::array();
  for (const ResultRow& row : record.rows) doc["rows"].push_back(row_to_json(row));
  std::ofstream json_out(record.record_path, std::ios::trunc);
  if (!json_out) throw std::runtime_error("cannot open record file '" + record.record_path + "'");
  json_out << doc.dump(2) << "\n";

  return record;
}

double baseline_figure(const std::string& task, std::uint64_t seed, int samples) {
  Rng rng(seed);
  TaskSettings settings;
  if (task == "stqm" || task == "qce") return task_random_guess_baseline(settings, samples, rng);
  if (task == "state_preparation") {
    const double omega0 = settings.omega0;
    const StateSampler thermal = [omega0](Rng& r) {
      return make_single_mode_state(r.uniform(0.0, 1.0), 0.0, 0.0, omega0);
    };
    const StateSampler squeezed = [omega0](Rng& r) {
      return make_single_mode_state(0.0, r.uniform(0.0, 1.0), 0.0, omega0);
    };
    return random_guess_baseline(thermal, squeezed, samples, rng);
  }
  throw std::invalid_argument("no random-guess baseline defined for task '" + task + "'");
}

}  // namespace qrc
