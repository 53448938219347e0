#include "tfn/run_config.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace tfn::io {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

int required_order(const std::string& task) { return task == "inertia" ? 2 : 1; }

}  // namespace

tasks::TrainConfig RunConfig::to_train_config() const {
  tasks::TrainConfig config;
  config.task = task;
  config.seed = seed;
  config.epochs = epochs;
  config.max_steps = max_steps;
  config.train_count = train_count;
  config.channels = channels;
  config.radial = radial;
  config.adam = adam;
  config.early_stop_loss = early_stop_loss;
  return config;
}

RunConfig parse_run_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key or value");
    }
    if (kv.count(key)) throw std::invalid_argument("config: duplicate key '" + key + "'");
    kv[key] = value;
  }

  if (!kv.count("task")) throw std::invalid_argument("config: missing required key 'task'");
  const std::string task = kv.at("task");
  if (task != "tetris" && task != "gravity" && task != "inertia" && task != "missing_point") {
    throw std::invalid_argument("config: unknown task '" + task + "'");
  }

  // defaults come from the task, then explicit keys override
  const tasks::TrainConfig defaults = tasks::default_config(task);
  RunConfig config;
  config.task = task;
  config.epochs = defaults.epochs;
  config.max_steps = defaults.max_steps;
  config.train_count = defaults.train_count;
  config.channels = defaults.channels;
  config.radial = defaults.radial;
  config.adam = defaults.adam;
  config.early_stop_loss = defaults.early_stop_loss;

  auto parse_int = [](const std::string& key, const std::string& value) {
    try {
      size_t pos = 0;
      const long long v = std::stoll(value, &pos);
      if (pos != value.size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      throw std::invalid_argument("config: key '" + key + "' expects an integer, got '" + value + "'");
    }
  };
  auto parse_double = [](const std::string& key, const std::string& value) {
    try {
      size_t pos = 0;
      const double v = std::stod(value, &pos);
      if (pos != value.size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      throw std::invalid_argument("config: key '" + key + "' expects a number, got '" + value + "'");
    }
  };

  for (const auto& [key, value] : kv) {
    if (key == "task") continue;
    if (key == "seed") config.seed = static_cast<uint64_t>(parse_int(key, value));
    else if (key == "l_max") config.l_max = static_cast<int>(parse_int(key, value));
    else if (key == "epochs") config.epochs = static_cast<int>(parse_int(key, value));
    else if (key == "max_steps") config.max_steps = static_cast<int>(parse_int(key, value));
    else if (key == "train_count") config.train_count = static_cast<int>(parse_int(key, value));
    else if (key == "channels") config.channels = static_cast<int>(parse_int(key, value));
    else if (key == "batch_size") config.batch_size = static_cast<int>(parse_int(key, value));
    else if (key == "radial.basis") config.radial.n_basis = static_cast<int>(parse_int(key, value));
    else if (key == "radial.rmin") config.radial.r_min = parse_double(key, value);
    else if (key == "radial.rmax") config.radial.r_max = parse_double(key, value);
    else if (key == "radial.hidden") config.radial.hidden = static_cast<int>(parse_int(key, value));
    else if (key == "optimizer.lr") config.adam.lr = parse_double(key, value);
    else if (key == "optimizer.beta1") config.adam.beta1 = parse_double(key, value);
    else if (key == "optimizer.beta2") config.adam.beta2 = parse_double(key, value);
    else if (key == "optimizer.eps") config.adam.eps = parse_double(key, value);
    else if (key == "early_stop_loss") config.early_stop_loss = parse_double(key, value);
    else if (key == "out_dir") config.out_dir = value;
    else if (key == "data") config.data = value;
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }

  // range checks
  if (config.l_max < required_order(task) || config.l_max > 8) {
    throw std::invalid_argument("config: l_max must be in [" + std::to_string(required_order(task)) +
                                ", 8] for task '" + task + "'");
  }
  if (config.epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
  if (config.max_steps < 0) throw std::invalid_argument("config: max_steps must be >= 0");
  if (config.train_count < 1) throw std::invalid_argument("config: train_count must be >= 1");
  if (config.channels < 1) throw std::invalid_argument("config: channels must be >= 1");
  if (config.batch_size != 1) throw std::invalid_argument("config: only batch_size=1 is supported");
  if (config.radial.n_basis < 2) throw std::invalid_argument("config: radial.basis must be >= 2");
  if (!(config.radial.r_min >= 0.0) || !(config.radial.r_max > config.radial.r_min)) {
    throw std::invalid_argument("config: radial range must satisfy 0 <= rmin < rmax");
  }
  if (config.radial.hidden < 1) throw std::invalid_argument("config: radial.hidden must be >= 1");
  if (!(config.adam.lr > 0.0)) throw std::invalid_argument("config: optimizer.lr must be > 0");
  if (!(config.adam.beta1 >= 0.0 && config.adam.beta1 < 1.0)) {
    throw std::invalid_argument("config: optimizer.beta1 must be in [0, 1)");
  }
  if (!(config.adam.beta2 >= 0.0 && config.adam.beta2 < 1.0)) {
    throw std::invalid_argument("config: optimizer.beta2 must be in [0, 1)");
  }
  if (!(config.adam.eps > 0.0)) throw std::invalid_argument("config: optimizer.eps must be > 0");
  if (config.early_stop_loss < 0.0) throw std::invalid_argument("config: early_stop_loss must be >= 0");
  if (config.out_dir.empty()) throw std::invalid_argument("config: out_dir must not be empty");
  return config;
}

RunConfig parse_run_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot read '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config_text(buffer.str());
}

std::string canonical_config_text(const RunConfig& config) {
  std::ostringstream os;
  os.precision(17);
  os << "task=" << config.task << '\n'
     << "seed=" << config.seed << '\n'
     << "l_max=" << config.l_max << '\n'
     << "epochs=" << config.epochs << '\n'
     << "max_steps=" << config.max_steps << '\n'
     << "train_count=" << config.train_count << '\n'
     << "channels=" << config.channels << '\n'
     << "batch_size=" << config.batch_size << '\n'
     << "radial.basis=" << config.radial.n_basis << '\n'
     << "radial.rmin=" << config.radial.r_min << '\n'
     << "radial.rmax=" << config.radial.r_max << '\n'
     << "radial.hidden=" << config.radial.hidden << '\n'
     << "optimizer.lr=" << config.adam.lr << '\n'
     << "optimizer.beta1=" << config.adam.beta1 << '\n'
     << "optimizer.beta2=" << config.adam.beta2 << '\n'
     << "optimizer.eps=" << config.adam.eps << '\n'
     << "early_stop_loss=" << config.early_stop_loss << '\n'
     << "out_dir=" << config.out_dir << '\n'
     << "data=" << config.data << '\n';
  return os.str();
}

std::string fnv1a_hex(const std::string& text) {
  uint64_t hash = 1469598103934665603ULL;
  for (const unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex;
  for (int shift = 60; shift >= 0; shift -= 4) os << ((hash >> shift) & 0xF);
  return os.str();
}

std::string config_hash(const RunConfig& config) { return fnv1a_hex(canonical_config_text(config)); }

}  // namespace tfn::io
