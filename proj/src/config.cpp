#include "snn/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "snn/checksum.hpp"

namespace snn {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  if (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const char* want, const std::string& got) {
  throw ConfigError(key + ": expected " + want + ", got '" + got + "'");
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) bad_value(key, "number", v);
    return x;
  } catch (const std::logic_error&) {
    bad_value(key, "number", v);
  }
}

long long parse_int(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, "integer", v);
  return x;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) {
    bad_value(key, "non-negative integer", v);
  }
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  bad_value(key, "true or false", v);
}

NeuronKind parse_neuron_kind(const std::string& key, const std::string& v) {
  if (v == "lif") return NeuronKind::Lif;
  if (v == "notd") return NeuronKind::NoTd;
  if (v == "spsn") return NeuronKind::Spsn;
  bad_value(key, "lif, notd or spsn", v);
}

Algorithm parse_algorithm(const std::string& key, const std::string& v) {
  if (v == "stbp") return Algorithm::Stbp;
  if (v == "sdbp") return Algorithm::Sdbp;
  if (v == "notd") return Algorithm::Notd;
  bad_value(key, "stbp, sdbp or notd", v);
}

// One config field: routes "section.key" to the struct member.
void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  auto as_int = [&](int lo) {
    const long long x = parse_int(key, value);
    if (x < lo) {
      throw ConfigError(key + ": must be >= " + std::to_string(lo) + ", got " + value);
    }
    return static_cast<int>(x);
  };
  auto as_opt_fr = [&]() -> std::optional<double> { return parse_double(key, value); };

  if (key == "seed") {
    cfg.seed = parse_u64(key, value);
  } else if (key == "out") {
    cfg.out = value;
  } else if (key == "threads") {
    cfg.threads = as_int(0);
  } else if (key == "deterministic") {
    cfg.deterministic = parse_bool(key, value);
  } else if (key == "exec") {
    if (value == "omp") {
      cfg.exec = Exec::Parallel;
    } else if (value == "serial") {
      cfg.exec = Exec::Serial;
    } else {
      bad_value(key, "omp or serial", value);
    }
  } else if (key == "task.kind") {
    if (value != "al") bad_value(key, "al", value);
    cfg.task_kind = value;
  } else if (key == "task.length") {
    cfg.task.length = as_int(1);
  } else if (key == "task.probs") {
    const auto items = split_list(value);
    if (items.size() != 4) {
      throw ConfigError(key + ": expected 4 probabilities, got " +
                        std::to_string(items.size()));
    }
    for (int i = 0; i < 4; ++i) cfg.task.probs[i] = parse_double(key, items[i]);
  } else if (key == "task.train_samples") {
    cfg.task.train_count = as_int(1);
  } else if (key == "task.test_samples") {
    cfg.task.test_count = as_int(1);
  } else if (key == "task.seed") {
    cfg.task.seed = parse_u64(key, value);
    cfg.task_seed_set = true;
  } else if (key == "task.data") {
    cfg.task_data = value;
  } else if (key == "net.arch") {
    if (value == "sfnn") {
      cfg.net.arch = Arch::Sfnn;
    } else if (value == "srnn") {
      cfg.net.arch = Arch::Srnn;
    } else {
      bad_value(key, "sfnn or srnn", value);
    }
  } else if (key == "net.hidden") {
    cfg.net.hidden.clear();
    for (const auto& item : split_list(value)) {
      cfg.net.hidden.push_back(static_cast<int>(parse_int(key, item)));
    }
    if (cfg.net.hidden.empty()) bad_value(key, "integer list", value);
  } else if (key == "net.neuron") {
    cfg.net_neuron.clear();
    for (const auto& item : split_list(value)) {
      cfg.net_neuron.push_back(parse_neuron_kind(key, item));
    }
    if (cfg.net_neuron.empty()) bad_value(key, "neuron kind list", value);
  } else if (key == "net.readout") {
    if (value == "mean") {
      cfg.net.readout = ReadoutMode::MeanOverTime;
    } else if (value == "last") {
      cfg.net.readout = ReadoutMode::LastStep;
    } else if (value == "per-step") {
      cfg.net.readout = ReadoutMode::PerStep;
    } else {
      bad_value(key, "mean, last or per-step", value);
    }
  } else if (key == "net.decay") {
    cfg.net.lif.decay = parse_double(key, value);
  } else if (key == "net.threshold") {
    cfg.net.lif.v_th = parse_double(key, value);
  } else if (key == "net.surrogate_width") {
    cfg.net.lif.gamma = parse_double(key, value);
  } else if (key == "net.spsn_kernel") {
    cfg.net.spsn_kernel = as_int(1);
  } else if (key == "net.input") {
    cfg.net.input_width = as_int(0);
  } else if (key == "net.classes") {
    cfg.net.classes = as_int(0);
  } else if (key == "train.algorithm") {
    cfg.plan.algorithm = parse_algorithm(key, value);
  } else if (key == "train.lr") {
    cfg.plan.opt.lr = parse_double(key, value);
  } else if (key == "train.batch") {
    cfg.plan.batch_size = as_int(1);
  } else if (key == "train.epochs") {
    cfg.plan.epochs = as_int(1);
  } else if (key == "train.clip") {
    cfg.plan.opt.clip = parse_double(key, value);
  } else if (key == "train.weight_decay") {
    cfg.plan.opt.weight_decay = parse_double(key, value);
  } else if (key == "probe.epsilon") {
    cfg.probe_epsilon = parse_double(key, value);
  } else if (key == "probe.delta") {
    cfg.probe_delta = parse_double(key, value);
  } else if (key == "probe.direction") {
    if (value == "higher") {
      cfg.probe_direction = MetricDirection::HigherBetter;
    } else if (value == "lower") {
      cfg.probe_direction = MetricDirection::LowerBetter;
    } else {
      bad_value(key, "higher or lower", value);
    }
  } else if (key == "efficiency.row") {
    cfg.energy.row = parse_energy_row(value);
  } else if (key == "efficiency.m") {
    cfg.energy.m = parse_double(key, value);
  } else if (key == "efficiency.n") {
    cfg.energy.n = parse_double(key, value);
  } else if (key == "efficiency.k") {
    cfg.energy.k = parse_double(key, value);
  } else if (key == "efficiency.h") {
    cfg.energy.h = parse_double(key, value);
  } else if (key == "efficiency.t") {
    cfg.energy.t = parse_double(key, value);
  } else if (key == "efficiency.fr_in") {
    cfg.energy.fr_in = as_opt_fr();
  } else if (key == "efficiency.fr_out") {
    cfg.energy.fr_out = as_opt_fr();
  } else if (key == "efficiency.fr_conv2") {
    cfg.energy.fr_conv2 = as_opt_fr();
  } else if (key == "efficiency.fr_q") {
    cfg.energy.fr_q = as_opt_fr();
  } else if (key == "efficiency.fr_k") {
    cfg.energy.fr_k = as_opt_fr();
  } else if (key == "efficiency.fr_v") {
    cfg.energy.fr_v = as_opt_fr();
  } else if (key == "efficiency.fr_attn") {
    cfg.energy.fr_attn = as_opt_fr();
  } else if (key == "efficiency.fr_fc1") {
    cfg.energy.fr_fc1 = as_opt_fr();
  } else if (key == "efficiency.fr_fc2") {
    cfg.energy.fr_fc2 = as_opt_fr();
  } else if (key == "efficiency.fr_y") {
    cfg.energy.fr_y = as_opt_fr();
  } else if (key == "efficiency.fr_w") {
    cfg.energy.fr_w = as_opt_fr();
  } else if (key == "efficiency.e_ac") {
    cfg.energy.constants.e_ac = parse_double(key, value);
  } else if (key == "efficiency.e_mac") {
    cfg.energy.constants.e_mac = parse_double(key, value);
  } else if (key == "efficiency.lengths") {
    cfg.bench_lengths.clear();
    for (const auto& item : split_list(value)) {
      cfg.bench_lengths.push_back(static_cast<int>(parse_int(key, item)));
    }
    if (cfg.bench_lengths.empty()) bad_value(key, "integer list", value);
  } else if (key == "efficiency.bench_warmup") {
    cfg.bench_warmup = as_int(0);
  } else if (key == "efficiency.bench_measured") {
    cfg.bench_measured = as_int(1);
  } else if (key == "efficiency.bench_batch") {
    cfg.bench_batch = as_int(1);
  } else if (key == "efficiency.model") {
    cfg.energy_model = value;
  } else {
    throw ConfigError("unknown key: " + key);
  }
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
  net.hidden = {128, 256, 256};
  net.spsn_kernel = 128;
  net.lif = LifParams{1.0, 0.5, 0.4};
  plan.opt = AdamWConfig{5e-3, 0.9, 0.999, 1e-8, 0.0, 1.0};
  plan.epochs = 100;
  plan.batch_size = 256;
  energy.m = 256;
  energy.n = 256;
  energy.t = 400;
}

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::vector<std::string>& overrides) {
  ExperimentConfig cfg;
  std::stringstream ss(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    }
    apply_key(cfg, section.empty() ? key : section + "." + key, value);
  }
  for (const auto& ov : overrides) {
    const std::size_t eq = ov.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--set needs key=value, got '" + ov + "'");
    }
    apply_key(cfg, trim(ov.substr(0, eq)), trim(ov.substr(eq + 1)));
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides) {
  if (path.empty()) return parse_config_text("", overrides);
  std::ifstream f(path);
  if (!f) throw IoError("cannot read config file: " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_config_text(buf.str(), overrides);
}

AlSpec ExperimentConfig::resolved_task() const {
  if (task_kind != "al") throw ConfigError("task.kind: only 'al' is available");
  AlSpec t = task;
  if (!task_seed_set) t.seed = seed;
  t.validate();
  return t;
}

NetworkSpec ExperimentConfig::resolved_net(int data_channels, int data_classes) const {
  NetworkSpec n = net;
  if (n.input_width == 0) n.input_width = data_channels > 0 ? data_channels : kAlChannels;
  if (n.classes == 0) n.classes = data_classes > 0 ? data_classes : kAlClasses;
  if (net_neuron.size() == 1) {
    n.neuron.assign(n.hidden.size(), net_neuron[0]);
  } else {
    if (net_neuron.size() != n.hidden.size()) {
      throw ConfigError("net.neuron: " + std::to_string(net_neuron.size()) +
                        " kinds for " + std::to_string(n.hidden.size()) + " hidden layers");
    }
    n.neuron = net_neuron;
  }
  n.validate();
  return n;
}

TrainPlan ExperimentConfig::resolved_plan() const {
  TrainPlan p = plan;
  p.seed = seed;
  p.deterministic = deterministic;
  p.exec = exec;
  p.validate();
  return p;
}

ProbeConfig ExperimentConfig::resolved_probe(int data_channels, int data_classes) const {
  ProbeConfig pc;
  pc.net = resolved_net(data_channels, data_classes);
  pc.plan = resolved_plan();
  pc.init_seed = seed;
  pc.direction = probe_direction;
  pc.epsilon = probe_epsilon;
  pc.delta = probe_delta;
  pc.validate();
  return pc;
}

std::filesystem::path ExperimentConfig::resolved_out() const {
  std::filesystem::path p(out);
  if (p.is_relative()) {
    if (const char* root = std::getenv("SPIKETRAIN_OUT_ROOT")) {
      return std::filesystem::path(root) / p;
    }
  }
  return p;
}

std::string canonical_config(const ExperimentConfig& cfg) {
  ordered_json j;
  j["seed"] = cfg.seed;
  j["out"] = cfg.out;
  j["threads"] = cfg.threads;
  j["deterministic"] = cfg.deterministic;
  j["exec"] = cfg.exec == Exec::Parallel ? "omp" : "serial";

  ordered_json task;
  task["kind"] = cfg.task_kind;
  task["length"] = cfg.task.length;
  task["probs"] = cfg.task.probs;
  task["train_samples"] = cfg.task.train_count;
  task["test_samples"] = cfg.task.test_count;
  task["seed"] = cfg.task_seed_set ? cfg.task.seed : cfg.seed;
  task["data"] = cfg.task_data;
  j["task"] = task;

  ordered_json net;
  net["arch"] = to_string(cfg.net.arch);
  net["hidden"] = cfg.net.hidden;
  std::vector<std::string> kinds;
  for (NeuronKind k : cfg.net_neuron) kinds.emplace_back(to_string(k));
  net["neuron"] = kinds;
  net["readout"] = to_string(cfg.net.readout);
  net["decay"] = cfg.net.lif.decay;
  net["threshold"] = cfg.net.lif.v_th;
  net["surrogate_width"] = cfg.net.lif.gamma;
  net["spsn_kernel"] = cfg.net.spsn_kernel;
  net["input"] = cfg.net.input_width;
  net["classes"] = cfg.net.classes;
  j["net"] = net;

  ordered_json train;
  train["algorithm"] = to_string(cfg.plan.algorithm);
  train["lr"] = cfg.plan.opt.lr;
  train["batch"] = cfg.plan.batch_size;
  train["epochs"] = cfg.plan.epochs;
  train["clip"] = cfg.plan.opt.clip;
  train["weight_decay"] = cfg.plan.opt.weight_decay;
  j["train"] = train;

  ordered_json probe;
  probe["epsilon"] = cfg.probe_epsilon;
  probe["delta"] = cfg.probe_delta;
  probe["direction"] =
      cfg.probe_direction == MetricDirection::HigherBetter ? "higher" : "lower";
  j["probe"] = probe;

  ordered_json eff;
  eff["row"] = to_string(cfg.energy.row);
  eff["m"] = cfg.energy.m;
  eff["n"] = cfg.energy.n;
  eff["k"] = cfg.energy.k;
  eff["h"] = cfg.energy.h;
  eff["t"] = cfg.energy.t;
  auto put_fr = [&eff](const char* name, const std::optional<double>& v) {
    if (v.has_value()) {
      eff[name] = *v;
    } else {
      eff[name] = nullptr;
    }
  };
  put_fr("fr_in", cfg.energy.fr_in);
  put_fr("fr_out", cfg.energy.fr_out);
  put_fr("fr_conv2", cfg.energy.fr_conv2);
  put_fr("fr_q", cfg.energy.fr_q);
  put_fr("fr_k", cfg.energy.fr_k);
  put_fr("fr_v", cfg.energy.fr_v);
  put_fr("fr_attn", cfg.energy.fr_attn);
  put_fr("fr_fc1", cfg.energy.fr_fc1);
  put_fr("fr_fc2", cfg.energy.fr_fc2);
  put_fr("fr_y", cfg.energy.fr_y);
  put_fr("fr_w", cfg.energy.fr_w);
  eff["e_ac"] = cfg.energy.constants.e_ac;
  eff["e_mac"] = cfg.energy.constants.e_mac;
  eff["lengths"] = cfg.bench_lengths;
  eff["bench_warmup"] = cfg.bench_warmup;
  eff["bench_measured"] = cfg.bench_measured;
  eff["bench_batch"] = cfg.bench_batch;
  eff["model"] = cfg.energy_model;
  j["efficiency"] = eff;

  return j.dump(2);
}

std::string config_hash(const ExperimentConfig& cfg) {
  return hex64(fnv1a64(canonical_config(cfg)));
}

}  // namespace snn
