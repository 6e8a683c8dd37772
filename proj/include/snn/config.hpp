#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "snn/dataset.hpp"
#include "snn/efficiency.hpp"
#include "snn/network.hpp"
#include "snn/stp.hpp"
#include "snn/train.hpp"

namespace snn {

// Everything a run needs, resolved from (in order of precedence) built-in
// defaults, a config file, then --set / flag overrides.
struct ExperimentConfig {
  // global
  std::uint64_t seed = 42;
  std::string out = "out";
  int threads = 0;  // 0 keeps the runtime default
  bool deterministic = true;
  Exec exec = Exec::Parallel;

  // [task]
  std::string task_kind = "al";
  AlSpec task;
  bool task_seed_set = false;
  std::string task_data;  // existing dataset root (train/ + test/); empty = generate

  // [net]
  NetworkSpec net;                       // input/classes 0: derive from task
  std::vector<NeuronKind> net_neuron{NeuronKind::Lif};  // broadcast if single

  // [train]
  TrainPlan plan;

  // [probe]
  double probe_epsilon = 1.0;
  double probe_delta = 2.0;
  MetricDirection probe_direction = MetricDirection::HigherBetter;

  // [efficiency]
  EnergyQuery energy;
  std::vector<int> bench_lengths{200, 400, 800};
  int bench_warmup = 5;
  int bench_measured = 20;
  int bench_batch = 16;
  std::string energy_model;  // model dir; enables the measured-vs-formula section

  ExperimentConfig();

  AlSpec resolved_task() const;
  // Zero input/classes fall back to `data_channels` / `data_classes`, then
  // to the task constants.
  NetworkSpec resolved_net(int data_channels = 0, int data_classes = 0) const;
  TrainPlan resolved_plan() const;
  ProbeConfig resolved_probe(int data_channels = 0, int data_classes = 0) const;
  std::filesystem::path resolved_out() const;
};

// Parses config text and applies `overrides` ("section.key=value"). Unknown
// keys and malformed values throw ConfigError naming the offending path.
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::vector<std::string>& overrides = {});

// Empty path: defaults plus overrides.
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides = {});

// Stable serialization of every field; equal configs hash equally.
std::string canonical_config(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace snn
