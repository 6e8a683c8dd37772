#include "snn/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "snn/manifest.hpp"
#include "snn/model_io.hpp"
#include "snn/version.hpp"

namespace snn {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("short write: " + path.string());
}

void write_json(const fs::path& path, const ordered_json& j) {
  write_text(path, j.dump(2) + "\n");
}

fs::path make_out_dir(const ExperimentConfig& cfg) {
  const fs::path out = cfg.resolved_out();
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out.string() + ": " + ec.message());
  return out;
}

RunManifest start_manifest(const ExperimentConfig& cfg, const std::string& command) {
  RunManifest m;
  m.command = command;
  m.version = kVersion;
  m.config_hash = config_hash(cfg);
  m.seed = cfg.seed;
  m.threads = max_threads();
  m.deterministic = cfg.deterministic;
  m.created_utc = utc_timestamp();
  m.config = canonical_config(cfg);
  return m;
}

struct DataPair {
  Dataset train;
  Dataset test;
};

DataPair obtain_data(const ExperimentConfig& cfg) {
  if (!cfg.task_data.empty()) {
    const fs::path root(cfg.task_data);
    return {load_dataset(root / "train"), load_dataset(root / "test")};
  }
  const AlSpec task = cfg.resolved_task();
  return {generate_al_split(task, false), generate_al_split(task, true)};
}

const char* error_kind(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const CorruptDatasetError*>(&e)) return "corrupt-dataset";
  if (dynamic_cast<const DataError*>(&e)) return "data";
  if (dynamic_cast<const DimensionError*>(&e)) return "dimension";
  if (dynamic_cast<const NumericError*>(&e)) return "numeric";
  if (dynamic_cast<const DistributionError*>(&e)) return "distribution";
  if (dynamic_cast<const ContractError*>(&e)) return "contract";
  if (dynamic_cast<const QueryError*>(&e)) return "query";
  if (dynamic_cast<const TrainingError*>(&e)) return "training";
  if (dynamic_cast<const OracleError*>(&e)) return "oracle";
  if (dynamic_cast<const IoError*>(&e)) return "io";
  if (dynamic_cast<const Error*>(&e)) return "internal";
  return "unexpected";
}

ordered_json epochs_json(const TrainReport& r) {
  ordered_json arr = ordered_json::array();
  for (const auto& e : r.epochs) {
    ordered_json row;
    row["epoch"] = e.epoch;
    row["train_loss"] = e.train_loss;
    row["test_accuracy"] = e.test_accuracy;
    arr.push_back(row);
  }
  return arr;
}

ordered_json train_report_json(const TrainReport& r, Algorithm algo) {
  ordered_json j;
  j["algorithm"] = to_string(algo);
  j["epochs"] = epochs_json(r);
  j["final_test_accuracy"] = r.final_test_accuracy;
  j["best_test_accuracy"] = r.best_test_accuracy;
  j["updates"] = r.updates;
  j["init_param_crc"] = r.init_param_crc;
  j["final_param_crc"] = r.final_param_crc;
  return j;
}

ordered_json timing_json(const TrainReport& r, int steps) {
  ordered_json j;
  j["median_update_seconds"] = r.median_update_seconds;
  j["updates_per_second"] = r.updates_per_second;
  j["timesteps_per_second"] = r.updates_per_second * steps;
  j["wall_seconds"] = r.wall_seconds;
  ordered_json es = ordered_json::array();
  for (const auto& e : r.epochs) es.push_back(e.seconds);
  j["epoch_seconds"] = es;
  return j;
}

EpochCallback progress_printer(const std::string& label, int total_epochs) {
  return [label, total_epochs](const EpochStats& e) {
    std::printf("[%s] epoch %d/%d  loss %.4f  test acc %.2f%%\n", label.c_str(),
                e.epoch + 1, total_epochs, e.train_loss, e.test_accuracy * 100.0);
    std::fflush(stdout);
  };
}

}  // namespace

int cmd_gen(const ExperimentConfig& cfg) {
  const fs::path out = make_out_dir(cfg);
  const AlSpec task = cfg.resolved_task();
  generate_al_dataset(task, out / "dataset");

  RunManifest m = start_manifest(cfg, "gen");
  for (const char* split : {"train", "test"}) {
    for (const char* file : {"meta.json", "data.f32", "labels.u32"}) {
      add_artifact(m, out, std::string("dataset/") + split + "/" + file);
    }
  }
  write_manifest(m, out);
  std::printf("gen: wrote %d train / %d test samples (T=%d) under %s\n", task.train_count,
              task.test_count, task.length, (out / "dataset").string().c_str());
  return 0;
}

int cmd_train(const ExperimentConfig& cfg) {
  const fs::path out = make_out_dir(cfg);
  DataPair data = obtain_data(cfg);
  const NetworkSpec spec =
      cfg.resolved_net(data.train.channels(), static_cast<int>(data.train.meta.classes));
  const TrainPlan plan = cfg.resolved_plan();

  Network32 net = build_network<float>(spec, cfg.seed);
  const TrainReport report =
      fit(net, data.train, &data.test, plan, progress_printer("train", plan.epochs));

  save_model(net, out / "model");
  ordered_json rj = train_report_json(report, plan.algorithm);
  rj["config_hash"] = config_hash(cfg);
  rj["train_fingerprint"] = data.train.meta.fingerprint;
  rj["test_fingerprint"] = data.test.meta.fingerprint;
  write_json(out / "report.json", rj);
  write_json(out / "timing.json", timing_json(report, data.train.steps()));

  std::string csv = "epoch,train_loss,test_accuracy\n";
  for (const auto& e : report.epochs) {
    csv += std::to_string(e.epoch) + "," + std::to_string(e.train_loss) + "," +
           std::to_string(e.test_accuracy) + "\n";
  }
  write_text(out / "curves.csv", csv);

  RunManifest m = start_manifest(cfg, "train");
  add_artifact(m, out, "model/arch.json");
  add_artifact(m, out, "model/weights.f32");
  add_artifact(m, out, "report.json");
  add_artifact(m, out, "curves.csv");
  add_artifact(m, out, "timing.json", true);
  write_manifest(m, out);

  std::printf("train: %s final test acc %.2f%% after %lld updates -> %s\n",
              to_string(plan.algorithm), report.final_test_accuracy * 100.0,
              static_cast<long long>(report.updates), out.string().c_str());
  return 0;
}

int cmd_probe(const ExperimentConfig& cfg) {
  const fs::path out = make_out_dir(cfg);
  DataPair data = obtain_data(cfg);
  const ProbeConfig pc =
      cfg.resolved_probe(data.train.channels(), static_cast<int>(data.train.meta.classes));

  int arm_counter = 0;
  int last_epoch = -1;
  const char* arm_names[] = {"stbp", "sdbp", "notd"};
  EpochCallback cb = [&](const EpochStats& e) {
    if (e.epoch <= last_epoch) ++arm_counter;
    last_epoch = e.epoch;
    std::printf("[probe/%s] epoch %d/%d  loss %.4f  test acc %.2f%%\n",
                arm_names[std::min(arm_counter, 2)], e.epoch + 1, pc.plan.epochs,
                e.train_loss, e.test_accuracy * 100.0);
    std::fflush(stdout);
  };
  const ProbeReport report = run_probe(pc, data.train, data.test, cb);

  ordered_json j;
  j["config_hash"] = config_hash(cfg);
  j["train_fingerprint"] = data.train.meta.fingerprint;
  j["test_fingerprint"] = data.test.meta.fingerprint;
  j["init_param_crc"] = report.init_param_crc;
  j["epsilon"] = pc.epsilon;
  j["delta"] = pc.delta;
  j["direction"] = pc.direction == MetricDirection::HigherBetter ? "higher" : "lower";
  ordered_json arms = ordered_json::array();
  for (const auto& arm : report.arms) {
    ordered_json a;
    a["algorithm"] = to_string(arm.algorithm);
    a["ok"] = arm.ok;
    if (!arm.ok) a["error"] = arm.error;
    a["metric"] = arm.metric;
    if (arm.ok) {
      a["epochs"] = epochs_json(arm.report);
      a["final_param_crc"] = arm.report.final_param_crc;
    }
    arms.push_back(a);
  }
  j["arms"] = arms;
  j["gap_sdbp"] = report.gap_sdbp;
  j["gap_notd"] = report.gap_notd;
  j["verdict"] = to_string(report.verdict);
  j["partial"] = report.partial;
  write_json(out / "probe_report.json", j);

  std::string csv = "algorithm,metric\n";
  for (const auto& arm : report.arms) {
    csv += std::string(to_string(arm.algorithm)) + "," +
           (arm.ok ? std::to_string(arm.metric) : "failed") + "\n";
  }
  write_text(out / "probe.csv", csv);

  ordered_json tj;
  for (const auto& arm : report.arms) {
    if (arm.ok) {
      tj[to_string(arm.algorithm)] = timing_json(arm.report, data.train.steps());
    }
  }
  write_json(out / "timing.json", tj);

  RunManifest m = start_manifest(cfg, "probe");
  add_artifact(m, out, "probe_report.json");
  add_artifact(m, out, "probe.csv");
  add_artifact(m, out, "timing.json", true);
  write_manifest(m, out);

  if (report.partial) {
    std::printf("probe: partial (an arm failed); see probe_report.json\n");
  } else {
    std::printf("probe: stbp %.2f  sdbp %.2f  notd %.2f  |  gap(sdbp) %.2f  "
                "gap(notd) %.2f  verdict: %s\n",
                report.arms[0].metric, report.arms[1].metric, report.arms[2].metric,
                report.gap_sdbp, report.gap_notd, to_string(report.verdict));
  }
  return 0;
}

int cmd_energy(const ExperimentConfig& cfg) {
  const fs::path out = make_out_dir(cfg);
  const EnergyQuery& q = cfg.energy;
  const EnergyResult res = energy_formula(q);

  ordered_json j;
  j["config_hash"] = config_hash(cfg);
  ordered_json query;
  query["row"] = to_string(q.row);
  query["m"] = q.m;
  query["n"] = q.n;
  query["k"] = q.k;
  query["h"] = q.h;
  query["t"] = q.t;
  j["query"] = query;
  j["acs_per_step"] = res.acs;
  j["macs_per_step"] = res.macs;
  j["pj_per_step"] = res.pj;
  j["nj_per_step"] = res.nj;
  if (q.t >= 1.0) {
    j["pj_per_sample"] = res.pj * q.t;
    j["nj_per_sample"] = res.nj * q.t;
  }

  if (!cfg.energy_model.empty()) {
    const Network32 net = load_model(cfg.energy_model);
    DataPair data = obtain_data(cfg);
    const ForwardMode mode = forward_mode_of(cfg.plan.algorithm);
    const SpikeStats stats =
        record_spike_stats(net, data.test, {}, cfg.bench_batch, mode, cfg.exec);
    const OpCounts ops = count_ops(net, data.test, cfg.bench_batch, mode, cfg.exec);

    ordered_json measured;
    ordered_json stats_j = ordered_json::array();
    for (std::size_t i = 0; i < stats.populations.size(); ++i) {
      ordered_json s;
      s["population"] = stats.names[i];
      s["rate"] = stats.rates[i];
      stats_j.push_back(s);
    }
    measured["spike_rates"] = stats_j;
    ordered_json layers = ordered_json::array();
    for (int l = 0; l < net.depth(); ++l) {
      const auto& row = ops.layers[l];
      ordered_json lj;
      lj["name"] = row.name;
      lj["counted_acs"] = row.acs;
      lj["counted_macs"] = row.macs;
      const EnergyResult counted = energy_of(row.acs, row.macs, q.constants);
      lj["counted_pj"] = counted.pj;
      const NeuronKind kind = net.layers[l].kind;
      if (mode == ForwardMode::Temporal &&
          (kind == NeuronKind::Lif || kind == NeuronKind::Spsn)) {
        EnergyQuery fq;
        fq.constants = q.constants;
        fq.m = net.layers[l].in_w;
        fq.n = net.layers[l].out_w;
        fq.fr_in = stats.rate_of(l - 1);
        fq.fr_out = stats.rate_of(l);
        if (kind == NeuronKind::Spsn) {
          fq.row = EnergyRow::FfsnnSpsn;
          fq.k = static_cast<double>(net.layers[l].kappa.size());
        } else {
          fq.row = net.spec.arch == Arch::Srnn ? EnergyRow::SrnnLif : EnergyRow::FfsnnLif;
        }
        const EnergyResult form = energy_formula(fq);
        lj["formula_acs"] = form.acs;
        lj["formula_macs"] = form.macs;
        lj["formula_pj"] = form.pj;
        lj["rel_err_pj"] = form.pj > 0 ? std::abs(counted.pj - form.pj) / form.pj : 0.0;
      }
      layers.push_back(lj);
    }
    measured["layers"] = layers;
    j["measured"] = measured;
  }

  write_json(out / "energy.json", j);
  RunManifest m = start_manifest(cfg, "energy");
  add_artifact(m, out, "energy.json");
  write_manifest(m, out);

  std::printf("energy: %s  ACs/step %.1f  MACs/step %.1f  ->  %.4g nJ/step\n",
              to_string(q.row), res.acs, res.macs, res.nj);
  return 0;
}

int cmd_bench(const ExperimentConfig& cfg) {
  const fs::path out = make_out_dir(cfg);
  const NetworkSpec spec = cfg.resolved_net();
  TrainPlan plan = cfg.resolved_plan();
  plan.batch_size = cfg.bench_batch;
  const AlSpec task = cfg.resolved_task();

  const BenchReport report = bench_training(spec, plan, task, cfg.bench_lengths,
                                            cfg.bench_warmup, cfg.bench_measured);

  ordered_json j;
  j["config_hash"] = config_hash(cfg);
  j["batch"] = report.batch;
  j["warmup"] = report.warmup;
  j["measured"] = report.measured;
  j["threads"] = report.threads;
  ordered_json pts = ordered_json::array();
  for (const auto& p : report.points) {
    ordered_json pj;
    pj["length"] = p.length;
    pj["update_seconds"] = p.update_seconds;
    pj["updates_per_second"] = p.updates_per_second;
    pj["timesteps_per_second"] = p.timesteps_per_second;
    pj["analytic_trace_bytes"] = p.analytic_trace_bytes;
    pts.push_back(pj);
  }
  j["points"] = pts;
  if (report.points.size() >= 2) {
    for (const char* name : {"time_vs_length", "time_vs_length_sq"}) {
      const FitResult& f = std::string(name) == "time_vs_length" ? report.time_vs_length
                                                                 : report.time_vs_length_sq;
      ordered_json fj;
      fj["a"] = f.a;
      fj["b"] = f.b;
      fj["r2"] = f.r2;
      j[name] = fj;
    }
  }
  write_json(out / "bench.json", j);

  std::string csv =
      "length,update_seconds,updates_per_second,timesteps_per_second,analytic_trace_bytes\n";
  for (const auto& p : report.points) {
    csv += std::to_string(p.length) + "," + std::to_string(p.update_seconds) + "," +
           std::to_string(p.updates_per_second) + "," +
           std::to_string(p.timesteps_per_second) + "," +
           std::to_string(p.analytic_trace_bytes) + "\n";
  }
  write_text(out / "bench.csv", csv);

  RunManifest m = start_manifest(cfg, "bench");
  add_artifact(m, out, "bench.json", true);
  add_artifact(m, out, "bench.csv", true);
  write_manifest(m, out);

  for (const auto& p : report.points) {
    std::printf("bench: T=%-5d  %.4f s/update  %.1f steps/s  trace %.1f MiB\n", p.length,
                p.update_seconds, p.timesteps_per_second,
                static_cast<double>(p.analytic_trace_bytes) / (1024.0 * 1024.0));
  }
  return 0;
}

int run_command(const std::string& name, const ExperimentConfig& cfg) {
  if (cfg.threads > 0) set_threads(cfg.threads);
  try {
    if (name == "gen") return cmd_gen(cfg);
    if (name == "train") return cmd_train(cfg);
    if (name == "probe") return cmd_probe(cfg);
    if (name == "energy") return cmd_energy(cfg);
    if (name == "bench") return cmd_bench(cfg);
    throw ConfigError("unknown command: " + name);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error (%s): %s\n", error_kind(e), e.what());
    try {
      const fs::path out = make_out_dir(cfg);
      ordered_json j;
      j["command"] = name;
      j["error_type"] = error_kind(e);
      j["message"] = e.what();
      write_json(out / "error.json", j);
    } catch (const std::exception& io) {
      std::fprintf(stderr, "also failed to write error.json: %s\n", io.what());
    }
    return 1;
  }
}

}  // namespace snn
