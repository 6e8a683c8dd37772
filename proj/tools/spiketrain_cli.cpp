#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "snn/commands.hpp"
#include "snn/version.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  int threads = 0;
};

void add_common(CLI::App* sub, Flags& f, bool& det, bool& no_det) {
  sub->add_option("--config", f.config, "config file (ini-style)")
      ->check(CLI::ExistingFile);
  sub->add_option("--set", f.sets, "override a config field, e.g. --set train.epochs=30")
      ->take_all();
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--seed", f.seed, "master seed (init, shuffling, task)");
  sub->add_option("--threads", f.threads, "worker threads (0 = runtime default)");
  sub->add_flag("--deterministic", det, "force deterministic reductions (default)");
  sub->add_flag("--no-deterministic", no_det, "allow nondeterministic scheduling");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spiketrain: spiking-network training, probing and energy toolkit"};
  app.set_version_flag("--version", snn::kVersion);
  app.require_subcommand(1);

  Flags flags;
  bool det = false;
  bool no_det = false;
  CLI::App* sub_gen = app.add_subcommand("gen", "generate a task dataset on disk");
  CLI::App* sub_train = app.add_subcommand("train", "train one network");
  CLI::App* sub_probe =
      app.add_subcommand("probe", "train the stbp/sdbp/notd arms and report a verdict");
  CLI::App* sub_energy = app.add_subcommand("energy", "evaluate the energy model");
  CLI::App* sub_bench = app.add_subcommand("bench", "time training across sequence lengths");
  for (CLI::App* sub : {sub_gen, sub_train, sub_probe, sub_energy, sub_bench}) {
    add_common(sub, flags, det, no_det);
  }

  CLI11_PARSE(app, argc, argv);
  CLI::App* active = app.get_subcommands().front();

  std::vector<std::string> overrides;
  if (active->count("--out")) overrides.push_back("out=" + flags.out);
  if (active->count("--seed")) overrides.push_back("seed=" + std::to_string(flags.seed));
  if (active->count("--threads")) {
    overrides.push_back("threads=" + std::to_string(flags.threads));
  }
  if (det) overrides.push_back("deterministic=true");
  if (no_det) overrides.push_back("deterministic=false");
  // --set wins over the dedicated flags when both name the same field
  overrides.insert(overrides.end(), flags.sets.begin(), flags.sets.end());

  try {
    const snn::ExperimentConfig cfg = snn::load_config(flags.config, overrides);
    return snn::run_command(active->get_name(), cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
