#pragma once

#include <string>

#include "snn/config.hpp"

namespace snn {

// CLI subcommands as library functions. Each creates the output directory,
// writes its artifacts plus a checksummed manifest, and returns the process
// exit code. run_command adds the failure contract: any thrown error lands
// in <out>/error.json and yields a nonzero code.
int cmd_gen(const ExperimentConfig& cfg);
int cmd_train(const ExperimentConfig& cfg);
int cmd_probe(const ExperimentConfig& cfg);
int cmd_energy(const ExperimentConfig& cfg);
int cmd_bench(const ExperimentConfig& cfg);

int run_command(const std::string& name, const ExperimentConfig& cfg);

}  // namespace snn
