#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "snn/dataset.hpp"
#include "snn/forward.hpp"
#include "snn/network.hpp"
#include "snn/train.hpp"

namespace snn {

// Mean firing probability per neuron per step of selected populations.
// Population -1 is the input plane; 0..depth-1 are hidden layer outputs.
struct SpikeStats {
  std::vector<int> populations;
  std::vector<std::string> names;
  std::vector<double> rates;
  std::int64_t samples = 0;
  std::int64_t steps = 0;

  double rate_of(int population) const;
};

double spike_frequency(const Seq32& spikes);

SpikeStats record_spike_stats(const Network32& net, const Dataset& ds,
                              const std::vector<int>& populations,
                              int batch_size = 256,
                              ForwardMode mode = ForwardMode::Temporal,
                              Exec ex = Exec::Parallel);

// Measured accumulate (AC) and multiply-accumulate (MAC) operation counts,
// per time step per sample, from instrumented inference over a dataset.
// Convention per layer: one AC per postsynaptic accumulation of an incoming
// spike, one AC per emitted spike for the membrane reset, one MAC per neuron
// per step for the leak; SPSN layers spend n*k kernel MACs (zero padding
// included) and have no reset; memoryless cells have neither leak nor reset.
struct OpCounts {
  struct Row {
    std::string name;
    double acs = 0.0;
    double macs = 0.0;
  };
  std::vector<Row> layers;
  Row readout;
  double hidden_acs = 0.0;   // sum over hidden layers
  double hidden_macs = 0.0;
};

OpCounts count_ops(const Network32& net, const Dataset& ds, int batch_size = 256,
                   ForwardMode mode = ForwardMode::Temporal, Exec ex = Exec::Parallel);

struct EnergyConstants {
  double e_ac = 0.9;   // pJ per accumulate
  double e_mac = 4.6;  // pJ per multiply-accumulate
};

// Closed-form per-step operation counts for one layer of each supported
// architecture family.
enum class EnergyRow {
  FfsnnLif,
  FfsnnCeLif,
  FfsnnLtc,
  FfsnnSpsn,
  FfsnnPmsn,
  SrnnLif,
  SrnnCeLif,
  SrnnLtc,
  Gsn,
  SpikingTcn,
  SpikeDrivenTransformer,
  BinaryS4d,
  Gsu,
};

const char* to_string(EnergyRow row);
EnergyRow parse_energy_row(const std::string& name);

struct EnergyQuery {
  EnergyRow row = EnergyRow::FfsnnLif;
  double m = 0;  // fan-in
  double n = 0;  // layer width
  double k = 0;  // kernel length
  double h = 0;  // feedforward block width
  double t = 0;  // sequence length
  std::optional<double> fr_in, fr_out, fr_conv2;
  std::optional<double> fr_q, fr_k, fr_v, fr_attn, fr_fc1, fr_fc2;
  std::optional<double> fr_y, fr_w;
  EnergyConstants constants;
};

struct EnergyResult {
  double acs = 0.0;   // per step
  double macs = 0.0;  // per step
  double pj = 0.0;    // per step
  double nj = 0.0;
};

EnergyResult energy_formula(const EnergyQuery& q);

inline EnergyResult energy_of(double acs, double macs, const EnergyConstants& c) {
  EnergyResult r;
  r.acs = acs;
  r.macs = macs;
  r.pj = acs * c.e_ac + macs * c.e_mac;
  r.nj = r.pj / 1000.0;
  return r;
}

// Exact bytes of forward state the training loop caches for one batch:
// input plane plus membrane and spike planes per layer (and the current
// plane for SPSN layers). Linear in both batch and sequence length.
std::size_t trace_bytes(const NetworkSpec& spec, int batch, int steps);

// Least squares y ~ a + b*x with coefficient of determination.
struct FitResult {
  double a = 0.0;
  double b = 0.0;
  double r2 = 0.0;
};
FitResult fit_affine(std::span<const double> x, std::span<const double> y);

struct BenchPoint {
  int length = 0;
  double update_seconds = 0.0;        // median over measured updates
  double updates_per_second = 0.0;
  double timesteps_per_second = 0.0;  // updates/s * length
  std::size_t analytic_trace_bytes = 0;
};

struct BenchReport {
  std::vector<BenchPoint> points;
  int batch = 0;
  int warmup = 0;
  int measured = 0;
  int threads = 0;
  FitResult time_vs_length;     // update seconds ~ length
  FitResult time_vs_length_sq;  // update seconds ~ length^2
};

// Times full training updates (forward + backward + optimizer, batch
// assembly excluded) of the given network on synthetic task data at each
// sequence length.
BenchReport bench_training(const NetworkSpec& spec, const TrainPlan& plan,
                           AlSpec task, const std::vector<int>& lengths,
                           int warmup = 5, int measured = 20);

}  // namespace snn
