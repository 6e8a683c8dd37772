#pragma once

#include <array>
#include <string>

#include "snn/dataset.hpp"
#include "snn/network.hpp"
#include "snn/train.hpp"

namespace snn {

// Probe verdicts about how much a task/model pair relies on temporal
// gradient credit.
enum class Verdict {
  Effective,                  // temporal credit measurably helps
  IneffectiveBackwardUnused,  // severing backward temporal terms changes nothing
  UnsuitableNoTemporalInfo,   // even the forward state carries no usable signal
  Inconclusive,               // gaps sit between the thresholds
};

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Effective: return "effective";
    case Verdict::IneffectiveBackwardUnused: return "ineffective-backward-unused";
    case Verdict::UnsuitableNoTemporalInfo: return "unsuitable-no-temporal-info";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

enum class MetricDirection { HigherBetter, LowerBetter };

struct ProbeConfig {
  NetworkSpec net;
  TrainPlan plan;                // plan.algorithm is overridden per arm
  std::uint64_t init_seed = 42;  // all arms start from this identical network
  MetricDirection direction = MetricDirection::HigherBetter;
  double epsilon = 1.0;  // gap below which two arms count as equivalent
  double delta = 2.0;    // gap above which an advantage counts as material

  void validate() const;
};

struct ArmResult {
  Algorithm algorithm = Algorithm::Stbp;
  bool ok = false;
  std::string error;       // set when the arm failed
  double metric = 0.0;     // final test accuracy, percent
  TrainReport report;
};

struct ProbeReport {
  std::array<ArmResult, 3> arms;  // stbp, sdbp, notd
  std::uint32_t init_param_crc = 0;
  double gap_sdbp = 0.0;  // stbp - sdbp, oriented so positive favors stbp
  double gap_notd = 0.0;  // stbp - notd, oriented likewise
  Verdict verdict = Verdict::Inconclusive;
  bool partial = false;   // some arm failed; verdict is not meaningful
};

// Decision rule over the three arm metrics. Metrics are oriented first
// (lower-better is negated), then checked in order: no temporal information,
// unused backward terms, material advantage, otherwise inconclusive.
Verdict verdict_rule(double stbp, double sdbp, double notd, MetricDirection direction,
                     double epsilon, double delta);

// Trains the three arms from one identical initialization and identical data
// order, then applies verdict_rule to the resulting metrics. A failing arm
// is recorded, not rethrown; the report is marked partial.
ProbeReport run_probe(const ProbeConfig& cfg, const Dataset& train, const Dataset& test,
                      const EpochCallback& cb = {});

}  // namespace snn
