#include "snn/stp.hpp"

namespace snn {

void ProbeConfig::validate() const {
  net.validate();
  plan.validate();
  if (!(epsilon > 0.0)) throw ConfigError("probe: epsilon must be positive");
  if (!(delta > 0.0)) throw ConfigError("probe: delta must be positive");
  if (epsilon > delta) {
    throw ConfigError("probe: epsilon (" + std::to_string(epsilon) +
                      ") must not exceed delta (" + std::to_string(delta) + ")");
  }
}

Verdict verdict_rule(double stbp, double sdbp, double notd, MetricDirection direction,
                     double epsilon, double delta) {
  if (!(epsilon > 0.0) || !(delta > 0.0) || epsilon > delta) {
    throw ConfigError("verdict: need 0 < epsilon <= delta");
  }
  if (direction == MetricDirection::LowerBetter) {
    stbp = -stbp;
    sdbp = -sdbp;
    notd = -notd;
  }
  const double gap_notd = stbp - notd;
  const double gap_sdbp = stbp - sdbp;
  if (gap_notd < epsilon) return Verdict::UnsuitableNoTemporalInfo;
  if (gap_sdbp < epsilon) return Verdict::IneffectiveBackwardUnused;
  if (gap_sdbp >= delta && gap_notd >= delta) return Verdict::Effective;
  return Verdict::Inconclusive;
}

ProbeReport run_probe(const ProbeConfig& cfg, const Dataset& train, const Dataset& test,
                      const EpochCallback& cb) {
  cfg.validate();
  const Network32 init = build_network<float>(cfg.net, cfg.init_seed);

  ProbeReport report;
  report.init_param_crc = param_crc(init);
  const Algorithm arms[3] = {Algorithm::Stbp, Algorithm::Sdbp, Algorithm::Notd};
  for (int a = 0; a < 3; ++a) {
    ArmResult& arm = report.arms[a];
    arm.algorithm = arms[a];
    try {
      Network32 net = init;  // identical weights for every arm
      TrainPlan plan = cfg.plan;
      plan.algorithm = arms[a];  // same plan.seed: identical batch order
      arm.report = fit(net, train, &test, plan, cb);
      arm.metric = arm.report.final_test_accuracy * 100.0;
      arm.ok = true;
    } catch (const std::exception& e) {
      arm.ok = false;
      arm.error = e.what();
      report.partial = true;
    }
  }

  if (!report.partial) {
    const double stbp = report.arms[0].metric;
    const double sdbp = report.arms[1].metric;
    const double notd = report.arms[2].metric;
    const double sign = cfg.direction == MetricDirection::LowerBetter ? -1.0 : 1.0;
    report.gap_sdbp = sign * (stbp - sdbp);
    report.gap_notd = sign * (stbp - notd);
    report.verdict = verdict_rule(stbp, sdbp, notd, cfg.direction, cfg.epsilon, cfg.delta);
  }
  return report;
}

}  // namespace snn
