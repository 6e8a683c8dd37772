#pragma once

#include <algorithm>
#include <chrono>
#include <functional>
#include <string>
#include <vector>

#include "snn/backward.hpp"
#include "snn/dataset.hpp"
#include "snn/forward.hpp"
#include "snn/loss.hpp"
#include "snn/network.hpp"
#include "snn/optimizer.hpp"

namespace snn {

// The three gradient-segregation arms: full spatio-temporal credit, spatial
// credit over the temporal forward, and spatial credit over a memoryless
// forward.
enum class Algorithm { Stbp, Sdbp, Notd };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Stbp: return "stbp";
    case Algorithm::Sdbp: return "sdbp";
    case Algorithm::Notd: return "notd";
  }
  return "?";
}

inline ForwardMode forward_mode_of(Algorithm a) {
  return a == Algorithm::Notd ? ForwardMode::Memoryless : ForwardMode::Temporal;
}

template <class S>
GradSet<S> backward_for(Algorithm a, const Network<S>& net, const Trace<S>& tr,
                        const Mat<S>& dlogits, Exec ex) {
  switch (a) {
    case Algorithm::Stbp: return backward_stbp(net, tr, dlogits, ex);
    case Algorithm::Sdbp: return backward_sdbp(net, tr, dlogits, ex);
    case Algorithm::Notd: return backward_notd(net, tr, dlogits, ex);
  }
  throw ConfigError("unknown algorithm");
}

struct TrainPlan {
  Algorithm algorithm = Algorithm::Stbp;
  int epochs = 100;
  int batch_size = 256;
  AdamWConfig opt{5e-3, 0.9, 0.999, 1e-8, 0.0, 1.0};
  std::uint64_t seed = 42;
  bool deterministic = true;
  Exec exec = Exec::Parallel;

  void validate() const {
    if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("train: batch size must be >= 1");
    opt.validate();
  }
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double test_accuracy = 0.0;
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  double final_test_accuracy = 0.0;
  double best_test_accuracy = 0.0;
  std::int64_t updates = 0;
  double median_update_seconds = 0.0;
  double updates_per_second = 0.0;
  double timesteps_per_second = 0.0;  // updates/s scaled by sequence length
  std::uint32_t init_param_crc = 0;
  std::uint32_t final_param_crc = 0;
  double wall_seconds = 0.0;
};

using EpochCallback = std::function<void(const EpochStats&)>;

// Checksum of all parameter tensors in build_param_refs order; identifies a
// weight state exactly.
template <class S>
std::uint32_t param_crc(const Network<S>& net) {
  auto refs = build_param_refs(const_cast<Network<S>&>(net));
  std::uint32_t crc = 0;
  for (const auto& r : refs) {
    crc = crc32_bytes(r.data, r.size * sizeof(S), crc);
  }
  return crc;
}

template <class S>
double evaluate_accuracy(const Network<S>& net, const Dataset& ds, int batch_size,
                         ForwardMode mode, Exec ex) {
  if (ds.n() == 0) throw DataError("evaluate: empty dataset");
  const auto parts = batch_partition(ds.meta.n, batch_size, nullptr);
  std::int64_t hits = 0;
  for (const auto& idx : parts) {
    Batch b = gather_batch(ds, idx);
    auto fwd = forward_sequence(net, std::move(b.inputs), mode, SpikeMode::Hard, ex);
    for (int i = 0; i < fwd.logits.rows; ++i) {
      if (argmax_row(fwd.logits.row(i), fwd.logits.cols) ==
          static_cast<int>(b.labels[i])) {
        ++hits;
      }
    }
  }
  return static_cast<double>(hits) / ds.n();
}

// Minibatch training loop. Per-epoch shuffles come from their own streams of
// the plan seed, batches shard across threads with an ordered reduction, so
// a rerun with the same plan, data and thread count is bit-identical.
template <class S>
TrainReport fit(Network<S>& net, const Dataset& train, const Dataset* test,
                const TrainPlan& plan, const EpochCallback& cb = {}) {
  plan.validate();
  if (train.n() == 0) throw DataError("fit: empty training set");
  if (train.channels() != net.spec.input_width) {
    throw DataError("fit: dataset channels " + std::to_string(train.channels()) +
                    " do not match network input width " +
                    std::to_string(net.spec.input_width));
  }
  if (static_cast<int>(train.meta.classes) != net.spec.classes) {
    throw DataError("fit: dataset classes " + std::to_string(train.meta.classes) +
                    " do not match network classes " + std::to_string(net.spec.classes));
  }

  using clock = std::chrono::steady_clock;
  const auto wall0 = clock::now();
  const ForwardMode mode = forward_mode_of(plan.algorithm);

  TrainReport report;
  report.init_param_crc = param_crc(net);
  OptimizerState<S> state = OptimizerState<S>::zeros_like(net);
  std::vector<double> update_secs;

  for (int epoch = 0; epoch < plan.epochs; ++epoch) {
    const auto t_epoch = clock::now();
    RngStream shuffle_rng(plan.seed, streams::kShuffleBase + static_cast<std::uint64_t>(epoch));
    const auto parts = batch_partition(train.meta.n, plan.batch_size, &shuffle_rng);
    double loss_sum = 0.0;
    for (const auto& idx : parts) {
      Batch b = gather_batch(train, idx);
      const auto t0 = clock::now();
      auto fwd = forward_sequence(net, std::move(b.inputs), mode, SpikeMode::Hard, plan.exec);
      auto loss = cross_entropy(fwd.logits, b.labels);
      auto grads = backward_for(plan.algorithm, net, fwd.trace, loss.dlogits, plan.exec);
      clip_and_step(net, grads, state, plan.opt);
      const auto t1 = clock::now();
      update_secs.push_back(std::chrono::duration<double>(t1 - t0).count());
      loss_sum += loss.loss * static_cast<double>(idx.size());
    }
    EpochStats es;
    es.epoch = epoch;
    es.train_loss = loss_sum / train.n();
    if (test && test->n() > 0) {
      es.test_accuracy = evaluate_accuracy(net, *test, plan.batch_size, mode, plan.exec);
    }
    es.seconds = std::chrono::duration<double>(clock::now() - t_epoch).count();
    report.epochs.push_back(es);
    if (cb) cb(es);
  }

  report.updates = static_cast<std::int64_t>(update_secs.size());
  std::vector<double> timed = update_secs;
  if (timed.size() > 25) timed.erase(timed.begin(), timed.begin() + 5);  // warmup
  if (!timed.empty()) {
    std::nth_element(timed.begin(), timed.begin() + timed.size() / 2, timed.end());
    report.median_update_seconds = timed[timed.size() / 2];
    if (report.median_update_seconds > 0.0) {
      report.updates_per_second = 1.0 / report.median_update_seconds;
      report.timesteps_per_second = report.updates_per_second * train.steps();
    }
  }
  if (!report.epochs.empty()) {
    report.final_test_accuracy = report.epochs.back().test_accuracy;
    for (const auto& e : report.epochs) {
      report.best_test_accuracy = std::max(report.best_test_accuracy, e.test_accuracy);
    }
  }
  report.final_param_crc = param_crc(net);
  report.wall_seconds = std::chrono::duration<double>(clock::now() - wall0).count();
  return report;
}

}  // namespace snn
