#pragma once

#include <algorithm>
#include <vector>

#include "snn/kernels.hpp"
#include "snn/network.hpp"
#include "snn/parallel.hpp"

namespace snn {

// Temporal runs the full state recursion (membrane carry, recurrence, SPSN
// window). Memoryless severs every cross-step path: each step sees only its
// own input current.
enum class ForwardMode { Temporal, Memoryless };

// Hard emits binary spikes. Smoothed replaces the step nonlinearity with its
// integrated triangle ramp so the network becomes differentiable end to end;
// the reset still keys off the binary threshold so the analytic backward
// pass (which detaches the reset) is the exact gradient of this forward.
enum class SpikeMode { Hard, Smoothed };

template <class S>
struct LayerTrace {
  Seq<S> u;      // membrane potential
  Seq<S> s;      // emitted (propagated) spike value
  Seq<S> fired;  // binary threshold crossings; empty in Hard mode (== s)
  Seq<S> c;      // per-step input current; SPSN layers only
};

template <class S>
struct Trace {
  ForwardMode mode = ForwardMode::Temporal;
  SpikeMode spike_mode = SpikeMode::Hard;
  int batch = 0;
  int steps = 0;
  Seq<S> input;
  std::vector<LayerTrace<S>> layers;
  Mat<S> mean_spikes;  // [B x top width]; filled for MeanOverTime readout

  const Seq<S>& spikes(int l) const { return layers[l].s; }
  // Reset indicator: distinct from s only under Smoothed.
  const Seq<S>& fired(int l) const {
    return layers[l].fired.empty() ? layers[l].s : layers[l].fired;
  }
};

template <class S>
struct ForwardResult {
  Mat<S> logits;       // [B x classes]; empty in PerStep mode
  Seq<S> step_logits;  // [B, T, classes]; PerStep mode only
  Trace<S> trace;
};

namespace detail {

template <class S>
void spsn_window_sum(const S* kappa, int k, const Seq<S>& c, int b, Seq<S>& u,
                     bool memoryless) {
  const int steps = c.steps;
  const int n = c.channels;
  const int span = memoryless ? 1 : k;
  for (int t = 0; t < steps; ++t) {
    S* urow = u.at(b, t);
    std::fill(urow, urow + n, S(0));
    const int lim = std::min(span - 1, t);
    for (int tau = 0; tau <= lim; ++tau) {
      axpy(kappa[tau], c.at(b, t - tau), urow, n);
    }
  }
}

}  // namespace detail

// Runs the network over a [B, T, C] block, recording the full state needed
// by the backward passes. The batch is sharded over threads; every write is
// to a sample-private slice, so results are bit-identical for any thread
// count.
template <class S>
ForwardResult<S> forward_sequence(const Network<S>& net, Seq<S> x,
                                  ForwardMode mode,
                                  SpikeMode spike_mode = SpikeMode::Hard,
                                  Exec ex = Exec::Parallel) {
  const NetworkSpec& spec = net.spec;
  if (net.layers.empty()) throw ConfigError("forward: network has no layers");
  if (x.steps < 1) throw DataError("forward: empty sequence (T = 0)");
  if (x.batch < 1) throw DataError("forward: empty batch");
  if (x.channels != spec.input_width) {
    throw DataError("forward: input channels " + std::to_string(x.channels) +
                    " do not match network input width " +
                    std::to_string(spec.input_width));
  }
  for (const auto& layer : net.layers) {
    if (layer.kind == NeuronKind::Spsn && mode == ForwardMode::Temporal &&
        static_cast<int>(layer.kappa.size()) > x.steps) {
      throw ConfigError("forward: spsn kernel length " +
                        std::to_string(layer.kappa.size()) +
                        " exceeds sequence length " + std::to_string(x.steps));
    }
  }

  const int batch = x.batch;
  const int steps = x.steps;
  const bool smooth = spike_mode == SpikeMode::Smoothed;
  const bool memoryless = mode == ForwardMode::Memoryless;

  ForwardResult<S> out;
  Trace<S>& tr = out.trace;
  tr.mode = mode;
  tr.spike_mode = spike_mode;
  tr.batch = batch;
  tr.steps = steps;
  tr.input = std::move(x);
  tr.layers.resize(net.depth());
  int max_w = 0;
  for (int l = 0; l < net.depth(); ++l) {
    const auto& layer = net.layers[l];
    tr.layers[l].u = Seq<S>(batch, steps, layer.out_w);
    tr.layers[l].s = Seq<S>(batch, steps, layer.out_w);
    if (smooth) tr.layers[l].fired = Seq<S>(batch, steps, layer.out_w);
    if (layer.kind == NeuronKind::Spsn) {
      tr.layers[l].c = Seq<S>(batch, steps, layer.out_w);
    }
    max_w = std::max(max_w, layer.out_w);
  }
  const int top_w = net.layers.back().out_w;
  if (spec.readout == ReadoutMode::MeanOverTime) {
    tr.mean_spikes = Mat<S>(batch, top_w);
  }
  if (spec.readout == ReadoutMode::PerStep) {
    out.step_logits = Seq<S>(batch, steps, spec.classes);
  } else {
    out.logits = Mat<S>(batch, spec.classes);
  }

  auto run_sample = [&](int b, std::vector<S>& cur) {
    for (int l = 0; l < net.depth(); ++l) {
      const Layer<S>& layer = net.layers[l];
      const Seq<S>& in = (l == 0) ? tr.input : tr.layers[l - 1].s;
      LayerTrace<S>& lt = tr.layers[l];
      const int n = layer.out_w;
      const S decay = static_cast<S>(layer.p.decay);
      const S v_th = static_cast<S>(layer.p.v_th);
      const S gamma = static_cast<S>(layer.p.gamma);

      if (layer.kind == NeuronKind::Spsn) {
        for (int t = 0; t < steps; ++t) {
          gather_current(layer.wt, in.at(b, t), lt.c.at(b, t));
        }
        detail::spsn_window_sum(layer.kappa.data(), static_cast<int>(layer.kappa.size()),
                                lt.c, b, lt.u, memoryless);
        for (int t = 0; t < steps; ++t) {
          const S* urow = lt.u.at(b, t);
          S* srow = lt.s.at(b, t);
          S* frow = smooth ? lt.fired.at(b, t) : nullptr;
          for (int i = 0; i < n; ++i) {
            const S fire = heaviside(urow[i], v_th);
            srow[i] = smooth ? triangle_ramp(urow[i], v_th, gamma) : fire;
            if (frow) frow[i] = fire;
          }
        }
        continue;
      }

      // LIF and NoTd cells share one loop: NoTd is a LIF with no carry, and
      // Memoryless mode turns every cell into that.
      const bool carry = !memoryless && layer.kind == NeuronKind::Lif;
      const bool recur = !memoryless && layer.recurrent();
      for (int t = 0; t < steps; ++t) {
        S* c = cur.data();
        gather_current(layer.wt, in.at(b, t), c);
        if (recur && t > 0) {
          const S* sprev = lt.s.at(b, t - 1);
          for (int j = 0; j < n; ++j) {
            const S sv = sprev[j];
            if (sv == S(0)) continue;
            if (sv == S(1)) {
              add_row(layer.rt.row(j), c, n);
            } else {
              axpy(sv, layer.rt.row(j), c, n);
            }
          }
        }
        S* urow = lt.u.at(b, t);
        S* srow = lt.s.at(b, t);
        S* frow = smooth ? lt.fired.at(b, t) : nullptr;
        if (carry && t > 0) {
          const S* uprev = lt.u.at(b, t - 1);
          const S* fprev = smooth ? lt.fired.at(b, t - 1) : lt.s.at(b, t - 1);
          for (int i = 0; i < n; ++i) {
            urow[i] = decay * uprev[i] * (S(1) - fprev[i]) + c[i];
          }
        } else {
          std::copy(c, c + n, urow);
        }
        for (int i = 0; i < n; ++i) {
          const S fire = heaviside(urow[i], v_th);
          srow[i] = smooth ? triangle_ramp(urow[i], v_th, gamma) : fire;
          if (frow) frow[i] = fire;
        }
      }
    }

    // Readout.
    const Seq<S>& top = tr.layers.back().s;
    const Readout<S>& ro = net.readout;
    switch (spec.readout) {
      case ReadoutMode::MeanOverTime: {
        S* mean = tr.mean_spikes.row(b);
        for (int t = 0; t < steps; ++t) add_row(top.at(b, t), mean, top_w);
        const S inv = S(1) / static_cast<S>(steps);
        for (int i = 0; i < top_w; ++i) mean[i] *= inv;
        S* logit = out.logits.row(b);
        gather_current(ro.wt, mean, logit);
        add_row(ro.bias.data(), logit, spec.classes);
        break;
      }
      case ReadoutMode::LastStep: {
        S* logit = out.logits.row(b);
        gather_current(ro.wt, top.at(b, steps - 1), logit);
        add_row(ro.bias.data(), logit, spec.classes);
        break;
      }
      case ReadoutMode::PerStep: {
        for (int t = 0; t < steps; ++t) {
          S* logit = out.step_logits.at(b, t);
          gather_current(ro.wt, top.at(b, t), logit);
          add_row(ro.bias.data(), logit, spec.classes);
        }
        break;
      }
    }
  };

  if (ex == Exec::Parallel) {
#pragma omp parallel
    {
      std::vector<S> cur(max_w);
      const Shard sh = shard_of(batch, thread_id(), team_size());
      for (int b = sh.begin; b < sh.end; ++b) run_sample(b, cur);
    }
  } else {
    std::vector<S> cur(max_w);
    for (int b = 0; b < batch; ++b) run_sample(b, cur);
  }
  return out;
}

// Aggregating readout over an explicit spike block; the standalone form of
// what forward_sequence does internally.
template <class S>
Mat<S> readout_aggregate(const Seq<S>& spikes, const Readout<S>& ro, ReadoutMode mode) {
  if (spikes.channels != ro.in_w) {
    throw DimensionError("readout: spike width " + std::to_string(spikes.channels) +
                         " vs readout input " + std::to_string(ro.in_w));
  }
  if (spikes.steps < 1) throw DataError("readout: empty sequence");
  if (mode == ReadoutMode::PerStep) {
    throw ContractError("readout_aggregate: per-step readout yields a sequence; "
                        "use readout_per_step");
  }
  Mat<S> logits(spikes.batch, ro.classes);
  std::vector<S> mean(ro.in_w);
  for (int b = 0; b < spikes.batch; ++b) {
    const S* feat;
    if (mode == ReadoutMode::MeanOverTime) {
      std::fill(mean.begin(), mean.end(), S(0));
      for (int t = 0; t < spikes.steps; ++t) add_row(spikes.at(b, t), mean.data(), ro.in_w);
      const S inv = S(1) / static_cast<S>(spikes.steps);
      for (int i = 0; i < ro.in_w; ++i) mean[i] *= inv;
      feat = mean.data();
    } else {
      feat = spikes.at(b, spikes.steps - 1);
    }
    S* row = logits.row(b);
    gather_current(ro.wt, feat, row);
    add_row(ro.bias.data(), row, ro.classes);
  }
  return logits;
}

template <class S>
Seq<S> readout_per_step(const Seq<S>& spikes, const Readout<S>& ro) {
  if (spikes.channels != ro.in_w) {
    throw DimensionError("readout: spike width " + std::to_string(spikes.channels) +
                         " vs readout input " + std::to_string(ro.in_w));
  }
  Seq<S> logits(spikes.batch, spikes.steps, ro.classes);
  for (int b = 0; b < spikes.batch; ++b) {
    for (int t = 0; t < spikes.steps; ++t) {
      S* row = logits.at(b, t);
      gather_current(ro.wt, spikes.at(b, t), row);
      add_row(ro.bias.data(), row, ro.classes);
    }
  }
  return logits;
}

}  // namespace snn
