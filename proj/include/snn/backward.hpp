#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "snn/forward.hpp"
#include "snn/network.hpp"

namespace snn {

// Gradients shaped like a Network's parameters, in the same order as
// build_param_refs.
template <class S>
struct GradSet {
  std::vector<Mat<S>> wt;
  std::vector<Mat<S>> rt;                // 0 x 0 where the layer has none
  std::vector<std::vector<S>> kappa;     // empty where the layer has none
  Mat<S> readout_wt;
  std::vector<S> readout_bias;

  static GradSet zeros_like(const Network<S>& net) {
    GradSet g;
    for (const auto& layer : net.layers) {
      g.wt.emplace_back(layer.wt.rows, layer.wt.cols);
      g.rt.emplace_back(layer.rt.rows, layer.rt.cols);
      g.kappa.emplace_back(layer.kappa.size(), S(0));
    }
    g.readout_wt = Mat<S>(net.readout.wt.rows, net.readout.wt.cols);
    g.readout_bias.assign(net.readout.bias.size(), S(0));
    return g;
  }

  template <class F>
  void for_each_span(F&& f) {
    for (auto& m : wt) f(m.v.data(), m.v.size());
    for (auto& m : rt) f(m.v.data(), m.v.size());
    for (auto& k : kappa) f(k.data(), k.size());
    f(readout_wt.v.data(), readout_wt.v.size());
    f(readout_bias.data(), readout_bias.size());
  }
  template <class F>
  void for_each_span(F&& f) const {
    const_cast<GradSet*>(this)->for_each_span(
        [&](S* p, std::size_t n) { f(static_cast<const S*>(p), n); });
  }

  void add(const GradSet& o) {
    std::vector<std::pair<const S*, std::size_t>> spans;
    o.for_each_span([&](const S* p, std::size_t n) { spans.emplace_back(p, n); });
    std::size_t i = 0;
    for_each_span([&](S* p, std::size_t n) {
      if (i >= spans.size() || spans[i].second != n) {
        throw DimensionError("GradSet::add: incompatible shapes");
      }
      const S* q = spans[i++].first;
      for (std::size_t j = 0; j < n; ++j) p[j] += q[j];
    });
  }

  void scale(S a) {
    for_each_span([&](S* p, std::size_t n) {
      for (std::size_t j = 0; j < n; ++j) p[j] *= a;
    });
  }

  double sq_norm() const {
    double acc = 0.0;
    for_each_span([&](const S* p, std::size_t n) {
      for (std::size_t j = 0; j < n; ++j) {
        acc += static_cast<double>(p[j]) * static_cast<double>(p[j]);
      }
    });
    return acc;
  }
  double global_norm() const { return std::sqrt(sq_norm()); }

  bool all_finite() const {
    bool ok = true;
    for_each_span([&](const S* p, std::size_t n) {
      if (ok && !detail::span_finite(p, n)) ok = false;
    });
    return ok;
  }

  std::size_t count() const {
    std::size_t total = 0;
    for_each_span([&](const S*, std::size_t n) { total += n; });
    return total;
  }
};

// Gradient tensors in build_param_refs order, to zip with network parameters.
template <class S>
std::vector<ParamRef<S>> build_grad_refs(GradSet<S>& g, const Network<S>& net) {
  std::vector<ParamRef<S>> refs;
  for (int l = 0; l < net.depth(); ++l) {
    const std::string tag = "layer" + std::to_string(l);
    refs.push_back({tag + ".w", g.wt[l].v.data(), g.wt[l].size()});
    if (net.layers[l].recurrent()) {
      refs.push_back({tag + ".r", g.rt[l].v.data(), g.rt[l].size()});
    }
    if (!net.layers[l].kappa.empty()) {
      refs.push_back({tag + ".kappa", g.kappa[l].data(), g.kappa[l].size()});
    }
  }
  refs.push_back({"readout.w", g.readout_wt.v.data(), g.readout_wt.size()});
  refs.push_back({"readout.b", g.readout_bias.data(), g.readout_bias.size()});
  return refs;
}

// Which cross-step credit paths the backward pass keeps. Full temporal
// credit keeps all three; severing all of them leaves the spatial-only pass.
struct BackwardOptions {
  bool membrane_carry = true;    // decay * (1 - fired) membrane edge
  bool recurrent_carry = true;   // credit through recurrent spikes
  bool window_carry = true;      // SPSN kernel taps at lag > 0
};

namespace detail {

template <class S>
void check_trace(const Network<S>& net, const Trace<S>& tr, const Mat<S>& dlogits) {
  if (static_cast<int>(tr.layers.size()) != net.depth()) {
    throw ContractError("backward: trace depth " + std::to_string(tr.layers.size()) +
                        " does not match network depth " + std::to_string(net.depth()));
  }
  for (int l = 0; l < net.depth(); ++l) {
    if (tr.layers[l].s.channels != net.layers[l].out_w) {
      throw ContractError("backward: trace width mismatch at layer " + std::to_string(l));
    }
  }
  if (net.spec.readout == ReadoutMode::PerStep) {
    throw ContractError("backward: per-step readout has no aggregate logit gradient; "
                        "train with mean or last readout");
  }
  dlogits.require_shape(tr.batch, net.spec.classes, "backward: dlogits");
  if (net.spec.readout == ReadoutMode::MeanOverTime &&
      (tr.mean_spikes.rows != tr.batch ||
       tr.mean_spikes.cols != net.layers.back().out_w)) {
    throw ContractError("backward: trace lacks mean spike rates for mean readout");
  }
}

// Backward credit assignment for one sample. delta buffers live in
// thread-local scratch; gradients accumulate into `g`.
template <class S>
void backward_sample(const Network<S>& net, const Trace<S>& tr, const Mat<S>& dlogits,
                     const BackwardOptions& opt, int b, GradSet<S>& g,
                     std::vector<std::vector<S>>& pool, std::vector<S>& top_vec) {
  const int steps = tr.steps;
  const int depth = net.depth();
  const int classes = net.spec.classes;
  const bool temporal = tr.mode == ForwardMode::Temporal;
  const S* dl = dlogits.row(b);

  // Readout parameter gradients and the loss-to-top-spike pullback.
  const Readout<S>& ro = net.readout;
  const int top_w = ro.in_w;
  add_row(dl, g.readout_bias.data(), classes);
  const bool mean_mode = net.spec.readout == ReadoutMode::MeanOverTime;
  if (mean_mode) {
    const S* mean = tr.mean_spikes.row(b);
    for (int j = 0; j < top_w; ++j) {
      if (mean[j] != S(0)) axpy(mean[j], dl, g.readout_wt.row(j), classes);
    }
    const S inv_t = S(1) / static_cast<S>(steps);
    for (int j = 0; j < top_w; ++j) {
      top_vec[j] = dot(ro.wt.row(j), dl, classes) * inv_t;
    }
  } else {
    const S* last = tr.layers.back().s.at(b, steps - 1);
    for (int j = 0; j < top_w; ++j) {
      if (last[j] != S(0)) axpy(last[j], dl, g.readout_wt.row(j), classes);
    }
    for (int j = 0; j < top_w; ++j) {
      top_vec[j] = dot(ro.wt.row(j), dl, classes);
    }
  }

  int above_idx = -1;  // pool slot holding d(current) of the layer above
  int n_above = 0;
  for (int l = depth - 1; l >= 0; --l) {
    const Layer<S>& layer = net.layers[l];
    const LayerTrace<S>& lt = tr.layers[l];
    const int n = layer.out_w;
    const S v_th = static_cast<S>(layer.p.v_th);
    const S gamma = static_cast<S>(layer.p.gamma);
    const S decay = static_cast<S>(layer.p.decay);
    const bool top = l == depth - 1;
    const Mat<S>* wt_above = top ? nullptr : &net.layers[l + 1].wt;
    const S* dcur_above = top ? nullptr : pool[above_idx].data();

    const int didx = (above_idx == 0) ? 1 : 0;
    S* delta = pool[didx].data();

    const bool is_spsn = layer.kind == NeuronKind::Spsn;
    const bool carry = temporal && opt.membrane_carry && layer.kind == NeuronKind::Lif;
    const bool recur = temporal && layer.recurrent();
    const bool recur_carry = recur && opt.recurrent_carry;
    const Seq<S>* fired = temporal ? &tr.fired(l) : nullptr;

    // d(loss)/d(membrane) per step, walked backward in time.
    for (int t = steps - 1; t >= 0; --t) {
      const S* urow = lt.u.at(b, t);
      S* drow = delta + static_cast<std::size_t>(t) * n;
      const S* dnext = t + 1 < steps ? drow + n : nullptr;
      const S* frow = carry ? fired->at(b, t) : nullptr;
      for (int i = 0; i < n; ++i) {
        const S sg = triangle_surrogate(urow[i], v_th, gamma);
        S acc = S(0);
        if (carry && dnext) acc = decay * (S(1) - frow[i]) * dnext[i];
        if (sg != S(0)) {
          S v;
          if (top) {
            v = mean_mode ? top_vec[i] : (t == steps - 1 ? top_vec[i] : S(0));
          } else {
            v = dot(wt_above->row(i),
                    dcur_above + static_cast<std::size_t>(t) * n_above, n_above);
          }
          if (recur_carry && dnext) v += dot(layer.rt.row(i), dnext, n);
          acc += v * sg;
        }
        drow[i] = acc;
      }
    }

    // d(loss)/d(input current) per step: identical to delta except for the
    // SPSN kernel, which spreads each membrane gradient over its taps.
    int cur_idx = didx;
    if (is_spsn) {
      const int k = static_cast<int>(layer.kappa.size());
      const int win = (temporal && opt.window_carry) ? k : 1;
      for (int tau = 0; tau < win; ++tau) {
        double acc = 0.0;
        for (int t = tau; t < steps; ++t) {
          acc += static_cast<double>(dot(delta + static_cast<std::size_t>(t) * n,
                                         lt.c.at(b, t - tau), n));
        }
        g.kappa[l][tau] += static_cast<S>(acc);
      }
      int cidx = above_idx >= 0 ? above_idx : (didx == 0 ? 1 : 0);
      S* dc = pool[cidx].data();
      for (int t = 0; t < steps; ++t) {
        S* row = dc + static_cast<std::size_t>(t) * n;
        std::fill(row, row + n, S(0));
        const int lim = std::min(win - 1, steps - 1 - t);
        for (int tau = 0; tau <= lim; ++tau) {
          axpy(layer.kappa[tau], delta + static_cast<std::size_t>(t + tau) * n, row, n);
        }
      }
      cur_idx = cidx;
    }
    const S* dcur = pool[cur_idx].data();

    // Weight gradients: every input spike scatters its step's current
    // gradient onto one weight row.
    const Seq<S>& in = l == 0 ? tr.input : tr.layers[l - 1].s;
    const int in_w = layer.in_w;
    for (int t = 0; t < steps; ++t) {
      const S* xrow = in.at(b, t);
      const S* drow = dcur + static_cast<std::size_t>(t) * n;
      for (int j = 0; j < in_w; ++j) {
        const S xv = xrow[j];
        if (xv == S(0)) continue;
        if (xv == S(1)) {
          add_row(drow, g.wt[l].row(j), n);
        } else {
          axpy(xv, drow, g.wt[l].row(j), n);
        }
      }
    }
    if (recur) {
      for (int t = 1; t < steps; ++t) {
        const S* srow = lt.s.at(b, t - 1);
        const S* drow = delta + static_cast<std::size_t>(t) * n;
        for (int j = 0; j < n; ++j) {
          const S sv = srow[j];
          if (sv == S(0)) continue;
          if (sv == S(1)) {
            add_row(drow, g.rt[l].row(j), n);
          } else {
            axpy(sv, drow, g.rt[l].row(j), n);
          }
        }
      }
    }

    above_idx = cur_idx;
    n_above = n;
  }
}

template <class S>
GradSet<S> backward_impl(const Network<S>& net, const Trace<S>& tr,
                         const Mat<S>& dlogits, const BackwardOptions& opt, Exec ex) {
  check_trace(net, tr, dlogits);
  int max_w = 0;
  for (const auto& layer : net.layers) max_w = std::max(max_w, layer.out_w);
  const std::size_t scratch = static_cast<std::size_t>(tr.steps) * max_w;

  if (ex == Exec::Serial) {
    GradSet<S> g = GradSet<S>::zeros_like(net);
    std::vector<std::vector<S>> pool(2, std::vector<S>(scratch));
    std::vector<S> top_vec(net.readout.in_w);
    for (int b = 0; b < tr.batch; ++b) {
      backward_sample(net, tr, dlogits, opt, b, g, pool, top_vec);
    }
    return g;
  }

  // Per-thread partial gradients over static batch shards, reduced in thread
  // order: bit-identical for a fixed thread count.
  std::vector<GradSet<S>> parts;
#pragma omp parallel
  {
#pragma omp single
    { parts.assign(team_size(), GradSet<S>::zeros_like(net)); }
    std::vector<std::vector<S>> pool(2, std::vector<S>(scratch));
    std::vector<S> top_vec(net.readout.in_w);
    const Shard sh = shard_of(tr.batch, thread_id(), team_size());
    GradSet<S>& mine = parts[thread_id()];
    for (int b = sh.begin; b < sh.end; ++b) {
      backward_sample(net, tr, dlogits, opt, b, mine, pool, top_vec);
    }
  }
  GradSet<S> g = std::move(parts[0]);
  for (std::size_t i = 1; i < parts.size(); ++i) g.add(parts[i]);
  return g;
}

}  // namespace detail

// Full spatio-temporal credit assignment over a temporal trace. `opt` can
// sever individual cross-step paths; all-severed equals backward_sdbp.
template <class S>
GradSet<S> backward_stbp(const Network<S>& net, const Trace<S>& tr,
                         const Mat<S>& dlogits, Exec ex = Exec::Parallel,
                         const BackwardOptions& opt = BackwardOptions{}) {
  if (tr.mode != ForwardMode::Temporal) {
    throw ContractError("backward_stbp: needs a temporal trace");
  }
  return detail::backward_impl(net, tr, dlogits, opt, ex);
}

// Spatial-only credit over a temporal trace: the forward state recursion is
// intact, but no gradient crosses a time step.
template <class S>
GradSet<S> backward_sdbp(const Network<S>& net, const Trace<S>& tr,
                         const Mat<S>& dlogits, Exec ex = Exec::Parallel) {
  if (tr.mode != ForwardMode::Temporal) {
    throw ContractError("backward_sdbp: needs a temporal trace; "
                        "use backward_notd for memoryless traces");
  }
  return detail::backward_impl(net, tr, dlogits,
                               BackwardOptions{false, false, false}, ex);
}

// Spatial credit over a memoryless trace: forward and backward both see an
// isolated per-step network.
template <class S>
GradSet<S> backward_notd(const Network<S>& net, const Trace<S>& tr,
                         const Mat<S>& dlogits, Exec ex = Exec::Parallel) {
  if (tr.mode != ForwardMode::Memoryless) {
    throw ContractError("backward_notd: needs a memoryless trace");
  }
  return detail::backward_impl(net, tr, dlogits,
                               BackwardOptions{false, false, false}, ex);
}

}  // namespace snn
