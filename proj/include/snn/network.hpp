#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "snn/error.hpp"
#include "snn/neuron.hpp"
#include "snn/rng.hpp"
#include "snn/tensor.hpp"

namespace snn {

enum class Arch { Sfnn, Srnn };
enum class NeuronKind { Lif, NoTd, Spsn };
enum class ReadoutMode { MeanOverTime, LastStep, PerStep };

inline const char* to_string(Arch a) { return a == Arch::Sfnn ? "sfnn" : "srnn"; }

inline const char* to_string(NeuronKind k) {
  switch (k) {
    case NeuronKind::Lif: return "lif";
    case NeuronKind::NoTd: return "notd";
    case NeuronKind::Spsn: return "spsn";
  }
  return "?";
}

inline const char* to_string(ReadoutMode m) {
  switch (m) {
    case ReadoutMode::MeanOverTime: return "mean";
    case ReadoutMode::LastStep: return "last";
    case ReadoutMode::PerStep: return "per-step";
  }
  return "?";
}

// Static description of a network: topology plus shared cell constants.
struct NetworkSpec {
  Arch arch = Arch::Sfnn;
  int input_width = 0;
  std::vector<int> hidden;            // hidden layer widths
  std::vector<NeuronKind> neuron;     // one kind per hidden layer
  int classes = 0;
  ReadoutMode readout = ReadoutMode::MeanOverTime;
  LifParams lif;                      // decay / threshold / surrogate width
  int spsn_kernel = 1;                // kernel length for SPSN layers

  void validate() const {
    if (input_width < 1) throw ConfigError("net: input width must be >= 1");
    if (classes < 1) throw ConfigError("net: class count must be >= 1");
    if (hidden.empty()) throw ConfigError("net: at least one hidden layer required");
    if (neuron.size() != hidden.size()) {
      throw ConfigError("net: neuron kinds (" + std::to_string(neuron.size()) +
                        ") must match hidden layers (" + std::to_string(hidden.size()) + ")");
    }
    for (int w : hidden) {
      if (w < 1) throw ConfigError("net: hidden width must be >= 1, got " + std::to_string(w));
    }
    lif.validate();
    for (NeuronKind k : neuron) {
      if (k == NeuronKind::Spsn) {
        SpsnParams sp;
        sp.k = spsn_kernel;
        sp.v_th = lif.v_th;
        sp.gamma = lif.gamma;
        sp.validate();
        if (arch == Arch::Srnn) {
          throw ConfigError("net: spsn layers are feedforward-only; srnn+spsn is not defined");
        }
      }
      if (k == NeuronKind::NoTd && arch == Arch::Srnn) {
        throw ConfigError("net: notd cells are feedforward-only; recurrence is a "
                          "cross-step path");
      }
    }
  }
};

// Hidden layer. Weights are stored input-major: wt[j] is the length-out_w
// fan-out row of input j, so a binary input spike adds one contiguous row.
template <class S>
struct Layer {
  NeuronKind kind = NeuronKind::Lif;
  int in_w = 0;
  int out_w = 0;
  Mat<S> wt;              // [in_w x out_w]
  Mat<S> rt;              // [out_w x out_w], recurrent, input-major; empty for SFNN
  std::vector<S> kappa;   // SPSN kernel, size k; empty otherwise
  LifParams p;

  bool recurrent() const { return rt.rows > 0; }
};

// Non-spiking affine readout over hidden spikes.
template <class S>
struct Readout {
  int in_w = 0;
  int classes = 0;
  Mat<S> wt;              // [in_w x classes], input-major
  std::vector<S> bias;    // [classes]
};

template <class S>
struct Network {
  NetworkSpec spec;
  std::vector<Layer<S>> layers;
  Readout<S> readout;

  int depth() const { return static_cast<int>(layers.size()); }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) {
      n += l.wt.size() + l.rt.size() + l.kappa.size();
    }
    return n + readout.wt.size() + readout.bias.size();
  }
};

using Network32 = Network<float>;
using Network64 = Network<double>;

// Named view of one parameter tensor; build_param_refs yields them in a
// fixed order shared by the optimizer, serializer and gradient containers.
template <class S>
struct ParamRef {
  std::string name;
  S* data = nullptr;
  std::size_t size = 0;
};

template <class S>
std::vector<ParamRef<S>> build_param_refs(Network<S>& net) {
  std::vector<ParamRef<S>> refs;
  for (int l = 0; l < net.depth(); ++l) {
    auto& layer = net.layers[l];
    const std::string tag = "layer" + std::to_string(l);
    refs.push_back({tag + ".w", layer.wt.v.data(), layer.wt.size()});
    if (layer.recurrent()) {
      refs.push_back({tag + ".r", layer.rt.v.data(), layer.rt.size()});
    }
    if (!layer.kappa.empty()) {
      refs.push_back({tag + ".kappa", layer.kappa.data(), layer.kappa.size()});
    }
  }
  refs.push_back({"readout.w", net.readout.wt.v.data(), net.readout.wt.size()});
  refs.push_back({"readout.b", net.readout.bias.data(), net.readout.bias.size()});
  return refs;
}

// Seeded uniform(-sqrt(1/fan_in), +sqrt(1/fan_in)) initialization. Every
// tensor draws from its own stream, so the same seed always produces the
// same network regardless of construction order elsewhere.
template <class S>
Network<S> build_network(const NetworkSpec& spec, std::uint64_t init_seed) {
  spec.validate();
  Network<S> net;
  net.spec = spec;
  int in_w = spec.input_width;
  for (std::size_t l = 0; l < spec.hidden.size(); ++l) {
    Layer<S> layer;
    layer.kind = spec.neuron[l];
    layer.in_w = in_w;
    layer.out_w = spec.hidden[l];
    layer.p = spec.lif;
    layer.wt = Mat<S>(in_w, layer.out_w);
    const double bound_w = std::sqrt(1.0 / in_w);
    RngStream ws(init_seed, streams::kInitBase + 4 * l);
    fill_uniform(ws, layer.wt.v.data(), layer.wt.size(), -bound_w, bound_w);
    if (spec.arch == Arch::Srnn) {
      layer.rt = Mat<S>(layer.out_w, layer.out_w);
      const double bound_r = std::sqrt(1.0 / layer.out_w);
      RngStream rs(init_seed, streams::kInitBase + 4 * l + 1);
      fill_uniform(rs, layer.rt.v.data(), layer.rt.size(), -bound_r, bound_r);
    }
    if (layer.kind == NeuronKind::Spsn) {
      layer.kappa.assign(spec.spsn_kernel, S(0));
      const double bound_k = std::sqrt(1.0 / spec.spsn_kernel);
      RngStream ks(init_seed, streams::kInitBase + 4 * l + 2);
      fill_uniform(ks, layer.kappa.data(), layer.kappa.size(), -bound_k, bound_k);
    }
    net.layers.push_back(std::move(layer));
    in_w = spec.hidden[l];
  }
  net.readout.in_w = in_w;
  net.readout.classes = spec.classes;
  net.readout.wt = Mat<S>(in_w, spec.classes);
  const double bound_o = std::sqrt(1.0 / in_w);
  RngStream os(init_seed, streams::kInitReadout);
  fill_uniform(os, net.readout.wt.v.data(), net.readout.wt.size(), -bound_o, bound_o);
  net.readout.bias.assign(spec.classes, S(0));
  return net;
}

}  // namespace snn
