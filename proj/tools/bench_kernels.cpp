// Compares the OpenMP batch-parallel kernels against their serial reference
// on identical inputs: wall time, speedup, and worst-case output divergence.

#include <chrono>
#include <cstdio>
#include <vector>

#include <CLI11.hpp>

#include "snn/backward.hpp"
#include "snn/forward.hpp"
#include "snn/kernels.hpp"
#include "snn/loss.hpp"
#include "snn/rng.hpp"

using namespace snn;

namespace {

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

template <class F>
double time_best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now_s();
    f();
    best = std::min(best, now_s() - t0);
  }
  return best;
}

double max_abs_gap(const GradSet<float>& a, const GradSet<float>& b) {
  double gap = 0.0;
  std::vector<std::pair<const float*, std::size_t>> spans;
  b.for_each_span([&](const float* p, std::size_t n) { spans.emplace_back(p, n); });
  std::size_t i = 0;
  a.for_each_span([&](const float* p, std::size_t n) {
    const float* q = spans[i++].first;
    for (std::size_t j = 0; j < n; ++j) {
      gap = std::max(gap, std::abs(static_cast<double>(p[j]) - q[j]));
    }
  });
  return gap;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs parallel kernel comparison"};
  int batch = 64;
  int steps = 100;
  int width = 128;
  int reps = 3;
  app.add_option("--batch", batch, "batch size");
  app.add_option("--steps", steps, "sequence length");
  app.add_option("--width", width, "hidden width");
  app.add_option("--reps", reps, "repetitions (best-of)");
  CLI11_PARSE(app, argc, argv);

  std::printf("threads available: %d\n", max_threads());
  std::printf("%-22s %12s %12s %9s %12s\n", "kernel", "serial (s)", "parallel (s)",
              "speedup", "max |diff|");

  // affine
  {
    RngStream rng(7, 1);
    Mat32 x(batch * 4, width);
    Mat32 wt(width, width);
    fill_uniform(rng, x.v.data(), x.size(), -1.0, 1.0);
    fill_uniform(rng, wt.v.data(), wt.size(), -0.1, 0.1);
    Mat32 ys, yp;
    const std::vector<float>* no_bias = nullptr;
    const double ts = time_best_of(reps, [&] { ys = affine(x, wt, no_bias, Exec::Serial); });
    const double tp = time_best_of(reps, [&] { yp = affine(x, wt, no_bias, Exec::Parallel); });
    double gap = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      gap = std::max(gap, std::abs(static_cast<double>(ys.v[i]) - yp.v[i]));
    }
    std::printf("%-22s %12.4f %12.4f %8.2fx %12.3g\n", "affine", ts, tp, ts / tp, gap);
  }

  // forward + backward over a three-layer LIF net
  {
    NetworkSpec spec;
    spec.input_width = width;
    spec.hidden = {width, width, width};
    spec.neuron.assign(3, NeuronKind::Lif);
    spec.classes = 10;
    Network32 net = build_network<float>(spec, 11);

    RngStream rng(7, 2);
    Seq32 x(batch, steps, width);
    for (auto& v : x.v) v = rng.uniform() < 0.1 ? 1.0f : 0.0f;
    std::vector<std::uint32_t> labels(batch);
    for (int b = 0; b < batch; ++b) labels[b] = static_cast<std::uint32_t>(b % 10);

    ForwardResult<float> fs, fp;
    const double ts = time_best_of(reps, [&] {
      fs = forward_sequence(net, x, ForwardMode::Temporal, SpikeMode::Hard, Exec::Serial);
    });
    const double tp = time_best_of(reps, [&] {
      fp = forward_sequence(net, x, ForwardMode::Temporal, SpikeMode::Hard, Exec::Parallel);
    });
    double fgap = 0.0;
    for (std::size_t i = 0; i < fs.logits.size(); ++i) {
      fgap = std::max(fgap, std::abs(static_cast<double>(fs.logits.v[i]) - fp.logits.v[i]));
    }
    std::printf("%-22s %12.4f %12.4f %8.2fx %12.3g\n", "forward_sequence", ts, tp, ts / tp,
                fgap);

    const auto loss = cross_entropy(fs.logits, labels);
    GradSet<float> gs, gp;
    const double bs = time_best_of(
        reps, [&] { gs = backward_stbp(net, fs.trace, loss.dlogits, Exec::Serial); });
    const double bp = time_best_of(
        reps, [&] { gp = backward_stbp(net, fp.trace, loss.dlogits, Exec::Parallel); });
    std::printf("%-22s %12.4f %12.4f %8.2fx %12.3g\n", "backward_stbp", bs, bp, bs / bp,
                max_abs_gap(gs, gp));
  }
  return 0;
}
