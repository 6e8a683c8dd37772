#include "snn/efficiency.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "snn/loss.hpp"
#include "snn/optimizer.hpp"

namespace snn {

double SpikeStats::rate_of(int population) const {
  for (std::size_t i = 0; i < populations.size(); ++i) {
    if (populations[i] == population) return rates[i];
  }
  throw QueryError("spike stats: population " + std::to_string(population) +
                   " was not recorded");
}

double spike_frequency(const Seq32& spikes) {
  if (spikes.size() == 0) throw DataError("spike_frequency: empty block");
  double nnz = 0;
  for (float x : spikes.v) nnz += x != 0.0f ? 1.0 : 0.0;
  return nnz / static_cast<double>(spikes.size());
}

namespace {

struct Activity {
  std::int64_t samples = 0;
  int steps = 0;
  double nnz_in = 0.0;
  std::vector<double> nnz_s;       // per layer, all steps
  std::vector<double> nnz_s_last;  // per layer, final step only
};

double count_nnz(const Seq32& plane) {
  double nnz = 0;
  for (float x : plane.v) nnz += x != 0.0f ? 1.0 : 0.0;
  return nnz;
}

double count_nnz_last_step(const Seq32& plane) {
  double nnz = 0;
  for (int b = 0; b < plane.batch; ++b) {
    const float* row = plane.at(b, plane.steps - 1);
    for (int c = 0; c < plane.channels; ++c) nnz += row[c] != 0.0f ? 1.0 : 0.0;
  }
  return nnz;
}

Activity collect_activity(const Network32& net, const Dataset& ds, int batch_size,
                          ForwardMode mode, Exec ex) {
  if (ds.n() == 0) throw DataError("activity: empty dataset");
  Activity act;
  act.steps = ds.steps();
  act.nnz_s.assign(net.depth(), 0.0);
  act.nnz_s_last.assign(net.depth(), 0.0);
  for (const auto& idx : batch_partition(ds.meta.n, batch_size, nullptr)) {
    Batch b = gather_batch(ds, idx);
    act.samples += static_cast<std::int64_t>(idx.size());
    auto fwd = forward_sequence(net, std::move(b.inputs), mode, SpikeMode::Hard, ex);
    act.nnz_in += count_nnz(fwd.trace.input);
    for (int l = 0; l < net.depth(); ++l) {
      act.nnz_s[l] += count_nnz(fwd.trace.layers[l].s);
      act.nnz_s_last[l] += count_nnz_last_step(fwd.trace.layers[l].s);
    }
  }
  return act;
}

}  // namespace

SpikeStats record_spike_stats(const Network32& net, const Dataset& ds,
                              const std::vector<int>& populations, int batch_size,
                              ForwardMode mode, Exec ex) {
  std::vector<int> pops = populations;
  if (pops.empty()) {
    pops.push_back(-1);
    for (int l = 0; l < net.depth(); ++l) pops.push_back(l);
  }
  for (int p : pops) {
    if (p < -1 || p >= net.depth()) {
      throw QueryError("spike stats: population " + std::to_string(p) +
                       " out of range (-1.." + std::to_string(net.depth() - 1) + ")");
    }
  }
  const Activity act = collect_activity(net, ds, batch_size, mode, ex);
  const double denom = static_cast<double>(act.samples) * act.steps;

  SpikeStats st;
  st.samples = act.samples;
  st.steps = act.steps;
  for (int p : pops) {
    st.populations.push_back(p);
    if (p == -1) {
      st.names.push_back("input");
      st.rates.push_back(act.nnz_in / (denom * ds.channels()));
    } else {
      st.names.push_back("layer" + std::to_string(p));
      st.rates.push_back(act.nnz_s[p] / (denom * net.layers[p].out_w));
    }
  }
  return st;
}

OpCounts count_ops(const Network32& net, const Dataset& ds, int batch_size,
                   ForwardMode mode, Exec ex) {
  const Activity act = collect_activity(net, ds, batch_size, mode, ex);
  const double denom = static_cast<double>(act.samples) * act.steps;
  const bool memoryless = mode == ForwardMode::Memoryless;

  OpCounts ops;
  for (int l = 0; l < net.depth(); ++l) {
    const Layer<float>& layer = net.layers[l];
    OpCounts::Row row;
    row.name = "layer" + std::to_string(l);
    const double in_nnz = l == 0 ? act.nnz_in : act.nnz_s[l - 1];
    row.acs = layer.out_w * in_nnz / denom;  // fan-out accumulations
    const bool stateful = !memoryless && layer.kind == NeuronKind::Lif;
    if (stateful) {
      row.acs += act.nnz_s[l] / denom;  // one reset per emitted spike
      row.macs += layer.out_w;          // leak, per neuron per step
    }
    if (!memoryless && layer.recurrent()) {
      // spikes before the last step re-enter through the recurrent weights
      row.acs += layer.out_w * (act.nnz_s[l] - act.nnz_s_last[l]) / denom;
    }
    if (layer.kind == NeuronKind::Spsn) {
      const double taps = memoryless ? 1.0 : static_cast<double>(layer.kappa.size());
      row.macs += layer.out_w * taps;  // kernel taps, zero padding included
    }
    ops.hidden_acs += row.acs;
    ops.hidden_macs += row.macs;
    ops.layers.push_back(row);
  }

  const int top = net.depth() - 1;
  const double top_nnz = act.nnz_s[top];
  ops.readout.name = "readout";
  switch (net.spec.readout) {
    case ReadoutMode::MeanOverTime:
      // spike-driven rate accumulation, then one affine per sample
      ops.readout.acs = top_nnz / denom;
      ops.readout.macs = static_cast<double>(net.readout.in_w + 1) * net.readout.classes /
                         act.steps;
      break;
    case ReadoutMode::LastStep:
      ops.readout.acs = net.readout.classes * act.nnz_s_last[top] /
                        (static_cast<double>(act.samples) * act.steps);
      ops.readout.macs = static_cast<double>(net.readout.classes) / act.steps;
      break;
    case ReadoutMode::PerStep:
      ops.readout.acs = net.readout.classes * top_nnz / denom;
      ops.readout.macs = net.readout.classes;
      break;
  }
  return ops;
}

const char* to_string(EnergyRow row) {
  switch (row) {
    case EnergyRow::FfsnnLif: return "ffsnn-lif";
    case EnergyRow::FfsnnCeLif: return "ffsnn-ce-lif";
    case EnergyRow::FfsnnLtc: return "ffsnn-ltc";
    case EnergyRow::FfsnnSpsn: return "ffsnn-spsn";
    case EnergyRow::FfsnnPmsn: return "ffsnn-pmsn";
    case EnergyRow::SrnnLif: return "srnn-lif";
    case EnergyRow::SrnnCeLif: return "srnn-ce-lif";
    case EnergyRow::SrnnLtc: return "srnn-ltc";
    case EnergyRow::Gsn: return "gsn";
    case EnergyRow::SpikingTcn: return "spiking-tcn";
    case EnergyRow::SpikeDrivenTransformer: return "spike-driven-transformer";
    case EnergyRow::BinaryS4d: return "binary-s4d";
    case EnergyRow::Gsu: return "gsu";
  }
  return "?";
}

EnergyRow parse_energy_row(const std::string& name) {
  static const EnergyRow all[] = {
      EnergyRow::FfsnnLif,   EnergyRow::FfsnnCeLif, EnergyRow::FfsnnLtc,
      EnergyRow::FfsnnSpsn,  EnergyRow::FfsnnPmsn,  EnergyRow::SrnnLif,
      EnergyRow::SrnnCeLif,  EnergyRow::SrnnLtc,    EnergyRow::Gsn,
      EnergyRow::SpikingTcn, EnergyRow::SpikeDrivenTransformer,
      EnergyRow::BinaryS4d,  EnergyRow::Gsu,
  };
  for (EnergyRow r : all) {
    if (name == to_string(r)) return r;
  }
  throw QueryError("energy: unknown row '" + name + "'");
}

namespace {

double need_fr(const std::optional<double>& v, const char* field, EnergyRow row) {
  if (!v.has_value()) {
    throw QueryError("energy: row " + std::string(to_string(row)) + " requires " + field);
  }
  if (!(*v >= 0.0 && *v <= 1.0) || !std::isfinite(*v)) {
    throw QueryError("energy: " + std::string(field) + " must be in [0, 1], got " +
                     std::to_string(*v));
  }
  return *v;
}

double need_dim(double v, const char* field, EnergyRow row) {
  if (!(v >= 1.0) || !std::isfinite(v)) {
    throw QueryError("energy: row " + std::string(to_string(row)) + " requires " + field +
                     " >= 1, got " + std::to_string(v));
  }
  return v;
}

}  // namespace

EnergyResult energy_formula(const EnergyQuery& q) {
  if (!(q.constants.e_ac > 0.0) || !(q.constants.e_mac > 0.0)) {
    throw QueryError("energy: op costs must be positive");
  }
  const EnergyRow row = q.row;
  const double n = need_dim(q.n, "n", row);
  double acs = 0.0;
  double macs = 0.0;
  switch (row) {
    case EnergyRow::FfsnnLif:
    case EnergyRow::FfsnnCeLif: {
      const double m = need_dim(q.m, "m", row);
      acs = m * n * need_fr(q.fr_in, "fr_in", row) + n * need_fr(q.fr_out, "fr_out", row);
      macs = row == EnergyRow::FfsnnLif ? n : 3 * n;
      break;
    }
    case EnergyRow::FfsnnLtc: {
      const double m = need_dim(q.m, "m", row);
      acs = m * n * need_fr(q.fr_in, "fr_in", row) +
            2 * n * need_fr(q.fr_out, "fr_out", row) + 2 * n;
      macs = 4 * n * n + 3 * n;
      break;
    }
    case EnergyRow::FfsnnSpsn: {
      const double m = need_dim(q.m, "m", row);
      const double k = need_dim(q.k, "k", row);
      acs = m * n * need_fr(q.fr_in, "fr_in", row);
      macs = n * k;
      break;
    }
    case EnergyRow::FfsnnPmsn: {
      const double m = need_dim(q.m, "m", row);
      const double t = need_dim(q.t, "t", row);
      acs = m * n * need_fr(q.fr_in, "fr_in", row);
      macs = 2 * n * std::log2(t) + 5 * n;
      break;
    }
    case EnergyRow::SrnnLif:
    case EnergyRow::SrnnCeLif: {
      const double m = need_dim(q.m, "m", row);
      acs = m * n * need_fr(q.fr_in, "fr_in", row) +
            (n * n + n) * need_fr(q.fr_out, "fr_out", row);
      macs = row == EnergyRow::SrnnLif ? n : 3 * n;
      break;
    }
    case EnergyRow::SrnnLtc: {
      const double m = need_dim(q.m, "m", row);
      acs = m * n * need_fr(q.fr_in, "fr_in", row) +
            (n * n + 2 * n) * need_fr(q.fr_out, "fr_out", row) + 2 * n;
      macs = 4 * n * n + 3 * n;
      break;
    }
    case EnergyRow::Gsn: {
      const double m = need_dim(q.m, "m", row);
      acs = 2 * m * n * need_fr(q.fr_in, "fr_in", row) +
            2 * n * n * need_fr(q.fr_out, "fr_out", row);
      macs = 5 * n;
      break;
    }
    case EnergyRow::SpikingTcn: {
      const double m = need_dim(q.m, "m", row);
      const double k = need_dim(q.k, "k", row);
      acs = k * m * n * need_fr(q.fr_in, "fr_in", row) +
            k * n * n * need_fr(q.fr_conv2, "fr_conv2", row);
      macs = 0;
      break;
    }
    case EnergyRow::SpikeDrivenTransformer: {
      const double t = need_dim(q.t, "t", row);
      const double h = need_dim(q.h, "h", row);
      acs = (3 * need_fr(q.fr_in, "fr_in", row) + need_fr(q.fr_attn, "fr_attn", row)) * n * n +
            (need_fr(q.fr_q, "fr_q", row) * need_fr(q.fr_k, "fr_k", row) +
             need_fr(q.fr_v, "fr_v", row)) * n * t +
            (need_fr(q.fr_fc1, "fr_fc1", row) + need_fr(q.fr_fc2, "fr_fc2", row)) * n * h;
      macs = 0;
      break;
    }
    case EnergyRow::BinaryS4d: {
      const double t = need_dim(q.t, "t", row);
      acs = 2 * n * n * need_fr(q.fr_out, "fr_out", row);
      macs = 2 * n * std::log2(t) + 8 * n;
      break;
    }
    case EnergyRow::Gsu: {
      const double t = need_dim(q.t, "t", row);
      acs = n * n * (need_fr(q.fr_y, "fr_y", row) + need_fr(q.fr_w, "fr_w", row)) + 2 * n;
      macs = 2 * n * std::log2(t) + 6 * n;
      break;
    }
  }
  return energy_of(acs, macs, q.constants);
}

std::size_t trace_bytes(const NetworkSpec& spec, int batch, int steps) {
  spec.validate();
  if (batch < 1 || steps < 1) throw ConfigError("trace_bytes: batch and steps must be >= 1");
  std::size_t width = static_cast<std::size_t>(spec.input_width);
  for (std::size_t l = 0; l < spec.hidden.size(); ++l) {
    const std::size_t planes = spec.neuron[l] == NeuronKind::Spsn ? 3 : 2;
    width += planes * static_cast<std::size_t>(spec.hidden[l]);
  }
  return static_cast<std::size_t>(batch) * static_cast<std::size_t>(steps) * width *
         sizeof(float);
}

FitResult fit_affine(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("fit_affine: size mismatch");
  if (x.size() < 2) throw DimensionError("fit_affine: need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw DimensionError("fit_affine: degenerate x values");
  FitResult fit;
  fit.b = sxy / sxx;
  fit.a = my - fit.b * mx;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (fit.a + fit.b * x[i]);
    ss_res += e * e;
    ss_tot += (y[i] - my) * (y[i] - my);
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  return fit;
}

BenchReport bench_training(const NetworkSpec& spec, const TrainPlan& plan, AlSpec task,
                           const std::vector<int>& lengths, int warmup, int measured) {
  spec.validate();
  plan.validate();
  if (lengths.empty()) throw ConfigError("bench: need at least one sequence length");
  if (warmup < 0 || measured < 1) {
    throw ConfigError("bench: warmup must be >= 0 and measured >= 1");
  }
  using clock = std::chrono::steady_clock;

  BenchReport report;
  report.batch = plan.batch_size;
  report.warmup = warmup;
  report.measured = measured;
  report.threads = max_threads();

  for (int len : lengths) {
    if (len < 1) throw ConfigError("bench: sequence length must be >= 1");
    task.length = len;
    task.train_count = plan.batch_size * 2;  // two distinct batches to cycle
    task.test_count = 1;
    const Dataset train = generate_al_split(task, false);

    NetworkSpec net_spec = spec;
    if (net_spec.input_width == 0) net_spec.input_width = train.channels();
    if (net_spec.classes == 0) net_spec.classes = static_cast<int>(train.meta.classes);
    Network32 net = build_network<float>(net_spec, plan.seed);
    OptimizerState<float> state = OptimizerState<float>::zeros_like(net);
    const ForwardMode mode = forward_mode_of(plan.algorithm);

    const auto parts = batch_partition(train.meta.n, plan.batch_size, nullptr);
    std::vector<double> secs;
    for (int u = 0; u < warmup + measured; ++u) {
      Batch b = gather_batch(train, parts[u % parts.size()]);
      const auto t0 = clock::now();
      auto fwd = forward_sequence(net, std::move(b.inputs), mode, SpikeMode::Hard, plan.exec);
      auto loss = cross_entropy(fwd.logits, b.labels);
      auto grads = backward_for(plan.algorithm, net, fwd.trace, loss.dlogits, plan.exec);
      clip_and_step(net, grads, state, plan.opt);
      const auto t1 = clock::now();
      if (u >= warmup) secs.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    std::nth_element(secs.begin(), secs.begin() + secs.size() / 2, secs.end());
    BenchPoint pt;
    pt.length = len;
    pt.update_seconds = secs[secs.size() / 2];
    pt.updates_per_second = pt.update_seconds > 0 ? 1.0 / pt.update_seconds : 0.0;
    pt.timesteps_per_second = pt.updates_per_second * len;
    pt.analytic_trace_bytes = trace_bytes(net_spec, plan.batch_size, len);
    report.points.push_back(pt);
  }

  if (report.points.size() >= 2) {
    std::vector<double> x, x2, y;
    for (const auto& pt : report.points) {
      x.push_back(pt.length);
      x2.push_back(static_cast<double>(pt.length) * pt.length);
      y.push_back(pt.update_seconds);
    }
    report.time_vs_length = fit_affine(x, y);
    report.time_vs_length_sq = fit_affine(x2, y);
  }
  return report;
}

}  // namespace snn
