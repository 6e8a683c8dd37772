#include "snn/model_io.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

#include "snn/checksum.hpp"
#include "snn/train.hpp"

namespace snn {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

NeuronKind parse_neuron(const std::string& s) {
  if (s == "lif") return NeuronKind::Lif;
  if (s == "notd") return NeuronKind::NoTd;
  if (s == "spsn") return NeuronKind::Spsn;
  throw ConfigError("model: unknown neuron kind '" + s + "'");
}

ReadoutMode parse_readout(const std::string& s) {
  if (s == "mean") return ReadoutMode::MeanOverTime;
  if (s == "last") return ReadoutMode::LastStep;
  if (s == "per-step") return ReadoutMode::PerStep;
  throw ConfigError("model: unknown readout mode '" + s + "'");
}

}  // namespace

void save_model(const Network32& net, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());

  const NetworkSpec& spec = net.spec;
  ordered_json j;
  j["arch"] = to_string(spec.arch);
  j["input"] = spec.input_width;
  j["hidden"] = spec.hidden;
  std::vector<std::string> kinds;
  for (NeuronKind k : spec.neuron) kinds.emplace_back(to_string(k));
  j["neuron"] = kinds;
  j["classes"] = spec.classes;
  j["readout"] = to_string(spec.readout);
  j["decay"] = spec.lif.decay;
  j["threshold"] = spec.lif.v_th;
  j["surrogate_width"] = spec.lif.gamma;
  j["spsn_kernel"] = spec.spsn_kernel;
  j["param_count"] = net.param_count();
  j["param_crc"] = param_crc(net);

  const std::string text = j.dump(2) + "\n";
  std::ofstream fa(dir / "arch.json", std::ios::trunc);
  if (!fa) throw IoError("cannot write " + (dir / "arch.json").string());
  fa << text;

  std::ofstream fw(dir / "weights.f32", std::ios::binary | std::ios::trunc);
  if (!fw) throw IoError("cannot write " + (dir / "weights.f32").string());
  auto refs = build_param_refs(const_cast<Network32&>(net));
  for (const auto& r : refs) {
    fw.write(reinterpret_cast<const char*>(r.data),
             static_cast<std::streamsize>(r.size * sizeof(float)));
  }
  if (!fw) throw IoError("short write: " + (dir / "weights.f32").string());
}

Network32 load_model(const fs::path& dir) {
  std::ifstream fa(dir / "arch.json");
  if (!fa) throw IoError("cannot read " + (dir / "arch.json").string());
  ordered_json j;
  try {
    fa >> j;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptDatasetError("unparseable arch.json in " + dir.string() + ": " + e.what());
  }

  NetworkSpec spec;
  try {
    const std::string arch = j.at("arch").get<std::string>();
    if (arch == "sfnn") {
      spec.arch = Arch::Sfnn;
    } else if (arch == "srnn") {
      spec.arch = Arch::Srnn;
    } else {
      throw ConfigError("model: unknown arch '" + arch + "'");
    }
    spec.input_width = j.at("input").get<int>();
    spec.hidden = j.at("hidden").get<std::vector<int>>();
    for (const auto& k : j.at("neuron").get<std::vector<std::string>>()) {
      spec.neuron.push_back(parse_neuron(k));
    }
    spec.classes = j.at("classes").get<int>();
    spec.readout = parse_readout(j.at("readout").get<std::string>());
    spec.lif.decay = j.at("decay").get<double>();
    spec.lif.v_th = j.at("threshold").get<double>();
    spec.lif.gamma = j.at("surrogate_width").get<double>();
    spec.spsn_kernel = j.at("spsn_kernel").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw CorruptDatasetError("arch.json in " + dir.string() + " is incomplete: " + e.what());
  }

  Network32 net = build_network<float>(spec, 0);
  std::ifstream fw(dir / "weights.f32", std::ios::binary | std::ios::ate);
  if (!fw) throw IoError("cannot read " + (dir / "weights.f32").string());
  const std::size_t bytes = static_cast<std::size_t>(fw.tellg());
  if (bytes != net.param_count() * sizeof(float)) {
    throw CorruptDatasetError("weights.f32 in " + dir.string() + " holds " +
                              std::to_string(bytes) + " bytes, expected " +
                              std::to_string(net.param_count() * sizeof(float)));
  }
  fw.seekg(0);
  auto refs = build_param_refs(net);
  for (const auto& r : refs) {
    fw.read(reinterpret_cast<char*>(r.data),
            static_cast<std::streamsize>(r.size * sizeof(float)));
  }
  if (!fw) throw IoError("short read: " + (dir / "weights.f32").string());

  const std::uint32_t want_crc = j.value("param_crc", 0u);
  if (want_crc != 0 && param_crc(net) != want_crc) {
    throw CorruptDatasetError("weights.f32 checksum mismatch in " + dir.string());
  }
  return net;
}

}  // namespace snn
