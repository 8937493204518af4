// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <iterator>
#include <string>

#include <json.hpp>

#include "physopt/base64.hpp"
#include "physopt/error.hpp"
#include "physopt/nnet/conditioner.hpp"

namespace physopt::nnet {

using nlohmann::json;

namespace {

const char* kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::Dense: return "dense";
    case LayerKind::Gelu: return "gelu";
    case LayerKind::SpectralConv1d: return "spectral_conv1d";
    case LayerKind::Flatten: return "flatten";
    case LayerKind::Unflatten: return "unflatten";
  }
  return "?";
}

LayerKind parse_kind(const std::string& s) {
  if (s == "dense") return LayerKind::Dense;
  if (s == "gelu") return LayerKind::Gelu;
  if (s == "spectral_conv1d") return LayerKind::SpectralConv1d;
  if (s == "flatten") return LayerKind::Flatten;
  if (s == "unflatten") return LayerKind::Unflatten;
  raise(ErrorKind::Parse, "unknown layer kind '" + s + "'");
}

}  // namespace

void save_checkpoint(const ConditionerNet& net, const std::string& path) {
  json layers = json::array();
  for (const auto& l : net.layers) {
    json j{{"kind", kind_name(l.kind)}};
    if (l.kind == LayerKind::Dense) {
      j["in"] = l.in;
      j["out"] = l.out;
    } else if (l.kind == LayerKind::SpectralConv1d) {
      j["width"] = l.width;
      j["modes"] = l.modes;
    }
    layers.push_back(j);
  }
  const json header{
      {"family", family_name(net.family)},
      {"basis_size", net.basis_size},
      {"seed", net.seed},
      {"layers", layers},
      {"input_spec",
       {{"gradient", net.input.gradient},
        {"gamma", net.input.gamma},
        {"bc", net.input.bc},
        {"forcing", net.input.forcing},
        {"position", net.input.position},
        {"encoding", net.input.encoding == GradientEncoding::Normalized ? "normalized" : "scaled"},
        {"gradient_scale", net.input.gradient_scale},
        {"gamma_frequencies", net.input.gamma_frequencies}}},
      {"n_params", net.weights.size()},
  };
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorKind::Io, "cannot open '" + path + "' for writing");
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n' << header.dump() << '\n';
  const auto bytes = doubles_to_le_bytes(net.weights.data(), net.weights.size());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) raise(ErrorKind::Io, "write to '" + path + "' failed");
}

ConditionerNet load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::Io, "cannot open checkpoint '" + path + "'");
  std::string tag, header_line;
  std::getline(in, tag);
  if (tag != std::string(kCheckpointMagic) + " " + std::to_string(kCheckpointVersion))
    raise(ErrorKind::Parse, path + ": not a version " + std::to_string(kCheckpointVersion) +
                                " checkpoint");
  std::getline(in, header_line);
  ConditionerNet net;
  std::size_t n_params = 0;
  try {
    const json h = json::parse(header_line);
    net.family = parse_family(h.at("family").get<std::string>());
    net.basis_size = h.at("basis_size").get<int>();
    net.seed = h.at("seed").get<std::uint64_t>();
    for (const auto& j : h.at("layers")) {
      LayerDesc d;
      d.kind = parse_kind(j.at("kind").get<std::string>());
      if (d.kind == LayerKind::Dense) {
        d.in = j.at("in").get<int>();
        d.out = j.at("out").get<int>();
      } else if (d.kind == LayerKind::SpectralConv1d) {
        d.width = j.at("width").get<int>();
        d.modes = j.at("modes").get<int>();
      }
      net.layers.push_back(d);
    }
    const json& s = h.at("input_spec");
    net.input.gradient = s.at("gradient").get<bool>();
    net.input.gamma = s.at("gamma").get<bool>();
    net.input.bc = s.at("bc").get<bool>();
    net.input.forcing = s.at("forcing").get<bool>();
    net.input.position = s.at("position").get<bool>();
    const std::string enc = s.at("encoding").get<std::string>();
    if (enc == "normalized") net.input.encoding = GradientEncoding::Normalized;
    else if (enc == "scaled") net.input.encoding = GradientEncoding::Scaled;
    else raise(ErrorKind::Parse, "unknown gradient encoding '" + enc + "'");
    net.input.gradient_scale = s.at("gradient_scale").get<double>();
    net.input.gamma_frequencies = s.value("gamma_frequencies", 0);
    n_params = h.at("n_params").get<std::size_t>();
  } catch (const json::exception& e) {
    raise(ErrorKind::Parse, path + ": bad checkpoint header: " + e.what());
  }
  std::size_t expected = 0;
  for (const auto& l : net.layers) expected += layer_param_count(l);
  if (expected != n_params)
    raise(ErrorKind::Parse, path + ": header declares " + std::to_string(n_params) +
                                " weights, layers need " + std::to_string(expected));
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() != n_params * 8)
    raise(ErrorKind::Parse, path + ": weight payload has " + std::to_string(bytes.size()) + " bytes");
  net.weights = le_bytes_to_doubles(bytes);
  return net;
}

}  // namespace physopt::nnet
