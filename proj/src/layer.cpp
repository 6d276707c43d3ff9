#include "m4bram/layer.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "m4bram/error.hpp"

namespace m4bram {

using nlohmann::json;

void LayerShape::validate() const {
  const std::pair<const char*, int> dims[] = {{"C", C}, {"K", K}, {"H", H}, {"W", W},
                                              {"R", R}, {"S", S}, {"stride", stride}};
  for (const auto& [field, v] : dims) {
    if (v <= 0) {
      throw ValidationError("layer '" + name + "': " + field + " must be positive, got " +
                            std::to_string(v));
    }
  }
  if (padding < 0) {
    throw ValidationError("layer '" + name + "': padding must be non-negative");
  }
  if (H + 2 * padding < R || W + 2 * padding < S) {
    throw ValidationError("layer '" + name + "': filter larger than padded input");
  }
}

LayerShape make_conv(std::string name, int C, int K, int H, int W, int R, int S, int stride,
                     int padding) {
  LayerShape l{std::move(name), LayerKind::Conv, C, K, H, W, R, S, stride, padding};
  l.validate();
  return l;
}

LayerShape make_fc(std::string name, int in, int out) {
  LayerShape l{std::move(name), LayerKind::FullyConnected, in, out, 1, 1, 1, 1, 1, 0};
  l.validate();
  return l;
}

LayerShape convert_matmul_to_conv(const MatMulDims& m, std::string name) {
  LayerShape l{std::move(name), LayerKind::MatMul, m.N, m.M, 1, m.L, 1, 1, 1, 0};
  l.validate();
  return l;
}

void NetworkDesc::validate() const {
  if (layers.empty()) {
    throw ValidationError("network '" + name + "' has no layers");
  }
  std::string bad;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    try {
      layers[i].validate();
    } catch (const ValidationError& e) {
      bad += (bad.empty() ? "" : "; ") + ("#" + std::to_string(i) + " " + e.what());
    }
  }
  if (!bad.empty()) {
    throw ValidationError("network '" + name + "' has invalid layers: " + bad);
  }
}

std::int64_t NetworkDesc::macs() const {
  std::int64_t total = 0;
  for (const auto& l : layers) {
    total += l.macs();
  }
  return total;
}

namespace {

int get_int(const json& obj, const char* key, const std::string& where, bool required = true,
            int fallback = 0) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) {
      throw ParseError(where + ": missing field '" + key + "'");
    }
    return fallback;
  }
  if (!it->is_number_integer()) {
    throw ParseError(where + ": field '" + key + "' must be an integer");
  }
  return it->get<int>();
}

LayerShape parse_layer(const json& j, std::size_t index) {
  const std::string where = "layer " + std::to_string(index);
  if (!j.is_object()) {
    throw ParseError(where + ": expected an object");
  }
  const std::string kind = j.value("kind", "conv");
  const std::string name = j.value("name", "l" + std::to_string(index));
  if (kind == "conv") {
    return LayerShape{name,
                      LayerKind::Conv,
                      get_int(j, "C", where),
                      get_int(j, "K", where),
                      get_int(j, "H", where),
                      get_int(j, "W", where),
                      get_int(j, "R", where),
                      get_int(j, "S", where, false, get_int(j, "R", where)),
                      get_int(j, "stride", where, false, 1),
                      get_int(j, "padding", where, false, 0)};
  }
  if (kind == "fc") {
    return LayerShape{name, LayerKind::FullyConnected, get_int(j, "in", where),
                      get_int(j, "out", where), 1, 1, 1, 1, 1, 0};
  }
  if (kind == "matmul") {
    return LayerShape{name, LayerKind::MatMul, get_int(j, "N", where), get_int(j, "M", where),
                      1, get_int(j, "L", where), 1, 1, 1, 0};
  }
  throw ParseError(where + ": unknown kind '" + kind + "'");
}

} // namespace

NetworkDesc parse_network(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("layers") || !doc["layers"].is_array()) {
    throw ParseError(source + ": expected an object with a 'layers' array");
  }
  NetworkDesc net;
  net.name = doc.value("name", "network");
  std::size_t i = 0;
  for (const auto& l : doc["layers"]) {
    try {
      net.layers.push_back(parse_layer(l, i++));
    } catch (const ParseError& e) {
      throw ParseError(source + ": " + e.what());
    }
  }
  net.validate();
  return net;
}

NetworkDesc load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open network file " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_network(ss.str(), path.string());
}

std::string serialize_network(const NetworkDesc& net) {
  json doc;
  doc["name"] = net.name;
  doc["layers"] = json::array();
  for (const auto& l : net.layers) {
    json j;
    j["name"] = l.name;
    switch (l.kind) {
    case LayerKind::Conv:
      j["kind"] = "conv";
      j["C"] = l.C;
      j["K"] = l.K;
      j["H"] = l.H;
      j["W"] = l.W;
      j["R"] = l.R;
      j["S"] = l.S;
      j["stride"] = l.stride;
      j["padding"] = l.padding;
      break;
    case LayerKind::FullyConnected:
      j["kind"] = "fc";
      j["in"] = l.C;
      j["out"] = l.K;
      break;
    case LayerKind::MatMul:
      j["kind"] = "matmul";
      j["M"] = l.K;
      j["N"] = l.C;
      j["L"] = l.W;
      break;
    }
    doc["layers"].push_back(j);
  }
  return doc.dump(2) + "\n";
}

} // namespace m4bram
