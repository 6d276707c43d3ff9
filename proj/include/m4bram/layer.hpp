#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace m4bram {

enum class LayerKind { Conv, FullyConnected, MatMul };

/// A layer in convolution form. FC layers are 1x1 convolutions on a 1x1 map;
/// an (M x N)(N x L) matmul is a 1-D convolution with C=N, K=M and Q=L.
struct LayerShape {
  std::string name;
  LayerKind kind = LayerKind::Conv;
  int C = 1;
  int K = 1;
  int H = 1;
  int W = 1;
  int R = 1;
  int S = 1;
  int stride = 1;
  int padding = 0;

  [[nodiscard]] int P() const { return (H + 2 * padding - R) / stride + 1; }
  [[nodiscard]] int Q() const { return (W + 2 * padding - S) / stride + 1; }
  [[nodiscard]] std::int64_t macs() const {
    return std::int64_t{K} * P() * Q() * C * R * S;
  }

  /// Throws ValidationError on non-positive dims or an empty output map.
  void validate() const;

  /// Equal shapes simulate identically regardless of name.
  [[nodiscard]] bool same_shape(const LayerShape& o) const {
    return kind == o.kind && C == o.C && K == o.K && H == o.H && W == o.W && R == o.R &&
           S == o.S && stride == o.stride && padding == o.padding;
  }

  friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

LayerShape make_conv(std::string name, int C, int K, int H, int W, int R, int S, int stride,
                     int padding);
LayerShape make_fc(std::string name, int in, int out);

struct MatMulDims {
  int M = 1;
  int N = 1;
  int L = 1;
};

LayerShape convert_matmul_to_conv(const MatMulDims& m, std::string name = "matmul");

struct NetworkDesc {
  std::string name;
  std::vector<LayerShape> layers;

  void validate() const;
  [[nodiscard]] std::int64_t macs() const;

  friend bool operator==(const NetworkDesc&, const NetworkDesc&) = default;
};

/// JSON: {name, layers: [{kind, C, K, H, W, R, S, stride, padding}]},
/// fc as {kind:"fc", in, out}, matmul as {kind:"matmul", M, N, L}.
NetworkDesc parse_network(const std::string& text, const std::string& source = "<string>");
NetworkDesc load_network(const std::filesystem::path& path);
std::string serialize_network(const NetworkDesc& net);

} // namespace m4bram
