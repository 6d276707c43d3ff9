#include "m4bram/networks.hpp"

#include "m4bram/error.hpp"

namespace m4bram {

namespace {

struct Builder {
  NetworkDesc net;

  void conv(const std::string& name, int c, int k, int hw, int r, int stride, int pad) {
    net.layers.push_back(make_conv(name, c, k, hw, hw, r, r, stride, pad));
  }
  void fc(const std::string& name, int in, int out) { net.layers.push_back(make_fc(name, in, out)); }
  void matmul(const std::string& name, int m, int n, int l) {
    net.layers.push_back(convert_matmul_to_conv({m, n, l}, name));
  }
};

NetworkDesc resnet(const std::string& name, const int (&blocks)[4]) {
  Builder b{{name, {}}};
  b.conv("conv1", 3, 64, 224, 7, 2, 3);
  int in_ch = 64;
  int hw = 56; // after the stem max-pool
  for (int stage = 0; stage < 4; ++stage) {
    const int ch = 64 << stage;
    for (int i = 0; i < blocks[stage]; ++i) {
      const int stride = (stage > 0 && i == 0) ? 2 : 1;
      const std::string id = "layer" + std::to_string(stage + 1) + "." + std::to_string(i);
      b.conv(id + ".conv1", in_ch, ch, hw, 3, stride, 1);
      const int out_hw = (hw + 2 - 3) / stride + 1;
      b.conv(id + ".conv2", ch, ch, out_hw, 3, 1, 1);
      if (stride != 1 || in_ch != ch) {
        b.conv(id + ".downsample", in_ch, ch, hw, 1, stride, 0);
      }
      in_ch = ch;
      hw = out_hw;
    }
  }
  b.fc("fc", 512, 1000);
  return b.net;
}

} // namespace

NetworkDesc alexnet() {
  // single-tower variant, no grouped convolutions
  Builder b{{"alexnet", {}}};
  b.conv("conv1", 3, 64, 224, 11, 4, 2);
  b.conv("conv2", 64, 192, 27, 5, 1, 2);
  b.conv("conv3", 192, 384, 13, 3, 1, 1);
  b.conv("conv4", 384, 256, 13, 3, 1, 1);
  b.conv("conv5", 256, 256, 13, 3, 1, 1);
  b.fc("fc6", 256 * 6 * 6, 4096);
  b.fc("fc7", 4096, 4096);
  b.fc("fc8", 4096, 1000);
  return b.net;
}

NetworkDesc vgg16() {
  Builder b{{"vgg16", {}}};
  const int cfg[5][2] = {{64, 2}, {128, 2}, {256, 3}, {512, 3}, {512, 3}};
  int in_ch = 3;
  int hw = 224;
  int n = 1;
  for (const auto& [ch, reps] : cfg) {
    for (int i = 0; i < reps; ++i) {
      b.conv("conv" + std::to_string(n++), in_ch, ch, hw, 3, 1, 1);
      in_ch = ch;
    }
    hw /= 2;
  }
  b.fc("fc6", 512 * 7 * 7, 4096);
  b.fc("fc7", 4096, 4096);
  b.fc("fc8", 4096, 1000);
  return b.net;
}

NetworkDesc resnet18() { return resnet("resnet18", {2, 2, 2, 2}); }

NetworkDesc resnet34() { return resnet("resnet34", {3, 4, 6, 3}); }

NetworkDesc vit_attention() {
  constexpr int tokens = 197;
  constexpr int dim = 768;
  constexpr int heads = 12;
  constexpr int head_dim = dim / heads;
  Builder b{{"vit_attention", {}}};
  b.matmul("qkv_proj", 3 * dim, dim, tokens);
  for (int h = 0; h < heads; ++h) {
    // scores: one row per key token, reduced over the head dimension
    b.matmul("qk.h" + std::to_string(h), tokens, head_dim, tokens);
  }
  for (int h = 0; h < heads; ++h) {
    b.matmul("av.h" + std::to_string(h), head_dim, tokens, tokens);
  }
  b.matmul("out_proj", dim, dim, tokens);
  return b.net;
}

const std::vector<std::string>& builtin_network_names() {
  static const std::vector<std::string> names{"alexnet", "vgg16", "resnet18", "resnet34",
                                              "vit_attention"};
  return names;
}

NetworkDesc builtin_network(const std::string& name) {
  if (name == "alexnet") {
    return alexnet();
  }
  if (name == "vgg16") {
    return vgg16();
  }
  if (name == "resnet18") {
    return resnet18();
  }
  if (name == "resnet34") {
    return resnet34();
  }
  if (name == "vit_attention") {
    return vit_attention();
  }
  throw ConfigError("unknown built-in network '" + name + "'");
}

NetworkDesc network_by_name(const std::string& name_or_path) {
  for (const auto& n : builtin_network_names()) {
    if (n == name_or_path) {
      return builtin_network(n);
    }
  }
  return load_network(name_or_path);
}

} // namespace m4bram
