#include "doctest.h"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "m4bram/error.hpp"
#include "m4bram/layer.hpp"
#include "m4bram/networks.hpp"

using namespace m4bram;

#ifndef M4BRAM_DATA_DIR
#define M4BRAM_DATA_DIR "data"
#endif

TEST_CASE("conv output size and MACs") {
  const auto l = make_conv("c", 3, 64, 224, 224, 3, 3, 1, 1);
  CHECK(l.P() == 224);
  CHECK(l.Q() == 224);
  CHECK(l.macs() == 64LL * 224 * 224 * 3 * 9);
  const auto s = make_conv("s", 3, 96, 227, 227, 11, 11, 4, 0);
  CHECK(s.P() == 55);
  const auto fc = make_fc("fc", 4096, 1000);
  CHECK(fc.macs() == 4096LL * 1000);
  const auto mm = convert_matmul_to_conv({197, 64, 197});
  CHECK(mm.K == 197);
  CHECK(mm.C == 64);
  CHECK(mm.Q() == 197);
  CHECK(mm.macs() == 197LL * 64 * 197);
}

TEST_CASE("layer validation") {
  auto l = make_conv("c", 3, 8, 8, 8, 3, 3, 1, 1);
  l.stride = 0;
  CHECK_THROWS_AS(l.validate(), ValidationError);
  CHECK_THROWS_AS(make_conv("c", 3, 8, 2, 2, 5, 5, 1, 0).validate(), ValidationError);
  CHECK_THROWS_AS(make_conv("c", 0, 8, 8, 8, 3, 3, 1, 1).validate(), ValidationError);
}

TEST_CASE("network JSON round trip and errors") {
  for (const auto& name : builtin_network_names()) {
    const NetworkDesc net = builtin_network(name);
    CHECK(parse_network(serialize_network(net)) == net);
  }
  const auto net = parse_network(R"({"name":"t","layers":[
      {"kind":"conv","C":3,"K":4,"H":8,"W":8,"R":3,"S":3,"stride":1,"padding":1},
      {"kind":"fc","in":16,"out":10},
      {"kind":"matmul","M":4,"N":5,"L":6}]})");
  CHECK(net.layers.size() == 3);
  CHECK(net.macs() == 4LL * 64 * 27 + 160 + 120);
  CHECK_THROWS_AS(parse_network("{not json"), ParseError);
  CHECK_THROWS_AS(parse_network(R"({"name":"t","layers":[{"kind":"pool"}]})"), ParseError);
  CHECK_THROWS(parse_network(
      R"({"name":"t","layers":[{"kind":"conv","C":3,"K":4,"H":8,"W":8,"R":3,"S":3,"stride":0,"padding":1}]})"));
  CHECK_THROWS_AS(builtin_network("lenet"), ConfigError);
}

TEST_CASE("built-in MAC counts match the recorded table") {
  std::ifstream in(std::filesystem::path(M4BRAM_DATA_DIR) / "network_macs.json");
  REQUIRE(in);
  const auto j = nlohmann::json::parse(in);
  for (const auto& name : builtin_network_names()) {
    CAPTURE(name);
    const NetworkDesc net = builtin_network(name);
    CHECK(net.macs() == j.at(name).get<std::int64_t>());
    CHECK(net.layers.size() == j.at("layer_counts").at(name).get<std::size_t>());
  }
}

TEST_CASE("independent MAC arithmetic for the benchmark nets") {
  // VGG-16: 13 convs at 3x3/pad 1 and three FC layers.
  std::int64_t vgg = 0;
  const int cfg[][3] = {{3, 64, 224},   {64, 64, 224},  {64, 128, 112}, {128, 128, 112},
                        {128, 256, 56}, {256, 256, 56}, {256, 256, 56}, {256, 512, 28},
                        {512, 512, 28}, {512, 512, 28}, {512, 512, 14}, {512, 512, 14},
                        {512, 512, 14}};
  for (const auto& c : cfg) {
    vgg += std::int64_t{c[0]} * c[1] * c[2] * c[2] * 9;
  }
  vgg += 25088LL * 4096 + 4096LL * 4096 + 4096LL * 1000;
  CHECK(vgg16().macs() == vgg);
  // one attention head pair: QK^T and AV are both 197*197*64
  const std::int64_t vit = 2304LL * 768 * 197 + 24LL * 197 * 197 * 64 + 768LL * 768 * 197;
  CHECK(vit_attention().macs() == vit);
}
