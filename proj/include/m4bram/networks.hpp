#pragma once

#include <string>
#include <vector>

#include "m4bram/layer.hpp"

namespace m4bram {

/// Benchmark nets at 224x224 input, batch 1. Pooling layers carry no MACs
/// and are left out; downsample shortcuts are included in the ResNets.
NetworkDesc alexnet();
NetworkDesc vgg16();
NetworkDesc resnet18();
NetworkDesc resnet34();
/// One ViT-Base encoder attention module: 197 tokens, 12 heads of 64.
/// QKV projection, per-head QK^T and AV, output projection.
NetworkDesc vit_attention();

/// "alexnet", "vgg16", "resnet18", "resnet34", "vit_attention".
const std::vector<std::string>& builtin_network_names();
NetworkDesc builtin_network(const std::string& name);
/// A built-in name, or else a path to a network JSON file.
NetworkDesc network_by_name(const std::string& name_or_path);

} // namespace m4bram
