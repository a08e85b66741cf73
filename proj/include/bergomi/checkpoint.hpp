#pragma once

// Binary network checkpoints.
//
// Layout (all integers and floats little-endian):
//   "BRGMNET1"                      8 bytes magic
//   u32 format version
//   u32 net kind, option kind, curve mode, activation, L, L1, L2, n, n0
//   n0 x (f64 center, f64 half width)    input standardization
//   u32 tensor count, then per tensor: u32 name length, name, u32 rows, u32 cols
//   u64 weight count, f64 weights (tensor order, row-major)
//   u64 FNV-1a hash of every preceding byte

#include "bergomi/network.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace bergomi {

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<unsigned char> serialize(const PricingNetwork& net);
PricingNetwork deserialize(const std::vector<unsigned char>& bytes);

/// Writes to a temporary sibling and renames it over `path`.
void save_checkpoint(const PricingNetwork& net, const std::filesystem::path& path);
PricingNetwork load_checkpoint(const std::filesystem::path& path);

/// Atomic whole-file write used for every artifact.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::vector<unsigned char> read_file(const std::filesystem::path& path);

std::uint64_t fnv1a64(const unsigned char* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ull);

} // namespace bergomi
