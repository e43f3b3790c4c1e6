#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "mem/ad/tensor.hpp"

namespace mem::ad {

/// Named tensors in checkpoint order (lexicographic by name).
using Checkpoint = std::map<std::string, Tensor>;

// Binary layout, all integers little-endian:
//   "MEMCKPT1"            8 bytes magic
//   u64 record count
//   per record:  u32 name length, name bytes, u32 rank, u64 dims[rank],
//                f64 payload[product(dims)]
void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mem::ad
