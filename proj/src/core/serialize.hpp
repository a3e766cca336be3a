#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "core/tensor.hpp"

namespace lirec::io {

// On-disk container shared by feature files and checkpoints.
//
//   magic "LIRC" | format version u16 | tensor table
//
// where a tensor table is: count u32, then per tensor
//   name length u32 | UTF-8 name | ndim u32 | dims u64[ndim] | f64 payload
//
// A feature file is one table holding a single tensor. A checkpoint is a
// parameter table, then an optimizer-state table in the same encoding, then
// a u64 step counter. All integers and floats are little-endian.

inline constexpr std::uint16_t kFormatVersion = 1;

using NamedTensor = std::pair<std::string, Tensor>;

void write_tensor_table(std::ostream& os, const std::vector<NamedTensor>& table);
std::vector<NamedTensor> read_tensor_table(std::istream& is, const std::string& context);

void write_feature_file(const std::filesystem::path& path, const Tensor& tensor,
                        const std::string& name);
Tensor read_feature_file(const std::filesystem::path& path, std::string* name_out = nullptr);

struct Checkpoint {
  std::vector<NamedTensor> params;
  std::vector<NamedTensor> opt_state;
  std::uint64_t step = 0;
};

// write-temp + rename so a crash never leaves a torn checkpoint behind
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

// true when the file starts with the LIRC magic
bool sniff_container(const std::filesystem::path& path);

}  // namespace lirec::io
