#include "core/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "core/error.hpp"

namespace lirec::io {

namespace {

constexpr char kMagic[4] = {'L', 'I', 'R', 'C'};

static_assert(std::endian::native == std::endian::little,
              "serializer assumes a little-endian host");

template <class T>
void write_le(std::ostream& os, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  os.write(buf, sizeof(T));
}

template <class T>
T read_le(std::istream& is, const std::string& context) {
  char buf[sizeof(T)];
  is.read(buf, sizeof(T));
  if (!is) fail_io(context + ": truncated file");
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

void write_header(std::ostream& os) {
  os.write(kMagic, 4);
  write_le<std::uint16_t>(os, kFormatVersion);
}

void read_header(std::istream& is, const std::string& context) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    fail_io(context + ": not a LIRC container (bad magic)");
  std::uint16_t version = read_le<std::uint16_t>(is, context);
  if (version != kFormatVersion)
    fail_io(context + ": unsupported format version " + std::to_string(version));
}

}  // namespace

void write_tensor_table(std::ostream& os, const std::vector<NamedTensor>& table) {
  write_le<std::uint32_t>(os, static_cast<std::uint32_t>(table.size()));
  for (const auto& [name, tensor] : table) {
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(tensor.ndim()));
    for (std::size_t d : tensor.shape) write_le<std::uint64_t>(os, d);
    for (double x : tensor.data) write_le<double>(os, x);
  }
}

std::vector<NamedTensor> read_tensor_table(std::istream& is, const std::string& context) {
  std::uint32_t count = read_le<std::uint32_t>(is, context);
  std::vector<NamedTensor> table;
  table.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t name_len = read_le<std::uint32_t>(is, context);
    if (name_len > (1u << 20)) fail_io(context + ": implausible tensor name length");
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    if (!is) fail_io(context + ": truncated file");
    std::uint32_t ndim = read_le<std::uint32_t>(is, context);
    if (ndim > 8) fail_io(context + ": implausible tensor rank for " + name);
    std::vector<std::size_t> shape(ndim);
    for (auto& d : shape) d = static_cast<std::size_t>(read_le<std::uint64_t>(is, context));
    Tensor t = Tensor::zeros(shape);
    for (double& x : t.data) x = read_le<double>(is, context);
    table.emplace_back(std::move(name), std::move(t));
  }
  return table;
}

void write_feature_file(const std::filesystem::path& path, const Tensor& tensor,
                        const std::string& name) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail_io("cannot open feature file for writing: " + path.string());
  write_header(os);
  write_tensor_table(os, {{name, tensor}});
  if (!os) fail_io("write failed for feature file: " + path.string());
}

Tensor read_feature_file(const std::filesystem::path& path, std::string* name_out) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail_io("missing feature file: " + path.string());
  std::string context = "feature file " + path.string();
  read_header(is, context);
  auto table = read_tensor_table(is, context);
  if (table.size() != 1)
    fail_io(context + ": expected exactly one tensor, found " + std::to_string(table.size()));
  if (name_out) *name_out = table[0].first;
  return std::move(table[0].second);
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) fail_io("cannot open checkpoint for writing: " + tmp.string());
    write_header(os);
    write_tensor_table(os, ckpt.params);
    write_tensor_table(os, ckpt.opt_state);
    write_le<std::uint64_t>(os, ckpt.step);
    if (!os) fail_io("write failed for checkpoint: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail_io("cannot move checkpoint into place: " + path.string() + " (" + ec.message() + ")");
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail_io("missing checkpoint file: " + path.string());
  std::string context = "checkpoint " + path.string();
  read_header(is, context);
  Checkpoint ckpt;
  ckpt.params = read_tensor_table(is, context);
  ckpt.opt_state = read_tensor_table(is, context);
  ckpt.step = read_le<std::uint64_t>(is, context);
  return ckpt;
}

bool sniff_container(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return false;
  char magic[4];
  is.read(magic, 4);
  return is && std::memcmp(magic, kMagic, 4) == 0;
}

}  // namespace lirec::io
