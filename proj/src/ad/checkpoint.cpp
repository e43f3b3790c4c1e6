#include "mem/ad/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "mem/errors.hpp"

namespace mem::ad {

namespace {

constexpr std::array<char, 8> kMagic = {'M', 'E', 'M', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 32;

template <typename T>
void put_le(std::ostream& out, T value) {
  std::uint64_t bits;
  if constexpr (std::is_same_v<T, double>) {
    bits = std::bit_cast<std::uint64_t>(value);
  } else {
    bits = static_cast<std::uint64_t>(value);
  }
  char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(buf, sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) throw CheckpointCorrupt("truncated checkpoint");
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  if constexpr (std::is_same_v<T, double>) {
    return std::bit_cast<double>(bits);
  } else {
    return static_cast<T>(bits);
  }
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint64_t>(out, ckpt.size());
  for (const auto& [name, t] : ckpt) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) put_le<std::uint64_t>(out, d);
    for (double x : t.data()) put_le<double>(out, x);
  }
  if (!out) throw IoError("failed writing checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw CheckpointCorrupt("bad checkpoint magic");
  const auto count = get_le<std::uint64_t>(in);
  Checkpoint ckpt;
  for (std::uint64_t r = 0; r < count; ++r) {
    const auto name_len = get_le<std::uint32_t>(in);
    if (name_len > 4096) throw CheckpointCorrupt("implausible parameter name length");
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) throw CheckpointCorrupt("truncated parameter name");
    const auto rank = get_le<std::uint32_t>(in);
    if (rank > 8) throw CheckpointCorrupt("implausible rank for '" + name + "'");
    std::vector<std::size_t> shape(rank);
    std::uint64_t elements = 1;
    for (auto& d : shape) {
      d = get_le<std::uint64_t>(in);
      elements *= d;
      if (elements > kMaxElements) throw CheckpointCorrupt("implausible size for '" + name + "'");
    }
    std::vector<double> data(elements);
    for (double& x : data) x = get_le<double>(in);
    if (!ckpt.emplace(name, Tensor(std::move(shape), std::move(data))).second) {
      throw CheckpointCorrupt("duplicate parameter '" + name + "'");
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) throw CheckpointCorrupt("trailing bytes after checkpoint");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
  return read_checkpoint(in);
}

}  // namespace mem::ad
