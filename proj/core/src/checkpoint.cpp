#include "recon/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "recon/error.hpp"

namespace recon {

namespace {

constexpr std::array<char, 4> kMagic{'R', 'C', 'T', 'R'};

void put_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 4);
}

void put_u8(std::ostream& out, std::uint8_t v) { out.put(static_cast<char>(v)); }

void put_f64s(std::ostream& out, std::span<const double> values) {
  for (double v : values) put_u64(out, std::bit_cast<std::uint64_t>(v));
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw ParseError("checkpoint truncated", 0);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) throw ParseError("checkpoint truncated", 0);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

std::uint8_t get_u8(std::istream& in) {
  char c = 0;
  if (!in.get(c)) throw ParseError("checkpoint truncated", 0);
  return static_cast<std::uint8_t>(c);
}

void get_f64s(std::istream& in, std::span<double> values) {
  for (double& v : values) v = std::bit_cast<double>(get_u64(in));
}

}  // namespace

void write_checkpoint(std::ostream& out, const TrainState& state) {
  const Matrix& table = state.params.table;
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kCheckpointVersion);
  put_u64(out, table.rows());
  put_u64(out, table.cols());
  put_u8(out, state.params.normalize ? 1 : 0);
  put_f64s(out, table.values());

  put_u8(out, state.momentum ? 1 : 0);
  if (state.momentum) {
    put_u64(out, std::bit_cast<std::uint64_t>(state.momentum->mu));
    put_f64s(out, state.momentum->table.values());
  }

  put_u8(out, 1);
  put_u64(out, state.step);
  put_u64(out, state.queue.capacity());
  put_u64(out, state.queue.size());
  for (const auto& e : state.queue.entries()) put_f64s(out, e);
  put_u8(out, state.adam ? 1 : 0);
  if (state.adam) {
    put_u64(out, state.adam->updates);
    put_f64s(out, state.adam->first_moment.values());
    put_f64s(out, state.adam->second_moment.values());
  }
}

TrainState read_checkpoint(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw ParseError("not a checkpoint (bad magic)", 0);
  }
  const auto version = get_u32(in);
  if (version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version), 0);
  }
  const auto rows = get_u64(in);
  const auto cols = get_u64(in);
  if (rows < 2 || cols < 2 || rows > (1ULL << 32) || cols > (1ULL << 20)) {
    throw ParseError("implausible checkpoint shape", 0);
  }
  TrainState state;
  state.params.table = Matrix(rows, cols);
  state.params.normalize = get_u8(in) != 0;
  get_f64s(in, state.params.table.values());

  if (get_u8(in) != 0) {
    MomentumState momentum{Matrix(rows, cols), std::bit_cast<double>(get_u64(in))};
    get_f64s(in, momentum.table.values());
    state.momentum = std::move(momentum);
  }

  // Files that stop after the momentum block carry no training state.
  if (in.peek() == std::char_traits<char>::eof()) {
    state.queue = NegativeQueue(1, cols);
    return state;
  }
  if (get_u8(in) != 0) {
    state.step = get_u64(in);
    const auto capacity = get_u64(in);
    const auto length = get_u64(in);
    if (capacity == 0 || length > capacity) throw ParseError("corrupt queue header", 0);
    state.queue = NegativeQueue(capacity, cols);
    std::vector<Embedding> entries(length, Embedding(cols));
    for (auto& e : entries) get_f64s(in, e);
    state.queue.enqueue(entries);
    if (get_u8(in) != 0) {
      AdamState adam{Matrix(rows, cols), Matrix(rows, cols), get_u64(in)};
      get_f64s(in, adam.first_moment.values());
      get_f64s(in, adam.second_moment.values());
      state.adam = std::move(adam);
    }
  } else {
    state.queue = NegativeQueue(1, cols);
  }
  return state;
}

void save_checkpoint(const std::filesystem::path& path, const TrainState& state) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  write_checkpoint(out, state);
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

TrainState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  try {
    return read_checkpoint(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

}  // namespace recon
