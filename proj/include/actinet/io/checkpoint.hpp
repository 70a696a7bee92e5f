#pragma once

// Versioned binary checkpoint:
//   bytes 0..7   magic "ACTINET1"
//   u32          meta length, then meta JSON (model kind, spec echo,
//                training-config echo, preprocessing scalers, final metrics)
//   u32          parameter block count
//   per block:   u32 name length, name, u64 value count, values as 64-bit
//                little-endian IEEE doubles
//   u32          state block count, same layout (batchnorm running stats)
//   u32          CRC-32 over everything above
// A checksum or magic mismatch, a truncated file, or a spec echo that does
// not match the requested architecture all refuse to load.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "actinet/io/common.hpp"
#include "actinet/nn/graph.hpp"

namespace actinet::io {

constexpr char kCheckpointMagic[8] = {'A', 'C', 'T', 'I', 'N', 'E', 'T', '1'};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_f64(std::string& out, double d) {
  put_u64(out, std::bit_cast<std::uint64_t>(d));
}

class Reader {
 public:
  Reader(const std::string& data, std::size_t pos) : data_(data), pos_(pos) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size())
      throw std::runtime_error("checkpoint: truncated block");
  }
  const std::string& data_;
  std::size_t pos_;
};

}  // namespace detail

inline void save_checkpoint(Graph& graph, const nlohmann::json& meta,
                            const std::string& path) {
  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  const std::string meta_str = meta.dump();
  detail::put_u32(out, static_cast<std::uint32_t>(meta_str.size()));
  out += meta_str;

  const auto write_blocks = [&out](const auto& blocks) {
    detail::put_u32(out, static_cast<std::uint32_t>(blocks.size()));
    for (const auto& [name, blk] : blocks) {
      detail::put_u32(out, static_cast<std::uint32_t>(name.size()));
      out += name;
      detail::put_u64(out, blk->value.size());
      for (double d : blk->value) {
        if (!std::isfinite(d))
          throw std::invalid_argument("save_checkpoint: non-finite value in block '" +
                                      name + "'");
        detail::put_f64(out, d);
      }
    }
  };
  write_blocks(graph.named_params());
  write_blocks(graph.named_state());

  detail::put_u32(out, crc32(out.data(), out.size()));
  atomic_write_file(path, out);
}

struct LoadedCheckpoint {
  nlohmann::json meta;
  std::vector<std::pair<std::string, std::vector<double>>> params;
  std::vector<std::pair<std::string, std::vector<double>>> state;

  // Copies stored values into a freshly built graph; block names and sizes
  // must match the architecture exactly.
  void restore_into(Graph& graph) const {
    const auto apply = [](const auto& stored, auto named) {
      if (stored.size() != named.size())
        throw std::runtime_error("checkpoint: block count mismatch (stored " +
                                 std::to_string(stored.size()) + ", graph " +
                                 std::to_string(named.size()) + ")");
      for (std::size_t i = 0; i < stored.size(); ++i) {
        if (stored[i].first != named[i].first)
          throw std::runtime_error("checkpoint: block '" + stored[i].first +
                                   "' does not match graph block '" +
                                   named[i].first + "'");
        if (stored[i].second.size() != named[i].second->value.size())
          throw std::runtime_error("checkpoint: size mismatch in block '" +
                                   stored[i].first + "'");
        named[i].second->value = stored[i].second;
      }
    };
    apply(params, graph.named_params());
    apply(state, graph.named_state());
  }
};

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
  const std::string data = read_file(path);
  if (data.size() < sizeof(kCheckpointMagic) + 4)
    throw std::runtime_error("checkpoint '" + path + "': file too short");
  if (std::memcmp(data.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0)
    throw std::runtime_error("checkpoint '" + path +
                             "': bad magic (wrong file type or version)");
  const std::uint32_t stored_crc =
      detail::Reader(data, data.size() - 4).u32();
  const std::uint32_t actual_crc = crc32(data.data(), data.size() - 4);
  if (stored_crc != actual_crc)
    throw std::runtime_error("checkpoint '" + path + "': checksum mismatch");

  detail::Reader r(data, sizeof(kCheckpointMagic));
  LoadedCheckpoint ck;
  const std::uint32_t meta_len = r.u32();
  ck.meta = nlohmann::json::parse(r.bytes(meta_len));

  const auto read_blocks = [&r](auto& blocks) {
    const std::uint32_t count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::uint32_t name_len = r.u32();
      std::string name = r.bytes(name_len);
      const std::uint64_t n = r.u64();
      std::vector<double> values(n);
      for (std::uint64_t k = 0; k < n; ++k) values[k] = r.f64();
      blocks.emplace_back(std::move(name), std::move(values));
    }
  };
  read_blocks(ck.params);
  read_blocks(ck.state);
  if (r.pos() != data.size() - 4)
    throw std::runtime_error("checkpoint '" + path + "': trailing bytes");
  return ck;
}

}  // namespace actinet::io
