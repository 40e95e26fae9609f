#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "egsmooth/error.hpp"
#include "egsmooth/predicate.hpp"

namespace egsmooth {

/// Predicate embedding vectors keyed by predicate, all of one dimension.
/// Rows keep insertion (file) order.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  explicit EmbeddingStore(std::uint32_t dim) : dim_(dim) {}

  std::uint32_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return keys_.size(); }
  bool empty() const noexcept { return keys_.empty(); }

  void add(const Predicate& p, std::span<const float> values) {
    if (dim_ == 0) dim_ = static_cast<std::uint32_t>(values.size());
    if (values.size() != dim_ || dim_ == 0)
      throw DimensionMismatch("vector for " + p.str() + " has dim " + std::to_string(values.size()) +
                              ", store dim is " + std::to_string(dim_));
    for (float v : values)
      if (!std::isfinite(v)) throw DataError("non-finite value in vector for " + p.str());
    if (!rows_.emplace(p.str(), keys_.size()).second) throw DataError("duplicate vector for " + p.str());
    keys_.push_back(p);
    data_.insert(data_.end(), values.begin(), values.end());
  }

  bool contains(const Predicate& p) const { return rows_.contains(p.str()); }

  std::optional<std::span<const float>> find(const Predicate& p) const {
    auto it = rows_.find(p.str());
    if (it == rows_.end()) return std::nullopt;
    return row(it->second);
  }

  std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  const std::vector<Predicate>& keys() const noexcept { return keys_; }

 private:
  std::uint32_t dim_ = 0;
  std::vector<Predicate> keys_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> rows_;
};

namespace egem {

inline constexpr std::array<char, 4> kMagic = {'E', 'G', 'E', 'M'};
inline constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<unsigned char, sizeof(T)> buf{};
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(buf.data()), buf.size());
}

template <typename T>
T get_le(std::istream& in, const char* what) {
  std::array<unsigned char, sizeof(T)> buf{};
  if (!in.read(reinterpret_cast<char*>(buf.data()), buf.size()))
    throw ParseError(std::string("truncated embedding file while reading ") + what);
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(buf[i]) << (8 * i);
  return value;
}

inline void put_f32(std::ostream& out, float v) { put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v)); }
inline float get_f32(std::istream& in) { return std::bit_cast<float>(get_le<std::uint32_t>(in, "vector value")); }

}  // namespace egem

/// Writes the EGEM binary format (little-endian):
///   "EGEM" | u32 version=1 | u32 dim | u64 count |
///   count x ( u16 byte length | UTF-8 predicate | dim x f32 )
inline void write_embeddings(const EmbeddingStore& store, std::ostream& out) {
  out.write(egem::kMagic.data(), egem::kMagic.size());
  egem::put_le<std::uint32_t>(out, egem::kVersion);
  egem::put_le<std::uint32_t>(out, store.dim());
  egem::put_le<std::uint64_t>(out, store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto& key = store.keys()[i].str();
    if (key.size() > 0xFFFF) throw DataError("predicate string too long for EGEM record: " + key.substr(0, 64));
    egem::put_le<std::uint16_t>(out, static_cast<std::uint16_t>(key.size()));
    out.write(key.data(), static_cast<std::streamsize>(key.size()));
    for (float v : store.row(i)) egem::put_f32(out, v);
  }
  if (!out) throw IoError("failed writing embedding file");
}

inline void save_embeddings(const EmbeddingStore& store, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_embeddings(store, out);
}

inline EmbeddingStore read_embeddings(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size())) throw ParseError("truncated embedding file while reading magic");
  if (magic != egem::kMagic) throw ParseError("bad magic: not an EGEM embedding file");
  const auto version = egem::get_le<std::uint32_t>(in, "version");
  if (version != egem::kVersion) throw ParseError("unsupported EGEM version " + std::to_string(version));
  const auto dim = egem::get_le<std::uint32_t>(in, "dim");
  const auto count = egem::get_le<std::uint64_t>(in, "count");
  if (dim == 0 && count > 0) throw ParseError("EGEM header declares dim 0 with records present");

  EmbeddingStore store(dim);
  std::vector<float> values(dim);
  std::string key;
  for (std::uint64_t r = 0; r < count; ++r) {
    const auto len = egem::get_le<std::uint16_t>(in, "record length");
    key.resize(len);
    if (!in.read(key.data(), len))
      throw ParseError("truncated embedding file: record " + std::to_string(r) + " of " + std::to_string(count));
    for (auto& v : values) {
      v = egem::get_f32(in);
      if (!std::isfinite(v)) throw ParseError("non-finite value in record " + std::to_string(r) + " (" + key + ")");
    }
    store.add(Predicate::parse(key), values);
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw ParseError("trailing bytes after " + std::to_string(count) + " declared records");
  return store;
}

inline EmbeddingStore load_embeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embedding file " + path);
  try {
    return read_embeddings(in);
  } catch (const DataError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace egsmooth
