#include "logofuse/embedding_store.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>

#include "logofuse/error.hpp"

namespace logofuse {

namespace {

template <typename T>
void put_le(std::vector<char>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return static_cast<T>(v);
}

}  // namespace

EmbeddingStore read_embedding_store(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embedding store " + path);
  const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                         std::istreambuf_iterator<char>()};
  if (bytes.size() < kEmbeddingHeaderBytes) throw IoError(path + ": truncated header");
  if (std::memcmp(bytes.data(), kEmbeddingMagic, 4) != 0) throw IoError(path + ": bad magic");

  EmbeddingStore store;
  const auto kind = kind_from_u8(bytes[4]);
  if (!kind) throw IoError(path + ": unknown kind " + std::to_string(bytes[4]));
  store.kind = *kind;
  store.dim = get_le<std::uint32_t>(&bytes[5]);
  const auto count = get_le<std::uint64_t>(&bytes[9]);
  const std::uint8_t normalized = bytes[17];
  if (normalized > 1) throw IoError(path + ": normalized flag must be 0 or 1");
  store.normalized = normalized == 1;
  if (store.dim == 0) throw IoError(path + ": dim must be > 0");

  const std::uint64_t record_bytes = 8 + 4ull * store.dim;
  const std::uint64_t payload = bytes.size() - kEmbeddingHeaderBytes;
  if (count > payload / record_bytes || payload < count * record_bytes) {
    throw IoError(path + ": truncated payload (header declares " + std::to_string(count) +
                  " records of dim " + std::to_string(store.dim) + ", file holds " +
                  std::to_string(payload) + " payload bytes)");
  }
  if (payload != count * record_bytes) {
    throw IoError(path + ": " + std::to_string(payload - count * record_bytes) +
                  " trailing bytes after declared records");
  }

  std::set<std::uint64_t> seen;
  store.records.reserve(count);
  const unsigned char* p = bytes.data() + kEmbeddingHeaderBytes;
  for (std::uint64_t r = 0; r < count; ++r) {
    const auto id = get_le<std::uint64_t>(p);
    p += 8;
    if (!seen.insert(id).second) throw IoError(path + ": duplicate logo id " + std::to_string(id));
    std::vector<float> values(store.dim);
    for (auto& v : values) {
      v = std::bit_cast<float>(get_le<std::uint32_t>(p));
      p += 4;
    }
    store.records.emplace_back(id, std::move(values));
  }
  return store;
}

void write_embedding_store(const std::string& path, const EmbeddingStore& store) {
  if (store.dim == 0) throw InvalidArgument("embedding dim must be > 0");
  std::vector<char> out;
  out.reserve(kEmbeddingHeaderBytes + store.records.size() * (8 + 4ull * store.dim));
  out.insert(out.end(), kEmbeddingMagic, kEmbeddingMagic + 4);
  put_le(out, static_cast<std::uint8_t>(store.kind));
  put_le(out, store.dim);
  put_le(out, static_cast<std::uint64_t>(store.records.size()));
  put_le(out, static_cast<std::uint8_t>(store.normalized ? 1 : 0));
  std::set<std::uint64_t> seen;
  for (const auto& [id, values] : store.records) {
    if (values.size() != store.dim) {
      throw InvalidArgument("record " + std::to_string(id) + " has dim " +
                            std::to_string(values.size()) + ", store dim is " +
                            std::to_string(store.dim));
    }
    if (!seen.insert(id).second) throw InvalidArgument("duplicate logo id " + std::to_string(id));
    put_le(out, id);
    for (float v : values) put_le(out, std::bit_cast<std::uint32_t>(v));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write embedding store " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed for " + path);
}

std::map<std::uint64_t, FeatureBlock> import_neural_codes(const std::string& path) {
  const auto store = read_embedding_store(path);
  std::map<std::uint64_t, FeatureBlock> out;
  for (const auto& [id, values] : store.records) {
    FeatureBlock block{store.kind, std::vector<double>(values.begin(), values.end())};
    out.emplace(id, store.normalized ? std::move(block) : l2_normalize(block));
  }
  return out;
}

EmbeddingStore make_embedding_store(
    Kind kind, const std::vector<std::pair<std::uint64_t, FeatureBlock>>& blocks, bool normalized) {
  EmbeddingStore store;
  store.kind = kind;
  store.normalized = normalized;
  for (const auto& [id, block] : blocks) {
    if (block.kind != kind) throw InvalidArgument("block kind does not match store kind");
    if (store.dim == 0) store.dim = static_cast<std::uint32_t>(block.dim());
    std::vector<float> values(block.values.begin(), block.values.end());
    store.records.emplace_back(id, std::move(values));
  }
  if (store.dim == 0 && blocks.empty()) throw InvalidArgument("cannot infer dim of an empty store");
  return store;
}

}  // namespace logofuse
