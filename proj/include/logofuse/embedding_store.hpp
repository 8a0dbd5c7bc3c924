#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "logofuse/features.hpp"

namespace logofuse {

// On-disk neural-code file:
//   "NCF1" | kind:u8 | dim:u32 | count:u64 | normalized:u8     (little endian)
//   count x { logo_id:u64 | dim x float32 }
inline constexpr char kEmbeddingMagic[4] = {'N', 'C', 'F', '1'};
inline constexpr std::size_t kEmbeddingHeaderBytes = 4 + 1 + 4 + 8 + 1;

struct EmbeddingStore {
  Kind kind = Kind::Generic;
  std::uint32_t dim = 0;
  bool normalized = false;
  // File order is preserved.
  std::vector<std::pair<std::uint64_t, std::vector<float>>> records;
};

EmbeddingStore read_embedding_store(const std::string& path);
void write_embedding_store(const std::string& path, const EmbeddingStore& store);

// Loads a store and returns one block per logo. Vectors are l2-normalized on
// load unless the header marks them as already normalized.
std::map<std::uint64_t, FeatureBlock> import_neural_codes(const std::string& path);

// Packs blocks of a single kind into a store (values narrowed to float32).
EmbeddingStore make_embedding_store(Kind kind,
                                    const std::vector<std::pair<std::uint64_t, FeatureBlock>>& blocks,
                                    bool normalized);

}  // namespace logofuse
