#pragma once

#include <vector>

#include "diploma/crypto.hpp"

namespace diploma {

// Domain-separated Merkle tree over sorted leaves. Leaf nodes hash with a
// 0x00 prefix, internal nodes with 0x01; an unpaired node is promoted
// unchanged to the next level (no duplication).

inline constexpr uint8_t kLeafDomain = 0x00;
inline constexpr uint8_t kNodeDomain = 0x01;
inline constexpr uint8_t kAggregateDomain = 0x02;

Digest merkle_leaf_hash(const std::array<uint8_t, 32>& sort_key,
                        const Digest& record_hash);

// Root of the empty tree: hash(0x00 || 32 zero bytes || 32 zero bytes).
Digest merkle_empty_root();

Digest merkle_root(const std::vector<Digest>& leaf_hashes);

struct PathStep {
  Digest sibling;
  bool sibling_on_left = false;
  uint32_t level = 0;
};

struct MerklePath {
  uint64_t leaf_index = 0;
  std::vector<PathStep> steps;

  bool operator==(const MerklePath&) const = default;
};

MerklePath merkle_path(const std::vector<Digest>& leaf_hashes, size_t index);

// Folds a leaf hash along the path. Does not check the path's shape.
Digest merkle_fold(const Digest& leaf_hash, const MerklePath& path);

// True iff the path's step levels and sides are exactly what a tree with
// leaf_count leaves produces for path.leaf_index. Binds the claimed index to
// the path shape, which adjacency and boundary checks rely on.
bool merkle_path_shape_ok(const MerklePath& path, uint64_t leaf_count);

}  // namespace diploma
