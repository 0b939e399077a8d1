#include "diploma/merkle.hpp"

namespace diploma {

namespace {

Digest node_hash(const Digest& left, const Digest& right) {
  Bytes buf;
  buf.reserve(65);
  buf.push_back(kNodeDomain);
  buf.insert(buf.end(), left.bytes.begin(), left.bytes.end());
  buf.insert(buf.end(), right.bytes.begin(), right.bytes.end());
  return hash(buf);
}

}  // namespace

Digest merkle_leaf_hash(const std::array<uint8_t, 32>& sort_key,
                        const Digest& record_hash) {
  Bytes buf;
  buf.reserve(65);
  buf.push_back(kLeafDomain);
  buf.insert(buf.end(), sort_key.begin(), sort_key.end());
  buf.insert(buf.end(), record_hash.bytes.begin(), record_hash.bytes.end());
  return hash(buf);
}

Digest merkle_empty_root() {
  return merkle_leaf_hash(std::array<uint8_t, 32>{}, Digest{});
}

Digest merkle_root(const std::vector<Digest>& leaf_hashes) {
  if (leaf_hashes.empty()) return merkle_empty_root();
  std::vector<Digest> level = leaf_hashes;
  while (level.size() > 1) {
    std::vector<Digest> next;
    next.reserve((level.size() + 1) / 2);
    for (size_t i = 0; i + 1 < level.size(); i += 2) {
      next.push_back(node_hash(level[i], level[i + 1]));
    }
    if (level.size() % 2 == 1) next.push_back(level.back());  // promote unpaired
    level = std::move(next);
  }
  return level[0];
}

MerklePath merkle_path(const std::vector<Digest>& leaf_hashes, size_t index) {
  if (index >= leaf_hashes.size()) {
    throw Error(Err::NotFound, "leaf index out of range");
  }
  MerklePath path;
  path.leaf_index = index;
  std::vector<Digest> level = leaf_hashes;
  size_t pos = index;
  uint32_t level_no = 0;
  while (level.size() > 1) {
    if (pos % 2 == 1) {
      path.steps.push_back({level[pos - 1], true, level_no});
    } else if (pos + 1 < level.size()) {
      path.steps.push_back({level[pos + 1], false, level_no});
    }
    // else: promoted, no sibling at this level
    std::vector<Digest> next;
    next.reserve((level.size() + 1) / 2);
    for (size_t i = 0; i + 1 < level.size(); i += 2) {
      next.push_back(node_hash(level[i], level[i + 1]));
    }
    if (level.size() % 2 == 1) next.push_back(level.back());
    level = std::move(next);
    pos /= 2;
    ++level_no;
  }
  return path;
}

Digest merkle_fold(const Digest& leaf_hash, const MerklePath& path) {
  Digest current = leaf_hash;
  for (const PathStep& step : path.steps) {
    current = step.sibling_on_left ? node_hash(step.sibling, current)
                                   : node_hash(current, step.sibling);
  }
  return current;
}

bool merkle_path_shape_ok(const MerklePath& path, uint64_t leaf_count) {
  if (leaf_count == 0) return false;
  if (path.leaf_index >= leaf_count) return false;
  uint64_t size = leaf_count;
  uint64_t pos = path.leaf_index;
  uint32_t level_no = 0;
  size_t step = 0;
  while (size > 1) {
    bool has_sibling = (pos % 2 == 1) || (pos + 1 < size);
    if (has_sibling) {
      if (step >= path.steps.size()) return false;
      const PathStep& s = path.steps[step];
      if (s.level != level_no) return false;
      if (s.sibling_on_left != (pos % 2 == 1)) return false;
      ++step;
    }
    size = (size + 1) / 2;
    pos /= 2;
    ++level_no;
  }
  return step == path.steps.size();
}

}  // namespace diploma
