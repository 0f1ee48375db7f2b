#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ir.hpp"

namespace stridepack {

/* Canonical compact form. Stored base-first: counts[0] is the dense run in
 * bytes with strides[0] = 1; counts[i > 0] are repetitions at strides[i]
 * bytes. A chain sorted stride-descending from the head lands here with
 * non-decreasing strides.
 */
struct StridedBlock {
  int64_t start = 0; // bytes from the lower bound to the first byte
  std::vector<int64_t> counts;
  std::vector<int64_t> strides;

  int64_t ndims() const noexcept { return static_cast<int64_t>(counts.size()); }

  // total described bytes of one object
  int64_t byte_count() const noexcept {
    int64_t n = 1;
    for (int64_t c : counts) {
      n *= c;
    }
    return n;
  }

  bool operator==(const StridedBlock &) const = default;

  std::string str() const {
    auto list = [](const std::vector<int64_t> &v) {
      std::string s = "[";
      for (size_t i = 0; i < v.size(); ++i) {
        s += (i ? "," : "") + std::to_string(v[i]);
      }
      return s + "]";
    };
    return "StridedBlock{start:" + std::to_string(start) +
           ",counts:" + list(counts) + ",strides:" + list(strides) + "}";
  }
};

/* Lower a canonical chain: the terminal DenseData gives counts[0] and
 * stride 1, each StreamData above contributes (count, stride) base to head,
 * and all node offsets accumulate into start. Returns nullopt when the chain
 * cannot be expressed (non-positive counts, zero-extent base, malformed
 * shape), which signals the caller to fall back to a block list.
 */
inline std::optional<StridedBlock> to_strided_block(const TypeNode &ty) {
  std::vector<const TypeNode *> nodes; // head to base
  for (const TypeNode *cur = &ty;; cur = &cur->child()) {
    nodes.push_back(cur);
    if (!cur->has_child()) {
      break;
    }
  }

  const TypeNode &base = *nodes.back();
  if (!is_dense(base)) {
    return std::nullopt;
  }
  const DenseData d = std::get<DenseData>(base.data);
  if (d.extent < 1) {
    return std::nullopt;
  }

  StridedBlock sb;
  sb.start = d.off;
  sb.counts.push_back(d.extent);
  sb.strides.push_back(1);
  for (auto it = nodes.rbegin() + 1; it != nodes.rend(); ++it) {
    if (!is_stream(**it)) {
      return std::nullopt;
    }
    const StreamData s = std::get<StreamData>((*it)->data);
    if (s.count < 1 || s.stride < 1) {
      return std::nullopt;
    }
    sb.start += s.off;
    sb.counts.push_back(s.count);
    sb.strides.push_back(s.stride);
  }
  return sb;
}

} // namespace stridepack
