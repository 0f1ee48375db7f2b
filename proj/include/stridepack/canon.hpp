#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "ir.hpp"

namespace stridepack {

/* The four rewrites below canonicalize an IR chain. Each one is applied
 * bottom-up, preserves the described byte set, and reports whether it fired.
 * Offsets of removed nodes are always added into the surviving node so the
 * additive offset sum along the chain is conserved.
 */

// StreamData over a DenseData whose extent equals the stride is one larger
// dense run.
inline bool dense_folding(TypeNode &ty) {
  bool changed = false;
  if (ty.has_child()) {
    changed = dense_folding(ty.child());
  }
  if (!is_stream(ty) || !is_dense(ty.child())) {
    return changed;
  }
  const StreamData p = std::get<StreamData>(ty.data);
  const DenseData c = std::get<DenseData>(ty.child().data);
  if (c.extent != p.stride) {
    return changed;
  }
  ty = TypeNode(DenseData{p.off + c.off, p.count * p.stride});
  return true;
}

// a stream of a single element is the element itself
inline bool stream_elision(TypeNode &ty) {
  bool changed = false;
  if (ty.has_child()) {
    changed = stream_elision(ty.child());
  }
  if (!is_stream(ty)) {
    return changed;
  }
  const StreamData s = std::get<StreamData>(ty.data);
  if (s.count != 1) {
    return changed;
  }
  TypeNode absorbed = std::move(ty.child());
  node_offset(absorbed) += s.off;
  ty = std::move(absorbed);
  return true;
}

// nested streams where the parent stride spans exactly the child are one
// stream with the product count
inline bool stream_flatten(TypeNode &ty) {
  bool changed = false;
  if (ty.has_child()) {
    changed = stream_flatten(ty.child());
  }
  if (!is_stream(ty) || !is_stream(ty.child())) {
    return changed;
  }
  const StreamData p = std::get<StreamData>(ty.data);
  const StreamData c = std::get<StreamData>(ty.child().data);
  if (p.stride != c.count * c.stride) {
    return changed;
  }
  TypeNode grand = std::move(ty.child().child());
  ty.data = StreamData{p.off + c.off, c.stride, p.count * c.count};
  ty.set_child(std::move(grand));
  return true;
}

// Order the stream run above the terminal dense node: stride descending,
// then count descending, then offset ascending. Each node keeps its own
// (off, stride, count) triple; the index sets are independent products, so
// any order describes the same bytes. The dense base never moves.
inline bool sort_streams(TypeNode &ty) {
  std::vector<StreamData> streams;
  for (TypeNode *cur = &ty; is_stream(*cur); cur = &cur->child()) {
    streams.push_back(std::get<StreamData>(cur->data));
  }
  if (streams.size() < 2) {
    return false;
  }
  const std::vector<StreamData> before = streams;
  std::sort(streams.begin(), streams.end(),
            [](const StreamData &a, const StreamData &b) {
              if (a.stride != b.stride) {
                return a.stride > b.stride;
              }
              if (a.count != b.count) {
                return a.count > b.count;
              }
              return a.off < b.off;
            });
  if (streams == before) {
    return false;
  }
  TypeNode *cur = &ty;
  for (const StreamData &s : streams) {
    cur->data = s;
    cur = &cur->child();
  }
  return true;
}

/* Repeat {fold, elide, flatten, sort} until a full round changes nothing.
 * The first three strictly shorten the chain and sorting strictly reduces
 * inversions, so the loop terminates well within (chain length)^2 rounds.
 */
inline TypeNode simplify(TypeNode ty, int64_t *rounds_out = nullptr) {
  for (const TypeNode *cur = &ty;; cur = &cur->child()) {
    if (is_stream(*cur)) {
      const StreamData &s = std::get<StreamData>(cur->data);
      if (s.count >= 2 && s.stride < 1) {
        throw InvalidLayout("stream of " + std::to_string(s.count) +
                            " coincident elements (stride " +
                            std::to_string(s.stride) + ")");
      }
    }
    if (!cur->has_child()) {
      break;
    }
  }

  const int64_t len = chain_length(ty);
  const int64_t limit = len * len + 2;
  int64_t rounds = 0;
  bool changed = true;
  while (changed) {
    if (++rounds > limit) {
      throw std::logic_error("simplify did not reach a fixpoint");
    }
    changed = dense_folding(ty);
    changed |= stream_elision(ty);
    changed |= stream_flatten(ty);
    changed |= sort_streams(ty);
  }
  if (rounds_out) {
    *rounds_out = rounds;
  }
  return ty;
}

} // namespace stridepack
