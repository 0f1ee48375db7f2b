#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "strided_block.hpp"
#include "type_def.hpp"

namespace stridepack {

struct Block {
  int64_t offset = 0;
  int64_t length = 0;

  bool operator==(const Block &) const = default;
};

// normalized run list: sorted by offset, adjacent runs merged, no overlap.
// overlap records whether normalization collapsed bytes described twice.
struct BlockList {
  std::vector<Block> blocks;
  bool overlap = false;

  int64_t total_length() const noexcept {
    int64_t n = 0;
    for (const Block &b : blocks) {
      n += b.length;
    }
    return n;
  }

  // one past the last described byte, relative to the base
  int64_t span() const noexcept {
    return blocks.empty() ? 0 : blocks.back().offset + blocks.back().length;
  }

  bool operator==(const BlockList &) const = default;
};

inline BlockList normalize_blocks(std::vector<Block> runs) {
  BlockList out;
  std::erase_if(runs, [](const Block &b) { return b.length == 0; });
  std::sort(runs.begin(), runs.end(), [](const Block &a, const Block &b) {
    return a.offset != b.offset ? a.offset < b.offset : a.length < b.length;
  });
  for (const Block &r : runs) {
    if (!out.blocks.empty() &&
        r.offset <= out.blocks.back().offset + out.blocks.back().length) {
      Block &cur = out.blocks.back();
      if (r.offset < cur.offset + cur.length) {
        out.overlap = true;
      }
      cur.length = std::max(cur.length, r.offset + r.length - cur.offset);
    } else {
      out.blocks.push_back(r);
    }
  }
  return out;
}

/* Enumerate every contiguous run of a definition by direct interpretation of
 * the constructor semantics, in definition order. No IR, no canonicalization:
 * this is the independent reference the rest of the pipeline is tested
 * against.
 */
inline void flatten_runs(const TypeDef &def, int64_t base,
                         std::vector<Block> &out) {
  std::visit(
      [&](const auto &n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, TypeDef::Named>) {
          out.push_back({base, named_size(n.kind)});
        } else if constexpr (std::is_same_v<T, TypeDef::Contiguous>) {
          const int64_t e = type_extent(def.inner());
          for (int64_t i = 0; i < n.count; ++i) {
            flatten_runs(def.inner(), base + i * e, out);
          }
        } else if constexpr (std::is_same_v<T, TypeDef::Vector>) {
          const int64_t e = type_extent(def.inner());
          for (int64_t i = 0; i < n.count; ++i) {
            for (int64_t j = 0; j < n.blocklength; ++j) {
              flatten_runs(def.inner(), base + i * n.stride * e + j * e, out);
            }
          }
        } else if constexpr (std::is_same_v<T, TypeDef::Hvector>) {
          const int64_t e = type_extent(def.inner());
          for (int64_t i = 0; i < n.count; ++i) {
            for (int64_t j = 0; j < n.blocklength; ++j) {
              flatten_runs(def.inner(), base + i * n.stride_bytes + j * e,
                           out);
            }
          }
        } else {
          const size_t nd = n.sizes.size();
          std::vector<int64_t> dim_stride(nd);
          int64_t stride = type_extent(def.inner());
          for (size_t d = 0; d < nd; ++d) {
            dim_stride[d] = stride;
            stride *= n.sizes[d];
          }
          std::vector<int64_t> idx(nd, 0);
          for (;;) {
            int64_t off = 0;
            for (size_t d = 0; d < nd; ++d) {
              off += (n.offsets[d] + idx[d]) * dim_stride[d];
            }
            flatten_runs(def.inner(), base + off, out);
            size_t d = 0;
            while (d < nd && ++idx[d] == n.subsizes[d]) {
              idx[d] = 0;
              ++d;
            }
            if (d == nd) {
              break;
            }
          }
        }
      },
      def.node());
}

inline std::vector<Block> flatten_runs(const TypeDef &def) {
  std::vector<Block> runs;
  flatten_runs(def, 0, runs);
  return runs;
}

inline BlockList flatten_oracle(const TypeDef &def) {
  return normalize_blocks(flatten_runs(def));
}

// expand a strided block into its normalized run list
inline BlockList enumerate_blocks(const StridedBlock &sb) {
  const size_t nd = sb.counts.size();
  for (int64_t c : sb.counts) {
    if (c < 1) {
      return {};
    }
  }
  std::vector<Block> runs;
  std::vector<int64_t> idx(nd, 0);
  for (;;) {
    int64_t off = sb.start;
    for (size_t d = 1; d < nd; ++d) {
      off += idx[d] * sb.strides[d];
    }
    runs.push_back({off, sb.counts[0]});
    size_t d = 1;
    while (d < nd && ++idx[d] == sb.counts[d]) {
      idx[d] = 0;
      ++d;
    }
    if (d >= nd) {
      break;
    }
  }
  return normalize_blocks(std::move(runs));
}

} // namespace stridepack
