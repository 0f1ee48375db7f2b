#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <string>

#include "errors.hpp"
#include "strided_block.hpp"

namespace stridepack {

enum class CountStrategy {
  GridZ,  // extra objects extend the grid Z dimension (1D/2D objects)
  Iterate // the whole grid is applied to each object in turn (3D+)
};

constexpr const char *strategy_name(CountStrategy s) noexcept {
  return s == CountStrategy::GridZ ? "gridz" : "iterate";
}

/* Executor parameters derived from a StridedBlock: word size, a thread-block
 * shape under the 1024-thread cap, and a covering grid. The host executor
 * honors word as its copy granularity; block/grid describe the kernel a
 * device build would launch.
 */
struct PackPlan {
  int64_t word = 1; // bytes, in {16, 8, 4, 2, 1}
  std::array<int64_t, 3> block_dims{1, 1, 1};
  std::array<int64_t, 3> grid_dims{1, 1, 1};
  CountStrategy count_strategy = CountStrategy::GridZ;

  bool operator==(const PackPlan &) const = default;

  std::string str() const {
    auto dims = [](const std::array<int64_t, 3> &d) {
      return "(" + std::to_string(d[0]) + "," + std::to_string(d[1]) + "," +
             std::to_string(d[2]) + ")";
    };
    return "PackPlan{w:" + std::to_string(word) + ",block:" +
           dims(block_dims) + ",grid:" + dims(grid_dims) +
           ",strategy:" + strategy_name(count_strategy) + "}";
  }
};

// largest native word that is aligned to the object and a factor of the run
inline int64_t select_word_size(const StridedBlock &sb) {
  for (int64_t w : {int64_t{16}, int64_t{8}, int64_t{4}, int64_t{2}}) {
    if (sb.counts[0] % w != 0 || sb.start % w != 0) {
      continue;
    }
    bool ok = true;
    for (size_t i = 1; i < sb.strides.size(); ++i) {
      if (sb.strides[i] % w != 0) {
        ok = false;
        break;
      }
    }
    if (ok) {
      return w;
    }
  }
  return 1;
}

inline int64_t pow2_at_least(int64_t v) noexcept {
  return static_cast<int64_t>(std::bit_ceil(static_cast<uint64_t>(v)));
}

/* Block dims are filled X to Z with the smallest power of two covering each
 * logical extent (counts[0]/word, counts[1], counts[2]), clamped so the
 * product stays within 1024 threads; Z shrinks before Y so X keeps its
 * width. The grid covers whatever the block does not. Dimensions above the
 * third are handled by iterating the grid, as is the per-call object count
 * for 3D+ objects.
 */
inline PackPlan make_plan(const StridedBlock &sb, int64_t force_word = 0) {
  PackPlan plan;
  plan.word = force_word ? force_word : select_word_size(sb);
  if (sb.counts[0] % plan.word != 0) {
    throw InvalidArgument("make_plan: word does not divide the dense run");
  }

  const std::array<int64_t, 3> ext{
      sb.counts[0] / plan.word,
      sb.ndims() > 1 ? sb.counts[1] : 1,
      sb.ndims() > 2 ? sb.counts[2] : 1,
  };

  int64_t budget = 1024;
  for (int d = 0; d < 3; ++d) {
    plan.block_dims[d] = std::min(pow2_at_least(ext[d]), budget);
    budget /= plan.block_dims[d];
    plan.grid_dims[d] = (ext[d] + plan.block_dims[d] - 1) / plan.block_dims[d];
  }
  plan.count_strategy =
      sb.ndims() <= 2 ? CountStrategy::GridZ : CountStrategy::Iterate;
  return plan;
}

} // namespace stridepack
