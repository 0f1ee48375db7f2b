#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "errors.hpp"

namespace stridepack {

// transfer-time samples, sizes strictly increasing
struct Curve {
  std::vector<double> size; // bytes
  std::vector<double> time; // seconds
};

// pack/unpack-time samples on a complete rectangular grid
struct Surface {
  std::vector<double> object;            // bytes, strictly increasing
  std::vector<double> block;             // bytes, strictly increasing
  std::vector<std::vector<double>> time; // [object][block], seconds
};

/* Sampled transfer and pack latencies of one machine. Times feed the three
 * strategy models:
 *   device  = gpu_pack + gpu_gpu + gpu_unpack
 *   oneshot = host_pack + cpu_cpu + host_unpack
 *   staged  = gpu_pack + d2h + cpu_cpu + h2d + gpu_unpack
 */
struct MachineProfile {
  Curve cpu_cpu;
  Curve gpu_gpu;
  Curve d2h;
  Curve h2d;
  Surface gpu_pack;
  Surface gpu_unpack;
  Surface host_pack;
  Surface host_unpack;
};

enum class MethodChoice { OneShot, Device, Staged };

constexpr const char *method_name(MethodChoice m) noexcept {
  switch (m) {
  case MethodChoice::OneShot:
    return "oneshot";
  case MethodChoice::Device:
    return "device";
  case MethodChoice::Staged:
    return "staged";
  }
  return "?";
}

struct ModelQuery {
  int64_t object_size; // bytes of one packed object
  int64_t block_size;  // bytes of each contiguous block (counts[0])

  bool operator==(const ModelQuery &) const = default;
};

namespace detail {

struct AxisPos {
  size_t lo;
  size_t hi;
  double u; // position within [lo, hi] in log space
};

inline AxisPos locate(const std::vector<double> &xs, double q) {
  if (q <= xs.front()) {
    return {0, 0, 0.0};
  }
  if (q >= xs.back()) {
    return {xs.size() - 1, xs.size() - 1, 0.0};
  }
  size_t hi = 1;
  while (xs[hi] < q) {
    ++hi;
  }
  if (q == xs[hi]) {
    return {hi, hi, 0.0};
  }
  const size_t lo = hi - 1;
  if (q == xs[lo]) {
    return {lo, lo, 0.0};
  }
  const double u =
      (std::log(q) - std::log(xs[lo])) / (std::log(xs[hi]) - std::log(xs[lo]));
  return {lo, hi, u};
}

// geometric mix; falls back to arithmetic when a sample is zero, which only
// happens in synthetic profiles that null out a component
inline double mix(double a, double b, double u) {
  if (a == b) {
    return a;
  }
  if (a <= 0.0 || b <= 0.0) {
    return (1.0 - u) * a + u * b;
  }
  return std::exp((1.0 - u) * std::log(a) + u * std::log(b));
}

} // namespace detail

// piecewise-linear in log-log, clamped to the end samples outside the range
inline double interp_1d(const Curve &c, double size_bytes) {
  if (c.size.empty()) {
    throw EmptyProfile("interp_1d: curve has no samples");
  }
  const auto p = detail::locate(c.size, size_bytes);
  if (p.lo == p.hi) {
    return c.time[p.lo];
  }
  return detail::mix(c.time[p.lo], c.time[p.hi], p.u);
}

// bilinear in log-log on both axes, clamped at the grid edges
inline double interp_2d(const Surface &s, double object_bytes,
                        double block_bytes) {
  if (s.object.empty() || s.block.empty()) {
    throw EmptyProfile("interp_2d: surface has no samples");
  }
  const auto po = detail::locate(s.object, object_bytes);
  const auto pb = detail::locate(s.block, block_bytes);
  const double t0 =
      detail::mix(s.time[po.lo][pb.lo], s.time[po.hi][pb.lo], po.u);
  const double t1 =
      detail::mix(s.time[po.lo][pb.hi], s.time[po.hi][pb.hi], po.u);
  return detail::mix(t0, t1, pb.u);
}

inline double t_device(const MachineProfile &p, const ModelQuery &q) {
  const double obj = static_cast<double>(q.object_size);
  const double blk = static_cast<double>(q.block_size);
  return interp_2d(p.gpu_pack, obj, blk) + interp_1d(p.gpu_gpu, obj) +
         interp_2d(p.gpu_unpack, obj, blk);
}

inline double t_oneshot(const MachineProfile &p, const ModelQuery &q) {
  const double obj = static_cast<double>(q.object_size);
  const double blk = static_cast<double>(q.block_size);
  return interp_2d(p.host_pack, obj, blk) + interp_1d(p.cpu_cpu, obj) +
         interp_2d(p.host_unpack, obj, blk);
}

inline double t_staged(const MachineProfile &p, const ModelQuery &q) {
  const double obj = static_cast<double>(q.object_size);
  const double blk = static_cast<double>(q.block_size);
  return interp_2d(p.gpu_pack, obj, blk) + interp_1d(p.d2h, obj) +
         interp_1d(p.cpu_cpu, obj) + interp_1d(p.h2d, obj) +
         interp_2d(p.gpu_unpack, obj, blk);
}

// argmin over the three models; ties prefer fewer hops:
// device, then one-shot, then staged
inline MethodChoice choose_method(const MachineProfile &p,
                                  const ModelQuery &q) {
  if (q.object_size <= 0 || q.block_size <= 0 ||
      q.block_size > q.object_size) {
    throw InvalidArgument("choose_method: need 0 < block_size <= object_size");
  }
  MethodChoice best = MethodChoice::Device;
  double best_t = t_device(p, q);
  if (const double t = t_oneshot(p, q); t < best_t) {
    best = MethodChoice::OneShot;
    best_t = t;
  }
  if (const double t = t_staged(p, q); t < best_t) {
    best = MethodChoice::Staged;
  }
  return best;
}

/* Memoizes choose_method per (object_size, block_size). Sharded so an
 * insertion only briefly blocks readers hashing to the same shard.
 */
class ModelCache {
public:
  explicit ModelCache(const MachineProfile &profile) : profile_(profile) {}

  MethodChoice choose(const ModelQuery &q) const {
    const uint64_t key = hash_query(q);
    Shard &shard = shards_[key % shards_.size()];
    {
      std::shared_lock lock(shard.mu);
      auto it = shard.map.find(q);
      if (it != shard.map.end()) {
        return it->second;
      }
    }
    const MethodChoice m = choose_method(profile_, q);
    std::unique_lock lock(shard.mu);
    shard.map.emplace(q, m);
    return m;
  }

  const MachineProfile &profile() const noexcept { return profile_; }

private:
  struct QueryHash {
    size_t operator()(const ModelQuery &q) const noexcept {
      return hash_query(q);
    }
  };
  struct Shard {
    mutable std::shared_mutex mu;
    std::unordered_map<ModelQuery, MethodChoice, QueryHash> map;
  };

  static uint64_t hash_query(const ModelQuery &q) noexcept {
    uint64_t x = static_cast<uint64_t>(q.object_size) * 0x9e3779b97f4a7c15ULL;
    x ^= static_cast<uint64_t>(q.block_size) + 0x9e3779b97f4a7c15ULL +
         (x << 6) + (x >> 2);
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    return x;
  }

  const MachineProfile &profile_;
  mutable std::array<Shard, 16> shards_;
};

} // namespace stridepack
