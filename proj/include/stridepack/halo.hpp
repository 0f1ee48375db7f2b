#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "commit.hpp"
#include "errors.hpp"
#include "pack.hpp"
#include "perf_model.hpp"
#include "type_def.hpp"

namespace stridepack {

/* One process stands in for a periodic 3D rank grid: per rank, 26 halo
 * regions are committed as subarray datatypes over the padded local
 * allocation, packed into one send buffer, copied to the neighbors' receive
 * buffers, and unpacked into the ghost shell. Verification is exact byte
 * equality against the owning rank's cells; phase times come from the
 * performance model, never from wall clocks.
 */
struct HaloConfig {
  std::array<int64_t, 3> ranks{1, 1, 1};     // rank grid
  std::array<int64_t, 3> interior{16, 16, 16}; // gridpoints per rank per axis
  int64_t radius = 3;                        // stencil radius, gridpoints
  int64_t element_bytes = 64;                // payload per gridpoint
};

inline void validate(const HaloConfig &cfg) {
  if (cfg.radius < 1 || cfg.element_bytes < 1) {
    throw InvalidArgument("halo: radius and element bytes must be positive");
  }
  for (int a = 0; a < 3; ++a) {
    if (cfg.ranks[a] < 1) {
      throw InvalidArgument("halo: rank grid dims must be positive");
    }
    if (cfg.interior[a] < 2 * cfg.radius) {
      throw InvalidArgument("halo: interior extent must be >= 2*radius on "
                            "every axis");
    }
  }
}

struct HaloRegion {
  std::array<int, 3> dir; // each in {-1, 0, 1}, never all zero
  TypeDef send;           // interior cells the neighbor needs
  TypeDef recv;           // ghost cells this rank fills from the neighbor
  int64_t gridpoints;     // cells in the region
};

namespace detail {

struct AxisRange {
  int64_t begin;
  int64_t len;
};

inline AxisRange send_range(int dir, int64_t n, int64_t r) noexcept {
  if (dir < 0) {
    return {r, r};
  }
  if (dir > 0) {
    return {n, r};
  }
  return {r, n};
}

inline AxisRange recv_range(int dir, int64_t n, int64_t r) noexcept {
  if (dir < 0) {
    return {0, r};
  }
  if (dir > 0) {
    return {r + n, r};
  }
  return {r, n};
}

// byte-normalized subarray over the padded allocation, x fastest
inline TypeDef region_subarray(const std::array<int64_t, 3> &padded,
                               const std::array<AxisRange, 3> &range,
                               int64_t elem) {
  return make_subarray(
      3, {padded[0] * elem, padded[1], padded[2]},
      {range[0].len * elem, range[1].len, range[2].len},
      {range[0].begin * elem, range[1].begin, range[2].begin},
      make_named(NamedKind::Byte));
}

} // namespace detail

/* The 26 (send, recv) datatype pairs of one rank, in a fixed direction order
 * (z, then y, then x, each -1/0/+1, skipping the zero vector). The geometry
 * is identical on every rank; only the neighbor mapping differs.
 */
inline std::vector<HaloRegion> build_halo_types(const HaloConfig &cfg) {
  validate(cfg);
  const int64_t r = cfg.radius;
  const std::array<int64_t, 3> padded{cfg.interior[0] + 2 * r,
                                      cfg.interior[1] + 2 * r,
                                      cfg.interior[2] + 2 * r};
  std::vector<HaloRegion> regions;
  regions.reserve(26);
  for (int dz = -1; dz <= 1; ++dz) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0 && dz == 0) {
          continue;
        }
        const std::array<int, 3> dir{dx, dy, dz};
        std::array<detail::AxisRange, 3> send{};
        std::array<detail::AxisRange, 3> recv{};
        int64_t cells = 1;
        for (int a = 0; a < 3; ++a) {
          send[a] = detail::send_range(dir[a], cfg.interior[a], r);
          recv[a] = detail::recv_range(dir[a], cfg.interior[a], r);
          cells *= send[a].len;
        }
        regions.push_back(
            {dir,
             detail::region_subarray(padded, send, cfg.element_bytes),
             detail::region_subarray(padded, recv, cfg.element_bytes),
             cells});
      }
    }
  }
  return regions;
}

struct ExchangeReport {
  double pack_seconds = 0;      // max across ranks of the per-rank sum
  double alltoallv_seconds = 0; // same aggregation over transfer times
  double unpack_seconds = 0;
  bool verified = false;
  int64_t bytes_moved = 0; // payload bytes sent across all ranks
};

namespace detail {

inline uint64_t mix64(uint64_t x) noexcept {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

// deterministic payload of a gridpoint, a function of its global coordinate
inline void fill_cell(uint8_t *dst, int64_t gx, int64_t gy, int64_t gz,
                      int64_t elem) {
  uint64_t seed =
      mix64((static_cast<uint64_t>(gx) << 42) ^
            (static_cast<uint64_t>(gy) << 21) ^ static_cast<uint64_t>(gz) ^
            0x5bd1e995u);
  for (int64_t k = 0; k < elem; ++k) {
    if (k % 8 == 0) {
      seed = mix64(seed + static_cast<uint64_t>(k));
    }
    dst[k] = static_cast<uint8_t>(seed >> ((k % 8) * 8));
  }
}

inline int64_t wrap(int64_t v, int64_t n) noexcept {
  return ((v % n) + n) % n;
}

} // namespace detail

inline ExchangeReport run_exchange(const HaloConfig &cfg,
                                   const MachineProfile &profile) {
  validate(cfg);
  const auto regions = build_halo_types(cfg);
  const int64_t r = cfg.radius;
  const int64_t elem = cfg.element_bytes;
  const std::array<int64_t, 3> padded{cfg.interior[0] + 2 * r,
                                      cfg.interior[1] + 2 * r,
                                      cfg.interior[2] + 2 * r};
  const int64_t nranks = cfg.ranks[0] * cfg.ranks[1] * cfg.ranks[2];
  const int64_t alloc_bytes = padded[0] * padded[1] * padded[2] * elem;

  TypeRegistry registry;
  struct CommittedRegion {
    std::shared_ptr<const CommittedType> send;
    std::shared_ptr<const CommittedType> recv;
  };
  std::vector<CommittedRegion> committed;
  std::vector<int64_t> seg_off(regions.size() + 1, 0);
  for (size_t k = 0; k < regions.size(); ++k) {
    committed.push_back(
        {registry.commit(regions[k].send), registry.commit(regions[k].recv)});
    seg_off[k + 1] = seg_off[k] + committed[k].send->size;
  }
  const int64_t seg_total = seg_off.back();

  const auto rank_coord = [&](int64_t rk) {
    return std::array<int64_t, 3>{rk % cfg.ranks[0],
                                  (rk / cfg.ranks[0]) % cfg.ranks[1],
                                  rk / (cfg.ranks[0] * cfg.ranks[1])};
  };
  const auto rank_index = [&](std::array<int64_t, 3> c) {
    return (c[2] * cfg.ranks[1] + c[1]) * cfg.ranks[0] + c[0];
  };
  const auto cell_off = [&](int64_t x, int64_t y, int64_t z) {
    return ((z * padded[1] + y) * padded[0] + x) * elem;
  };

  // local allocations: interior filled from the global pattern, ghosts 0xee
  std::vector<std::vector<uint8_t>> alloc(nranks);
  for (int64_t rk = 0; rk < nranks; ++rk) {
    alloc[rk].assign(alloc_bytes, 0xee);
    const auto rc = rank_coord(rk);
    for (int64_t z = 0; z < cfg.interior[2]; ++z) {
      for (int64_t y = 0; y < cfg.interior[1]; ++y) {
        for (int64_t x = 0; x < cfg.interior[0]; ++x) {
          detail::fill_cell(&alloc[rk][cell_off(x + r, y + r, z + r)],
                            rc[0] * cfg.interior[0] + x,
                            rc[1] * cfg.interior[1] + y,
                            rc[2] * cfg.interior[2] + z, elem);
        }
      }
    }
  }

  // pack phase: all ranks pack every region before anything moves
  std::vector<std::vector<uint8_t>> send_buf(nranks);
  for (int64_t rk = 0; rk < nranks; ++rk) {
    send_buf[rk].resize(seg_total);
    int64_t pos = 0;
    for (size_t k = 0; k < regions.size(); ++k) {
      pos = pack(alloc[rk], *committed[k].send, 1, send_buf[rk], pos);
    }
  }

  // exchange phase: receive segment for direction d comes from the rank at
  // +d, which packed that data for direction -d
  std::vector<std::vector<uint8_t>> recv_buf(nranks);
  for (int64_t rk = 0; rk < nranks; ++rk) {
    recv_buf[rk].resize(seg_total);
    const auto rc = rank_coord(rk);
    for (size_t k = 0; k < regions.size(); ++k) {
      const auto &d = regions[k].dir;
      const int64_t src_rank = rank_index(
          {detail::wrap(rc[0] + d[0], cfg.ranks[0]),
           detail::wrap(rc[1] + d[1], cfg.ranks[1]),
           detail::wrap(rc[2] + d[2], cfg.ranks[2])});
      const size_t back = regions.size() - 1 - k; // direction -d
      std::copy_n(send_buf[src_rank].data() + seg_off[back],
                  committed[back].send->size,
                  recv_buf[rk].data() + seg_off[k]);
    }
  }

  // unpack phase
  for (int64_t rk = 0; rk < nranks; ++rk) {
    int64_t pos = 0;
    for (size_t k = 0; k < regions.size(); ++k) {
      pos = unpack(recv_buf[rk], pos, *committed[k].recv, 1, alloc[rk]);
    }
  }

  // every ghost cell must now equal the pattern at its wrapped global coord
  const std::array<int64_t, 3> global{cfg.ranks[0] * cfg.interior[0],
                                      cfg.ranks[1] * cfg.interior[1],
                                      cfg.ranks[2] * cfg.interior[2]};
  bool ok = true;
  std::vector<uint8_t> expect(elem);
  for (int64_t rk = 0; rk < nranks && ok; ++rk) {
    const auto rc = rank_coord(rk);
    for (int64_t z = 0; z < padded[2] && ok; ++z) {
      for (int64_t y = 0; y < padded[1] && ok; ++y) {
        for (int64_t x = 0; x < padded[0] && ok; ++x) {
          detail::fill_cell(
              expect.data(),
              detail::wrap(rc[0] * cfg.interior[0] + x - r, global[0]),
              detail::wrap(rc[1] * cfg.interior[1] + y - r, global[1]),
              detail::wrap(rc[2] * cfg.interior[2] + z - r, global[2]), elem);
          ok = std::memcmp(expect.data(), &alloc[rk][cell_off(x, y, z)],
                           elem) == 0;
        }
      }
    }
  }

  // modeled phase times: per-region model queries summed per rank, max
  // across ranks (all ranks are symmetric, so every rank sums identically)
  ExchangeReport report;
  report.verified = ok;
  report.bytes_moved = nranks * seg_total;
  ModelCache cache(profile);
  double pack_s = 0, xfer_s = 0, unpack_s = 0;
  for (size_t k = 0; k < regions.size(); ++k) {
    const CommittedType &ct = *committed[k].send;
    const ModelQuery q{ct.size, ct.canon ? ct.canon->counts[0] : ct.size};
    const double obj = static_cast<double>(q.object_size);
    const double blk = static_cast<double>(q.block_size);
    switch (cache.choose(q)) {
    case MethodChoice::Device:
      pack_s += interp_2d(profile.gpu_pack, obj, blk);
      xfer_s += interp_1d(profile.gpu_gpu, obj);
      unpack_s += interp_2d(profile.gpu_unpack, obj, blk);
      break;
    case MethodChoice::OneShot:
      pack_s += interp_2d(profile.host_pack, obj, blk);
      xfer_s += interp_1d(profile.cpu_cpu, obj);
      unpack_s += interp_2d(profile.host_unpack, obj, blk);
      break;
    case MethodChoice::Staged:
      pack_s += interp_2d(profile.gpu_pack, obj, blk);
      xfer_s += interp_1d(profile.d2h, obj) + interp_1d(profile.cpu_cpu, obj) +
                interp_1d(profile.h2d, obj);
      unpack_s += interp_2d(profile.gpu_unpack, obj, blk);
      break;
    }
  }
  report.pack_seconds = pack_s;
  report.alltoallv_seconds = xfer_s;
  report.unpack_seconds = unpack_s;
  return report;
}

} // namespace stridepack
