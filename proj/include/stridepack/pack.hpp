#pragma once

#include <cstdint>
#include <cstring>
#include <future>
#include <span>
#include <thread>
#include <vector>

#include "commit.hpp"
#include "errors.hpp"

namespace stridepack {

struct PackOptions {
  int threads = 1;            // 1 = serial, 0 = hardware concurrency
  bool allow_fallback = true; // gather via the run list when no strided form
};

namespace detail {

// source offset of canonical run r (dim 1 fastest, higher dims outermost)
inline int64_t run_src_offset(const StridedBlock &sb, int64_t r) noexcept {
  int64_t off = sb.start;
  for (size_t d = 1; d < sb.counts.size(); ++d) {
    off += (r % sb.counts[d]) * sb.strides[d];
    r /= sb.counts[d];
  }
  return off;
}

inline int64_t runs_per_object(const StridedBlock &sb) noexcept {
  int64_t n = 1;
  for (size_t d = 1; d < sb.counts.size(); ++d) {
    n *= sb.counts[d];
  }
  return n;
}

/* Invoke fn(dst_off, src_off, word) for every word of work items
 * [begin, end), where item g maps to object g / runs and run g % runs.
 * Offsets are relative to the object base on the source side and to the
 * packed position on the destination side. This is the instrumentation
 * point: tests count invocations to check exact coverage.
 */
template <class Fn>
void walk_words(const StridedBlock &sb, int64_t word, int64_t size,
                int64_t extent, int64_t begin, int64_t end, Fn &&fn) {
  const int64_t runs = runs_per_object(sb);
  const int64_t run_bytes = sb.counts[0];
  for (int64_t g = begin; g < end; ++g) {
    const int64_t obj = g / runs;
    const int64_t run = g % runs;
    const int64_t src = obj * extent + run_src_offset(sb, run);
    const int64_t dst = obj * size + run * run_bytes;
    for (int64_t w = 0; w < run_bytes; w += word) {
      fn(dst + w, src + w, word);
    }
  }
}

// split [0, total) across workers; fn(begin, end) writes disjoint ranges
template <class Fn>
void parallel_ranges(int64_t total, int threads, Fn &&fn) {
  int n = threads == 0 ? static_cast<int>(std::thread::hardware_concurrency())
                       : threads;
  if (n < 1) {
    n = 1;
  }
  if (n == 1 || total < 2) {
    fn(0, total);
    return;
  }
  const int64_t chunk = (total + n - 1) / n;
  std::vector<std::future<void>> futs;
  for (int64_t b = 0; b < total; b += chunk) {
    const int64_t e = std::min(b + chunk, total);
    futs.push_back(std::async(std::launch::async, [&fn, b, e] { fn(b, e); }));
  }
  for (auto &f : futs) {
    f.get();
  }
}

inline void check_user_buffer(size_t have, int64_t need, const char *what) {
  if (need > static_cast<int64_t>(have)) {
    throw BufferTooSmall(std::string(what) + ": need " +
                         std::to_string(need) + " bytes, have " +
                         std::to_string(have));
  }
}

} // namespace detail

/* Gather incount objects laid out at src + j*extent into dst starting at
 * position, each object in canonical index order (dimension 0 fastest).
 * Returns the advanced position. src is never written.
 */
inline int64_t pack(std::span<const uint8_t> src, const CommittedType &ct,
                    int64_t incount, std::span<uint8_t> dst, int64_t position,
                    const PackOptions &opt = {}) {
  if (incount < 1 || position < 0) {
    throw InvalidArgument("pack: incount must be positive, position >= 0");
  }
  detail::check_user_buffer(dst.size(), position + incount * ct.size,
                            "pack: destination");
  if (ct.form == CanonForm::Empty) {
    return position;
  }
  detail::check_user_buffer(src.size(), (incount - 1) * ct.extent + ct.span,
                            "pack: source");

  if (ct.form == CanonForm::Strided) {
    const StridedBlock &sb = *ct.canon;
    const int64_t total = incount * detail::runs_per_object(sb);
    uint8_t *out = dst.data() + position;
    detail::parallel_ranges(total, opt.threads, [&](int64_t b, int64_t e) {
      detail::walk_words(sb, ct.plan->word, ct.size, ct.extent, b, e,
                         [&](int64_t d, int64_t s, int64_t w) {
                           std::memcpy(out + d, src.data() + s, w);
                         });
    });
  } else {
    if (!opt.allow_fallback) {
      throw Unsupported("pack: type has no strided form");
    }
    uint8_t *out = dst.data() + position;
    for (int64_t j = 0; j < incount; ++j) {
      const uint8_t *base = src.data() + j * ct.extent;
      for (const Block &b : ct.fallback_runs) {
        std::memcpy(out, base + b.offset, b.length);
        out += b.length;
      }
    }
  }
  return position + incount * ct.size;
}

/* Scatter inverse of pack. Bytes of dst outside the described layout are
 * left untouched. Layouts that describe any byte twice are rejected: the
 * write order would be observable.
 */
inline int64_t unpack(std::span<const uint8_t> src, int64_t position,
                      const CommittedType &ct, int64_t outcount,
                      std::span<uint8_t> dst, const PackOptions &opt = {}) {
  if (outcount < 1 || position < 0) {
    throw InvalidArgument("unpack: outcount must be positive, position >= 0");
  }
  if (ct.overlapping) {
    throw OverlappingLayout("unpack: layout describes overlapping bytes");
  }
  detail::check_user_buffer(src.size(), position + outcount * ct.size,
                            "unpack: source");
  if (ct.form == CanonForm::Empty) {
    return position;
  }
  detail::check_user_buffer(dst.size(),
                            (outcount - 1) * ct.extent + ct.span,
                            "unpack: destination");

  if (ct.form == CanonForm::Strided) {
    const StridedBlock &sb = *ct.canon;
    const int64_t total = outcount * detail::runs_per_object(sb);
    const uint8_t *in = src.data() + position;
    detail::parallel_ranges(total, opt.threads, [&](int64_t b, int64_t e) {
      detail::walk_words(sb, ct.plan->word, ct.size, ct.extent, b, e,
                         [&](int64_t s, int64_t d, int64_t w) {
                           std::memcpy(dst.data() + d, in + s, w);
                         });
    });
  } else {
    if (!opt.allow_fallback) {
      throw Unsupported("unpack: type has no strided form");
    }
    const uint8_t *in = src.data() + position;
    for (int64_t j = 0; j < outcount; ++j) {
      uint8_t *base = dst.data() + j * ct.extent;
      for (const Block &b : ct.fallback_runs) {
        std::memcpy(base + b.offset, in, b.length);
        in += b.length;
      }
    }
  }
  return position + outcount * ct.size;
}

} // namespace stridepack
