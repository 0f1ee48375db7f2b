#include <doctest.h>

#include <random>
#include <sstream>
#include <thread>

#include <stridepack/perf_model.hpp>
#include <stridepack/profile_io.hpp>

#include "test_util.hpp"

using namespace stridepack;

namespace {

Surface constant_surface(double t) {
  Surface s;
  s.object = {64, 1 << 22};
  s.block = {8, 4096};
  s.time = {{t, t}, {t, t}};
  return s;
}

// pack terms zeroed: t_device collapses to gpu_gpu, t_oneshot to cpu_cpu
MachineProfile zero_pack_profile() {
  MachineProfile p;
  p.cpu_cpu = {{64, 1 << 22}, {1.3e-6, 400e-6}};
  p.gpu_gpu = {{64, 1 << 22}, {6.0e-6, 500e-6}};
  p.d2h = {{64, 1 << 22}, {7.0e-6, 200e-6}};
  p.h2d = {{64, 1 << 22}, {7.0e-6, 200e-6}};
  p.gpu_pack = constant_surface(0);
  p.gpu_unpack = constant_surface(0);
  p.host_pack = constant_surface(0);
  p.host_unpack = constant_surface(0);
  return p;
}

} // namespace

TEST_SUITE_BEGIN("perfmodel");

TEST_CASE("interp_1d is exact at knots and clamps outside") {
  const Curve c{{1024, 4096}, {1e-6, 4e-6}};
  CHECK(interp_1d(c, 1024) == 1e-6);
  CHECK(interp_1d(c, 4096) == 4e-6);
  CHECK(interp_1d(c, 2048) == doctest::Approx(2e-6).epsilon(1e-12));
  CHECK(interp_1d(c, 10) == 1e-6);
  CHECK(interp_1d(c, 1 << 20) == 4e-6);
  CHECK_THROWS_AS(interp_1d(Curve{}, 64), EmptyProfile);

  // interior knots are exact too, not just the clamped ends
  const Curve three{{64, 128, 512}, {1e-6, 3e-6, 9e-6}};
  CHECK(interp_1d(three, 128) == 3e-6);
}

TEST_CASE("interp_2d is bilinear in log-log") {
  Surface s;
  s.object = {1, 4};
  s.block = {1, 4};
  s.time = {{1e-6, 4e-6}, {4e-6, 16e-6}};
  CHECK(interp_2d(s, 1, 1) == 1e-6);
  CHECK(interp_2d(s, 4, 4) == 16e-6);
  CHECK(interp_2d(s, 2, 2) == doctest::Approx(4e-6).epsilon(1e-12));

  const Surface flat = constant_surface(3e-6);
  CHECK(interp_2d(flat, 512, 64) == 3e-6);
  CHECK_THROWS_AS(interp_2d(Surface{}, 64, 8), EmptyProfile);

  // one axis on a knot, the other between knots
  CHECK(interp_2d(s, 1, 2) == doctest::Approx(2e-6).epsilon(1e-12));
  CHECK(interp_2d(s, 2, 4) == doctest::Approx(8e-6).epsilon(1e-12));
}

TEST_CASE("zeroed pack surfaces reduce the models to their transfers") {
  const MachineProfile p = zero_pack_profile();
  for (int64_t size : {64, 1024, 1 << 20}) {
    const ModelQuery q{size, 8};
    CHECK(t_device(p, q) == doctest::Approx(interp_1d(p.gpu_gpu, size)));
    CHECK(t_oneshot(p, q) == doctest::Approx(interp_1d(p.cpu_cpu, size)));
    const double staged_extra = interp_1d(p.d2h, size) +
                                interp_1d(p.cpu_cpu, size) +
                                interp_1d(p.h2d, size);
    CHECK(t_staged(p, q) - t_device(p, q) ==
          doctest::Approx(staged_extra - interp_1d(p.gpu_gpu, size)));
  }
}

TEST_CASE("cheaper cpu transfers dominate when packing is free") {
  const MachineProfile p = zero_pack_profile();
  for (int64_t size : {64, 4096, 1 << 18, 1 << 22}) {
    CHECK(choose_method(p, {size, 8}) == MethodChoice::OneShot);
  }
}

TEST_CASE("default profile: tiny objects prefer one-shot") {
  const MachineProfile p = test_util::default_profile();
  for (int64_t blk : {8, 64, 256}) {
    const ModelQuery q{512, blk};
    CHECK(t_oneshot(p, q) < t_device(p, q));
    CHECK(choose_method(p, q) == MethodChoice::OneShot);
  }
}

TEST_CASE("default profile: large objects with small blocks go device") {
  const MachineProfile p = test_util::default_profile();
  CHECK(choose_method(p, {4 << 20, 16}) == MethodChoice::Device);
}

TEST_CASE("default profile: staged is never selected at shipped samples") {
  const MachineProfile p = test_util::default_profile();
  for (double o : p.gpu_pack.object) {
    for (double b : p.gpu_pack.block) {
      const ModelQuery q{static_cast<int64_t>(o),
                         static_cast<int64_t>(std::min(b, o))};
      CHECK(choose_method(p, q) != MethodChoice::Staged);
    }
  }
}

TEST_CASE("model times are monotone in object size on the default profile") {
  const MachineProfile p = test_util::default_profile();
  for (int64_t blk : {8, 128, 2048}) {
    double prev_dev = 0, prev_one = 0, prev_stg = 0;
    for (int64_t size = 4096; size <= (16 << 20); size *= 2) {
      const ModelQuery q{size, blk};
      CHECK(t_device(p, q) >= prev_dev);
      CHECK(t_oneshot(p, q) >= prev_one);
      CHECK(t_staged(p, q) >= prev_stg);
      prev_dev = t_device(p, q);
      prev_one = t_oneshot(p, q);
      prev_stg = t_staged(p, q);
    }
  }
}

TEST_CASE("scaling every time leaves the argmin unchanged") {
  const MachineProfile p = test_util::default_profile();
  for (double k : {0.5, 3.0}) {
    MachineProfile scaled = p;
    test_util::scale_profile(scaled, k);
    std::mt19937_64 rng(4);
    for (int i = 0; i < 500; ++i) {
      const int64_t obj = 64 << (rng() % 20);
      const int64_t blk = std::min<int64_t>(8 << (rng() % 10), obj);
      CHECK(choose_method(p, {obj, blk}) == choose_method(scaled, {obj, blk}));
    }
  }
}

TEST_CASE("query validation") {
  const MachineProfile p = zero_pack_profile();
  CHECK_THROWS_AS(choose_method(p, {0, 1}), InvalidArgument);
  CHECK_THROWS_AS(choose_method(p, {64, 0}), InvalidArgument);
  CHECK_THROWS_AS(choose_method(p, {64, 128}), InvalidArgument);
}

TEST_CASE("cached_choose agrees with choose_method") {
  const MachineProfile p = test_util::default_profile();
  const ModelCache cache(p);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 2000; ++i) {
    const int64_t obj = 1 + static_cast<int64_t>(rng() % (1 << 22));
    const int64_t blk = 1 + static_cast<int64_t>(rng() % obj);
    const ModelQuery q{obj, blk};
    REQUIRE(cache.choose(q) == choose_method(p, q));
  }
  // repeated identical queries stay stable
  const ModelQuery q{4 << 20, 16};
  const MethodChoice first = cache.choose(q);
  for (int i = 0; i < 10; ++i) {
    CHECK(cache.choose(q) == first);
  }
}

TEST_CASE("distinct queries never alias cache entries") {
  const MachineProfile p = test_util::default_profile();
  const ModelCache cache(p);
  std::mt19937_64 rng(15);
  for (int i = 0; i < 3000; ++i) {
    // adjacent keys stress hash collisions
    const int64_t obj = 1024 + static_cast<int64_t>(rng() % 64);
    const int64_t blk = 1 + static_cast<int64_t>(rng() % 64);
    REQUIRE(cache.choose({obj, blk}) == choose_method(p, {obj, blk}));
  }
}

TEST_CASE("cache is safe for concurrent readers") {
  const MachineProfile p = test_util::default_profile();
  const ModelCache cache(p);
  std::vector<std::thread> threads;
  std::atomic<int> bad{0};
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      std::mt19937_64 rng(100 + t);
      for (int i = 0; i < 2000; ++i) {
        const int64_t obj = 64 << (rng() % 16);
        const int64_t blk = std::min<int64_t>(8 << (rng() % 8), obj);
        if (cache.choose({obj, blk}) != choose_method(p, {obj, blk})) {
          ++bad;
        }
      }
    });
  }
  for (auto &th : threads) {
    th.join();
  }
  CHECK(bad == 0);
}

TEST_CASE("profile files round-trip") {
  const MachineProfile p = test_util::default_profile();
  std::ostringstream out;
  save_profile(out, p, "round trip");
  std::istringstream in(out.str());
  const MachineProfile q = load_profile(in);
  CHECK(q.cpu_cpu.size == p.cpu_cpu.size);
  CHECK(q.cpu_cpu.time == p.cpu_cpu.time);
  CHECK(q.gpu_pack.object == p.gpu_pack.object);
  CHECK(q.gpu_pack.block == p.gpu_pack.block);
  CHECK(q.gpu_pack.time == p.gpu_pack.time);
  CHECK(q.host_unpack.time == p.host_unpack.time);
}

TEST_CASE("profile parsing rejects malformed input") {
  const auto parse = [](const std::string &text) {
    std::istringstream in(text);
    return load_profile(in);
  };
  CHECK_THROWS_AS(parse("curve bogus\n1 2\n"), ParseError);
  CHECK_THROWS_AS(parse("curve cpu_cpu\n64 1e-6\n32 2e-6\n"), ParseError);
  CHECK_THROWS_AS(parse("surface gpu_pack\n64 8 1e-6\n128 16 1e-6\n"
                        "64 16 1e-6\n"),
                  ParseError); // incomplete grid
  CHECK_THROWS_AS(parse("64 1e-6\n"), ParseError);
  CHECK_NOTHROW(parse("# comment only\ncurve cpu_cpu\n64 1.5e-6 # eol\n"));
}

TEST_SUITE_END();
