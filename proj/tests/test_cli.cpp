#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include <stridepack/cli.hpp>

#include "test_util.hpp"

using namespace stridepack;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("stridepack-test-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter()++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  static int &counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string &name, const std::string &content) {
    const auto p = path / name;
    std::ofstream f(p, std::ios::binary);
    f << content;
    return p.string();
  }
  std::string file(const std::string &name,
                   const std::vector<uint8_t> &content) {
    const auto p = path / name;
    std::ofstream f(p, std::ios::binary);
    f.write(reinterpret_cast<const char *>(content.data()),
            static_cast<std::streamsize>(content.size()));
    return p.string();
  }
  std::string at(const std::string &name) { return (path / name).string(); }
};

std::vector<uint8_t> slurp(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in),
                              std::istreambuf_iterator<char>());
}

const char *kCuboidFile = "# cuboid built as hvector of hvector of bytes\n"
                          "type row = contiguous(400, byte)\n"
                          "type plane = hvector(13, 1, 256, row)\n"
                          "type cuboid = hvector(47, 1, 131072, plane)\n"
                          "commit cuboid\n";

} // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("canon prints the strided form and plan") {
  TempDir dir;
  const auto file = dir.file("cuboid.types", kCuboidFile);
  const Run r = run({"canon", file});
  CHECK(r.code == 0);
  CHECK(r.out == "sb start=0 counts=[400,13,47] strides=[1,256,131072]\n"
                 "plan w=16 block=(32,16,2) grid=(1,1,24) strategy=iterate\n");

  // byte-stable across runs
  CHECK(run({"canon", file}).out == r.out);
}

TEST_CASE("canon of a named byte") {
  TempDir dir;
  const auto file = dir.file("b.types", "type t = named(byte)\ncommit t\n");
  const Run r = run({"canon", file});
  CHECK(r.code == 0);
  CHECK(r.out == "sb start=0 counts=[1] strides=[1]\n"
                 "plan w=1 block=(1,1,1) grid=(1,1,1) strategy=gridz\n");
}

TEST_CASE("canon of an empty type") {
  TempDir dir;
  const auto file =
      dir.file("e.types", "type t = vector(0, 4, 8, float)\ncommit t\n");
  const Run r = run({"canon", file});
  CHECK(r.code == 0);
  CHECK(r.out == "sb empty\n");
}

TEST_CASE("canon reports unsupported lowering with exit 2") {
  TempDir dir;
  const auto file =
      dir.file("u.types", "type t = vector(2, 1, 0, byte)\ncommit t\n");
  const Run r = run({"canon", file});
  CHECK(r.code == 2);
  CHECK(r.out == "unsupported blocks=1\n");
}

TEST_CASE("undefined names are diagnosed by name") {
  TempDir dir;
  const auto file =
      dir.file("bad.types", "type t = contiguous(4, nosuch)\ncommit t\n");
  const Run r = run({"canon", file});
  CHECK(r.code == 1);
  CHECK(r.err.find("nosuch") != std::string::npos);
}

TEST_CASE("flatten prints offset/length pairs") {
  TempDir dir;
  const auto file = dir.file(
      "v.types", "type t = vector(3, 4, 8, float)\ncommit t\n");
  const Run r = run({"flatten", file});
  CHECK(r.code == 0);
  CHECK(r.out == "0 16\n32 16\n64 16\n");
}

TEST_CASE("flatten of an empty type prints nothing") {
  TempDir dir;
  const auto file =
      dir.file("e.types", "type t = contiguous(0, byte)\ncommit t\n");
  const Run r = run({"flatten", file});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
}

TEST_CASE("flatten marks overlapping types") {
  TempDir dir;
  const auto file = dir.file(
      "o.types",
      "type row = contiguous(400, byte)\ntype t = hvector(13, 1, 256, row)\n"
      "commit t\n");
  const Run r = run({"flatten", file});
  CHECK(r.code == 0);
  CHECK(r.out == "0 3472\n# overlap\n");
}

TEST_CASE("pack and unpack move file bytes") {
  TempDir dir;
  const auto types = dir.file(
      "v.types", "type t = vector(3, 4, 8, float)\ncommit t\n");
  const auto input = dir.file("in.bin", test_util::ramp(96));
  const Run p =
      run({"pack", types, input, dir.at("packed.bin")});
  REQUIRE(p.code == 0);
  const auto packed = slurp(dir.at("packed.bin"));
  REQUIRE(packed.size() == 48);
  std::vector<uint8_t> want;
  for (int64_t b : {0, 32, 64}) {
    for (int64_t k = 0; k < 16; ++k) {
      want.push_back(static_cast<uint8_t>(b + k));
    }
  }
  CHECK(packed == want);

  const Run u =
      run({"unpack", types, dir.at("packed.bin"), dir.at("restored.bin")});
  REQUIRE(u.code == 0);
  const auto restored = slurp(dir.at("restored.bin"));
  REQUIRE(restored.size() == 80);
  const auto original = test_util::ramp(96);
  for (int64_t b : {0, 32, 64}) {
    for (int64_t k = 0; k < 16; ++k) {
      CHECK(restored[b + k] == original[b + k]);
    }
  }
  // gaps between blocks are zero-filled
  CHECK(restored[20] == 0);
}

TEST_CASE("pack --count places objects one extent apart") {
  TempDir dir;
  const auto types = dir.file(
      "v.types", "type t = vector(3, 4, 8, float)\ncommit t\n");
  const auto input = dir.file("in.bin", test_util::ramp(160));
  const Run p = run(
      {"pack", types, input, dir.at("packed.bin"), "--count", "2"});
  REQUIRE(p.code == 0);
  const auto packed = slurp(dir.at("packed.bin"));
  REQUIRE(packed.size() == 96);
  for (int64_t j = 0; j < 2; ++j) {
    for (int64_t i = 0; i < 3; ++i) {
      for (int64_t k = 0; k < 16; ++k) {
        CHECK(packed[j * 48 + i * 16 + k] ==
              static_cast<uint8_t>(j * 80 + i * 32 + k));
      }
    }
  }
  const Run u = run({"unpack", types, dir.at("packed.bin"),
                     dir.at("restored.bin"), "--count", "2"});
  REQUIRE(u.code == 0);
  CHECK(slurp(dir.at("restored.bin")).size() == 160);
}

TEST_CASE("pack reports undersized inputs") {
  TempDir dir;
  const auto types = dir.file(
      "v.types", "type t = vector(3, 4, 8, float)\ncommit t\n");
  const auto input = dir.file("in.bin", test_util::ramp(10));
  const Run r = run({"pack", types, input, dir.at("out.bin")});
  CHECK(r.code == 1);
  CHECK(r.err.find("need") != std::string::npos);
}

TEST_CASE("unpack refuses overlapping layouts") {
  TempDir dir;
  const auto types = dir.file(
      "o.types",
      "type row = contiguous(400, byte)\ntype t = hvector(13, 1, 256, row)\n"
      "commit t\n");
  const auto input = dir.file("in.bin", std::vector<uint8_t>(5200, 1));
  const Run r = run({"unpack", types, input, dir.at("out.bin")});
  CHECK(r.code == 1);
  CHECK(r.err.find("overlap") != std::string::npos);
}

TEST_CASE("choose prints the method and the three model times") {
  const Run r = run({"choose", "--object-bytes", "4194304", "--block-bytes",
                     "16", "--profile", test_util::data_path("default.profile")});
  CHECK(r.code == 0);
  CHECK(r.out.substr(0, 14) == "method=device ");
  CHECK(r.out.find("t_oneshot=") != std::string::npos);
  CHECK(r.out.find("t_device=") != std::string::npos);
  CHECK(r.out.find("t_staged=") != std::string::npos);
  CHECK(run({"choose", "--object-bytes", "4194304", "--block-bytes", "16",
             "--profile", test_util::data_path("default.profile")})
            .out == r.out);

  const Run small = run({"choose", "--object-bytes", "256", "--block-bytes",
                         "16", "--profile",
                         test_util::data_path("default.profile")});
  CHECK(small.out.substr(0, 15) == "method=oneshot ");
}

TEST_CASE("choose with a zero-pack profile follows the cheaper transfer") {
  TempDir dir;
  std::string text;
  text += "curve cpu_cpu\n64 1.3e-6\n4194304 4e-4\n";
  text += "curve gpu_gpu\n64 6e-6\n4194304 5e-4\n";
  text += "curve d2h\n64 7e-6\n4194304 2e-4\n";
  text += "curve h2d\n64 7e-6\n4194304 2e-4\n";
  for (const char *s :
       {"gpu_pack", "gpu_unpack", "host_pack", "host_unpack"}) {
    text += std::string("surface ") + s + "\n";
    text += "64 8 0\n64 4096 0\n4194304 8 0\n4194304 4096 0\n";
  }
  const auto profile = dir.file("zero.profile", text);
  const Run r = run({"choose", "--object-bytes", "128", "--block-bytes", "8",
                     "--profile", profile});
  CHECK(r.code == 0);
  CHECK(r.out.substr(0, 15) == "method=oneshot ");
}

TEST_CASE("choose fails cleanly without a profile") {
  const Run r = run({"choose", "--object-bytes", "64", "--block-bytes", "8",
                     "--profile", "/nonexistent/profile"});
  CHECK(r.code == 1);
  CHECK(!r.err.empty());
}

TEST_CASE("profile-gen emits a loadable, complete profile") {
  TempDir dir;
  const Run r = run({"profile-gen", "--out", dir.at("m.profile")});
  REQUIRE(r.code == 0);
  const MachineProfile p = load_profile_file(dir.at("m.profile"));
  CHECK(!p.cpu_cpu.size.empty());
  CHECK(p.gpu_pack.object.size() * p.gpu_pack.block.size() ==
        p.gpu_pack.time.size() * p.gpu_pack.time[0].size());
  CHECK(p.host_unpack.object.size() == p.host_pack.object.size());
  // overwrite semantics: a second run replaces the file
  REQUIRE(run({"profile-gen", "--out", dir.at("m.profile")}).code == 0);
  CHECK_NOTHROW(load_profile_file(dir.at("m.profile")));
}

TEST_CASE("halo emits three phase rows and a summary") {
  const Run r = run({"halo", "--ranks", "2,2,2", "--interior", "8,8,8",
                     "--radius", "2", "--profile",
                     test_util::data_path("default.profile")});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string l1, l2, l3, l4, extra;
  REQUIRE(std::getline(lines, l1));
  REQUIRE(std::getline(lines, l2));
  REQUIRE(std::getline(lines, l3));
  REQUIRE(std::getline(lines, l4));
  CHECK(!std::getline(lines, extra));
  CHECK(l1.substr(0, 5) == "pack,");
  CHECK(l2.substr(0, 10) == "alltoallv,");
  CHECK(l3.substr(0, 7) == "unpack,");
  CHECK(l4.substr(0, 8) == "summary,");
  CHECK(l4.find("verify=PASS") != std::string::npos);

  // modeled values only, so the report is byte-stable
  CHECK(run({"halo", "--ranks", "2,2,2", "--interior", "8,8,8", "--radius",
             "2", "--profile", test_util::data_path("default.profile")})
            .out == r.out);
}

TEST_CASE("halo rejects an oversized radius") {
  const Run r = run({"halo", "--ranks", "1,1,1", "--interior", "4,4,4",
                     "--radius", "3", "--profile",
                     test_util::data_path("default.profile")});
  CHECK(r.code == 1);
  CHECK(!r.err.empty());
}

TEST_CASE("type files reject a second commit or trailing statements") {
  TempDir dir;
  const auto two = dir.file(
      "two.types", "type a = named(byte)\ncommit a\ncommit a\n");
  CHECK(run({"canon", two}).code == 1);
  const auto none = dir.file("none.types", "type a = named(byte)\n");
  CHECK(run({"canon", none}).code == 1);
}

TEST_SUITE_END();
