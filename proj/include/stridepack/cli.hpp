#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "block_list.hpp"
#include "commit.hpp"
#include "errors.hpp"
#include "halo.hpp"
#include "pack.hpp"
#include "perf_model.hpp"
#include "profile_io.hpp"
#include "typefile.hpp"

namespace stridepack {
namespace cli {

inline std::string fmt_e(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6e", v);
  return buf;
}

inline std::string fmt_list(const std::vector<int64_t> &v) {
  std::string s = "[";
  for (size_t i = 0; i < v.size(); ++i) {
    s += (i ? "," : "") + std::to_string(v[i]);
  }
  return s + "]";
}

inline TypeFileResult parse_type_file_at(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open type file: " + path);
  }
  return parse_type_file(in);
}

inline std::vector<uint8_t> read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open input file: " + path);
  }
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in),
                              std::istreambuf_iterator<char>());
}

inline void write_file(const std::string &path,
                       const std::vector<uint8_t> &bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw ParseError("cannot open output file: " + path);
  }
  out.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

// prints the canonical strided form and the derived plan
inline int cmd_canon(const std::string &file, std::ostream &out) {
  const TypeFileResult tf = parse_type_file_at(file);
  const CommittedType ct = commit_type(tf.def);
  switch (ct.form) {
  case CanonForm::Strided: {
    const StridedBlock &sb = *ct.canon;
    const PackPlan &plan = *ct.plan;
    out << "sb start=" << sb.start << " counts=" << fmt_list(sb.counts)
        << " strides=" << fmt_list(sb.strides) << "\n";
    out << "plan w=" << plan.word << " block=(" << plan.block_dims[0] << ","
        << plan.block_dims[1] << "," << plan.block_dims[2] << ") grid=("
        << plan.grid_dims[0] << "," << plan.grid_dims[1] << ","
        << plan.grid_dims[2] << ") strategy="
        << strategy_name(plan.count_strategy) << "\n";
    return 0;
  }
  case CanonForm::Empty:
    out << "sb empty\n";
    return 0;
  case CanonForm::Unsupported:
    out << "unsupported blocks=" << flatten_oracle(tf.def).blocks.size()
        << "\n";
    return 2;
  }
  return 1;
}

inline int cmd_flatten(const std::string &file, std::ostream &out) {
  const TypeFileResult tf = parse_type_file_at(file);
  const BlockList bl = flatten_oracle(tf.def);
  for (const Block &b : bl.blocks) {
    out << b.offset << " " << b.length << "\n";
  }
  if (bl.overlap) {
    out << "# overlap\n";
  }
  return 0;
}

inline int cmd_pack(const std::string &file, const std::string &in_path,
                    const std::string &out_path, int64_t count) {
  const TypeFileResult tf = parse_type_file_at(file);
  const CommittedType ct = commit_type(tf.def);
  const std::vector<uint8_t> src = read_file(in_path);
  std::vector<uint8_t> dst(count * ct.size);
  pack(src, ct, count, dst, 0);
  write_file(out_path, dst);
  return 0;
}

inline int cmd_unpack(const std::string &file, const std::string &in_path,
                      const std::string &out_path, int64_t count) {
  const TypeFileResult tf = parse_type_file_at(file);
  const CommittedType ct = commit_type(tf.def);
  const std::vector<uint8_t> src = read_file(in_path);
  std::vector<uint8_t> dst((count - 1) * ct.extent + ct.span, 0);
  unpack(src, 0, ct, count, dst);
  write_file(out_path, dst);
  return 0;
}

inline int cmd_choose(int64_t object_bytes, int64_t block_bytes,
                      const std::string &profile_path, std::ostream &out) {
  const MachineProfile profile = load_profile_file(profile_path);
  const ModelQuery q{object_bytes, block_bytes};
  out << "method=" << method_name(choose_method(profile, q))
      << " t_oneshot=" << fmt_e(t_oneshot(profile, q))
      << " t_device=" << fmt_e(t_device(profile, q))
      << " t_staged=" << fmt_e(t_staged(profile, q)) << "\n";
  return 0;
}

namespace detail {

// network-style curve t(s) = floor + s/bandwidth sampled on a power-of-two
// size grid; these cannot be measured in-process and stay synthetic
inline Curve synthetic_curve(double floor_s, double bytes_per_s) {
  Curve c;
  for (double s = 64; s <= 64.0 * 1024 * 1024; s *= 2) {
    c.size.push_back(s);
    c.time.push_back(floor_s + s / bytes_per_s);
  }
  return c;
}

inline double time_pack(const CommittedType &ct,
                        const std::vector<uint8_t> &src,
                        std::vector<uint8_t> &dst) {
  const auto t0 = std::chrono::steady_clock::now();
  pack(src, ct, 1, dst, 0);
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

inline double time_unpack(const CommittedType &ct,
                          const std::vector<uint8_t> &packed,
                          std::vector<uint8_t> &dst) {
  const auto t0 = std::chrono::steady_clock::now();
  unpack(packed, 0, ct, 1, dst);
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

} // namespace detail

/* Times the pack executor on this host over an object-size x block-size grid
 * and emits a complete profile. The four pack/unpack surfaces are measured;
 * the transfer curves are synthetic stand-ins with the documented shape.
 */
inline int cmd_profile_gen(const std::string &out_path) {
  MachineProfile p;
  p.cpu_cpu = detail::synthetic_curve(1.3e-6, 12.5e9);
  p.gpu_gpu = detail::synthetic_curve(6.0e-6, 10.0e9);
  p.d2h = detail::synthetic_curve(7.0e-6, 30.0e9);
  p.h2d = detail::synthetic_curve(7.0e-6, 30.0e9);

  const std::vector<int64_t> objects{1 << 10, 1 << 14, 1 << 18, 1 << 22};
  const std::vector<int64_t> blocks{16, 64, 256, 1024};
  Surface pack_surface;
  Surface unpack_surface;
  for (int64_t o : objects) {
    pack_surface.object.push_back(static_cast<double>(o));
    unpack_surface.object.push_back(static_cast<double>(o));
  }
  for (int64_t b : blocks) {
    pack_surface.block.push_back(static_cast<double>(b));
    unpack_surface.block.push_back(static_cast<double>(b));
  }
  for (int64_t o : objects) {
    std::vector<double> pack_row;
    std::vector<double> unpack_row;
    for (int64_t b : blocks) {
      // o/b blocks of b bytes at twice the block pitch
      const TypeDef def = make_hvector(
          o / b, 1, 2 * b, make_contiguous(b, make_named(NamedKind::Byte)));
      const CommittedType ct = commit_type(def);
      std::vector<uint8_t> src(ct.span, 0xa5);
      std::vector<uint8_t> packed(ct.size);
      double best_pack = 1e9;
      double best_unpack = 1e9;
      for (int rep = 0; rep < 3; ++rep) {
        best_pack = std::min(best_pack, detail::time_pack(ct, src, packed));
        best_unpack =
            std::min(best_unpack, detail::time_unpack(ct, packed, src));
      }
      pack_row.push_back(std::max(best_pack, 1e-9));
      unpack_row.push_back(std::max(best_unpack, 1e-9));
    }
    pack_surface.time.push_back(pack_row);
    unpack_surface.time.push_back(unpack_row);
  }
  p.gpu_pack = pack_surface;
  p.host_pack = pack_surface;
  p.gpu_unpack = unpack_surface;
  p.host_unpack = unpack_surface;

  std::ofstream out(out_path, std::ios::trunc);
  if (!out) {
    throw ParseError("cannot open output file: " + out_path);
  }
  save_profile(out, p,
               "machine profile generated by `stridepack profile-gen`\n"
               "pack/unpack surfaces: measured with the host executor\n"
               "transfer curves: synthetic (no interconnect available)");
  return 0;
}

inline std::array<int64_t, 3> parse_triple(const std::string &s,
                                           const char *what) {
  std::array<int64_t, 3> out{};
  std::istringstream ss(s);
  char sep1 = 0, sep2 = 0;
  if (!(ss >> out[0] >> sep1 >> out[1] >> sep2 >> out[2]) || sep1 != ',' ||
      sep2 != ',' || !(ss >> std::ws).eof()) {
    throw InvalidArgument(std::string(what) + " must be of the form x,y,z");
  }
  return out;
}

inline int cmd_halo(const HaloConfig &cfg, const std::string &profile_path,
                    std::ostream &out, std::ostream &err) {
  const MachineProfile profile = load_profile_file(profile_path);
  const ExchangeReport rep = run_exchange(cfg, profile);
  out << "pack," << fmt_e(rep.pack_seconds) << "\n";
  out << "alltoallv," << fmt_e(rep.alltoallv_seconds) << "\n";
  out << "unpack," << fmt_e(rep.unpack_seconds) << "\n";
  const double total =
      rep.pack_seconds + rep.alltoallv_seconds + rep.unpack_seconds;
  out << "summary,total=" << fmt_e(total) << ",bytes=" << rep.bytes_moved
      << ",verify=" << (rep.verified ? "PASS" : "FAIL") << "\n";
  err << "halo exchange on " << cfg.ranks[0] << "x" << cfg.ranks[1] << "x"
      << cfg.ranks[2] << " ranks, " << cfg.interior[0] << "x"
      << cfg.interior[1] << "x" << cfg.interior[2] << " interior, radius "
      << cfg.radius << ": " << (rep.verified ? "verified" : "MISMATCH")
      << ", modeled total " << fmt_e(total) << " s\n";
  return rep.verified ? 0 : 1;
}

/* Exit codes: 0 success, 1 user or domain error, 2 a type with no strided
 * form was handled through the fallback path.
 */
inline int run_cli(std::vector<std::string> args, std::ostream &out,
                   std::ostream &err) {
  CLI::App app{"strided datatype compiler and pack/unpack engine"};
  app.require_subcommand(1);

  std::string file, in_path, out_path, profile_path, ranks_s, interior_s;
  int64_t count = 1;
  int64_t object_bytes = 0, block_bytes = 0;
  HaloConfig halo_cfg;

  auto *canon = app.add_subcommand(
      "canon", "print the canonical strided form and plan of a type file");
  canon->add_option("file", file)->required();

  auto *flatten = app.add_subcommand(
      "flatten", "print the normalized block list of a type file");
  flatten->add_option("file", file)->required();

  auto *pack_cmd =
      app.add_subcommand("pack", "gather described bytes from a raw file");
  pack_cmd->add_option("file", file)->required();
  pack_cmd->add_option("input", in_path)->required();
  pack_cmd->add_option("output", out_path)->required();
  pack_cmd->add_option("--count", count)->check(CLI::PositiveNumber);

  auto *unpack_cmd =
      app.add_subcommand("unpack", "scatter packed bytes back into a raw file");
  unpack_cmd->add_option("file", file)->required();
  unpack_cmd->add_option("input", in_path)->required();
  unpack_cmd->add_option("output", out_path)->required();
  unpack_cmd->add_option("--count", count)->check(CLI::PositiveNumber);

  auto *choose = app.add_subcommand(
      "choose", "pick the fastest transfer method from a machine profile");
  choose->add_option("--object-bytes", object_bytes)->required();
  choose->add_option("--block-bytes", block_bytes)->required();
  choose->add_option("--profile", profile_path)->required();

  auto *gen = app.add_subcommand(
      "profile-gen", "measure this host and write a machine profile");
  gen->add_option("--out", out_path)->required();

  auto *halo = app.add_subcommand(
      "halo", "run the simulated 3D halo exchange and report modeled times");
  halo->add_option("--ranks", ranks_s)->required();
  halo->add_option("--interior", interior_s)->required();
  halo->add_option("--radius", halo_cfg.radius);
  halo->add_option("--element-bytes", halo_cfg.element_bytes);
  halo->add_option("--profile", profile_path)->required();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError &e) {
    app.exit(e, out, err);
    return 1;
  }

  try {
    if (canon->parsed()) {
      return cmd_canon(file, out);
    }
    if (flatten->parsed()) {
      return cmd_flatten(file, out);
    }
    if (pack_cmd->parsed()) {
      return cmd_pack(file, in_path, out_path, count);
    }
    if (unpack_cmd->parsed()) {
      return cmd_unpack(file, in_path, out_path, count);
    }
    if (choose->parsed()) {
      return cmd_choose(object_bytes, block_bytes, profile_path, out);
    }
    if (gen->parsed()) {
      return cmd_profile_gen(out_path);
    }
    if (halo->parsed()) {
      halo_cfg.ranks = parse_triple(ranks_s, "--ranks");
      halo_cfg.interior = parse_triple(interior_s, "--interior");
      return cmd_halo(halo_cfg, profile_path, out, err);
    }
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

} // namespace cli
} // namespace stridepack
