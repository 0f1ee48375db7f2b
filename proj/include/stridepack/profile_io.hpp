#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "perf_model.hpp"

namespace stridepack {

namespace detail {

inline std::string strip_comment(const std::string &line) {
  const auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

inline void validate_curve(const Curve &c, const std::string &name) {
  for (size_t i = 0; i < c.size.size(); ++i) {
    if (c.size[i] <= 0 || c.time[i] < 0) {
      throw ParseError("profile: curve " + name +
                       " needs positive sizes and nonnegative times");
    }
    if (i > 0 && c.size[i] <= c.size[i - 1]) {
      throw ParseError("profile: curve " + name +
                       " sizes must be strictly increasing");
    }
  }
}

// rows arrive in any order; the grid must come out rectangular and complete
inline Surface build_surface(
    const std::vector<std::array<double, 3>> &rows, const std::string &name) {
  Surface s;
  std::map<double, size_t> objs;
  std::map<double, size_t> blks;
  for (const auto &r : rows) {
    if (r[0] <= 0 || r[1] <= 0 || r[2] < 0) {
      throw ParseError("profile: surface " + name +
                       " needs positive sizes and nonnegative times");
    }
    objs.emplace(r[0], 0);
    blks.emplace(r[1], 0);
  }
  size_t i = 0;
  for (auto &kv : objs) {
    kv.second = i++;
    s.object.push_back(kv.first);
  }
  i = 0;
  for (auto &kv : blks) {
    kv.second = i++;
    s.block.push_back(kv.first);
  }
  if (rows.size() != objs.size() * blks.size()) {
    throw ParseError("profile: surface " + name +
                     " grid is incomplete or has duplicate points");
  }
  s.time.assign(objs.size(), std::vector<double>(blks.size(), -1.0));
  for (const auto &r : rows) {
    double &cell = s.time[objs[r[0]]][blks[r[1]]];
    if (cell >= 0) {
      throw ParseError("profile: surface " + name + " has duplicate points");
    }
    cell = r[2];
  }
  return s;
}

} // namespace detail

/* Line-oriented text format: `curve <name>` sections hold
 * `size_bytes time_seconds` rows, `surface <name>` sections hold
 * `object_bytes block_bytes time_seconds` rows. `#` starts a comment.
 * Curve names: cpu_cpu, gpu_gpu, d2h, h2d. Surface names: gpu_pack,
 * gpu_unpack, host_pack, host_unpack.
 */
inline MachineProfile load_profile(std::istream &in) {
  MachineProfile p;
  std::map<std::string, Curve *> curves{{"cpu_cpu", &p.cpu_cpu},
                                        {"gpu_gpu", &p.gpu_gpu},
                                        {"d2h", &p.d2h},
                                        {"h2d", &p.h2d}};
  std::map<std::string, std::vector<std::array<double, 3>>> surf_rows;
  const std::vector<std::string> surf_names{"gpu_pack", "gpu_unpack",
                                            "host_pack", "host_unpack"};

  Curve *cur_curve = nullptr;
  std::vector<std::array<double, 3>> *cur_surf = nullptr;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(detail::strip_comment(line));
    std::string first;
    if (!(ls >> first)) {
      continue;
    }
    const auto fail = [&](const std::string &msg) {
      throw ParseError("profile line " + std::to_string(lineno) + ": " + msg);
    };
    if (first == "curve") {
      std::string name;
      if (!(ls >> name) || !curves.count(name)) {
        fail("unknown curve name");
      }
      cur_curve = curves[name];
      cur_surf = nullptr;
    } else if (first == "surface") {
      std::string name;
      if (!(ls >> name) ||
          std::find(surf_names.begin(), surf_names.end(), name) ==
              surf_names.end()) {
        fail("unknown surface name");
      }
      cur_surf = &surf_rows[name];
      cur_curve = nullptr;
    } else {
      char *end = nullptr;
      const double a = std::strtod(first.c_str(), &end);
      if (end == first.c_str() || *end != '\0') {
        fail("expected a number, got '" + first + "'");
      }
      if (cur_curve) {
        double t;
        if (!(ls >> t)) {
          fail("curve rows are `size_bytes time_seconds`");
        }
        cur_curve->size.push_back(a);
        cur_curve->time.push_back(t);
      } else if (cur_surf) {
        double b, t;
        if (!(ls >> b >> t)) {
          fail("surface rows are `object_bytes block_bytes time_seconds`");
        }
        cur_surf->push_back({a, b, t});
      } else {
        fail("data row before any section header");
      }
    }
  }

  for (const auto &kv : curves) {
    detail::validate_curve(*kv.second, kv.first);
  }
  std::map<std::string, Surface *> surfaces{{"gpu_pack", &p.gpu_pack},
                                            {"gpu_unpack", &p.gpu_unpack},
                                            {"host_pack", &p.host_pack},
                                            {"host_unpack", &p.host_unpack}};
  for (auto &kv : surf_rows) {
    *surfaces[kv.first] = detail::build_surface(kv.second, kv.first);
  }
  return p;
}

inline MachineProfile load_profile_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open profile file: " + path);
  }
  return load_profile(in);
}

inline void save_profile(std::ostream &out, const MachineProfile &p,
                         const std::string &header_comment = "") {
  char buf[64];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.9e", v);
    return std::string(buf);
  };
  if (!header_comment.empty()) {
    std::istringstream hs(header_comment);
    std::string hline;
    while (std::getline(hs, hline)) {
      out << "# " << hline << "\n";
    }
  }
  const std::pair<const char *, const Curve *> curves[] = {
      {"cpu_cpu", &p.cpu_cpu},
      {"gpu_gpu", &p.gpu_gpu},
      {"d2h", &p.d2h},
      {"h2d", &p.h2d}};
  for (const auto &[name, c] : curves) {
    out << "curve " << name << "\n";
    for (size_t i = 0; i < c->size.size(); ++i) {
      out << num(c->size[i]) << " " << num(c->time[i]) << "\n";
    }
  }
  const std::pair<const char *, const Surface *> surfaces[] = {
      {"gpu_pack", &p.gpu_pack},
      {"gpu_unpack", &p.gpu_unpack},
      {"host_pack", &p.host_pack},
      {"host_unpack", &p.host_unpack}};
  for (const auto &[name, s] : surfaces) {
    out << "surface " << name << "\n";
    for (size_t i = 0; i < s->object.size(); ++i) {
      for (size_t j = 0; j < s->block.size(); ++j) {
        out << num(s->object[i]) << " " << num(s->block[j]) << " "
            << num(s->time[i][j]) << "\n";
      }
    }
  }
}

} // namespace stridepack
