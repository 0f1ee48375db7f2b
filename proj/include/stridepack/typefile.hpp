#pragma once

#include <cctype>
#include <cstdlib>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "type_def.hpp"

namespace stridepack {

/* Datatype description files, one statement per line:
 *
 *   # comment
 *   type <name> = named(<kind>)
 *   type <name> = contiguous(<count>, <ref>)
 *   type <name> = vector(<count>, <blocklength>, <stride>, <ref>)
 *   type <name> = hvector(<count>, <blocklength>, <stride_bytes>, <ref>)
 *   type <name> = subarray(<ndims>, [<sizes>], [<subsizes>], [<offsets>], <ref>)
 *   commit <name>
 *
 * <kind> is byte, int, float or double; <ref> is a kind or a previously
 * defined name. Exactly one commit, and it must be the last statement.
 */
struct TypeFileResult {
  std::string name;
  TypeDef def;
};

namespace detail {

inline std::string trim(const std::string &s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
    ++b;
  }
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
    --e;
  }
  return s.substr(b, e - b);
}

inline bool is_identifier(const std::string &s) {
  if (s.empty() || (!std::isalpha(static_cast<unsigned char>(s[0])) &&
                    s[0] != '_')) {
    return false;
  }
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') {
      return false;
    }
  }
  return true;
}

// split on top-level commas, respecting [...] nesting
inline std::vector<std::string> split_args(const std::string &s, int lineno) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '[') {
      ++depth;
    } else if (c == ']') {
      if (--depth < 0) {
        throw ParseError("line " + std::to_string(lineno) +
                         ": unbalanced ']'");
      }
    }
    if (c == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (depth != 0) {
    throw ParseError("line " + std::to_string(lineno) + ": unbalanced '['");
  }
  out.push_back(trim(cur));
  return out;
}

inline int64_t parse_int(const std::string &s, int lineno) {
  char *end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ParseError("line " + std::to_string(lineno) + ": expected an " +
                     "integer, got '" + s + "'");
  }
  return v;
}

inline std::vector<int64_t> parse_int_list(const std::string &s, int lineno) {
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') {
    throw ParseError("line " + std::to_string(lineno) +
                     ": expected a [..] list, got '" + s + "'");
  }
  std::vector<int64_t> out;
  for (const std::string &item :
       split_args(s.substr(1, s.size() - 2), lineno)) {
    out.push_back(parse_int(item, lineno));
  }
  return out;
}

inline std::optional<NamedKind> kind_by_name(const std::string &s) {
  if (s == "byte") {
    return NamedKind::Byte;
  }
  if (s == "int") {
    return NamedKind::Int;
  }
  if (s == "float") {
    return NamedKind::Float;
  }
  if (s == "double") {
    return NamedKind::Double;
  }
  return std::nullopt;
}

} // namespace detail

inline TypeFileResult parse_type_file(std::istream &in) {
  using detail::trim;
  std::map<std::string, TypeDef> defined;
  std::optional<TypeFileResult> committed;
  std::string line;
  int lineno = 0;

  const auto resolve = [&](const std::string &ref, int ln) -> TypeDef {
    if (auto kind = detail::kind_by_name(ref)) {
      return make_named(*kind);
    }
    auto it = defined.find(ref);
    if (it == defined.end()) {
      throw ParseError("line " + std::to_string(ln) + ": undefined type '" +
                       ref + "'");
    }
    return it->second;
  };

  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto fail = [&](const std::string &msg) -> ParseError {
      return ParseError("line " + std::to_string(lineno) + ": " + msg);
    };
    if (committed) {
      throw fail("statement after commit");
    }

    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "commit") {
      std::string name;
      if (!(ls >> name) || (ls >> word)) {
        throw fail("commit takes exactly one name");
      }
      auto it = defined.find(name);
      if (it == defined.end()) {
        throw fail("undefined type '" + name + "'");
      }
      committed = TypeFileResult{name, it->second};
      continue;
    }
    if (word != "type") {
      throw fail("expected 'type' or 'commit', got '" + word + "'");
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw fail("expected 'type <name> = <constructor>'");
    }
    const std::string name = trim(line.substr(4, eq - 4));
    if (!detail::is_identifier(name)) {
      throw fail("invalid type name '" + name + "'");
    }
    if (detail::kind_by_name(name) || defined.count(name)) {
      throw fail("type name '" + name + "' is already in use");
    }

    const std::string rhs = trim(line.substr(eq + 1));
    const auto open = rhs.find('(');
    if (open == std::string::npos || rhs.back() != ')') {
      throw fail("expected '<constructor>(...)'");
    }
    const std::string ctor = trim(rhs.substr(0, open));
    const auto args = detail::split_args(
        rhs.substr(open + 1, rhs.size() - open - 2), lineno);
    const auto want = [&](size_t n) {
      if (args.size() != n) {
        throw fail(ctor + " takes " + std::to_string(n) + " arguments");
      }
    };

    try {
      if (ctor == "named") {
        want(1);
        auto kind = detail::kind_by_name(args[0]);
        if (!kind) {
          throw fail("unknown kind '" + args[0] + "'");
        }
        defined.emplace(name, make_named(*kind));
      } else if (ctor == "contiguous") {
        want(2);
        defined.emplace(name,
                        make_contiguous(detail::parse_int(args[0], lineno),
                                        resolve(args[1], lineno)));
      } else if (ctor == "vector") {
        want(4);
        defined.emplace(
            name, make_vector(detail::parse_int(args[0], lineno),
                              detail::parse_int(args[1], lineno),
                              detail::parse_int(args[2], lineno),
                              resolve(args[3], lineno)));
      } else if (ctor == "hvector") {
        want(4);
        defined.emplace(
            name, make_hvector(detail::parse_int(args[0], lineno),
                               detail::parse_int(args[1], lineno),
                               detail::parse_int(args[2], lineno),
                               resolve(args[3], lineno)));
      } else if (ctor == "subarray") {
        want(5);
        defined.emplace(
            name, make_subarray(detail::parse_int(args[0], lineno),
                                detail::parse_int_list(args[1], lineno),
                                detail::parse_int_list(args[2], lineno),
                                detail::parse_int_list(args[3], lineno),
                                resolve(args[4], lineno)));
      } else {
        throw fail("unknown constructor '" + ctor + "'");
      }
    } catch (const InvalidArgument &e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const UnsupportedOrder &e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }

  if (!committed) {
    throw ParseError("type file has no commit statement");
  }
  return *committed;
}

} // namespace stridepack
