#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"

namespace stridepack {

// fixed-size base kinds, the leaves of every definition tree
enum class NamedKind : uint8_t { Byte, Int, Float, Double };

constexpr int64_t named_size(NamedKind k) noexcept {
  switch (k) {
  case NamedKind::Byte:
    return 1;
  case NamedKind::Int:
    return 4;
  case NamedKind::Float:
    return 4;
  case NamedKind::Double:
    return 8;
  }
  return 0;
}

constexpr const char *named_name(NamedKind k) noexcept {
  switch (k) {
  case NamedKind::Byte:
    return "byte";
  case NamedKind::Int:
    return "int";
  case NamedKind::Float:
    return "float";
  case NamedKind::Double:
    return "double";
  }
  return "?";
}

enum class ArrayOrder { C, Fortran };

/* A recursive datatype definition: a named leaf or one of four strided
 * constructors wrapping an inner definition. Values are immutable after
 * construction; inner definitions are shared and never mutated, so copies
 * are cheap and thread-safe.
 */
class TypeDef {
public:
  struct Named {
    NamedKind kind;
    bool operator==(const Named &) const = default;
  };
  struct Contiguous {
    int64_t count;
    bool operator==(const Contiguous &) const = default;
  };
  struct Vector {
    int64_t count;
    int64_t blocklength;
    int64_t stride; // in inner extents
    bool operator==(const Vector &) const = default;
  };
  struct Hvector {
    int64_t count;
    int64_t blocklength;
    int64_t stride_bytes;
    bool operator==(const Hvector &) const = default;
  };
  struct Subarray {
    std::vector<int64_t> sizes;    // dim 0 innermost, in inner elements
    std::vector<int64_t> subsizes;
    std::vector<int64_t> offsets;
    bool operator==(const Subarray &) const = default;
  };

  using Node = std::variant<Named, Contiguous, Vector, Hvector, Subarray>;

  TypeDef() : node_(Named{NamedKind::Byte}) {}

  const Node &node() const noexcept { return node_; }

  bool is_named() const noexcept {
    return std::holds_alternative<Named>(node_);
  }

  // valid for every non-named node
  const TypeDef &inner() const noexcept { return *inner_; }

  bool operator==(const TypeDef &rhs) const {
    if (node_ != rhs.node_) {
      return false;
    }
    if (!inner_ || !rhs.inner_) {
      return static_cast<bool>(inner_) == static_cast<bool>(rhs.inner_);
    }
    return *inner_ == *rhs.inner_;
  }

  std::string str() const;

  friend TypeDef make_named(NamedKind kind);
  friend TypeDef make_contiguous(int64_t count, TypeDef inner);
  friend TypeDef make_vector(int64_t count, int64_t blocklength,
                             int64_t stride, TypeDef inner);
  friend TypeDef make_hvector(int64_t count, int64_t blocklength,
                              int64_t stride_bytes, TypeDef inner);
  friend TypeDef make_subarray(int64_t ndims, std::vector<int64_t> sizes,
                               std::vector<int64_t> subsizes,
                               std::vector<int64_t> offsets, TypeDef inner,
                               ArrayOrder order);

private:
  TypeDef(Node node, std::shared_ptr<const TypeDef> inner)
      : node_(std::move(node)), inner_(std::move(inner)) {}

  Node node_;
  std::shared_ptr<const TypeDef> inner_; // null iff Named
};

inline TypeDef make_named(NamedKind kind) {
  return TypeDef(TypeDef::Named{kind}, nullptr);
}

inline TypeDef make_contiguous(int64_t count, TypeDef inner) {
  if (count < 0) {
    throw InvalidArgument("contiguous: count must be >= 0");
  }
  return TypeDef(TypeDef::Contiguous{count},
                 std::make_shared<const TypeDef>(std::move(inner)));
}

inline TypeDef make_vector(int64_t count, int64_t blocklength, int64_t stride,
                           TypeDef inner) {
  if (count < 0 || blocklength < 0) {
    throw InvalidArgument("vector: count and blocklength must be >= 0");
  }
  if (stride < 0) {
    throw InvalidArgument("vector: negative strides are not representable");
  }
  return TypeDef(TypeDef::Vector{count, blocklength, stride},
                 std::make_shared<const TypeDef>(std::move(inner)));
}

inline TypeDef make_hvector(int64_t count, int64_t blocklength,
                            int64_t stride_bytes, TypeDef inner) {
  if (count < 0 || blocklength < 0) {
    throw InvalidArgument("hvector: count and blocklength must be >= 0");
  }
  if (stride_bytes < 0) {
    throw InvalidArgument("hvector: negative strides are not representable");
  }
  return TypeDef(TypeDef::Hvector{count, blocklength, stride_bytes},
                 std::make_shared<const TypeDef>(std::move(inner)));
}

inline TypeDef make_subarray(int64_t ndims, std::vector<int64_t> sizes,
                             std::vector<int64_t> subsizes,
                             std::vector<int64_t> offsets, TypeDef inner,
                             ArrayOrder order = ArrayOrder::C) {
  if (order != ArrayOrder::C) {
    throw UnsupportedOrder("subarray: only C array order is supported");
  }
  if (ndims < 1) {
    throw InvalidArgument("subarray: ndims must be >= 1");
  }
  const auto n = static_cast<size_t>(ndims);
  if (sizes.size() != n || subsizes.size() != n || offsets.size() != n) {
    throw InvalidArgument("subarray: sizes/subsizes/offsets must have ndims "
                          "entries");
  }
  for (size_t i = 0; i < n; ++i) {
    if (sizes[i] < 1 || subsizes[i] < 1 || offsets[i] < 0) {
      throw InvalidArgument("subarray: sizes and subsizes must be positive, "
                            "offsets nonnegative");
    }
    // An oversized dim-i run at offset 0 is tolerated: it describes elements
    // past the row pitch, an overlapping-but-readable layout. Anything else
    // out of bounds is an error.
    if (offsets[i] + subsizes[i] > sizes[i] &&
        !(offsets[i] == 0 && subsizes[i] > sizes[i])) {
      throw InvalidArgument("subarray: offsets[" + std::to_string(i) + "]+" +
                            "subsizes[" + std::to_string(i) + "] exceeds " +
                            "sizes[" + std::to_string(i) + "]");
    }
  }
  return TypeDef(
      TypeDef::Subarray{std::move(sizes), std::move(subsizes),
                        std::move(offsets)},
      std::make_shared<const TypeDef>(std::move(inner)));
}

// total described bytes of one object
inline int64_t type_size(const TypeDef &def) {
  return std::visit(
      [&](const auto &n) -> int64_t {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, TypeDef::Named>) {
          return named_size(n.kind);
        } else if constexpr (std::is_same_v<T, TypeDef::Contiguous>) {
          return n.count * type_size(def.inner());
        } else if constexpr (std::is_same_v<T, TypeDef::Vector> ||
                             std::is_same_v<T, TypeDef::Hvector>) {
          return n.count * n.blocklength * type_size(def.inner());
        } else {
          int64_t prod = 1;
          for (int64_t s : n.subsizes) {
            prod *= s;
          }
          return prod * type_size(def.inner());
        }
      },
      def.node());
}

// span used to place consecutive objects in multi-count operations
inline int64_t type_extent(const TypeDef &def) {
  return std::visit(
      [&](const auto &n) -> int64_t {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, TypeDef::Named>) {
          return named_size(n.kind);
        } else if constexpr (std::is_same_v<T, TypeDef::Contiguous>) {
          return n.count * type_extent(def.inner());
        } else if constexpr (std::is_same_v<T, TypeDef::Vector>) {
          if (n.count == 0) {
            return 0;
          }
          return ((n.count - 1) * n.stride + n.blocklength) *
                 type_extent(def.inner());
        } else if constexpr (std::is_same_v<T, TypeDef::Hvector>) {
          if (n.count == 0) {
            return 0;
          }
          return (n.count - 1) * n.stride_bytes +
                 n.blocklength * type_extent(def.inner());
        } else {
          int64_t prod = 1;
          for (int64_t s : n.sizes) {
            prod *= s;
          }
          return prod * type_extent(def.inner());
        }
      },
      def.node());
}

inline std::string TypeDef::str() const {
  return std::visit(
      [&](const auto &n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Named>) {
          return named_name(n.kind);
        } else if constexpr (std::is_same_v<T, Contiguous>) {
          return "contiguous(" + std::to_string(n.count) + "," +
                 inner().str() + ")";
        } else if constexpr (std::is_same_v<T, Vector>) {
          return "vector(" + std::to_string(n.count) + "," +
                 std::to_string(n.blocklength) + "," +
                 std::to_string(n.stride) + "," + inner().str() + ")";
        } else if constexpr (std::is_same_v<T, Hvector>) {
          return "hvector(" + std::to_string(n.count) + "," +
                 std::to_string(n.blocklength) + "," +
                 std::to_string(n.stride_bytes) + "," + inner().str() + ")";
        } else {
          auto list = [](const std::vector<int64_t> &v) {
            std::string s = "[";
            for (size_t i = 0; i < v.size(); ++i) {
              s += (i ? "," : "") + std::to_string(v[i]);
            }
            return s + "]";
          };
          return "subarray(" + std::to_string(n.sizes.size()) + "," +
                 list(n.sizes) + "," + list(n.subsizes) + "," +
                 list(n.offsets) + "," + inner().str() + ")";
        }
      },
      node_);
}

} // namespace stridepack
