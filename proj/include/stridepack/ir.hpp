#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "type_def.hpp"

namespace stridepack {

struct DenseData {
  int64_t off = 0;    // bytes from the lower bound to the first byte
  int64_t extent = 0; // contiguous bytes

  bool operator==(const DenseData &) const = default;

  std::string str() const {
    return "Dense{off:" + std::to_string(off) +
           ",extent:" + std::to_string(extent) + "}";
  }
};

struct StreamData {
  int64_t off = 0;    // bytes, as DenseData
  int64_t stride = 0; // bytes between element starts
  int64_t count = 0;  // elements in the stream

  bool operator==(const StreamData &) const = default;

  std::string str() const {
    return "Stream{off:" + std::to_string(off) +
           ",count:" + std::to_string(count) +
           ",stride:" + std::to_string(stride) + "}";
  }
};

using TypeData = std::variant<DenseData, StreamData>;

/* One level of the translation IR. A chain: StreamData nodes have exactly one
 * child, DenseData nodes none, and every chain terminates in a DenseData.
 * The absolute position of a byte is the sum of node offsets plus the index
 * terms of each stream level plus the position within the dense run.
 */
class TypeNode {
public:
  TypeData data;

  TypeNode() : data(DenseData{}) {}
  explicit TypeNode(DenseData d) : data(d) {}
  TypeNode(StreamData s, TypeNode child) : data(s) {
    child_.push_back(std::move(child));
  }

  bool has_child() const noexcept { return !child_.empty(); }
  TypeNode &child() noexcept { return child_.front(); }
  const TypeNode &child() const noexcept { return child_.front(); }

  void set_child(TypeNode c) {
    child_.clear();
    child_.push_back(std::move(c));
  }

  bool operator==(const TypeNode &rhs) const {
    return data == rhs.data && child_ == rhs.child_;
  }

  std::string str() const {
    std::string s = std::visit([](const auto &d) { return d.str(); }, data);
    if (has_child()) {
      s += " -> " + child().str();
    }
    return s;
  }

private:
  std::vector<TypeNode> child_; // zero or one
};

inline bool is_dense(const TypeNode &n) noexcept {
  return std::holds_alternative<DenseData>(n.data);
}

inline bool is_stream(const TypeNode &n) noexcept {
  return std::holds_alternative<StreamData>(n.data);
}

// reference to the offset field of either node kind
inline int64_t &node_offset(TypeNode &n) noexcept {
  if (is_dense(n)) {
    return std::get<DenseData>(n.data).off;
  }
  return std::get<StreamData>(n.data).off;
}

inline int64_t chain_length(const TypeNode &n) noexcept {
  int64_t len = 1;
  const TypeNode *cur = &n;
  while (cur->has_child()) {
    ++len;
    cur = &cur->child();
  }
  return len;
}

/* Translate a definition into the IR chain. One node per constructor level:
 * named becomes the dense base, contiguous one stream, vector/hvector a
 * parent/child stream pair, subarray one stream per dimension (dimension 0
 * lowest). No simplification happens here.
 */
inline TypeNode translate(const TypeDef &def) {
  return std::visit(
      [&](const auto &n) -> TypeNode {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, TypeDef::Named>) {
          return TypeNode(DenseData{0, named_size(n.kind)});
        } else if constexpr (std::is_same_v<T, TypeDef::Contiguous>) {
          const int64_t e = type_extent(def.inner());
          return TypeNode(StreamData{0, e, n.count}, translate(def.inner()));
        } else if constexpr (std::is_same_v<T, TypeDef::Vector>) {
          const int64_t e = type_extent(def.inner());
          TypeNode block(StreamData{0, e, n.blocklength},
                         translate(def.inner()));
          return TypeNode(StreamData{0, n.stride * e, n.count},
                          std::move(block));
        } else if constexpr (std::is_same_v<T, TypeDef::Hvector>) {
          const int64_t e = type_extent(def.inner());
          TypeNode block(StreamData{0, e, n.blocklength},
                         translate(def.inner()));
          return TypeNode(StreamData{0, n.stride_bytes, n.count},
                          std::move(block));
        } else {
          const int64_t e = type_extent(def.inner());
          TypeNode ty = translate(def.inner());
          int64_t stride = e;
          for (size_t i = 0; i < n.sizes.size(); ++i) {
            ty = TypeNode(
                StreamData{n.offsets[i] * stride, stride, n.subsizes[i]},
                std::move(ty));
            stride *= n.sizes[i];
          }
          return ty;
        }
      },
      def.node());
}

} // namespace stridepack
