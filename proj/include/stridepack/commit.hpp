#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <unordered_map>
#include <utility>

#include "block_list.hpp"
#include "canon.hpp"
#include "errors.hpp"
#include "plan.hpp"
#include "strided_block.hpp"
#include "type_def.hpp"

namespace stridepack {

enum class CanonForm {
  Strided,    // canon and plan are present
  Empty,      // zero described bytes; pack/unpack are no-ops
  Unsupported // lowering failed; fallback_runs drives the executor
};

/* Everything derived from a definition at commit time. Immutable afterwards
 * and safe to share across threads.
 */
struct CommittedType {
  uint64_t id = 0;
  TypeDef def;
  CanonForm form = CanonForm::Empty;
  std::optional<StridedBlock> canon;
  std::optional<PackPlan> plan;
  int64_t size = 0;   // described bytes per object
  int64_t extent = 0; // placement span for consecutive objects
  int64_t span = 0;   // one past the last described byte of one object
  bool overlapping = false;
  // definition-order runs, kept only for the Unsupported fallback path;
  // deliberately unmerged so repeated bytes keep their multiplicity
  std::vector<Block> fallback_runs;
};

/* The commit pipeline: translate, simplify, lower, plan. Pure function of
 * the definition; equal defs yield equal results. Never throws for the five
 * supported constructors: a layout the canonicalizer rejects (coincident
 * elements) is stored with the Unsupported marker and remains usable through
 * the block-list fallback.
 */
inline CommittedType commit_type(const TypeDef &def) {
  CommittedType ct;
  ct.def = def;
  ct.size = type_size(def);
  ct.extent = type_extent(def);

  const BlockList oracle = flatten_oracle(def);
  ct.overlapping = oracle.overlap;
  ct.span = oracle.span();

  if (ct.size == 0) {
    ct.form = CanonForm::Empty;
    return ct;
  }
  try {
    const TypeNode chain = simplify(translate(def));
    if (auto sb = to_strided_block(chain)) {
      ct.form = CanonForm::Strided;
      ct.plan = make_plan(*sb);
      ct.canon = std::move(sb);
      return ct;
    }
  } catch (const InvalidLayout &) {
    // fall through to the block-list form
  }
  ct.form = CanonForm::Unsupported;
  ct.fallback_runs = flatten_runs(def);
  return ct;
}

/* Owns committed types by handle. Commits run outside the map lock, so
 * concurrent commits of distinct defs never serialize on each other or on
 * pack execution.
 */
class TypeRegistry {
public:
  std::shared_ptr<const CommittedType> commit(const TypeDef &def) {
    auto ct = std::make_shared<CommittedType>(commit_type(def));
    ct->id = next_.fetch_add(1, std::memory_order_relaxed);
    std::unique_lock lock(mu_);
    types_.emplace(ct->id, ct);
    return ct;
  }

  std::shared_ptr<const CommittedType> lookup(uint64_t id) const {
    std::shared_lock lock(mu_);
    auto it = types_.find(id);
    return it == types_.end() ? nullptr : it->second;
  }

  size_t size() const {
    std::shared_lock lock(mu_);
    return types_.size();
  }

private:
  mutable std::shared_mutex mu_;
  std::unordered_map<uint64_t, std::shared_ptr<const CommittedType>> types_;
  std::atomic<uint64_t> next_{1};
};

} // namespace stridepack
