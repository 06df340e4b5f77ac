#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "clusterstore/types.hpp"

namespace cstore {

/// Receives store events in operation order. Statistics collectors and
/// co-usage observers register through Store::add_listener.
class StoreListener {
 public:
  virtual ~StoreListener() = default;

  virtual void on_access(ObjectId /*oid*/, PageId /*page*/, std::uint64_t /*size*/) {}
  /// A page leaves the buffer for disk; `resident` lists (oid, size) in slot order.
  virtual void on_unload(PageId /*page*/,
                         const std::vector<std::pair<ObjectId, std::uint64_t>>& /*resident*/) {}
  virtual void on_move(ObjectId /*oid*/) {}
  virtual void on_delete(ObjectId /*oid*/) {}
};

struct RelocationReport {
  std::set<ObjectId> moved;
  std::set<PageId> touched_pages;  // modified sources plus destinations
  IoCounters io;
};

/// One object row of an exact layout (snapshot restore, test fixtures).
struct LayoutEntry {
  ObjectId oid = kNoObject;
  std::uint32_t class_id = 0;
  std::uint64_t size = 0;
  PageId page = kNoPage;
  std::size_t slot = 0;
  std::vector<ObjectId> refs;
};

/// Paged object store with a bounded buffer and exact I/O accounting.
///
/// A page is the unit of transfer. Reads are charged when a non-resident page
/// is fetched, writes when a dirty page leaves the buffer or when relocation
/// rewrites pages directly. One instance is single-writer; all operations are
/// serialized by the caller.
class Store {
 public:
  explicit Store(StoreConfig cfg) : cfg_(cfg) {
    if (cfg_.page_capacity == 0) throw ConfigError("page_capacity must be positive");
    if (cfg_.buffer_frames == 0) throw ConfigError("buffer_frames must be at least 1");
  }

  const StoreConfig& config() const { return cfg_; }

  /// Builds a store with an exact object layout. Entries may arrive in any
  /// order; slots must be contiguous per page. Throws ParseError on an
  /// inconsistent layout, leaving no partial store behind.
  static Store from_layout(StoreConfig cfg, const std::vector<LayoutEntry>& entries) {
    Store store(cfg);
    std::map<PageId, std::map<std::size_t, const LayoutEntry*>> by_page;
    for (const LayoutEntry& e : entries) {
      if (e.oid == kNoObject) throw ParseError("object id must be positive");
      if (e.size == 0 || e.size > cfg.page_capacity) {
        throw ParseError("object " + std::to_string(e.oid) + ": bad size " +
                         std::to_string(e.size));
      }
      if (e.page == kNoPage) throw ParseError("page id must be positive");
      if (store.objects_.count(e.oid)) {
        throw ParseError("duplicate object " + std::to_string(e.oid));
      }
      if (!by_page[e.page].emplace(e.slot, &e).second) {
        throw ParseError("duplicate slot " + std::to_string(e.slot) + " on page " +
                         std::to_string(e.page));
      }
      store.objects_.emplace(e.oid, StoredObject{e.oid, e.class_id, e.size, e.refs});
      store.placement_[e.oid] = ObjectPlacement{e.page, e.slot};
      store.next_oid_ = std::max(store.next_oid_, e.oid + 1);
      store.next_page_ = std::max(store.next_page_, e.page + 1);
    }
    for (auto& [pid, slots] : by_page) {
      Page page{pid, {}, 0};
      for (auto& [slot, entry] : slots) {
        if (slot != page.slots.size()) {
          throw ParseError("page " + std::to_string(pid) + ": slots are not contiguous");
        }
        page.slots.push_back(entry->oid);
        page.used_bytes += entry->size;
      }
      if (page.used_bytes > cfg.page_capacity) {
        throw ParseError("page " + std::to_string(pid) + " exceeds capacity");
      }
      store.pages_.emplace(pid, std::move(page));
    }
    for (const auto& [oid, obj] : store.objects_) {
      for (ObjectId r : obj.refs) {
        if (!store.objects_.count(r)) {
          throw ParseError("object " + std::to_string(oid) +
                           " has dangling reference to " + std::to_string(r));
        }
      }
    }
    return store;
  }

  // ---- objects and pages -------------------------------------------------

  ObjectId insert_object(std::uint32_t class_id, std::uint64_t size,
                         std::vector<ObjectId> refs) {
    if (size == 0) throw ConfigError("object size must be positive");
    if (size > cfg_.page_capacity) {
      throw OversizeObjectError("object of " + std::to_string(size) +
                                " bytes exceeds page capacity " +
                                std::to_string(cfg_.page_capacity));
    }
    PageId target = kNoPage;
    if (!pages_.empty()) {
      const Page& last = pages_.rbegin()->second;
      if (last.used_bytes + size <= cfg_.page_capacity) target = last.id;
    }
    if (target == kNoPage) {
      target = next_page_++;
      make_room();
      pages_.emplace(target, Page{target, {}, 0});
      resident_[target] = Frame{++tick_, false};  // fresh page, nothing to read
    } else {
      ensure_resident(target);
    }
    Page& page = pages_.at(target);
    ObjectId oid = next_oid_++;
    placement_[oid] = ObjectPlacement{target, page.slots.size()};
    page.slots.push_back(oid);
    page.used_bytes += size;
    objects_.emplace(oid, StoredObject{oid, class_id, size, std::move(refs)});
    Frame& f = resident_.at(target);
    f.dirty = true;
    f.last_use = ++tick_;
    return oid;
  }

  void delete_object(ObjectId oid) {
    auto it = objects_.find(oid);
    if (it == objects_.end()) throw NotFoundError("unknown object " + std::to_string(oid));
    ObjectPlacement pl = placement_.at(oid);
    ensure_resident(pl.page);
    remove_from_page(pl.page, oid);
    objects_.erase(it);
    placement_.erase(oid);
    Frame& f = resident_.at(pl.page);
    f.dirty = true;
    f.last_use = ++tick_;
    for (StoreListener* l : listeners_) l->on_delete(oid);
  }

  /// Buffered read: fetches the page on a miss (one read per missing page,
  /// cluster prefetch included) and reports the access to listeners.
  const StoredObject& access_object(ObjectId oid) {
    auto it = objects_.find(oid);
    if (it == objects_.end()) throw NotFoundError("unknown object " + std::to_string(oid));
    PageId page = placement_.at(oid).page;
    ensure_resident(page);
    if (cfg_.cluster_prefetch) {
      auto cit = page_cluster_.find(page);
      if (cit != page_cluster_.end()) {
        for (PageId member : clusters_.at(cit->second)) {
          if (member != page) ensure_resident(member);
        }
      }
    }
    // A cluster larger than the buffer may have evicted the accessed page
    // again during prefetch; re-fetching models the resulting thrash.
    ensure_resident(page);
    for (StoreListener* l : listeners_) l->on_access(oid, page, it->second.size);
    return it->second;
  }

  bool contains(ObjectId oid) const { return objects_.count(oid) != 0; }

  /// Metadata view, no buffer traffic. Clustering engines walk reference
  /// graphs through this; only access_object models a disk touch.
  const StoredObject& object(ObjectId oid) const {
    auto it = objects_.find(oid);
    if (it == objects_.end()) throw NotFoundError("unknown object " + std::to_string(oid));
    return it->second;
  }

  ObjectPlacement placement_of(ObjectId oid) const {
    auto it = placement_.find(oid);
    if (it == placement_.end()) throw NotFoundError("unknown object " + std::to_string(oid));
    return it->second;
  }

  const Page& page(PageId id) const {
    auto it = pages_.find(id);
    if (it == pages_.end()) throw NotFoundError("unknown page " + std::to_string(id));
    return it->second;
  }

  const std::map<PageId, Page>& pages() const { return pages_; }
  const std::map<ObjectId, StoredObject>& objects() const { return objects_; }
  std::size_t object_count() const { return objects_.size(); }

  std::size_t nonempty_page_count() const {
    std::size_t n = 0;
    for (const auto& [id, p] : pages_) n += p.slots.empty() ? 0 : 1;
    return n;
  }

  std::map<ObjectId, std::vector<ObjectId>> reference_graph() const {
    std::map<ObjectId, std::vector<ObjectId>> g;
    for (const auto& [oid, obj] : objects_) g[oid] = obj.refs;
    return g;
  }

  // ---- buffer ------------------------------------------------------------

  bool is_resident(PageId id) const { return resident_.count(id) != 0; }
  std::size_t resident_count() const { return resident_.size(); }

  std::vector<PageId> resident_pages() const {
    std::vector<PageId> out;
    out.reserve(resident_.size());
    for (const auto& [id, f] : resident_) out.push_back(id);
    return out;
  }

  /// Evicts one page per policy; returns kNoPage on an empty buffer.
  PageId evict_page() {
    if (resident_.empty()) return kNoPage;
    PageId victim = pick_victim();
    unload(victim);
    return victim;
  }

  /// Empties the buffer in eviction-policy order, emitting unload events.
  void flush() {
    while (!resident_.empty()) evict_page();
  }

  /// Cold restart: clears residency without events or I/O charges. Used to
  /// make measurement windows start from an identical buffer state.
  void reset_buffer() {
    resident_.clear();
    tick_ = 0;
  }

  // ---- I/O accounting ----------------------------------------------------

  const IoCounters& io_report() const { return io_; }
  void reset_io() { io_ = IoCounters{}; }

  // ---- clusters ----------------------------------------------------------

  ClusterId allocate_cluster_id() { return next_cluster_++; }

  std::optional<ClusterId> cluster_of(PageId page) const {
    auto it = page_cluster_.find(page);
    if (it == page_cluster_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<PageId> cluster_pages(ClusterId id) const {
    auto it = clusters_.find(id);
    if (it == clusters_.end()) return {};
    return it->second;
  }

  // ---- reorganization ----------------------------------------------------

  /// Rewrites the objects in `ordered` into a fresh contiguous page extent in
  /// exactly that order, breaking to a new page only when the next object
  /// does not fit. Vacated slots are compacted in their source pages.
  ///
  /// I/O: one read per distinct non-resident source page, one write per
  /// modified source page and per destination page. A proposal that matches
  /// the current layout exactly is a no-op (the existing run still gets
  /// registered under `cluster`).
  RelocationReport rewrite_placement(const std::vector<ObjectId>& ordered,
                                     ClusterId cluster) {
    RelocationReport report;
    if (ordered.empty()) return report;
    const IoCounters io_before = io_;
    std::set<ObjectId> seen;
    for (ObjectId oid : ordered) {
      if (!objects_.count(oid)) throw NotFoundError("unknown object " + std::to_string(oid));
      if (!seen.insert(oid).second) {
        throw ProposalError("duplicate object " + std::to_string(oid) + " in proposal");
      }
    }

    std::vector<std::vector<ObjectId>> groups = split_by_capacity(ordered);
    if (matches_current_layout(groups)) {
      std::vector<PageId> run;
      PageId first = placement_.at(ordered.front()).page;
      for (std::size_t j = 0; j < groups.size(); ++j) run.push_back(first + j);
      register_cluster(cluster, run);
      return report;
    }

    // Charge source reads against residency at operation start.
    std::set<PageId> sources;
    for (ObjectId oid : ordered) sources.insert(placement_.at(oid).page);
    for (PageId src : sources) {
      if (!resident_.count(src)) ++io_.page_reads;
    }

    for (PageId src : sources) {
      Page& p = pages_.at(src);
      std::erase_if(p.slots, [&](ObjectId o) { return seen.count(o) != 0; });
      p.used_bytes = 0;
      for (std::size_t s = 0; s < p.slots.size(); ++s) {
        placement_[p.slots[s]] = ObjectPlacement{src, s};
        p.used_bytes += objects_.at(p.slots[s]).size;
      }
      ++io_.page_writes;
      report.touched_pages.insert(src);
      resident_.erase(src);  // relocation wrote it back; drop without charge
    }

    std::vector<PageId> extent;
    for (const auto& group : groups) {
      PageId dest = next_page_++;
      Page page{dest, {}, 0};
      for (ObjectId oid : group) {
        placement_[oid] = ObjectPlacement{dest, page.slots.size()};
        page.slots.push_back(oid);
        page.used_bytes += objects_.at(oid).size;
      }
      pages_.emplace(dest, std::move(page));
      extent.push_back(dest);
      ++io_.page_writes;
      report.touched_pages.insert(dest);
    }
    register_cluster(cluster, extent);

    report.moved.insert(ordered.begin(), ordered.end());
    report.io = io_ - io_before;
    for (ObjectId oid : ordered) {
      for (StoreListener* l : listeners_) l->on_move(oid);
    }
    return report;
  }

  // ---- listeners ---------------------------------------------------------

  void add_listener(StoreListener* l) { listeners_.push_back(l); }
  void remove_listener(StoreListener* l) {
    std::erase(listeners_, l);
  }

  // ---- integrity ---------------------------------------------------------

  /// Structural check: placement bijection, capacity bounds, buffer bound.
  /// Throws on the first violation. Reference targets are checked separately
  /// (deletion legitimately leaves dangling references behind).
  void validate() const {
    std::size_t placed = 0;
    for (const auto& [pid, page] : pages_) {
      std::uint64_t bytes = 0;
      for (std::size_t s = 0; s < page.slots.size(); ++s) {
        ObjectId oid = page.slots[s];
        auto pl = placement_.find(oid);
        if (pl == placement_.end() || pl->second.page != pid || pl->second.slot != s) {
          throw std::logic_error("placement/slot mismatch for object " + std::to_string(oid));
        }
        bytes += objects_.at(oid).size;
        ++placed;
      }
      if (bytes != page.used_bytes || bytes > cfg_.page_capacity) {
        throw std::logic_error("used_bytes inconsistent on page " + std::to_string(pid));
      }
    }
    if (placed != placement_.size() || placed != objects_.size()) {
      throw std::logic_error("placement map and page slots disagree");
    }
    if (resident_.size() > cfg_.buffer_frames) {
      throw std::logic_error("buffer overflow: resident exceeds frame count");
    }
    for (const auto& [pid, f] : resident_) {
      if (!pages_.count(pid)) throw std::logic_error("resident page does not exist");
    }
  }

  /// True when every reference targets an existing object.
  bool references_intact() const {
    for (const auto& [oid, obj] : objects_) {
      for (ObjectId r : obj.refs) {
        if (!objects_.count(r)) return false;
      }
    }
    return true;
  }

 private:
  struct Frame {
    std::uint64_t last_use = 0;
    bool dirty = false;
  };

  void make_room() {
    while (resident_.size() >= cfg_.buffer_frames) evict_page();
  }

  void ensure_resident(PageId id) {
    if (resident_.count(id)) {
      resident_.at(id).last_use = ++tick_;
      return;
    }
    make_room();
    ++io_.page_reads;
    resident_[id] = Frame{++tick_, false};
  }

  void unload(PageId id) {
    Frame f = resident_.at(id);
    resident_.erase(id);
    if (f.dirty) ++io_.page_writes;
    const Page& page = pages_.at(id);
    std::vector<std::pair<ObjectId, std::uint64_t>> entries;
    entries.reserve(page.slots.size());
    for (ObjectId oid : page.slots) entries.emplace_back(oid, objects_.at(oid).size);
    for (StoreListener* l : listeners_) l->on_unload(id, entries);
  }

  PageId pick_victim() const {
    if (cfg_.policy == ReplacementPolicy::kLru) {
      PageId victim = kNoPage;
      std::uint64_t oldest = UINT64_MAX;
      for (const auto& [id, f] : resident_) {
        if (f.last_use < oldest) {
          oldest = f.last_use;
          victim = id;
        }
      }
      return victim;
    }
    // LRU-C: a cluster is as recent as its most recently used resident page;
    // unclustered pages count as singleton clusters. Evict the page with the
    // oldest own tick inside the stalest cluster.
    std::map<PageId, std::uint64_t> cluster_date;   // keyed by representative
    std::map<PageId, PageId> representative;        // resident page -> key
    for (const auto& [id, f] : resident_) {
      auto cit = page_cluster_.find(id);
      // Singleton keys must not collide with cluster keys; bias cluster ids
      // into a separate key space by page-id max.
      PageId key = (cit == page_cluster_.end()) ? id : kClusterKeyBase + cit->second;
      representative[id] = key;
      auto [it, inserted] = cluster_date.try_emplace(key, f.last_use);
      if (!inserted) it->second = std::max(it->second, f.last_use);
    }
    PageId victim_key = kNoPage;
    std::uint64_t oldest = UINT64_MAX;
    for (const auto& [key, date] : cluster_date) {
      if (date < oldest) {
        oldest = date;
        victim_key = key;
      }
    }
    PageId victim = kNoPage;
    std::uint64_t oldest_page = UINT64_MAX;
    for (const auto& [id, f] : resident_) {
      if (representative.at(id) == victim_key && f.last_use < oldest_page) {
        oldest_page = f.last_use;
        victim = id;
      }
    }
    return victim;
  }

  void remove_from_page(PageId pid, ObjectId oid) {
    Page& p = pages_.at(pid);
    auto it = std::find(p.slots.begin(), p.slots.end(), oid);
    p.slots.erase(it);
    p.used_bytes -= objects_.at(oid).size;
    for (std::size_t s = 0; s < p.slots.size(); ++s) {
      placement_[p.slots[s]] = ObjectPlacement{pid, s};
    }
  }

  std::vector<std::vector<ObjectId>> split_by_capacity(
      const std::vector<ObjectId>& ordered) const {
    std::vector<std::vector<ObjectId>> groups;
    std::uint64_t fill = 0;
    for (ObjectId oid : ordered) {
      std::uint64_t size = objects_.at(oid).size;
      if (groups.empty() || fill + size > cfg_.page_capacity) {
        groups.emplace_back();
        fill = 0;
      }
      groups.back().push_back(oid);
      fill += size;
    }
    return groups;
  }

  /// Identity test: the proposal already occupies a consecutive page run in
  /// exactly the grouped layout, with nothing else on those pages.
  bool matches_current_layout(const std::vector<std::vector<ObjectId>>& groups) const {
    const ObjectId first = groups.front().front();
    ObjectPlacement pl = placement_.at(first);
    if (pl.slot != 0) return false;
    PageId pid = pl.page;
    for (const auto& group : groups) {
      auto it = pages_.find(pid);
      if (it == pages_.end() || it->second.slots != group) return false;
      ++pid;
    }
    return true;
  }

  void register_cluster(ClusterId cluster, const std::vector<PageId>& members) {
    if (cluster == kNoCluster) return;
    clusters_[cluster] = members;
    for (PageId p : members) page_cluster_[p] = cluster;
  }

  static constexpr PageId kClusterKeyBase = PageId{1} << 48;

  StoreConfig cfg_;
  std::map<PageId, Page> pages_;
  std::map<ObjectId, StoredObject> objects_;
  std::map<ObjectId, ObjectPlacement> placement_;
  ObjectId next_oid_ = 1;
  PageId next_page_ = 1;
  ClusterId next_cluster_ = 1;

  IoCounters io_;
  std::map<PageId, Frame> resident_;
  std::uint64_t tick_ = 0;

  std::map<PageId, ClusterId> page_cluster_;
  std::map<ClusterId, std::vector<PageId>> clusters_;
  std::vector<StoreListener*> listeners_;
};

}  // namespace cstore
