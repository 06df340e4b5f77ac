#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "clusterstore/config.hpp"
#include "clusterstore/store.hpp"
#include "clusterstore/types.hpp"

namespace cstore {

/// Usage statistics feeding the DRO clustering steps.
///
/// Three record kinds: per-object (access frequency plus a usage indicator),
/// per-page (load count plus the usage rate computed at each unload), and the
/// page-object links carrying the bytes an object occupies on a page. The
/// store drives updates through the listener interface; every entry point is
/// also callable directly for tests and replay oracles.
class StatStore final : public StoreListener {
 public:
  explicit StatStore(std::uint64_t page_capacity) : page_capacity_(page_capacity) {
    if (page_capacity == 0) throw ConfigError("page_capacity must be positive");
  }

  // ---- event entry points --------------------------------------------------

  /// Access: frequency +1 (record created at 1), indicator set, link ensured.
  void record_access(ObjectId oid, PageId page, std::uint64_t size) {
    ObjectStat& os = objects_[oid];
    os.frequency += 1;
    os.indicator = true;
    pages_.try_emplace(page);
    links_[page][oid] = size;
    object_pages_[oid].insert(page);
  }

  /// Unload: usage rate recomputed from objects whose indicator is set,
  /// nb_load incremented. The latest unload wins; rates are not averaged.
  void record_unload(PageId page,
                     const std::vector<std::pair<ObjectId, std::uint64_t>>& resident) {
    std::uint64_t used = 0;
    for (const auto& [oid, size] : resident) {
      auto it = objects_.find(oid);
      if (it != objects_.end() && it->second.indicator) used += size;
    }
    PageStat& ps = pages_[page];
    ps.usage_rate = static_cast<double>(used) / static_cast<double>(page_capacity_);
    ps.nb_load += 1;
  }

  /// Deletion cascades: the object record, its links, and any page record
  /// left without links all go.
  void record_delete(ObjectId oid) {
    auto it = objects_.find(oid);
    if (it == objects_.end()) return;
    objects_.erase(it);
    drop_links_of(oid);
  }

  /// Move: indicator cleared, links to the old pages dropped. The object
  /// re-links to its destination page on its next access.
  void record_move(ObjectId oid) {
    auto it = objects_.find(oid);
    if (it == objects_.end()) return;
    it->second.indicator = false;
    drop_links_of(oid);
  }

  // StoreListener plumbing.
  void on_access(ObjectId oid, PageId page, std::uint64_t size) override {
    record_access(oid, page, size);
  }
  void on_unload(PageId page,
                 const std::vector<std::pair<ObjectId, std::uint64_t>>& resident) override {
    record_unload(page, resident);
  }
  void on_move(ObjectId oid) override { record_move(oid); }
  void on_delete(ObjectId oid) override { record_delete(oid); }

  // ---- queries ---------------------------------------------------------------

  bool tracks(ObjectId oid) const { return objects_.count(oid) != 0; }
  bool has_page(PageId page) const { return pages_.count(page) != 0; }

  std::uint64_t access_frequency(ObjectId oid) const {
    auto it = objects_.find(oid);
    return it == objects_.end() ? 0 : it->second.frequency;
  }

  bool usage_indicator(ObjectId oid) const {
    auto it = objects_.find(oid);
    return it != objects_.end() && it->second.indicator;
  }

  std::uint64_t nb_load(PageId page) const {
    auto it = pages_.find(page);
    return it == pages_.end() ? 0 : it->second.nb_load;
  }

  double usage_rate(PageId page) const {
    auto it = pages_.find(page);
    return it == pages_.end() ? 0.0 : it->second.usage_rate;
  }

  std::optional<std::uint64_t> occupied_size(PageId page, ObjectId oid) const {
    auto pit = links_.find(page);
    if (pit == links_.end()) return std::nullopt;
    auto oit = pit->second.find(oid);
    if (oit == pit->second.end()) return std::nullopt;
    return oit->second;
  }

  std::set<PageId> linked_pages(ObjectId oid) const {
    auto it = object_pages_.find(oid);
    return it == object_pages_.end() ? std::set<PageId>{} : it->second;
  }

  std::size_t tracked_object_count() const { return objects_.size(); }
  std::size_t page_count() const { return pages_.size(); }

  double mean_usage_rate() const {
    if (pages_.empty()) return 0.0;
    double sum = 0;
    for (const auto& [id, ps] : pages_) sum += ps.usage_rate;
    return sum / static_cast<double>(pages_.size());
  }

  std::size_t pages_loaded() const {
    std::size_t n = 0;
    for (const auto& [id, ps] : pages_) n += ps.nb_load > 0 ? 1 : 0;
    return n;
  }

  /// Pages with usage rate strictly below min_usage_rate that were unloaded
  /// strictly more than min_load_threshold times.
  std::set<PageId> candidate_pages(double min_usage_rate, double min_load_threshold) const {
    std::set<PageId> out;
    for (const auto& [id, ps] : pages_) {
      if (ps.usage_rate < min_usage_rate &&
          static_cast<double>(ps.nb_load) > min_load_threshold) {
        out.insert(id);
      }
    }
    return out;
  }

  // ---- maintenance -----------------------------------------------------------

  void purge_all() {
    objects_.clear();
    pages_.clear();
    links_.clear();
    object_pages_.clear();
  }

  /// Removes the given page records and the links into them. An object whose
  /// last link disappears here loses its record too; objects linked elsewhere
  /// keep their frequencies.
  void purge_pages(const std::set<PageId>& scope) {
    for (PageId page : scope) {
      auto pit = links_.find(page);
      if (pit != links_.end()) {
        for (const auto& [oid, size] : pit->second) {
          auto opit = object_pages_.find(oid);
          opit->second.erase(page);
          if (opit->second.empty()) {
            object_pages_.erase(opit);
            objects_.erase(oid);
          }
        }
        links_.erase(pit);
      }
      pages_.erase(page);
    }
  }

  /// Referential integrity: every link joins an existing object record and an
  /// existing page record. Test hook; returns false instead of throwing.
  bool links_consistent() const {
    for (const auto& [page, members] : links_) {
      if (!pages_.count(page)) return false;
      for (const auto& [oid, size] : members) {
        if (!objects_.count(oid)) return false;
        auto it = object_pages_.find(oid);
        if (it == object_pages_.end() || !it->second.count(page)) return false;
      }
    }
    for (const auto& [oid, pages] : object_pages_) {
      for (PageId p : pages) {
        auto it = links_.find(p);
        if (it == links_.end() || !it->second.count(oid)) return false;
      }
    }
    return true;
  }

  /// Diagnostic dump: `kind,id,field1,field2` rows, objects then pages.
  void dump_csv(std::ostream& out) const {
    out << "kind,id,field1,field2\n";
    for (const auto& [oid, os] : objects_) {
      out << "object," << oid << ',' << os.frequency << ',' << (os.indicator ? 1 : 0)
          << '\n';
    }
    for (const auto& [page, ps] : pages_) {
      out << "page," << page << ',' << ps.nb_load << ',' << format_double(ps.usage_rate)
          << '\n';
    }
  }

 private:
  struct ObjectStat {
    std::uint64_t frequency = 0;
    bool indicator = false;
  };
  struct PageStat {
    std::uint64_t nb_load = 0;
    double usage_rate = 0.0;
  };

  // Removes every link of `oid`; pages losing their last link lose their
  // record as well.
  void drop_links_of(ObjectId oid) {
    auto opit = object_pages_.find(oid);
    if (opit == object_pages_.end()) return;
    for (PageId page : opit->second) {
      auto pit = links_.find(page);
      pit->second.erase(oid);
      if (pit->second.empty()) {
        links_.erase(pit);
        pages_.erase(page);
      }
    }
    object_pages_.erase(opit);
  }

  std::uint64_t page_capacity_;
  std::map<ObjectId, ObjectStat> objects_;
  std::map<PageId, PageStat> pages_;
  std::map<PageId, std::map<ObjectId, std::uint64_t>> links_;  // occupied bytes
  std::map<ObjectId, std::set<PageId>> object_pages_;          // reverse index
};

}  // namespace cstore
