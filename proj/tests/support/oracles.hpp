#pragma once

// Independent reference implementations used as test oracles. Each one
// recomputes expected behaviour from first principles with flat data
// structures, deliberately sharing no code with the library paths it checks.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <vector>

#include "clusterstore/dro.hpp"
#include "clusterstore/types.hpp"

namespace cstore::oracle {

// ---- buffer replay -----------------------------------------------------------

struct TraceOp {
  enum Kind { kAccess, kInsert, kEvict, kFlush } kind = kAccess;
  ObjectId oid = kNoObject;    // kAccess
  std::uint64_t size = 0;      // kInsert
};

struct BufferLayout {
  std::uint64_t page_capacity = 0;
  std::size_t frames = 0;
  bool lru_cluster = false;             // false: plain LRU
  std::map<ObjectId, PageId> object_page;
  std::map<PageId, std::uint64_t> page_used;
  std::map<PageId, ClusterId> page_cluster;  // absent entries are singletons
};

struct ReplayOutcome {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::vector<PageId> resident;  // sorted
};

// Straight-line replay of a trace: residency as parallel vectors, victims by
// linear scan. Insert appends to the highest-numbered page when the object
// fits, else opens a new page; inserts dirty their page, accesses never do.
inline ReplayOutcome replay_buffer_trace(BufferLayout layout,
                                         const std::vector<TraceOp>& ops) {
  std::vector<PageId> res_page;
  std::vector<std::uint64_t> res_tick;
  std::vector<bool> res_dirty;
  std::uint64_t tick = 0;
  ReplayOutcome out;
  PageId next_page = 1;
  ObjectId next_oid = 1;
  for (const auto& [oid, page] : layout.object_page) next_oid = std::max(next_oid, oid + 1);
  for (const auto& [page, used] : layout.page_used) next_page = std::max(next_page, page + 1);

  auto find = [&](PageId p) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < res_page.size(); ++i) {
      if (res_page[i] == p) return i;
    }
    return std::nullopt;
  };
  auto cluster_key = [&](PageId p) -> std::uint64_t {
    auto it = layout.page_cluster.find(p);
    return it == layout.page_cluster.end() ? p : (1ull << 48) + it->second;
  };
  auto evict_one = [&]() {
    if (res_page.empty()) return;
    std::size_t victim = 0;
    if (!layout.lru_cluster) {
      for (std::size_t i = 1; i < res_page.size(); ++i) {
        if (res_tick[i] < res_tick[victim]) victim = i;
      }
    } else {
      std::map<std::uint64_t, std::uint64_t> dates;
      for (std::size_t i = 0; i < res_page.size(); ++i) {
        std::uint64_t key = cluster_key(res_page[i]);
        auto [it, fresh] = dates.try_emplace(key, res_tick[i]);
        if (!fresh) it->second = std::max(it->second, res_tick[i]);
      }
      std::uint64_t best_date = UINT64_MAX;
      std::uint64_t best_key = 0;
      for (const auto& [key, date] : dates) {
        if (date < best_date) {
          best_date = date;
          best_key = key;
        }
      }
      std::uint64_t best_tick = UINT64_MAX;
      for (std::size_t i = 0; i < res_page.size(); ++i) {
        if (cluster_key(res_page[i]) == best_key && res_tick[i] < best_tick) {
          best_tick = res_tick[i];
          victim = i;
        }
      }
    }
    if (res_dirty[victim]) ++out.writes;
    res_page.erase(res_page.begin() + victim);
    res_tick.erase(res_tick.begin() + victim);
    res_dirty.erase(res_dirty.begin() + victim);
  };
  auto fetch = [&](PageId p, bool charge_read) {
    auto idx = find(p);
    if (idx) {
      res_tick[*idx] = ++tick;
      return *idx;
    }
    while (res_page.size() >= layout.frames) evict_one();
    if (charge_read) ++out.reads;
    res_page.push_back(p);
    res_tick.push_back(++tick);
    res_dirty.push_back(false);
    return res_page.size() - 1;
  };

  for (const TraceOp& op : ops) {
    switch (op.kind) {
      case TraceOp::kAccess: {
        PageId p = layout.object_page.at(op.oid);
        fetch(p, true);
        break;
      }
      case TraceOp::kInsert: {
        PageId target = kNoPage;
        if (!layout.page_used.empty()) {
          PageId last = layout.page_used.rbegin()->first;
          if (layout.page_used.at(last) + op.size <= layout.page_capacity) target = last;
        }
        std::size_t idx;
        if (target == kNoPage) {
          target = next_page++;
          layout.page_used[target] = 0;
          idx = fetch(target, false);  // fresh page, nothing on disk yet
        } else {
          idx = fetch(target, true);
        }
        layout.page_used[target] += op.size;
        layout.object_page[next_oid++] = target;
        res_dirty[idx] = true;
        res_tick[idx] = ++tick;
        break;
      }
      case TraceOp::kEvict:
        evict_one();
        break;
      case TraceOp::kFlush:
        while (!res_page.empty()) evict_one();
        break;
    }
  }
  out.resident = res_page;
  std::sort(out.resident.begin(), out.resident.end());
  return out;
}

// ---- placement-order enumeration ---------------------------------------------

// Exhaustive variant of the chain-growth rule: every append materialises all
// reference walks up to the pass depth, filters the eligible endpoints and
// picks the minimum (member index, walk length, slot sequence) key. The
// library implementation searches incrementally; results must agree exactly.
inline std::vector<std::vector<ObjectId>> exhaustive_placement_order(
    const std::vector<ObjectId>& sort_order, const ReferenceGraph& graph,
    const FrequencyMap& freq, int max_distance, double max_dissimilarity) {
  std::set<ObjectId> candidates(sort_order.begin(), sort_order.end());
  std::map<ObjectId, ObjectId> next, prev;

  auto walk_chain = [&](ObjectId head) {
    std::vector<ObjectId> chain{head};
    while (next.count(chain.back())) chain.push_back(next.at(chain.back()));
    return chain;
  };

  struct Walk {
    std::size_t member_index;
    int length;
    std::vector<std::size_t> slots;
    ObjectId from;
    ObjectId endpoint;
  };

  for (int depth = 1; depth <= max_distance; ++depth) {
    for (ObjectId start : sort_order) {
      if (prev.count(start)) continue;
      while (true) {
        std::vector<ObjectId> chain = walk_chain(start);
        std::set<ObjectId> in_chain(chain.begin(), chain.end());

        std::vector<Walk> walks;
        for (std::size_t mi = 0; mi < chain.size(); ++mi) {
          // Collect every walk of length 1..depth from this member.
          std::vector<std::pair<ObjectId, std::vector<std::size_t>>> frontier{
              {chain[mi], {}}};
          for (int len = 1; len <= depth; ++len) {
            std::vector<std::pair<ObjectId, std::vector<std::size_t>>> expanded;
            for (const auto& [node, slots] : frontier) {
              auto it = graph.find(node);
              if (it == graph.end()) continue;
              for (std::size_t s = 0; s < it->second.size(); ++s) {
                auto path = slots;
                path.push_back(s);
                walks.push_back({mi, len, path, chain[mi], it->second[s]});
                expanded.emplace_back(it->second[s], std::move(path));
              }
            }
            frontier = std::move(expanded);
          }
        }

        const Walk* best = nullptr;
        for (const Walk& w : walks) {
          if (!candidates.count(w.endpoint) || w.endpoint == start) continue;
          if (prev.count(w.endpoint) || in_chain.count(w.endpoint)) continue;
          if (dissimilarity(freq.at(w.from), freq.at(w.endpoint)) > max_dissimilarity) {
            continue;
          }
          auto key = std::tie(w.member_index, w.length, w.slots);
          if (!best ||
              key < std::tie(best->member_index, best->length, best->slots)) {
            best = &w;
          }
        }
        if (!best) break;
        ObjectId tail = chain.back();
        next[tail] = best->endpoint;
        prev[best->endpoint] = tail;
      }
    }
  }

  std::vector<std::vector<ObjectId>> sub_lists;
  for (ObjectId start : sort_order) {
    if (prev.count(start)) continue;
    sub_lists.push_back(walk_chain(start));
  }
  return sub_lists;
}

// ---- statistics replay ---------------------------------------------------------

struct StatEvent {
  enum Kind { kAccess, kUnload, kDelete, kMove, kPurgeAll, kPurgePages } kind = kAccess;
  ObjectId oid = kNoObject;
  PageId page = kNoPage;
  std::uint64_t size = 0;
  std::vector<std::pair<ObjectId, std::uint64_t>> resident;  // kUnload
  std::set<PageId> pages;                                    // kPurgePages
};

struct NaiveStats {
  std::map<ObjectId, std::pair<std::uint64_t, bool>> objects;  // freq, indicator
  std::map<PageId, std::pair<std::uint64_t, double>> pages;    // nb_load, rate
  std::set<std::pair<PageId, ObjectId>> links;
};

inline NaiveStats replay_stat_events(const std::vector<StatEvent>& events,
                                     std::uint64_t capacity) {
  NaiveStats st;
  auto unlink_object = [&](ObjectId oid) {
    std::vector<std::pair<PageId, ObjectId>> gone;
    for (const auto& link : st.links) {
      if (link.second == oid) gone.push_back(link);
    }
    for (const auto& link : gone) {
      st.links.erase(link);
      bool page_has_links = false;
      for (const auto& other : st.links) {
        if (other.first == link.first) {
          page_has_links = true;
          break;
        }
      }
      if (!page_has_links) st.pages.erase(link.first);
    }
  };

  for (const StatEvent& e : events) {
    switch (e.kind) {
      case StatEvent::kAccess: {
        auto& obj = st.objects[e.oid];
        obj.first += 1;
        obj.second = true;
        st.pages.try_emplace(e.page, std::pair<std::uint64_t, double>{0, 0.0});
        st.links.insert({e.page, e.oid});
        break;
      }
      case StatEvent::kUnload: {
        std::uint64_t used = 0;
        for (const auto& [oid, size] : e.resident) {
          auto it = st.objects.find(oid);
          if (it != st.objects.end() && it->second.second) used += size;
        }
        auto& page = st.pages[e.page];
        page.second = static_cast<double>(used) / static_cast<double>(capacity);
        page.first += 1;
        break;
      }
      case StatEvent::kDelete:
        if (st.objects.erase(e.oid)) unlink_object(e.oid);
        break;
      case StatEvent::kMove: {
        auto it = st.objects.find(e.oid);
        if (it != st.objects.end()) {
          it->second.second = false;
          unlink_object(e.oid);
        }
        break;
      }
      case StatEvent::kPurgeAll:
        st = NaiveStats{};
        break;
      case StatEvent::kPurgePages: {
        for (PageId p : e.pages) {
          std::vector<std::pair<PageId, ObjectId>> gone;
          for (const auto& link : st.links) {
            if (link.first == p) gone.push_back(link);
          }
          for (const auto& link : gone) {
            st.links.erase(link);
            bool linked_elsewhere = false;
            for (const auto& other : st.links) {
              if (other.second == link.second) {
                linked_elsewhere = true;
                break;
              }
            }
            if (!linked_elsewhere) st.objects.erase(link.second);
          }
          st.pages.erase(p);
        }
        break;
      }
    }
  }
  return st;
}

}  // namespace cstore::oracle
