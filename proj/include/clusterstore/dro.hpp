#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "clusterstore/config.hpp"
#include "clusterstore/stats.hpp"
#include "clusterstore/store.hpp"
#include "clusterstore/types.hpp"

namespace cstore {

/// Tuning knobs of the DRO engine. The parameter file uses the conventional
/// short names (MinUR, MinLT, PCRate, MaxD, MaxDR, MaxRR, SUInd).
struct DroParams {
  double min_usage_rate = 0.8;        // MinUR: page selection bar
  double min_load_threshold = 1.0;    // MinLT: page must be unloaded more often
  double page_clustering_rate = 0.05; // PCRate: candidate/used page ratio gate
  int max_distance = 1;               // MaxD: reference path search depth
  double max_dissimilarity = 0.05;    // MaxDR: frequency-gap bar for linking
  double max_resemblance = 0.9;       // MaxRR: skip when layout already matches
  bool statistics_update = true;      // SUInd: purge all stats after clustering

  void validate() const {
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(min_usage_rate) || !in_unit(page_clustering_rate) ||
        !in_unit(max_dissimilarity) || !in_unit(max_resemblance)) {
      throw ConfigError("MinUR, PCRate, MaxDR and MaxRR must lie in [0,1]");
    }
    if (max_distance < 1) throw ConfigError("MaxD must be at least 1");
  }

  static DroParams from_kv(const KeyValueFile& kv) {
    DroParams p;
    p.min_usage_rate = kv.get_double("MinUR", p.min_usage_rate);
    p.min_load_threshold = kv.get_double("MinLT", p.min_load_threshold);
    p.page_clustering_rate = kv.get_double("PCRate", p.page_clustering_rate);
    p.max_distance = static_cast<int>(kv.get_u64("MaxD", p.max_distance));
    p.max_dissimilarity = kv.get_double("MaxDR", p.max_dissimilarity);
    p.max_resemblance = kv.get_double("MaxRR", p.max_resemblance);
    p.statistics_update = kv.get_bool("SUInd", p.statistics_update);
    p.validate();
    return p;
  }

  void write_kv(std::ostream& out) const {
    out << "MinUR=" << format_double(min_usage_rate) << "\n"
        << "MinLT=" << format_double(min_load_threshold) << "\n"
        << "PCRate=" << format_double(page_clustering_rate) << "\n"
        << "MaxD=" << max_distance << "\n"
        << "MaxDR=" << format_double(max_dissimilarity) << "\n"
        << "MaxRR=" << format_double(max_resemblance) << "\n"
        << "SUInd=" << (statistics_update ? "true" : "false") << "\n";
  }
};

using ReferenceGraph = std::map<ObjectId, std::vector<ObjectId>>;
using FrequencyMap = std::map<ObjectId, std::uint64_t>;

/// |af_i - af_j| / max(af_i, af_j); symmetric, in [0,1]. Undefined when both
/// frequencies are zero (tracked objects always have frequency >= 1).
inline double dissimilarity(std::uint64_t af_i, std::uint64_t af_j) {
  std::uint64_t hi = std::max(af_i, af_j);
  if (hi == 0) throw ConfigError("dissimilarity undefined for two zero frequencies");
  std::uint64_t gap = af_i > af_j ? af_i - af_j : af_j - af_i;
  return static_cast<double>(gap) / static_cast<double>(hi);
}

struct ExaminedCouple {
  ObjectId member = kNoObject;
  ObjectId candidate = kNoObject;
  double rate = 0.0;
  bool accepted = false;
};

/// A proposed sequential placement order plus diagnostics: the sub-lists it
/// was concatenated from and every frequency couple the search evaluated.
struct ClusterProposal {
  std::vector<ObjectId> sequence;
  std::vector<std::vector<ObjectId>> sub_lists;
  std::vector<ExaminedCouple> examined;
  double resemblance = 0.0;

  bool examined_couple(ObjectId member, ObjectId candidate) const {
    for (const ExaminedCouple& c : examined) {
      if (c.member == member && c.candidate == candidate) return true;
    }
    return false;
  }
};

struct CandidateSelection {
  std::set<PageId> pages;
  std::set<ObjectId> objects;
  std::size_t used_pages = 0;  // pages carrying statistics
  bool proceed = false;
  bool ratio_gate_failed = false;  // true when only the PCRate test failed
};

/// Selection step: pages below the usage-rate bar that were unloaded often
/// enough, then the tracked objects stored on them. Clustering proceeds only
/// with more than one candidate page and a candidate/used ratio above PCRate.
inline CandidateSelection select_candidates(const StatStore& stats, const Store& store,
                                            const DroParams& params) {
  CandidateSelection sel;
  sel.pages = stats.candidate_pages(params.min_usage_rate, params.min_load_threshold);
  sel.used_pages = stats.page_count();
  for (PageId pid : sel.pages) {
    if (!store.pages().count(pid)) continue;  // page may have emptied since
    for (ObjectId oid : store.page(pid).slots) {
      if (stats.tracks(oid)) sel.objects.insert(oid);
    }
  }
  if (sel.pages.size() <= 1) {
    sel.proceed = false;
    return sel;
  }
  double ratio = static_cast<double>(sel.pages.size()) /
                 static_cast<double>(sel.used_pages);
  sel.proceed = ratio > params.page_clustering_rate;
  sel.ratio_gate_failed = !sel.proceed;
  return sel;
}

/// Candidates by descending access frequency, ties by ascending object id.
inline std::vector<ObjectId> sort_by_frequency(const std::set<ObjectId>& candidates,
                                               const FrequencyMap& freq) {
  std::vector<ObjectId> order(candidates.begin(), candidates.end());
  std::stable_sort(order.begin(), order.end(), [&](ObjectId a, ObjectId b) {
    std::uint64_t fa = freq.count(a) ? freq.at(a) : 0;
    std::uint64_t fb = freq.count(b) ? freq.at(b) : 0;
    if (fa != fb) return fa > fb;
    return a < b;
  });
  return order;
}

namespace detail {

// Chain state of the placement-order construction. Links persist across
// deepening passes; a node with a predecessor is inside some chain.
struct ChainLinks {
  std::map<ObjectId, ObjectId> next;
  std::map<ObjectId, ObjectId> prev;

  bool has_prev(ObjectId o) const { return prev.count(o) != 0; }

  std::vector<ObjectId> walk(ObjectId head) const {
    std::vector<ObjectId> chain{head};
    auto it = next.find(head);
    while (it != next.end()) {
      chain.push_back(it->second);
      it = next.find(it->second);
    }
    return chain;
  }
};

// Enumerates walks of exactly `length` edges from `from` in lexicographic
// slot order, invoking fn(endpoint) until fn returns true (stop signal).
inline bool for_each_endpoint(const ReferenceGraph& graph, ObjectId from,
                              int length, auto&& fn) {
  auto it = graph.find(from);
  if (it == graph.end()) return false;
  for (ObjectId target : it->second) {
    if (length == 1) {
      if (fn(target)) return true;
    } else {
      if (for_each_endpoint(graph, target, length - 1, fn)) return true;
    }
  }
  return false;
}

}  // namespace detail

/// Placement-order construction over the reference graph.
///
/// Runs deepening passes D = 1..MaxD. A pass scans starting objects in sort
/// order, skipping any object that already has a chain predecessor. The
/// current chain grows by appending, at its tail, the first candidate
/// endpoint found by scanning chain members in placement order, path lengths
/// ascending, reference slots in declaration order. An endpoint qualifies
/// when it is a tracked candidate, differs from the starting object, has no
/// predecessor yet, and its frequency gap against the chain member that
/// reached it stays within MaxDR (inclusive). Intermediate nodes of a path
/// may be arbitrary objects, tracked or not; only the endpoint is linked.
/// Appending the head of an earlier chain splices that whole chain in.
/// The proposal concatenates the finished sub-lists in creation order.
inline ClusterProposal build_placement_order(const std::vector<ObjectId>& sort_order,
                                             const ReferenceGraph& graph,
                                             const FrequencyMap& freq,
                                             const DroParams& params) {
  ClusterProposal proposal;
  std::set<ObjectId> candidates(sort_order.begin(), sort_order.end());
  if (candidates.size() != sort_order.size()) {
    throw ProposalError("sort order contains duplicates");
  }
  detail::ChainLinks links;
  std::set<std::pair<ObjectId, ObjectId>> examined_keys;

  auto frequency_of = [&](ObjectId o) -> std::uint64_t {
    auto it = freq.find(o);
    return it == freq.end() ? 0 : it->second;
  };

  for (int depth = 1; depth <= params.max_distance; ++depth) {
    for (ObjectId start : sort_order) {
      if (links.has_prev(start)) continue;
      bool grew = true;
      while (grew) {
        grew = false;
        std::vector<ObjectId> chain = links.walk(start);
        std::set<ObjectId> in_chain(chain.begin(), chain.end());
        for (ObjectId member : chain) {
          ObjectId found = kNoObject;
          for (int length = 1; length <= depth && found == kNoObject; ++length) {
            detail::for_each_endpoint(graph, member, length, [&](ObjectId endpoint) {
              if (!candidates.count(endpoint) || endpoint == start) return false;
              double rate = dissimilarity(frequency_of(member), frequency_of(endpoint));
              bool eligible = rate <= params.max_dissimilarity &&
                              !links.has_prev(endpoint) && !in_chain.count(endpoint);
              if (examined_keys.emplace(member, endpoint).second) {
                proposal.examined.push_back({member, endpoint, rate, eligible});
              }
              if (!eligible) return false;
              found = endpoint;
              return true;
            });
          }
          if (found != kNoObject) {
            ObjectId tail = chain.back();
            links.next[tail] = found;
            links.prev[found] = tail;
            grew = true;
            break;  // re-walk the chain (found may carry its own tail segment)
          }
        }
      }
    }
  }

  // Heads keep their pass-1 scan order, which is the sort order.
  for (ObjectId start : sort_order) {
    if (links.has_prev(start)) continue;
    std::vector<ObjectId> chain = links.walk(start);
    proposal.sequence.insert(proposal.sequence.end(), chain.begin(), chain.end());
    proposal.sub_lists.push_back(std::move(chain));
  }
  return proposal;
}

/// Fraction of proposed objects already in place: the first element always
/// counts, any other element counts when its proposal predecessor sits
/// immediately before it (previous slot of the same page, or the final slot
/// of the page whose id directly precedes the object's page, with the object
/// at slot 0).
inline double resemblance_rate(const std::vector<ObjectId>& sequence, const Store& store) {
  if (sequence.empty()) throw ProposalError("resemblance undefined for empty proposal");
  std::size_t not_moved = 1;
  for (std::size_t i = 1; i < sequence.size(); ++i) {
    ObjectPlacement prev = store.placement_of(sequence[i - 1]);
    ObjectPlacement cur = store.placement_of(sequence[i]);
    bool adjacent = false;
    if (prev.page == cur.page && prev.slot + 1 == cur.slot) {
      adjacent = true;
    } else if (prev.page + 1 == cur.page && cur.slot == 0 &&
               prev.slot + 1 == store.page(prev.page).slots.size()) {
      adjacent = true;
    }
    if (adjacent) ++not_moved;
  }
  return static_cast<double>(not_moved) / static_cast<double>(sequence.size());
}

enum class ClusteringOutcome {
  kAbortedStep1,        // no usable candidate set (fewer than two pages)
  kAbortedGate,         // candidate/used page ratio at or below PCRate
  kSkippedResemblance,  // proposal too close to the current layout
  kApplied
};

inline const char* to_string(ClusteringOutcome o) {
  switch (o) {
    case ClusteringOutcome::kAbortedStep1: return "aborted_step1";
    case ClusteringOutcome::kAbortedGate: return "aborted_gate";
    case ClusteringOutcome::kSkippedResemblance: return "skipped_resemblance";
    case ClusteringOutcome::kApplied: return "applied";
  }
  return "unknown";
}

enum class ClusteringTrigger { kManual, kAutomatic };

struct ClusteringReport {
  ClusteringOutcome outcome = ClusteringOutcome::kAbortedStep1;
  ClusteringTrigger trigger = ClusteringTrigger::kManual;
  std::size_t candidate_pages = 0;
  std::size_t candidate_objects = 0;
  double resemblance = 0.0;
  std::size_t moved = 0;
  IoCounters overhead;
  ClusterProposal proposal;

  void write_csv_row(std::ostream& out) const {
    out << to_string(outcome) << ',' << candidate_pages << ',' << candidate_objects
        << ',' << format_double(resemblance) << ',' << moved << ','
        << overhead.page_reads << ',' << overhead.page_writes << '\n';
  }
};

inline constexpr const char* kClusteringReportHeader =
    "outcome,cand_pages,cand_objects,resemblance,moved,overhead_reads,overhead_writes";

/// Applies the proposal through the store when the resemblance rate is
/// strictly below MaxRR; otherwise leaves the store untouched.
inline bool apply_proposal(const ClusterProposal& proposal, Store& store,
                           const DroParams& params, RelocationReport& out) {
  if (proposal.resemblance >= params.max_resemblance) return false;
  out = store.rewrite_placement(proposal.sequence, store.allocate_cluster_id());
  return true;
}

/// Post-clustering statistics update: everything when SUInd is set, otherwise
/// only the pages touched by the relocation.
inline void update_statistics(StatStore& stats, const DroParams& params,
                              const std::set<PageId>& touched) {
  if (params.statistics_update) {
    stats.purge_all();
  } else {
    stats.purge_pages(touched);
  }
}

/// One full DRO clustering run: flush so page statistics are final, select
/// candidates, build the placement order, gate on resemblance, relocate, and
/// update statistics. Overhead counts every I/O between entry and exit.
inline ClusteringReport run_dro(Store& store, StatStore& stats, const DroParams& params,
                                ClusteringTrigger trigger = ClusteringTrigger::kManual) {
  params.validate();
  ClusteringReport report;
  report.trigger = trigger;
  IoCounters before = store.io_report();
  store.flush();

  CandidateSelection sel = select_candidates(stats, store, params);
  report.candidate_pages = sel.pages.size();
  report.candidate_objects = sel.objects.size();
  if (!sel.proceed || sel.objects.empty()) {
    report.outcome = sel.ratio_gate_failed ? ClusteringOutcome::kAbortedGate
                                           : ClusteringOutcome::kAbortedStep1;
    report.overhead = store.io_report() - before;
    return report;
  }

  FrequencyMap freq;
  for (ObjectId oid : sel.objects) freq[oid] = stats.access_frequency(oid);
  std::vector<ObjectId> order = sort_by_frequency(sel.objects, freq);
  ReferenceGraph graph = store.reference_graph();
  report.proposal = build_placement_order(order, graph, freq, params);
  report.proposal.resemblance = resemblance_rate(report.proposal.sequence, store);
  report.resemblance = report.proposal.resemblance;

  RelocationReport relocation;
  if (!apply_proposal(report.proposal, store, params, relocation)) {
    report.outcome = ClusteringOutcome::kSkippedResemblance;
    report.overhead = store.io_report() - before;
    return report;
  }
  update_statistics(stats, params, relocation.touched_pages);
  report.outcome = ClusteringOutcome::kApplied;
  report.moved = relocation.moved.size();
  report.overhead = store.io_report() - before;
  return report;
}

}  // namespace cstore
