#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cstore {

using ObjectId = std::uint64_t;
using PageId = std::uint64_t;
using ClusterId = std::uint64_t;

inline constexpr ObjectId kNoObject = 0;
inline constexpr PageId kNoPage = 0;
inline constexpr ClusterId kNoCluster = 0;

/// Invalid configuration values (zero capacity, bad parameter ranges, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lookup of an object, page or file that does not exist.
class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed placement proposal (duplicates, unknown objects).
class ProposalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed snapshot or configuration file; message carries line info.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Object larger than a page; objects never span pages.
class OversizeObjectError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact tallies of simulated page transfers.
struct IoCounters {
  std::uint64_t page_reads = 0;
  std::uint64_t page_writes = 0;

  std::uint64_t total() const { return page_reads + page_writes; }

  IoCounters operator-(const IoCounters& rhs) const {
    return {page_reads - rhs.page_reads, page_writes - rhs.page_writes};
  }
  IoCounters& operator+=(const IoCounters& rhs) {
    page_reads += rhs.page_reads;
    page_writes += rhs.page_writes;
    return *this;
  }
  bool operator==(const IoCounters&) const = default;
};

enum class ReplacementPolicy {
  kLru,      // evict the least recently used page
  kLruC      // evict from the least recently used cluster
};

struct StoreConfig {
  std::uint64_t page_capacity = 4096;
  std::size_t buffer_frames = 8;
  ReplacementPolicy policy = ReplacementPolicy::kLru;
  bool cluster_prefetch = false;
};

struct StoredObject {
  ObjectId oid = kNoObject;
  std::uint32_t class_id = 0;
  std::uint64_t size = 0;
  std::vector<ObjectId> refs;  // slot order is meaningful for traversals
};

struct Page {
  PageId id = kNoPage;
  std::vector<ObjectId> slots;
  std::uint64_t used_bytes = 0;
};

struct ObjectPlacement {
  PageId page = kNoPage;
  std::size_t slot = 0;

  bool operator==(const ObjectPlacement&) const = default;
};

}  // namespace cstore
