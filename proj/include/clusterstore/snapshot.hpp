#pragma once

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "clusterstore/store.hpp"
#include "clusterstore/types.hpp"

namespace cstore {

// Snapshot file, version 1. Line oriented:
//   CSTORE v1 page_capacity=<n>
//   O <oid> <class_id> <size> <page_id> <slot> [ref1,ref2,...]
// Objects appear in (page_id, slot) order; a snapshot->restore->snapshot
// round trip is byte identical.

inline void write_snapshot(const Store& store, std::ostream& out) {
  out << "CSTORE v1 page_capacity=" << store.config().page_capacity << "\n";
  for (const auto& [pid, page] : store.pages()) {
    for (std::size_t slot = 0; slot < page.slots.size(); ++slot) {
      const StoredObject& obj = store.object(page.slots[slot]);
      out << "O " << obj.oid << ' ' << obj.class_id << ' ' << obj.size << ' '
          << pid << ' ' << slot << " [";
      for (std::size_t i = 0; i < obj.refs.size(); ++i) {
        if (i) out << ',';
        out << obj.refs[i];
      }
      out << "]\n";
    }
  }
}

inline void write_snapshot_file(const Store& store, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write snapshot file: " + path);
  write_snapshot(store, out);
}

namespace detail {

inline std::uint64_t parse_u64_field(std::string_view token, const std::string& where) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || p != token.data() + token.size()) {
    throw ParseError(where + ": expected integer, got '" + std::string(token) + "'");
  }
  return v;
}

}  // namespace detail

/// Parses a snapshot. Page capacity comes from the header; buffer geometry
/// and policy come from `buffer`. Throws ParseError on any defect; no partial
/// store is ever returned.
inline Store restore_snapshot(std::istream& in, const StoreConfig& buffer,
                              const std::string& name = "<snapshot>") {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(name + ":1: empty snapshot file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  constexpr std::string_view kHeader = "CSTORE v1 page_capacity=";
  if (line.rfind(kHeader, 0) != 0) {
    throw ParseError(name + ":1: bad header '" + line + "'");
  }
  std::uint64_t capacity =
      detail::parse_u64_field(std::string_view(line).substr(kHeader.size()),
                              name + ":1 (page_capacity)");
  if (capacity == 0) throw ParseError(name + ":1: page_capacity must be positive");

  std::vector<LayoutEntry> entries;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    std::istringstream fields(line);
    std::string tag, refs_token;
    LayoutEntry e;
    fields >> tag;
    if (tag != "O") throw ParseError(where + ": unknown record '" + tag + "'");
    std::string oid, cls, size, page, slot;
    if (!(fields >> oid >> cls >> size >> page >> slot >> refs_token)) {
      throw ParseError(where + ": truncated object record");
    }
    std::string extra;
    if (fields >> extra) throw ParseError(where + ": trailing data '" + extra + "'");
    e.oid = detail::parse_u64_field(oid, where);
    e.class_id = static_cast<std::uint32_t>(detail::parse_u64_field(cls, where));
    e.size = detail::parse_u64_field(size, where);
    e.page = detail::parse_u64_field(page, where);
    e.slot = static_cast<std::size_t>(detail::parse_u64_field(slot, where));
    if (refs_token.size() < 2 || refs_token.front() != '[' || refs_token.back() != ']') {
      throw ParseError(where + ": bad reference list '" + refs_token + "'");
    }
    std::string_view body(refs_token);
    body = body.substr(1, body.size() - 2);
    while (!body.empty()) {
      auto comma = body.find(',');
      std::string_view item = body.substr(0, comma);
      if (item.empty()) throw ParseError(where + ": empty reference entry");
      e.refs.push_back(detail::parse_u64_field(item, where));
      body = (comma == std::string_view::npos) ? std::string_view{} : body.substr(comma + 1);
    }
    entries.push_back(std::move(e));
  }

  StoreConfig cfg = buffer;
  cfg.page_capacity = capacity;
  try {
    return Store::from_layout(cfg, entries);
  } catch (const ParseError& err) {
    throw ParseError(name + ": " + err.what());
  }
}

inline Store restore_snapshot_file(const std::string& path, const StoreConfig& buffer) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open snapshot file: " + path);
  return restore_snapshot(in, buffer, path);
}

}  // namespace cstore
