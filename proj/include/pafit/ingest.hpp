#pragma once

// Builds a labeled growth history from a timestamped transaction list
// (`receiver,sender,timestamp`), labeling the most active ids as community 1.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pafit/graph_core.hpp"

namespace pafit {

struct EdgeRecord {
  std::string receiver;
  std::string sender;
  std::int64_t timestamp = 0;
};

struct RawEdgeList {
  std::vector<EdgeRecord> records;  // stably sorted by timestamp
  std::size_t reordered = 0;        // records that arrived earlier than their predecessor
};

/// Parses `receiver,sender,timestamp` rows (header line optional) and sorts
/// them stably by timestamp.
RawEdgeList parse_edges(const std::string& text);
RawEdgeList read_edges(const std::string& path);

/// Drops records where either endpoint starts with a blocked prefix.
RawEdgeList filter_addresses(const RawEdgeList& edges, const std::vector<std::string>& prefix_blocklist,
                             std::size_t* removed = nullptr);

struct LabelingRule {
  double top_fraction = 0.05;  // share of nodes labeled as super nodes (community 1)
  void validate() const;
};

struct IngestReport {
  std::size_t records_available = 0;
  std::size_t records_used = 0;
  std::size_t dropped_existing_pair = 0;   // both endpoints already present
  std::size_t dropped_self_reference = 0;  // self-referential record of an existing id
  std::size_t dropped_blocked = 0;
  std::size_t reordered = 0;
  std::size_t seeded_self_loops = 0;  // both endpoints new: sender enters as a self-loop
  std::size_t nodes = 0;
  std::size_t super_nodes = 0;
  std::vector<std::string> notices;
};

struct BuiltHistory {
  GrowthHistory history;
  std::vector<std::string> ids;  // ids[k-1] is node k
  IngestReport report;
};

/// Maps the first n_limit records to a growth history:
///   * a record with one new endpoint attaches the new id to the existing one;
///   * a record with two new ids adds the sender as a self-loop node, then
///     attaches the receiver to it;
///   * a self-referential record of a new id is a self-loop;
///   * records between existing ids are dropped and counted.
/// Without `labels`, the max(1, floor(q N)) ids with the most transactions in
/// the window form community 1 (ties by id) and the rest community 2. With
/// `labels`, memberships come from the map (every id must be present).
BuiltHistory build_history(const RawEdgeList& edges, std::size_t n_limit, const LabelingRule& rule,
                           const std::map<std::string, Community>* labels = nullptr);

/// Transaction form of a history: node k is id "n<k>", event k has timestamp k,
/// a self-loop is a self-referential record, and k -> t is (receiver n<k>, sender n<t>).
std::string export_transactions(const GrowthHistory& history);
/// `id,community` rows for the ids of export_transactions (labeled histories only).
std::string export_labels(const GrowthHistory& history);
std::map<std::string, Community> parse_labels(const std::string& text);

/// {dropped_existing_pair, dropped_blocked, reordered, ...}
std::string ingest_report_json(const IngestReport& report);

}  // namespace pafit
