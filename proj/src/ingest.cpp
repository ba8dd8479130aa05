#include "pafit/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "pafit/error.hpp"
#include "pafit/file_util.hpp"

namespace pafit {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

RawEdgeList parse_edges(const std::string& text) {
  RawEdgeList out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    if (line_no == 1 && body == "receiver,sender,timestamp") continue;
    const auto cells = split_csv_line(body);
    const std::string where = "line " + std::to_string(line_no) + ": ";
    require(cells.size() == 3, ErrorCode::parse,
            where + "expected receiver,sender,timestamp but found " + std::to_string(cells.size()) + " fields");
    EdgeRecord r;
    r.receiver = std::string(trim(cells[0]));
    r.sender = std::string(trim(cells[1]));
    require(!r.receiver.empty() && !r.sender.empty(), ErrorCode::parse, where + "empty id");
    const auto ts = trim(cells[2]);
    auto [p, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), r.timestamp);
    require(ec == std::errc() && p == ts.data() + ts.size(), ErrorCode::parse,
            where + "timestamp must be an integer number of seconds");
    if (!out.records.empty() && r.timestamp < out.records.back().timestamp) ++out.reordered;
    out.records.push_back(std::move(r));
  }
  require(!out.records.empty(), ErrorCode::empty_data, "no transaction records");
  std::stable_sort(out.records.begin(), out.records.end(),
                   [](const EdgeRecord& a, const EdgeRecord& b) { return a.timestamp < b.timestamp; });
  return out;
}

RawEdgeList read_edges(const std::string& path) { return parse_edges(read_file(path)); }

RawEdgeList filter_addresses(const RawEdgeList& edges, const std::vector<std::string>& prefix_blocklist,
                             std::size_t* removed) {
  auto blocked = [&](const std::string& id) {
    return std::any_of(prefix_blocklist.begin(), prefix_blocklist.end(),
                       [&](const std::string& p) { return !p.empty() && id.rfind(p, 0) == 0; });
  };
  RawEdgeList out;
  out.reordered = edges.reordered;
  for (const auto& r : edges.records)
    if (!blocked(r.receiver) && !blocked(r.sender)) out.records.push_back(r);
  if (removed) *removed = edges.records.size() - out.records.size();
  return out;
}

void LabelingRule::validate() const {
  require(top_fraction > 0.0 && top_fraction < 1.0, ErrorCode::invalid_argument, "top fraction must lie in (0, 1)");
}

BuiltHistory build_history(const RawEdgeList& edges, std::size_t n_limit, const LabelingRule& rule,
                           const std::map<std::string, Community>* labels) {
  if (!labels) rule.validate();
  require(!edges.records.empty(), ErrorCode::empty_data, "no transaction records to build a history from");
  require(n_limit >= 1, ErrorCode::invalid_argument, "n_limit must be positive");

  BuiltHistory out;
  IngestReport& rep = out.report;
  rep.records_available = edges.records.size();
  rep.reordered = edges.reordered;
  rep.records_used = std::min(n_limit, edges.records.size());
  if (n_limit > edges.records.size())
    rep.notices.push_back("n_limit " + std::to_string(n_limit) + " exceeds the " +
                          std::to_string(edges.records.size()) + " available records; using all");

  std::unordered_map<std::string, NodeIndex> index;
  std::unordered_map<std::string, std::size_t> activity;
  std::vector<std::pair<NodeIndex, NodeIndex>> attach;  // (node, target)
  auto add_node = [&](const std::string& id, NodeIndex target_or_self) {
    const NodeIndex k = out.ids.size() + 1;
    index.emplace(id, k);
    out.ids.push_back(id);
    attach.emplace_back(k, target_or_self == 0 ? k : target_or_self);
    return k;
  };

  for (std::size_t i = 0; i < rep.records_used; ++i) {
    const auto& r = edges.records[i];
    ++activity[r.receiver];
    if (r.sender != r.receiver) ++activity[r.sender];
    const auto rit = index.find(r.receiver);
    const auto sit = index.find(r.sender);
    const bool rnew = rit == index.end(), snew = sit == index.end();
    if (r.receiver == r.sender) {
      if (rnew)
        add_node(r.receiver, 0);
      else
        ++rep.dropped_self_reference;
    } else if (rnew && snew) {
      const NodeIndex s = add_node(r.sender, 0);
      ++rep.seeded_self_loops;
      add_node(r.receiver, s);
    } else if (rnew) {
      add_node(r.receiver, sit->second);
    } else if (snew) {
      add_node(r.sender, rit->second);
    } else {
      ++rep.dropped_existing_pair;
    }
  }
  rep.nodes = out.ids.size();

  std::vector<Community> membership(rep.nodes, 2);
  Community K = 2;
  if (labels) {
    K = 1;
    for (std::size_t v = 0; v < rep.nodes; ++v) {
      const auto it = labels->find(out.ids[v]);
      require(it != labels->end(), ErrorCode::labeling, "no label for id " + out.ids[v]);
      require(it->second >= 1, ErrorCode::labeling, "labels must be positive");
      membership[v] = it->second;
      K = std::max(K, it->second);
    }
    rep.super_nodes = static_cast<std::size_t>(std::count(membership.begin(), membership.end(), Community{1}));
  } else {
    std::vector<std::size_t> order(rep.nodes);
    for (std::size_t v = 0; v < rep.nodes; ++v) order[v] = v;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const auto ca = activity.at(out.ids[a]), cb = activity.at(out.ids[b]);
      return ca != cb ? ca > cb : out.ids[a] < out.ids[b];
    });
    const auto cut = static_cast<std::size_t>(std::floor(rule.top_fraction * static_cast<double>(rep.nodes)));
    rep.super_nodes = std::min(rep.nodes, std::max<std::size_t>(1, cut));
    for (std::size_t i = 0; i < rep.super_nodes; ++i) membership[order[i]] = 1;
  }

  std::vector<AttachEvent> events;
  events.reserve(attach.size());
  for (const auto& [node, target] : attach)
    events.push_back(AttachEvent{node, target, membership[node - 1], membership[target - 1]});
  out.history = GrowthHistory(std::move(events), K);
  return out;
}

std::string export_transactions(const GrowthHistory& history) {
  std::string out = "receiver,sender,timestamp\n";
  for (const auto& e : history.events())
    out += "n" + std::to_string(e.node) + ",n" + std::to_string(e.target) + "," + std::to_string(e.node) + "\n";
  return out;
}

std::string export_labels(const GrowthHistory& history) {
  require(history.labeled(), ErrorCode::labeling, "history has no memberships to export");
  std::string out = "id,community\n";
  for (const auto& e : history.events()) out += "n" + std::to_string(e.node) + "," + std::to_string(*e.membership) + "\n";
  return out;
}

std::map<std::string, Community> parse_labels(const std::string& text) {
  std::map<std::string, Community> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || (line_no == 1 && body == "id,community")) continue;
    const auto cells = split_csv_line(body);
    const std::string where = "line " + std::to_string(line_no) + ": ";
    require(cells.size() == 2, ErrorCode::parse, where + "expected id,community");
    Community c = 0;
    const auto v = trim(cells[1]);
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), c);
    require(ec == std::errc() && p == v.data() + v.size() && c >= 1, ErrorCode::parse,
            where + "community must be a positive integer");
    out[std::string(trim(cells[0]))] = c;
  }
  require(!out.empty(), ErrorCode::empty_data, "no labels");
  return out;
}

std::string ingest_report_json(const IngestReport& r) {
  nlohmann::json j = {{"dropped_existing_pair", r.dropped_existing_pair},
                      {"dropped_blocked", r.dropped_blocked},
                      {"reordered", r.reordered},
                      {"dropped_self_reference", r.dropped_self_reference},
                      {"seeded_self_loops", r.seeded_self_loops},
                      {"records_available", r.records_available},
                      {"records_used", r.records_used},
                      {"nodes", r.nodes},
                      {"super_nodes", r.super_nodes},
                      {"notices", r.notices}};
  return j.dump(2);
}

}  // namespace pafit
