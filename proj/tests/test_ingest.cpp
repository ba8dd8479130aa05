#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include "pafit/error.hpp"
#include "pafit/file_util.hpp"
#include "pafit/ingest.hpp"
#include "pafit/pa_sim.hpp"

using namespace pafit;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::invalid_argument;
}

RawEdgeList fixture() { return read_edges(PAFIT_FIXTURE_DIR "/transactions.csv"); }

NodeIndex node_of(const BuiltHistory& b, const std::string& id) {
  for (std::size_t k = 0; k < b.ids.size(); ++k)
    if (b.ids[k] == id) return k + 1;
  FAIL("unknown id " << id);
  return 0;
}

}  // namespace

TEST_CASE("parsing sorts by timestamp and counts out-of-order rows") {
  const auto e = parse_edges("x,y,3\ny,z,1\nz,w,2\n");
  REQUIRE(e.records.size() == 3);
  CHECK(e.records[0].receiver == "y");
  CHECK(e.records[2].receiver == "x");
  CHECK(e.reordered == 1);
  // Stable on ties.
  const auto t = parse_edges("receiver,sender,timestamp\nb,a,5\nc,a,5\n");
  CHECK(t.records[0].receiver == "b");
  CHECK(t.records[1].receiver == "c");
}

TEST_CASE("parse errors name the line") {
  try {
    parse_edges("receiver,sender,timestamp\na,b,1\na,b\n");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK(code_of([] { parse_edges("a,b,x\n"); }) == ErrorCode::parse);
  CHECK(code_of([] { parse_edges("a,,1\n"); }) == ErrorCode::parse);
  CHECK(code_of([] { parse_edges("receiver,sender,timestamp\n"); }) == ErrorCode::empty_data);
  CHECK(code_of([] { read_edges("/nonexistent/file.csv"); }) == ErrorCode::io);
}

TEST_CASE("blocklist removes records by id prefix") {
  std::size_t removed = 0;
  const auto e = filter_addresses(fixture(), {"1Dice"}, &removed);
  CHECK(removed == 2);
  CHECK(e.records.size() == 9);
  CHECK(e.reordered == 1);
}

TEST_CASE("transaction records map to attachment events") {
  std::size_t removed = 0;
  const auto e = filter_addresses(fixture(), {"1Dice"}, &removed);
  const auto b = build_history(e, 100, LabelingRule{0.25});
  const auto& r = b.report;
  CHECK(r.records_available == 9);
  CHECK(r.records_used == 9);
  CHECK(r.nodes == 8);
  CHECK(r.seeded_self_loops == 2);
  CHECK(r.dropped_existing_pair == 2);
  CHECK(r.dropped_self_reference == 1);
  CHECK(r.reordered == 1);
  CHECK_FALSE(r.notices.empty());  // n_limit beyond the available records
  CHECK(b.ids == std::vector<std::string>{"B", "A", "C", "D", "E", "F", "H", "I"});

  const auto& h = b.history;
  CHECK(h.size() == 8);
  CHECK(h.event(1).self_loop());
  CHECK(h.event(2).target == node_of(b, "B"));
  CHECK(h.event(3).target == node_of(b, "A"));
  CHECK(h.event(4).self_loop());
  CHECK(h.event(5).target == node_of(b, "D"));
  CHECK(h.event(6).self_loop());
  CHECK(h.event(7).target == node_of(b, "B"));
  CHECK(h.event(8).target == node_of(b, "A"));

  // Activity: A 4, C 3, then B, D, F with 2 each.
  CHECK(r.super_nodes == 2);
  CHECK(*h.event(node_of(b, "A")).membership == 1);
  CHECK(*h.event(node_of(b, "C")).membership == 1);
  CHECK(*h.event(node_of(b, "B")).membership == 2);
  CHECK(*h.event(3).target_membership == 1);
}

TEST_CASE("at least one super node; ties broken by id") {
  const auto e = filter_addresses(fixture(), {"1Dice"});
  const auto b = build_history(e, 100, LabelingRule{});
  CHECK(b.report.super_nodes == 1);
  CHECK(*b.history.event(node_of(b, "A")).membership == 1);
  // Three ids with activity 2 (B, D, F): the smallest ids win the tie.
  const auto c = build_history(e, 100, LabelingRule{0.5});
  CHECK(c.report.super_nodes == 4);
  CHECK(*c.history.event(node_of(c, "B")).membership == 1);
  CHECK(*c.history.event(node_of(c, "D")).membership == 1);
  CHECK(*c.history.event(node_of(c, "F")).membership == 2);
}

TEST_CASE("the record window limits the history") {
  const auto b = build_history(fixture(), 3, LabelingRule{});
  CHECK(b.report.records_used == 3);
  CHECK(b.report.nodes == 4);  // A,B seeds two nodes; C; 1DiceX
  CHECK(b.report.notices.empty());
  const auto all = build_history(fixture(), 1000, LabelingRule{});
  CHECK(all.report.nodes == 11);
  CHECK(all.report.seeded_self_loops == 3);
}

TEST_CASE("labels file overrides the activity rule") {
  const auto e = filter_addresses(fixture(), {"1Dice"});
  const auto labels = parse_labels(read_file(PAFIT_FIXTURE_DIR "/labels.csv"));
  const auto b = build_history(e, 100, LabelingRule{}, &labels);
  CHECK(b.history.num_communities() == 3);
  CHECK(*b.history.event(node_of(b, "D")).membership == 3);
  CHECK(b.report.super_nodes == 3);
  auto missing = labels;
  missing.erase("I");
  CHECK(code_of([&] { build_history(e, 100, LabelingRule{}, &missing); }) == ErrorCode::labeling);
  CHECK(code_of([] { parse_labels("id,community\nA,0\n"); }) == ErrorCode::parse);
}

TEST_CASE("invalid ingestion arguments") {
  CHECK(code_of([] { build_history(fixture(), 10, LabelingRule{1.5}); }) == ErrorCode::invalid_argument);
  CHECK(code_of([] { build_history(fixture(), 10, LabelingRule{0.0}); }) == ErrorCode::invalid_argument);
  CHECK(code_of([] { build_history(fixture(), 0, LabelingRule{}); }) == ErrorCode::invalid_argument);
  CHECK(code_of([] { build_history(RawEdgeList{}, 10, LabelingRule{}); }) == ErrorCode::empty_data);
}

TEST_CASE("exported transactions ingest back to the same history") {
  const auto h = simulate_hpam(500, HpamParams({0.3, 0.7}, {1, 0.5, 0.5, 1.5}), 6);
  const auto labels = parse_labels(export_labels(h));
  const auto b = build_history(parse_edges(export_transactions(h)), 500, LabelingRule{}, &labels);
  CHECK(b.history == h);
  CHECK(b.report.dropped_existing_pair == 0);
  CHECK(b.report.seeded_self_loops == 0);
  const auto plain = simulate_bo(300, 0.7, 2);
  const auto u = build_history(parse_edges(export_transactions(plain)), 300, LabelingRule{});
  CHECK(u.history.without_labels() == plain);
  CHECK(code_of([&] { export_labels(plain); }) == ErrorCode::labeling);
}

TEST_CASE("report JSON carries the drop counts") {
  const auto b = build_history(filter_addresses(fixture(), {"1Dice"}), 100, LabelingRule{});
  const auto j = nlohmann::json::parse(ingest_report_json(b.report));
  CHECK(j.at("dropped_existing_pair") == 2);
  CHECK(j.at("reordered") == 1);
  CHECK(j.contains("dropped_blocked"));
  CHECK(j.at("nodes") == 8);
}
