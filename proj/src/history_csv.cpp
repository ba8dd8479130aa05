#include <charconv>
#include <string>

#include "pafit/error.hpp"
#include "pafit/file_util.hpp"
#include "pafit/graph_core.hpp"

namespace pafit {

namespace {

constexpr std::string_view kHeader = "node,target,membership,target_membership";

template <typename T>
T parse_uint(std::string_view field, std::size_t line_no, const char* column) {
  T value{};
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end || field.empty())
    fail(ErrorCode::parse, "line " + std::to_string(line_no) + ": bad " + column + " '" + std::string(field) + "'");
  return value;
}

}  // namespace

std::string history_to_csv(const GrowthHistory& history) {
  std::string out;
  out.reserve(32 * (history.size() + 1));
  out += kHeader;
  out += '\n';
  for (const auto& e : history.events()) {
    out += std::to_string(e.node);
    out += ',';
    out += std::to_string(e.target);
    out += ',';
    if (e.membership) out += std::to_string(*e.membership);
    out += ',';
    if (e.target_membership) out += std::to_string(*e.target_membership);
    out += '\n';
  }
  return out;
}

GrowthHistory history_from_csv(const std::string& text) {
  std::vector<AttachEvent> events;
  Community max_label = 0;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool header_seen = false;

  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kHeader) fail(ErrorCode::parse, "line 1: expected header '" + std::string(kHeader) + "'");
      header_seen = true;
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != 4)
      fail(ErrorCode::parse, "line " + std::to_string(line_no) + ": expected 4 fields, got " + std::to_string(fields.size()));

    AttachEvent e;
    e.node = parse_uint<NodeIndex>(fields[0], line_no, "node");
    e.target = parse_uint<NodeIndex>(fields[1], line_no, "target");
    if (!fields[2].empty()) e.membership = parse_uint<Community>(fields[2], line_no, "membership");
    if (!fields[3].empty()) e.target_membership = parse_uint<Community>(fields[3], line_no, "target_membership");
    if (e.membership) max_label = std::max(max_label, *e.membership);
    if (e.target_membership) max_label = std::max(max_label, *e.target_membership);
    events.push_back(e);
  }
  if (!header_seen) fail(ErrorCode::parse, "empty history file");
  return GrowthHistory(std::move(events), std::max<Community>(max_label, 1));
}

void write_history_csv(const GrowthHistory& history, const std::string& path) {
  write_file_atomic(path, history_to_csv(history));
}

GrowthHistory read_history_csv(const std::string& path) { return history_from_csv(read_file(path)); }

}  // namespace pafit
