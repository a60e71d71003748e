#include "minipide/trace.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

namespace minipide
{
namespace
{

std::string quoted(const std::string & text) { return nlohmann::json(text).dump(); }

std::string range_text(Range r) { return std::to_string(r.begin) + ".." + std::to_string(r.end); }

void print_message(std::ostringstream & out, const Message & m, std::size_t base)
{
  out << "    " << to_string(m.severity) << ' ';
  if (m.range) {
    out << range_text(m.range->shifted(static_cast<std::ptrdiff_t>(base)));
  } else {
    out << '-';
  }
  out << ' ' << quoted(m.text) << '\n';
}

}  // namespace

std::optional<std::size_t> site_offset(const DocumentVersion & version, const DefSite & site)
{
  if (!site.span) return std::nullopt;
  const NodeState * node = version.node(site.node);
  if (!node) return std::nullopt;
  const CommandSpan * span = node->find_span(*site.span);
  if (!span) return std::nullopt;
  return span->range.begin + site.offset;
}

std::string canonical_trace(const SchedulerSnapshot & snapshot)
{
  std::ostringstream out;
  const auto & version = snapshot.assignment.version;
  if (!version) return {};

  for (const auto & [name, state] : version->nodes) {
    out << "node " << name.path() << '\n';
    for (const auto & m : state->parse_issues) print_message(out, m, 0);

    const NodeAssignment * na = snapshot.assignment.find(name);
    for (std::size_t i = 0; i < state->spans.size(); ++i) {
      const CommandSpan & span = state->spans[i];
      const ExecutionEntry * entry = nullptr;
      if (na && i < na->execs.size()) {
        if (auto it = snapshot.entries.find(na->execs[i]); it != snapshot.entries.end()) entry = &it->second;
      }
      out << "  " << span.keyword << ' ' << range_text(span.range) << ' '
          << (entry ? to_string(entry->status) : std::string_view("missing")) << '\n';
      if (!entry || !entry->result) continue;

      const std::size_t base = span.range.begin;
      for (const auto & m : entry->result->messages) print_message(out, m, base);
      entry->result->markup.for_each([&](const MarkupNode & node, std::size_t depth) {
        out << "    " << std::string(depth * 2, ' ') << range_text(node.range.shifted(static_cast<std::ptrdiff_t>(base)));
        for (const auto & label : node.labels) {
          out << ' ' << to_string(label.kind) << '=' << quoted(label.text);
          if (label.target) {
            const auto at = site_offset(*version, *label.target);
            out << "->" << label.target->node.path() << '@' << (at ? std::to_string(*at) : std::string("?"));
          }
        }
        out << '\n';
      });
    }
  }
  return out.str();
}

}  // namespace minipide
