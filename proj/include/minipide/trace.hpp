#ifndef MINIPIDE_TRACE_HPP
#define MINIPIDE_TRACE_HPP

#include <optional>
#include <string>

#include "minipide/scheduler.hpp"

namespace minipide
{

/// Deterministic text rendering of a quiescent assignment: nodes sorted by
/// path, spans in order, all positions absolute. Ids never appear, so
/// two sessions reaching the same text print the same trace.
std::string canonical_trace(const SchedulerSnapshot & snapshot);

/// Absolute offset of a definition site within its node, if the span still
/// exists in `version`.
std::optional<std::size_t> site_offset(const DocumentVersion & version, const DefSite & site);

}  // namespace minipide

#endif
