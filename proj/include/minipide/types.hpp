#ifndef MINIPIDE_TYPES_HPP
#define MINIPIDE_TYPES_HPP

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace minipide
{

using SpanId = std::uint64_t;
using ExecId = std::uint64_t;
using VersionId = std::uint64_t;

/// Half-open interval [begin, end) of character (Unicode scalar value) offsets.
struct Range
{
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - begin; }
  bool empty() const { return begin == end; }
  bool contains(const Range & other) const { return begin <= other.begin && other.end <= end; }
  Range shifted(std::ptrdiff_t delta) const
  {
    return {static_cast<std::size_t>(static_cast<std::ptrdiff_t>(begin) + delta),
            static_cast<std::size_t>(static_cast<std::ptrdiff_t>(end) + delta)};
  }

  auto operator<=>(const Range &) const = default;
};

enum class Severity { writeln, warning, error };

std::string_view to_string(Severity severity);
std::optional<Severity> severity_from_string(std::string_view name);

/// A prover message. Checker results leave `span` unset and carry a range
/// relative to the command text; whoever places the result into a document
/// supplies the span.
struct Message
{
  Severity severity = Severity::writeln;
  std::string text;
  std::optional<SpanId> span;
  std::optional<Range> range;

  bool operator==(const Message &) const = default;
};

class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

}  // namespace minipide

#endif
