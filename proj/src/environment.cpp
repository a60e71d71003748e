#include "minipide/environment.hpp"

#include <algorithm>

namespace minipide
{

std::string_view to_string(Type type) { return type == Type::integer ? "int" : "bool"; }

std::string format_value(const Value & value)
{
  if (const auto * b = std::get_if<bool>(&value)) return *b ? "true" : "false";
  return std::to_string(std::get<std::int64_t>(value));
}

const Definition * Environment::find(std::string_view name) const
{
  const auto it = std::find_if(defs_.begin(), defs_.end(), [&](const Definition & d) { return d.name == name; });
  return it == defs_.end() ? nullptr : &*it;
}

void Environment::define(Definition def)
{
  std::erase_if(defs_, [&](const Definition & d) { return d.name == def.name; });
  defs_.push_back(std::move(def));
}

Environment Environment::resolved(const NodeName & node, SpanId span) const
{
  Environment out = *this;
  for (auto & d : out.defs_) {
    if (!d.site.resolved()) {
      d.site.node = node;
      d.site.span = span;
    }
  }
  return out;
}

Environment Environment::merged(const Environment & other) const
{
  Environment out = *this;
  for (const auto & d : other.defs_) out.define(d);
  return out;
}

std::string Environment::canonical() const
{
  std::string out;
  for (const auto & d : defs_) {
    out += d.name;
    out += ':';
    out += to_string(d.type);
    out += ':';
    out += format_value(d.value);
    out += '@';
    out += d.site.node.path();
    out += '#';
    out += d.site.span ? std::to_string(*d.site.span) : std::string("?");
    out += '+';
    out += std::to_string(d.site.offset);
    out += ';';
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view data)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t Environment::hash() const { return fnv1a64(canonical()); }

}  // namespace minipide
