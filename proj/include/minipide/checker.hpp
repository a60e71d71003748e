#ifndef MINIPIDE_CHECKER_HPP
#define MINIPIDE_CHECKER_HPP

#include <chrono>
#include <optional>
#include <span>
#include <stop_token>
#include <vector>

#include "minipide/document.hpp"
#include "minipide/environment.hpp"
#include "minipide/markup.hpp"
#include "minipide/outer_syntax.hpp"

namespace minipide
{

struct CheckResult
{
  enum class Status { finished, failed };

  Status status = Status::finished;
  std::vector<Message> messages;  // ranges relative to the command text
  MarkupTree markup;              // ranges relative to the command text
  Environment env_out;            // equals the input environment when failed

  bool operator==(const CheckResult &) const = default;
};

std::string_view to_string(CheckResult::Status status);

/// Checks one command. Depends only on span.text and env_in. Returns nullopt
/// only when `stop` fired while the command was suspended (sleep).
std::optional<CheckResult> check_command(const CommandSpan & span, const Environment & env_in,
                                         std::stop_token stop = {});

std::optional<CheckResult> check_text(std::string_view command_text, const Environment & env_in,
                                      std::stop_token stop = {});

/// Theories named by the node's first `imports` command, as sibling paths.
std::vector<NodeName> node_dependencies(const NodeName & node, std::span<const CommandSpan> spans);

}  // namespace minipide

#endif
