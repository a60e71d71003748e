#ifndef MINIPIDE_EDIT_SCRIPT_HPP
#define MINIPIDE_EDIT_SCRIPT_HPP

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "minipide/document.hpp"
#include "minipide/protocol.hpp"

namespace minipide
{

struct EditStep
{
  std::int64_t at_ms = 0;
  std::vector<Edit> edits;
};

/// Timed edit batches against theories found under `root`.
struct EditScript
{
  std::filesystem::path root;
  std::vector<EditStep> steps;
};

class ScriptError : public Error
{
public:
  using Error::Error;
};

/// `base` resolves a relative root. Throws ScriptError.
EditScript parse_edit_script(std::string_view json_text, const std::filesystem::path & base = {});
EditScript load_edit_script(const std::filesystem::path & path);
Json to_json(const EditScript & script);

inline constexpr std::chrono::seconds kReplayTimeout{120};

/// Applies the steps on their schedule against a live engine and returns the
/// trace once the last assignment is quiescent.
std::string replay_incremental(const EditScript & script, unsigned workers = 2);

/// Checks the final text from scratch.
std::string replay_batch(const EditScript & script, unsigned workers = 2);

}  // namespace minipide

#endif
