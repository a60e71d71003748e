#include "minipide/edit_script.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include "minipide/trace.hpp"

namespace minipide
{

EditScript parse_edit_script(std::string_view json_text, const std::filesystem::path & base)
{
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::parse_error & e) {
    throw ScriptError(std::string("edit script is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ScriptError("edit script must be an object");

  EditScript script;
  auto root = j.find("root");
  if (root == j.end() || !root->is_string()) throw ScriptError("edit script needs a string 'root'");
  script.root = base / root->get<std::string>();

  auto steps = j.find("steps");
  if (steps == j.end() || !steps->is_array()) throw ScriptError("edit script needs an array 'steps'");
  std::int64_t last = 0;
  for (const auto & s : *steps) {
    if (!s.is_object() || !s.contains("at_ms") || !s["at_ms"].is_number_integer()) {
      throw ScriptError("every step needs an integer 'at_ms'");
    }
    EditStep step;
    step.at_ms = s["at_ms"].get<std::int64_t>();
    if (step.at_ms < last) throw ScriptError("step times must not decrease");
    last = step.at_ms;
    try {
      step.edits = edits_from_json(s.value("edits", Json::array()));
    } catch (const Error & e) {
      throw ScriptError(e.what());
    }
    script.steps.push_back(std::move(step));
  }
  return script;
}

EditScript load_edit_script(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScriptError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_edit_script(buffer.str(), path.parent_path());
}

Json to_json(const EditScript & script)
{
  Json steps = Json::array();
  for (const auto & step : script.steps) {
    Json edits = Json::array();
    for (const auto & e : step.edits) edits.push_back(to_json(e));
    steps.push_back({{"at_ms", step.at_ms}, {"edits", std::move(edits)}});
  }
  return {{"root", script.root.generic_string()}, {"steps", std::move(steps)}};
}

std::string replay_incremental(const EditScript & script, unsigned workers)
{
  Engine engine({workers, script.root});
  const auto start = std::chrono::steady_clock::now();
  for (const auto & step : script.steps) {
    std::this_thread::sleep_until(start + std::chrono::milliseconds(step.at_ms));
    engine.submit(step.edits);
  }
  if (!engine.wait_quiescent(kReplayTimeout)) throw Error("replay did not reach quiescence");
  return canonical_trace(engine.scheduler().snapshot());
}

std::string replay_batch(const EditScript & script, unsigned workers)
{
  Workspace workspace(script.root);
  for (const auto & step : script.steps) workspace.apply(step.edits);

  std::vector<Edit> final_text;
  for (const auto & [name, state] : workspace.document().latest()->nodes) {
    final_text.push_back(Edit::insert(name, 0, state->text));
  }
  Engine engine({workers, script.root});
  engine.submit(final_text);
  if (!engine.wait_quiescent(kReplayTimeout)) throw Error("replay did not reach quiescence");
  return canonical_trace(engine.scheduler().snapshot());
}

}  // namespace minipide
