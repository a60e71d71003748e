#include "minipide/engine.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "minipide/checker.hpp"

namespace minipide
{
namespace
{

std::optional<std::string> read_file(const std::filesystem::path & path, std::string & error)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    error = "cannot read " + path.string();
    return std::nullopt;
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

Workspace::Workspace(std::optional<std::filesystem::path> import_root) : root_(std::move(import_root)) {}

VersionPtr Workspace::apply(std::span<const Edit> edits, std::vector<ImportEvent> * events)
{
  VersionPtr version = document_.apply_edits(edits);
  if (!root_) return version;

  for (;;) {
    std::vector<Edit> loads;
    for (const auto & [name, state] : version->nodes) {
      for (const auto & dep : node_dependencies(name, state->spans)) {
        if (version->nodes.contains(dep) || unavailable_.contains(dep)) continue;
        if (std::any_of(loads.begin(), loads.end(), [&](const Edit & e) { return e.node == dep; })) continue;

        ImportEvent event{dep, false, {}, {}};
        if (auto text = read_file(*root_ / dep.path(), event.error)) {
          event.ok = true;
          event.text = *text;
          loads.push_back(Edit::insert(dep, 0, std::move(*text)));
        } else {
          unavailable_.insert(dep);
        }
        if (events) events->push_back(std::move(event));
      }
    }
    if (loads.empty()) return version;
    version = document_.apply_edits(loads);
  }
}

Engine::Engine(Options options) : workspace_(std::move(options.import_root)), scheduler_(options.workers) {}

Engine::Submission Engine::submit(std::span<const Edit> edits, const InstallHook & on_installed)
{
  Submission out;
  VersionPtr version = workspace_.apply(edits, &out.imports);
  out.assignment = scheduler_.assign(version);
  if (on_installed) {
    scheduler_.supersede(out.assignment, [&](const SchedulerSnapshot & snap) { on_installed(snap, out.imports); });
  } else {
    scheduler_.supersede(out.assignment);
  }
  return out;
}

Engine::Submission load_theory_file(Engine & engine, const std::filesystem::path & path)
{
  std::string error;
  auto text = read_file(path, error);
  if (!text) throw Error(error);
  const auto edit = Edit::insert(NodeName::make(path.filename().string()), 0, std::move(*text));
  return engine.submit(std::span<const Edit>(&edit, 1));
}

}  // namespace minipide
