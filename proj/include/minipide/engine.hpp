#ifndef MINIPIDE_ENGINE_HPP
#define MINIPIDE_ENGINE_HPP

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "minipide/document.hpp"
#include "minipide/scheduler.hpp"

namespace minipide
{

struct ImportEvent
{
  NodeName node;
  bool ok = false;
  std::string error;
  std::string text;  // file content when ok
};

/// A document plus on-demand loading of imported theories from disk.
class Workspace
{
public:
  explicit Workspace(std::optional<std::filesystem::path> import_root = std::nullopt);

  /// Applies `edits` atomically, then loads every missing import found under
  /// the import root (transitively). Throws InvalidEdit.
  VersionPtr apply(std::span<const Edit> edits, std::vector<ImportEvent> * events = nullptr);

  Document & document() { return document_; }
  const Document & document() const { return document_; }
  const std::optional<std::filesystem::path> & import_root() const { return root_; }

private:
  Document document_;
  std::optional<std::filesystem::path> root_;
  std::set<NodeName> unavailable_;
};

/// Everything a frontend or batch run talks to: workspace + scheduler.
class Engine
{
public:
  struct Options
  {
    unsigned workers = 2;
    std::optional<std::filesystem::path> import_root;
  };

  struct Submission
  {
    Assignment assignment;
    std::vector<ImportEvent> imports;
  };

  explicit Engine(Options options);

  using InstallHook = std::function<void(const SchedulerSnapshot &, const std::vector<ImportEvent> &)>;

  /// Applies a batch, assigns and installs it. Returns without waiting for
  /// any checking. `on_installed` runs as in Scheduler::supersede.
  Submission submit(std::span<const Edit> edits, const InstallHook & on_installed = {});

  bool wait_quiescent(std::chrono::milliseconds timeout) const { return scheduler_.wait_quiescent(timeout); }

  Workspace & workspace() { return workspace_; }
  Scheduler & scheduler() { return scheduler_; }
  const Scheduler & scheduler() const { return scheduler_; }

private:
  Workspace workspace_;
  Scheduler scheduler_;
};

/// Reads `path` and every theory it imports (relative to its directory) into
/// a fresh engine and installs the result.
Engine::Submission load_theory_file(Engine & engine, const std::filesystem::path & path);

}  // namespace minipide

#endif
