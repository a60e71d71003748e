#ifndef MINIPIDE_SCHEDULER_HPP
#define MINIPIDE_SCHEDULER_HPP

#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stop_token>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "minipide/checker.hpp"
#include "minipide/document.hpp"

namespace minipide
{

enum class ExecStatus { unprocessed, running, finished, failed, cancelled };

std::string_view to_string(ExecStatus status);
std::optional<ExecStatus> exec_status_from_string(std::string_view name);
bool is_terminal(ExecStatus status);

/// Checking state of one command under one input environment.
struct ExecutionEntry
{
  ExecId exec_id = 0;
  SpanId span_id = 0;  // the span it serves in the most recent assignment
  NodeName node;
  std::optional<std::uint64_t> env_hash_in;  // known once dispatched
  ExecStatus status = ExecStatus::unprocessed;
  std::shared_ptr<const CheckResult> result;
  bool synthetic = false;  // failure decided by the scheduler (import problems); never reused
};

struct NodeAssignment
{
  NodeName node;
  std::vector<SpanId> spans;
  std::vector<ExecId> execs;  // one per span, in span order
  std::vector<NodeName> imports;  // present and acyclic, in import order
  std::vector<NodeName> missing;
  std::optional<std::size_t> imports_span;
  std::vector<std::string> import_errors;
  bool cyclic = false;
};

struct Assignment
{
  VersionId version_id = 0;
  VersionPtr version;
  std::vector<NodeAssignment> nodes;  // topological import order

  const NodeAssignment * find(const NodeName & node) const;
  std::size_t exec_count() const;
};

struct StatusCounts
{
  std::size_t unprocessed = 0;
  std::size_t running = 0;
  std::size_t finished = 0;
  std::size_t failed = 0;

  std::size_t total() const { return unprocessed + running + finished + failed; }
  bool operator==(const StatusCounts &) const = default;
};

struct StatusSummary
{
  std::map<NodeName, StatusCounts> nodes;
  StatusCounts session;
};

StatusSummary summarize(const Assignment & assignment, const std::map<ExecId, ExecutionEntry> & entries);

struct ExecUpdate
{
  VersionId version_id = 0;  // newest assignment the exec belongs to
  ExecId exec_id = 0;
  NodeName node;
  SpanId span_id = 0;
  ExecStatus status = ExecStatus::unprocessed;
  std::shared_ptr<const CheckResult> result;  // set for finished/failed
};

/// Assignment plus the entries it refers to, copied under one lock.
struct SchedulerSnapshot
{
  Assignment assignment;
  std::map<ExecId, ExecutionEntry> entries;
};

/// Turns document versions into execution assignments and runs them on a
/// fixed pool of workers. assign() and supersede() belong to one coordinating
/// thread; everything else is safe from any thread.
class Scheduler
{
public:
  using Listener = std::function<void(const ExecUpdate &)>;

  explicit Scheduler(unsigned workers);
  ~Scheduler();

  Scheduler(const Scheduler &) = delete;
  Scheduler & operator=(const Scheduler &) = delete;

  /// Maps every span of `version` to an exec, reusing prior entries whose
  /// (text, env_hash_in) match. Never waits on running work.
  Assignment assign(VersionPtr version);

  /// Makes `assignment` current: running execs it does not reuse are
  /// cancelled, pending ones are dropped, and its ready execs are dispatched.
  /// `on_installed` runs under the scheduler lock, after the switch and before
  /// any update for the new assignment is delivered; it must not call back
  /// into the scheduler.
  void supersede(const Assignment & assignment,
                 const std::function<void(const SchedulerSnapshot &)> & on_installed = {});

  /// Updates are delivered in transition order from one delivery thread.
  /// Returns once no call to the previous listener is in progress.
  void set_listener(Listener listener);

  bool wait_quiescent(std::chrono::milliseconds timeout) const;
  bool quiescent() const;

  StatusSummary summary() const;
  SchedulerSnapshot snapshot() const;
  std::optional<ExecutionEntry> entry(ExecId id) const;
  unsigned workers() const { return static_cast<unsigned>(workers_.size()); }

private:
  struct Slot
  {
    ExecutionEntry info;
    VersionId last_version = 0;
    bool queued = false;
    std::optional<std::string> key_text;
    Environment env_in;
    std::string text;
    std::stop_source stop;
  };

  using CacheKey = std::pair<std::string, std::uint64_t>;
  using Finals = std::map<NodeName, std::optional<Environment>>;

  ExecId create_locked(const NodeName & node, SpanId span);
  ExecId create_synthetic_locked(const NodeName & node, const CommandSpan & span, std::vector<Message> messages,
                                 const std::optional<Environment> & env);
  std::optional<ExecId> claim_locked(const CacheKey & key, const NodeName & node, SpanId span,
                                     const std::set<ExecId> & claimed) const;
  std::optional<Environment> env_after_locked(const NodeAssignment & na, std::size_t index, const Environment & before,
                                              const Slot & slot, const Finals & finals) const;
  void dispatch_locked();
  void emit_locked(const Slot & slot);
  void forget_key_locked(ExecId id, Slot & slot);
  void prune_locked();
  bool quiescent_locked() const;
  SchedulerSnapshot snapshot_locked() const;

  void worker_loop();
  void delivery_loop();

  mutable std::mutex mutex_;
  mutable std::condition_variable changed_;
  bool stopping_ = false;
  std::map<ExecId, Slot> slots_;
  std::map<CacheKey, std::set<ExecId>> cache_;
  ExecId next_exec_ = 1;
  Assignment current_;
  Assignment previous_;
  std::deque<ExecId> jobs_;

  std::mutex delivery_mutex_;
  std::condition_variable delivery_cv_;
  std::deque<ExecUpdate> outbox_;
  bool delivery_stopping_ = false;
  std::mutex listener_mutex_;  // held while the listener runs
  Listener listener_;

  std::vector<std::thread> workers_;
  std::thread delivery_;
};

}  // namespace minipide

#endif
