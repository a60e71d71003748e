#include "minipide/scheduler.hpp"

#include <algorithm>
#include <functional>
#include <queue>

namespace minipide
{
namespace
{

using Clock = std::chrono::steady_clock;

struct GraphNode
{
  NodeName name;
  std::vector<NodeName> deps;  // present in the version
  std::vector<NodeName> missing;
};

// Tarjan's strongly connected components over the import graph.
class Components
{
public:
  explicit Components(const std::map<NodeName, GraphNode> & graph) : graph_(graph)
  {
    for (const auto & [name, node] : graph_) {
      if (!index_.contains(name)) visit(name);
    }
  }

  std::vector<std::vector<NodeName>> components;
  std::map<NodeName, std::size_t> component_of;

private:
  void visit(const NodeName & v)
  {
    index_[v] = low_[v] = counter_++;
    stack_.push_back(v);
    on_stack_.insert(v);
    for (const auto & w : graph_.at(v).deps) {
      if (!index_.contains(w)) {
        visit(w);
        low_[v] = std::min(low_[v], low_[w]);
      } else if (on_stack_.contains(w)) {
        low_[v] = std::min(low_[v], index_[w]);
      }
    }
    if (low_[v] == index_[v]) {
      std::vector<NodeName> component;
      NodeName w;
      do {
        w = stack_.back();
        stack_.pop_back();
        on_stack_.erase(w);
        component_of[w] = components.size();
        component.push_back(w);
      } while (w != v);
      std::sort(component.begin(), component.end());
      components.push_back(std::move(component));
    }
  }

  const std::map<NodeName, GraphNode> & graph_;
  std::map<NodeName, std::size_t> index_, low_;
  std::vector<NodeName> stack_;
  std::set<NodeName> on_stack_;
  std::size_t counter_ = 0;
};

// Nodes in dependency order (imports first), ties broken by path.
std::vector<NodeAssignment> plan_nodes(const DocumentVersion & version)
{
  std::map<NodeName, GraphNode> graph;
  for (const auto & [name, state] : version.nodes) {
    GraphNode g{name, {}, {}};
    for (auto & dep : node_dependencies(name, state->spans)) {
      (version.nodes.contains(dep) ? g.deps : g.missing).push_back(std::move(dep));
    }
    graph.emplace(name, std::move(g));
  }

  const Components scc(graph);
  const std::size_t n = scc.components.size();
  std::vector<std::set<std::size_t>> dependents(n);
  std::vector<std::size_t> pending(n, 0);
  std::vector<bool> cyclic(n, false);
  for (const auto & [name, g] : graph) {
    const auto c = scc.component_of.at(name);
    for (const auto & dep : g.deps) {
      const auto d = scc.component_of.at(dep);
      if (d == c) {
        cyclic[c] = true;
      } else if (dependents[d].insert(c).second) {
        ++pending[c];
      }
    }
  }

  using Item = std::pair<NodeName, std::size_t>;  // smallest member, component
  std::priority_queue<Item, std::vector<Item>, std::greater<>> ready;
  for (std::size_t c = 0; c < n; ++c) {
    if (pending[c] == 0) ready.push({scc.components[c].front(), c});
  }

  std::vector<NodeAssignment> order;
  while (!ready.empty()) {
    const auto c = ready.top().second;
    ready.pop();
    for (const auto & name : scc.components[c]) {
      const auto & g = graph.at(name);
      const auto & state = *version.nodes.at(name);
      NodeAssignment na;
      na.node = name;
      na.cyclic = cyclic[c];
      na.missing = g.missing;
      for (std::size_t i = 0; i < state.spans.size(); ++i) {
        na.spans.push_back(state.spans[i].id);
        if (!na.imports_span && state.spans[i].keyword == "imports") na.imports_span = i;
      }
      if (na.cyclic) {
        std::string members;
        for (const auto & m : scc.components[c]) members += (members.empty() ? "" : ", ") + m.path();
        na.import_errors.push_back("import cycle among " + members);
      } else {
        na.imports = g.deps;
      }
      for (const auto & m : g.missing) na.import_errors.push_back("missing import " + m.path());
      order.push_back(std::move(na));
    }
    for (const auto d : dependents[c]) {
      if (--pending[d] == 0) ready.push({scc.components[d].front(), d});
    }
  }
  return order;
}

Range keyword_range(const CommandSpan & span)
{
  for (const auto & t : span.tokens) {
    if (!t.is_trivia()) return t.range.shifted(-static_cast<std::ptrdiff_t>(span.range.begin));
  }
  return {0, span.range.length()};
}

Range import_name_range(const CommandSpan & span, const NodeName & dep)
{
  const auto & path = dep.path();
  const auto slash = path.rfind('/');
  const auto file = path.substr(slash == std::string::npos ? 0 : slash + 1);
  for (const auto & t : span.tokens) {
    if (t.kind == TokenKind::ident && t.text + std::string(kTheoryExtension) == file) {
      return t.range.shifted(-static_cast<std::ptrdiff_t>(span.range.begin));
    }
  }
  return keyword_range(span);
}

}  // namespace

std::string_view to_string(ExecStatus status)
{
  switch (status) {
    case ExecStatus::unprocessed:
      return "unprocessed";
    case ExecStatus::running:
      return "running";
    case ExecStatus::finished:
      return "finished";
    case ExecStatus::failed:
      return "failed";
    case ExecStatus::cancelled:
      return "cancelled";
  }
  return "unprocessed";
}

std::optional<ExecStatus> exec_status_from_string(std::string_view name)
{
  for (auto s : {ExecStatus::unprocessed, ExecStatus::running, ExecStatus::finished, ExecStatus::failed,
                 ExecStatus::cancelled}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

bool is_terminal(ExecStatus status)
{
  return status == ExecStatus::finished || status == ExecStatus::failed || status == ExecStatus::cancelled;
}

const NodeAssignment * Assignment::find(const NodeName & node) const
{
  const auto it = std::find_if(nodes.begin(), nodes.end(), [&](const NodeAssignment & na) { return na.node == node; });
  return it == nodes.end() ? nullptr : &*it;
}

std::size_t Assignment::exec_count() const
{
  std::size_t n = 0;
  for (const auto & na : nodes) n += na.execs.size();
  return n;
}

StatusSummary summarize(const Assignment & assignment, const std::map<ExecId, ExecutionEntry> & entries)
{
  StatusSummary summary;
  for (const auto & na : assignment.nodes) {
    StatusCounts & counts = summary.nodes[na.node];
    for (const auto id : na.execs) {
      const auto it = entries.find(id);
      const auto status = it == entries.end() ? ExecStatus::unprocessed : it->second.status;
      switch (status) {
        case ExecStatus::unprocessed:
        case ExecStatus::cancelled:  // cannot belong to a current assignment
          ++counts.unprocessed;
          break;
        case ExecStatus::running:
          ++counts.running;
          break;
        case ExecStatus::finished:
          ++counts.finished;
          break;
        case ExecStatus::failed:
          ++counts.failed;
          break;
      }
    }
    summary.session.unprocessed += counts.unprocessed;
    summary.session.running += counts.running;
    summary.session.finished += counts.finished;
    summary.session.failed += counts.failed;
  }
  return summary;
}

Scheduler::Scheduler(unsigned workers)
{
  if (workers == 0) throw Error("worker budget must be positive");
  delivery_ = std::thread([this] { delivery_loop(); });
  for (unsigned i = 0; i < workers; ++i) workers_.emplace_back([this] { worker_loop(); });
}

Scheduler::~Scheduler()
{
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
    for (auto & [id, slot] : slots_) slot.stop.request_stop();
  }
  changed_.notify_all();
  for (auto & w : workers_) w.join();
  {
    std::lock_guard lock(delivery_mutex_);
    delivery_stopping_ = true;
  }
  delivery_cv_.notify_all();
  delivery_.join();
}

ExecId Scheduler::create_locked(const NodeName & node, SpanId span)
{
  const ExecId id = next_exec_++;
  Slot & slot = slots_[id];
  slot.info.exec_id = id;
  slot.info.node = node;
  slot.info.span_id = span;
  return id;
}

ExecId Scheduler::create_synthetic_locked(const NodeName & node, const CommandSpan & span,
                                          std::vector<Message> messages, const std::optional<Environment> & env)
{
  const ExecId id = create_locked(node, span.id);
  Slot & slot = slots_[id];
  auto result = std::make_shared<CheckResult>();
  result->status = CheckResult::Status::failed;
  for (const auto & m : messages) result->markup.add(*m.range, {MarkupLabel::Kind::error, m.text, {}});
  result->messages = std::move(messages);
  if (env) {
    result->env_out = *env;
    slot.info.env_hash_in = env->hash();
  }
  slot.info.result = std::move(result);
  slot.info.status = ExecStatus::failed;
  slot.info.synthetic = true;
  return id;
}

std::optional<ExecId> Scheduler::claim_locked(const CacheKey & key, const NodeName & node, SpanId span,
                                              const std::set<ExecId> & claimed) const
{
  const auto it = cache_.find(key);
  if (it == cache_.end()) return std::nullopt;
  std::optional<ExecId> fallback;
  for (const auto id : it->second) {
    if (claimed.contains(id)) continue;
    const auto & info = slots_.at(id).info;
    if (info.status == ExecStatus::cancelled || info.synthetic) continue;
    if (info.node == node && info.span_id == span) return id;
    if (!fallback) fallback = id;
  }
  return fallback;
}

std::optional<Environment> Scheduler::env_after_locked(const NodeAssignment & na, std::size_t index,
                                                       const Environment & before, const Slot & slot,
                                                       const Finals & finals) const
{
  std::optional<Environment> env;
  if (slot.info.status == ExecStatus::finished) {
    env = slot.info.result->env_out.resolved(na.node, na.spans[index]);
  } else if (slot.info.status == ExecStatus::failed) {
    env = before;  // failed commands pass their input through
  } else {
    return std::nullopt;
  }
  if (na.imports_span == index) {
    for (const auto & dep : na.imports) {
      const auto it = finals.find(dep);
      if (it == finals.end() || !it->second) return std::nullopt;
      env = env->merged(*it->second);
    }
  }
  return env;
}

Assignment Scheduler::assign(VersionPtr version)
{
  std::lock_guard lock(mutex_);
  Assignment out;
  out.version_id = version->version_id;
  out.version = version;
  out.nodes = plan_nodes(*version);

  Finals finals;
  std::set<ExecId> claimed;
  for (auto & na : out.nodes) {
    const NodeState & state = *version->node(na.node);
    std::optional<Environment> env = Environment{};
    for (std::size_t i = 0; i < state.spans.size(); ++i) {
      const CommandSpan & span = state.spans[i];
      ExecId id = 0;
      if (na.cyclic) {
        id = create_synthetic_locked(na.node, span, {{Severity::error, na.import_errors.front(), std::nullopt,
                                                      keyword_range(span)}},
                                     env);
      } else if (na.imports_span == i && !na.missing.empty()) {
        std::vector<Message> messages;
        for (const auto & m : na.missing) {
          messages.push_back({Severity::error, "missing import " + m.path(), std::nullopt, import_name_range(span, m)});
        }
        id = create_synthetic_locked(na.node, span, std::move(messages), env);
      } else if (env) {
        const auto reused = claim_locked({span.text, env->hash()}, na.node, span.id, claimed);
        id = reused ? *reused : create_locked(na.node, span.id);
      } else {
        id = create_locked(na.node, span.id);
      }
      claimed.insert(id);
      na.execs.push_back(id);
      if (env) env = env_after_locked(na, i, *env, slots_.at(id), finals);
    }
    finals[na.node] = na.cyclic ? std::optional<Environment>(Environment{}) : env;
  }
  return out;
}

void Scheduler::supersede(const Assignment & assignment,
                          const std::function<void(const SchedulerSnapshot &)> & on_installed)
{
  std::lock_guard lock(mutex_);
  std::set<ExecId> keep;
  for (const auto & na : assignment.nodes) {
    for (std::size_t i = 0; i < na.execs.size(); ++i) {
      keep.insert(na.execs[i]);
      Slot & slot = slots_.at(na.execs[i]);
      slot.info.node = na.node;
      slot.info.span_id = na.spans[i];
      slot.last_version = assignment.version_id;
    }
  }

  for (auto & [id, slot] : slots_) {
    if (keep.contains(id) || is_terminal(slot.info.status)) continue;
    if (slot.info.status == ExecStatus::running) {
      slot.stop.request_stop();  // the worker reports the cancellation
    } else {
      slot.info.status = ExecStatus::cancelled;
      forget_key_locked(id, slot);
      if (slot.last_version != 0 || slot.queued) emit_locked(slot);
    }
  }

  previous_ = std::move(current_);
  current_ = assignment;
  if (on_installed) on_installed(snapshot_locked());
  prune_locked();
  dispatch_locked();
  changed_.notify_all();
}

void Scheduler::forget_key_locked(ExecId id, Slot & slot)
{
  if (!slot.key_text || !slot.info.env_hash_in) return;
  const auto it = cache_.find({*slot.key_text, *slot.info.env_hash_in});
  if (it != cache_.end()) {
    it->second.erase(id);
    if (it->second.empty()) cache_.erase(it);
  }
  slot.key_text.reset();
}

void Scheduler::prune_locked()
{
  std::set<ExecId> live;
  for (const Assignment * a : {&current_, &previous_}) {
    for (const auto & na : a->nodes) live.insert(na.execs.begin(), na.execs.end());
  }
  for (auto it = slots_.begin(); it != slots_.end();) {
    if (live.contains(it->first) || it->second.info.status == ExecStatus::running) {
      ++it;
    } else {
      forget_key_locked(it->first, it->second);
      it = slots_.erase(it);
    }
  }
  std::erase_if(jobs_, [&](ExecId id) { return !slots_.contains(id); });
}

void Scheduler::dispatch_locked()
{
  if (!current_.version) return;
  Finals finals;
  for (const auto & na : current_.nodes) {
    std::optional<Environment> env = Environment{};
    for (std::size_t i = 0; i < na.execs.size() && env; ++i) {
      Slot & slot = slots_.at(na.execs[i]);
      if (is_terminal(slot.info.status)) {
        env = env_after_locked(na, i, *env, slot, finals);
        continue;
      }
      if (slot.info.status == ExecStatus::unprocessed && !slot.queued) {
        slot.env_in = *env;
        slot.info.env_hash_in = env->hash();
        slot.text = current_.version->node(na.node)->spans[i].text;
        slot.key_text = slot.text;
        cache_[{slot.text, *slot.info.env_hash_in}].insert(na.execs[i]);
        slot.queued = true;
        jobs_.push_back(na.execs[i]);
      }
      env.reset();  // waiting on this exec
    }
    finals[na.node] = na.cyclic ? std::optional<Environment>(Environment{}) : env;
  }
  changed_.notify_all();
}

void Scheduler::emit_locked(const Slot & slot)
{
  ExecUpdate update;
  update.version_id = slot.last_version;
  update.exec_id = slot.info.exec_id;
  update.node = slot.info.node;
  update.span_id = slot.info.span_id;
  update.status = slot.info.status;
  if (slot.info.status == ExecStatus::finished || slot.info.status == ExecStatus::failed) {
    update.result = slot.info.result;
  }
  {
    std::lock_guard lock(delivery_mutex_);
    outbox_.push_back(std::move(update));
  }
  delivery_cv_.notify_one();
}

void Scheduler::worker_loop()
{
  std::unique_lock lock(mutex_);
  for (;;) {
    changed_.wait(lock, [&] { return stopping_ || !jobs_.empty(); });
    if (stopping_) return;
    const ExecId id = jobs_.front();
    jobs_.pop_front();
    auto it = slots_.find(id);
    if (it == slots_.end() || it->second.info.status != ExecStatus::unprocessed) continue;

    Slot & slot = it->second;
    slot.info.status = ExecStatus::running;
    emit_locked(slot);
    const std::string text = slot.text;
    const Environment env = slot.env_in;
    const std::stop_token cancel = slot.stop.get_token();

    lock.unlock();
    auto result = check_text(text, env, cancel);
    lock.lock();

    it = slots_.find(id);
    if (it == slots_.end()) continue;
    Slot & done = it->second;
    if (!result || cancel.stop_requested()) {
      done.info.status = ExecStatus::cancelled;
      forget_key_locked(id, done);
    } else {
      done.info.status =
        result->status == CheckResult::Status::finished ? ExecStatus::finished : ExecStatus::failed;
      done.info.result = std::make_shared<const CheckResult>(std::move(*result));
    }
    emit_locked(done);
    dispatch_locked();
    changed_.notify_all();
  }
}

void Scheduler::delivery_loop()
{
  for (;;) {
    ExecUpdate update;
    {
      std::unique_lock lock(delivery_mutex_);
      delivery_cv_.wait(lock, [&] { return delivery_stopping_ || !outbox_.empty(); });
      if (outbox_.empty()) return;
      update = std::move(outbox_.front());
      outbox_.pop_front();
    }
    std::lock_guard lock(listener_mutex_);
    if (listener_) listener_(update);
  }
}

void Scheduler::set_listener(Listener listener)
{
  std::lock_guard lock(listener_mutex_);
  listener_ = std::move(listener);
}

bool Scheduler::quiescent_locked() const
{
  for (const auto & na : current_.nodes) {
    for (const auto id : na.execs) {
      const auto it = slots_.find(id);
      if (it == slots_.end() || !is_terminal(it->second.info.status)) return false;
    }
  }
  return true;
}

bool Scheduler::quiescent() const
{
  std::lock_guard lock(mutex_);
  return quiescent_locked();
}

bool Scheduler::wait_quiescent(std::chrono::milliseconds timeout) const
{
  std::unique_lock lock(mutex_);
  return changed_.wait_until(lock, Clock::now() + timeout, [&] { return quiescent_locked(); });
}

SchedulerSnapshot Scheduler::snapshot_locked() const
{
  SchedulerSnapshot snap;
  snap.assignment = current_;
  for (const auto & na : current_.nodes) {
    for (const auto id : na.execs) {
      if (const auto it = slots_.find(id); it != slots_.end()) snap.entries.emplace(id, it->second.info);
    }
  }
  return snap;
}

SchedulerSnapshot Scheduler::snapshot() const
{
  std::lock_guard lock(mutex_);
  return snapshot_locked();
}

StatusSummary Scheduler::summary() const
{
  const auto snap = snapshot();
  return summarize(snap.assignment, snap.entries);
}

std::optional<ExecutionEntry> Scheduler::entry(ExecId id) const
{
  std::lock_guard lock(mutex_);
  const auto it = slots_.find(id);
  if (it == slots_.end()) return std::nullopt;
  return it->second.info;
}

}  // namespace minipide
