#include "storesense/message_bus.hpp"

#include <algorithm>
#include <set>
#include <thread>
#include <tuple>

#include <fmt/core.h>

#include "storesense/error.hpp"

namespace storesense {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv_append(std::uint64_t h, std::string_view s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
  h ^= static_cast<unsigned char>('\n');
  h *= kFnvPrime;
  return h;
}

auto order_key(const Envelope& e) { return std::make_tuple(e.t, e.rank, e.seq); }

}  // namespace

std::uint64_t transcript_hash(const std::vector<std::string>& lines) {
  std::uint64_t h = kFnvOffset;
  for (const auto& l : lines) h = fnv_append(h, l);
  return h;
}

std::optional<Envelope> Subscription::poll() {
  if (state_->queue.empty()) return std::nullopt;
  Envelope e = std::move(state_->queue.front());
  state_->queue.pop_front();
  return e;
}

void MessageBus::create_topic(const std::string& name, int rank) {
  auto [it, inserted] = topics_.try_emplace(name);
  if (!inserted) {
    if (it->second.rank != rank) throw BusError(fmt::format("topic '{}' re-created with a different rank", name));
    return;
  }
  it->second.rank = rank;
}

int MessageBus::rank(const std::string& name) const {
  auto it = topics_.find(name);
  if (it == topics_.end()) throw BusError(fmt::format("unknown topic '{}'", name));
  return it->second.rank;
}

Subscription MessageBus::subscribe(const std::string& topic) {
  auto it = topics_.find(topic);
  if (it == topics_.end()) throw BusError(fmt::format("subscribe to unknown topic '{}'", topic));
  auto state = std::make_shared<Subscription::State>();
  state->topic = topic;
  state->index = next_subscription_++;
  it->second.subscribers.push_back(state);
  return Subscription(state);
}

Envelope MessageBus::publish(const std::string& topic, Payload payload, double t) {
  auto it = topics_.find(topic);
  if (it == topics_.end()) throw BusError(fmt::format("publish to unknown topic '{}'", topic));
  Envelope env{topic, it->second.rank, t, next_seq_++, std::make_shared<const Payload>(std::move(payload))};
  if (it->second.subscribers.empty()) ++dropped_;
  for (auto& sub : it->second.subscribers) sub->queue.push_back(env);
  return env;
}

// --- scheduler ----------------------------------------------------------------------

Scheduler::Scheduler(MessageBus& bus, std::string frame_topic)
    : bus_(bus), frame_topic_(std::move(frame_topic)) {}

void Scheduler::add_node(Node& node) {
  const std::size_t index = nodes_.size();
  nodes_.push_back(&node);
  for (const auto& topic : node.subscriptions()) {
    bindings_.push_back(Binding{&node, index, bus_.subscribe(topic)});
  }
}

const Scheduler::Binding* Scheduler::min_head() const {
  const Binding* best = nullptr;
  for (const auto& b : bindings_) {
    if (b.subscription.empty()) continue;
    if (!best || order_key(b.subscription.front()) < order_key(best->subscription.front())) best = &b;
  }
  return best;
}

void Scheduler::note_delivery(const Envelope& env, const Binding& b, std::int64_t frame,
                              CompletionReport& report, bool record) const {
  const std::string line =
      fmt::format("{}\t{}\t{}\t{}\t{}", frame, format_real(env.t), env.seq, env.topic, b.node->name());
  report.transcript_hash = fnv_append(report.transcript_hash, line);
  ++report.deliveries;
  if (record) report.transcript.push_back(line);
}

void Scheduler::deliver(const Binding& b, const Envelope& env, std::int64_t frame, Outbox& out) const {
  try {
    b.node->on_message(env, out);
  } catch (const std::exception& e) {
    throw BusError(fmt::format("node '{}' failed at frame {}: {}", b.node->name(), frame, e.what()));
  }
}

void Scheduler::commit(const Envelope& cause, Outbox& out, std::int64_t frame, const std::string& node) {
  for (auto& [topic, payload] : out.items()) {
    if (!bus_.has_topic(topic)) {
      throw BusError(fmt::format("node '{}' failed at frame {}: publish to unknown topic '{}'", node, frame, topic));
    }
    if (bus_.rank(topic) <= cause.rank) {
      throw BusError(fmt::format("node '{}' failed at frame {}: topic '{}' is not above '{}' in rank", node,
                                 frame, topic, cause.topic));
    }
    bus_.publish(topic, std::move(payload), cause.t);
  }
  out.items().clear();
}

void Scheduler::run_frame_deterministic(std::int64_t frame, CompletionReport& report, bool record) {
  while (const Binding* head = min_head()) {
    const Envelope env = head->subscription.front();
    for (auto& b : bindings_) {
      if (b.subscription.empty() || b.subscription.front().seq != env.seq) continue;
      b.subscription.poll();
      note_delivery(env, b, frame, report, record);
      Outbox out;
      deliver(b, env, frame, out);
      commit(env, out, frame, b.node->name());
    }
  }
}

/// Runs each node on its own thread. Work proceeds in waves: all pending
/// envelopes sharing the smallest (t, rank) are handed to their subscribers'
/// threads at once; outputs are then published in the order the
/// single-threaded scheduler would have produced them.
class Scheduler::ConcurrentRunner {
 public:
  ConcurrentRunner(Scheduler& s) : sched_(s), results_(s.nodes_.size() + 1) {
    for (std::size_t i = 0; i < s.nodes_.size(); ++i) {
      workers_.push_back(std::make_unique<Worker>());
    }
    for (std::size_t i = 0; i < s.nodes_.size(); ++i) {
      Worker& w = *workers_[i];
      Node* node = s.nodes_[i];
      w.thread = std::thread([this, &w, node, i] { work(w, *node, i); });
    }
  }

  ~ConcurrentRunner() {
    for (auto& w : workers_) w->inbox.push(Job{Job::Kind::Stop, {}, 0});
    for (auto& w : workers_) w->thread.join();
  }

  ConcurrentRunner(const ConcurrentRunner&) = delete;
  ConcurrentRunner& operator=(const ConcurrentRunner&) = delete;

  void run_frame(std::int64_t frame, CompletionReport& report, bool record) {
    while (const Binding* head = sched_.min_head()) {
      const double t = head->subscription.front().t;
      const int rank = head->subscription.front().rank;

      std::vector<std::pair<Envelope, std::size_t>> wave;
      for (std::size_t bi = 0; bi < sched_.bindings_.size(); ++bi) {
        auto& sub = sched_.bindings_[bi].subscription;
        while (!sub.empty() && sub.front().t == t && sub.front().rank == rank) wave.emplace_back(*sub.poll(), bi);
      }
      std::sort(wave.begin(), wave.end(), [](const auto& a, const auto& b) {
        return std::tie(a.first.seq, a.second) < std::tie(b.first.seq, b.second);
      });

      std::set<std::size_t> touched;
      for (const auto& [env, bi] : wave) {
        const Binding& b = sched_.bindings_[bi];
        sched_.note_delivery(env, b, frame, report, record);
        touched.insert(b.node_index);
        workers_[b.node_index]->inbox.push(Job{Job::Kind::Deliver, env, bi});
      }
      for (std::size_t ni : touched) workers_[ni]->inbox.push(Job{Job::Kind::WaveEnd, {}, 0});

      std::vector<WaveResult> results;
      for (std::size_t k = 0; k < touched.size(); ++k) results.push_back(results_.pop());
      std::sort(results.begin(), results.end(),
                [](const WaveResult& a, const WaveResult& b) { return a.node_index < b.node_index; });
      for (const auto& r : results) {
        if (r.error) {
          throw BusError(fmt::format("node '{}' failed at frame {}: {}", sched_.nodes_[r.node_index]->name(),
                                     frame, *r.error));
        }
      }

      std::vector<Output> outputs;
      for (auto& r : results) {
        for (auto& o : r.outputs) outputs.push_back(std::move(o));
      }
      std::sort(outputs.begin(), outputs.end(), [](const Output& a, const Output& b) {
        return std::tie(a.cause.seq, a.binding, a.local) < std::tie(b.cause.seq, b.binding, b.local);
      });
      for (auto& o : outputs) {
        Outbox single;
        single.publish(std::move(o.topic), std::move(o.payload));
        sched_.commit(o.cause, single, frame, sched_.bindings_[o.binding].node->name());
      }
    }
  }

 private:
  struct Job {
    enum class Kind { Deliver, WaveEnd, Stop } kind;
    Envelope env;
    std::size_t binding;
  };

  struct Output {
    Envelope cause;
    std::size_t binding;
    std::size_t local;
    std::string topic;
    Payload payload;
  };

  struct WaveResult {
    std::size_t node_index{0};
    std::vector<Output> outputs;
    std::optional<std::string> error;
  };

  struct Worker {
    BoundedChannel<Job> inbox{64};
    std::thread thread;
  };

  void work(Worker& w, Node& node, std::size_t index) {
    WaveResult current{index, {}, std::nullopt};
    for (;;) {
      Job job = w.inbox.pop();
      if (job.kind == Job::Kind::Stop) return;
      if (job.kind == Job::Kind::WaveEnd) {
        results_.push(std::move(current));
        current = WaveResult{index, {}, std::nullopt};
        continue;
      }
      if (current.error) continue;
      try {
        Outbox out;
        node.on_message(job.env, out);
        std::size_t local = 0;
        for (auto& [topic, payload] : out.items()) {
          current.outputs.push_back(Output{job.env, job.binding, local++, std::move(topic), std::move(payload)});
        }
      } catch (const std::exception& e) {
        current.error = e.what();
      }
    }
  }

  Scheduler& sched_;
  BoundedChannel<WaveResult> results_;
  std::vector<std::unique_ptr<Worker>> workers_;
};

CompletionReport Scheduler::run(const Trace& trace, ExecutionMode mode, bool record_transcript) {
  if (!bus_.has_topic(frame_topic_)) throw BusError(fmt::format("frame topic '{}' does not exist", frame_topic_));
  CompletionReport report;
  report.transcript_hash = kFnvOffset;
  const std::uint64_t published_before = bus_.published();
  const std::uint64_t dropped_before = bus_.dropped();

  std::unique_ptr<ConcurrentRunner> runner;
  if (mode == ExecutionMode::Concurrent) runner = std::make_unique<ConcurrentRunner>(*this);

  for (const auto& frame : trace) {
    bus_.publish(frame_topic_, FrameMsg{std::make_shared<const TraceFrame>(frame)}, frame.t);
    if (runner) runner->run_frame(frame.frame, report, record_transcript);
    else run_frame_deterministic(frame.frame, report, record_transcript);
    ++report.frames;
  }
  report.published = bus_.published() - published_before;
  report.dropped = bus_.dropped() - dropped_before;
  return report;
}

}  // namespace storesense
