#ifndef STORESENSE_MESSAGE_BUS_HPP
#define STORESENSE_MESSAGE_BUS_HPP

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "storesense/messages.hpp"
#include "storesense/trace_io.hpp"

namespace storesense {

/// One published message. Immutable once created; the payload is shared
/// between every subscriber that receives it.
struct Envelope {
  std::string topic;
  int rank{0};
  double t{0.0};
  std::uint64_t seq{0};
  std::shared_ptr<const Payload> payload;

  template <typename T>
  const T& as() const {
    return std::get<T>(*payload);
  }
};

/// Receiving end of a topic. Holds every envelope published to the topic
/// after the subscription was made, in publish order.
class Subscription {
 public:
  const std::string& topic() const { return state_->topic; }
  /// Position among all subscriptions of the bus, in creation order.
  std::size_t index() const { return state_->index; }

  bool empty() const { return state_->queue.empty(); }
  std::size_t size() const { return state_->queue.size(); }
  const Envelope& front() const { return state_->queue.front(); }
  std::optional<Envelope> poll();

 private:
  friend class MessageBus;
  struct State {
    std::string topic;
    std::size_t index{0};
    std::deque<Envelope> queue;
  };
  explicit Subscription(std::shared_ptr<State> state) : state_(std::move(state)) {}

  std::shared_ptr<State> state_;
};

/// In-process topic registry with fan-out delivery. Not thread-safe: in
/// concurrent runs only the coordinating thread publishes.
class MessageBus {
 public:
  void create_topic(const std::string& name, int rank);
  bool has_topic(const std::string& name) const { return topics_.count(name) != 0; }
  int rank(const std::string& name) const;

  Subscription subscribe(const std::string& topic);

  /// Assigns the next sequence number and appends to every subscription.
  /// A topic without subscribers counts one drop.
  Envelope publish(const std::string& topic, Payload payload, double t);

  std::uint64_t published() const { return next_seq_; }
  std::uint64_t dropped() const { return dropped_; }

 private:
  struct Topic {
    int rank{0};
    std::vector<std::shared_ptr<Subscription::State>> subscribers;
  };

  std::map<std::string, Topic> topics_;
  std::uint64_t next_seq_{0};
  std::uint64_t dropped_{0};
  std::size_t next_subscription_{0};
};

/// Collects what a node publishes while handling one envelope.
class Outbox {
 public:
  void publish(std::string topic, Payload payload) {
    items_.emplace_back(std::move(topic), std::move(payload));
  }
  std::vector<std::pair<std::string, Payload>>& items() { return items_; }

 private:
  std::vector<std::pair<std::string, Payload>> items_;
};

/// A processing stage. Nodes own their state exclusively; everything they
/// learn from other nodes arrives as envelopes.
class Node {
 public:
  virtual ~Node() = default;
  virtual std::string name() const = 0;
  virtual std::vector<std::string> subscriptions() const = 0;
  /// May only publish to topics ranked strictly above `env.rank`.
  virtual void on_message(const Envelope& env, Outbox& out) = 0;
};

enum class ExecutionMode { Deterministic, Concurrent };

struct CompletionReport {
  std::uint64_t frames{0};
  std::uint64_t deliveries{0};
  std::uint64_t published{0};
  std::uint64_t dropped{0};
  std::uint64_t transcript_hash{0};
  /// One line per delivery, filled only when recording was requested.
  std::vector<std::string> transcript;
};

/// Drives a node graph over a trace. Each frame is published on the camera
/// topic and every resulting message is delivered in (t, topic rank, seq)
/// order until the graph is quiescent. Both modes deliver in the same order,
/// assign the same sequence numbers and produce the same transcript.
class Scheduler {
 public:
  explicit Scheduler(MessageBus& bus, std::string frame_topic = topics::kCamera);

  /// Subscribes `node` to its topics. The node must outlive the scheduler.
  void add_node(Node& node);

  CompletionReport run(const Trace& trace, ExecutionMode mode, bool record_transcript = false);

 private:
  struct Binding {
    Node* node;
    std::size_t node_index;
    Subscription subscription;
  };

  void run_frame_deterministic(std::int64_t frame, CompletionReport& report, bool record);
  void deliver(const Binding& b, const Envelope& env, std::int64_t frame, Outbox& out) const;
  void commit(const Envelope& cause, Outbox& out, std::int64_t frame, const std::string& node);
  void note_delivery(const Envelope& env, const Binding& b, std::int64_t frame, CompletionReport& report,
                     bool record) const;
  const Binding* min_head() const;

  class ConcurrentRunner;

  MessageBus& bus_;
  std::string frame_topic_;
  std::vector<Node*> nodes_;
  std::vector<Binding> bindings_;
};

/// FIFO with a fixed capacity: push blocks while full, pop blocks while empty.
template <typename T>
class BoundedChannel {
 public:
  explicit BoundedChannel(std::size_t capacity) : capacity_(capacity) {}

  void push(T value) {
    std::unique_lock lock(mutex_);
    not_full_.wait(lock, [&] { return items_.size() < capacity_; });
    items_.push_back(std::move(value));
    not_empty_.notify_one();
  }

  T pop() {
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [&] { return !items_.empty(); });
    T value = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return value;
  }

 private:
  std::size_t capacity_;
  std::mutex mutex_;
  std::condition_variable not_full_;
  std::condition_variable not_empty_;
  std::deque<T> items_;
};

/// FNV-1a over the transcript lines, newline separated.
std::uint64_t transcript_hash(const std::vector<std::string>& lines);

}  // namespace storesense

#endif  // STORESENSE_MESSAGE_BUS_HPP
