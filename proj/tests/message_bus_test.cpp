#include <gtest/gtest.h>

#include "storesense/error.hpp"
#include "test_support.hpp"

using namespace storesense;

namespace {

// Relays every frame onto "mid", and every "mid" onto "top".
class Relay : public Node {
 public:
  Relay(std::string name, std::string in, std::string out) : name_(std::move(name)), in_(std::move(in)), out_(std::move(out)) {}
  std::string name() const override { return name_; }
  std::vector<std::string> subscriptions() const override { return {in_}; }
  void on_message(const Envelope& env, Outbox& out) override {
    ++seen;
    out.publish(out_, StateUpdate{1, 1, BehaviorState::Idle, env.t});
  }
  int seen{0};

 private:
  std::string name_, in_, out_;
};

class Sink : public Node {
 public:
  explicit Sink(std::string topic) : topic_(std::move(topic)) {}
  std::string name() const override { return "sink"; }
  std::vector<std::string> subscriptions() const override { return {topic_}; }
  void on_message(const Envelope& env, Outbox&) override {
    times.push_back(env.t);
    seqs.push_back(env.seq);
  }
  std::vector<double> times;
  std::vector<std::uint64_t> seqs;

 private:
  std::string topic_;
};

class Downward : public Node {
 public:
  std::string name() const override { return "downward"; }
  std::vector<std::string> subscriptions() const override { return {"mid"}; }
  void on_message(const Envelope&, Outbox& out) override { out.publish(topics::kCamera, StateUpdate{}); }
};

Trace frames(int n) {
  Trace t;
  for (int i = 0; i < n; ++i) t.push_back({i / 10.0, i, {}});
  return t;
}

void chain_topics(MessageBus& bus) {
  bus.create_topic(topics::kCamera, 0);
  bus.create_topic("mid", 1);
  bus.create_topic("top", 2);
}

}  // namespace

TEST(MessageBus, FanOutToEverySubscriber) {
  MessageBus bus;
  bus.create_topic("a", 0);
  auto s1 = bus.subscribe("a");
  auto s2 = bus.subscribe("a");
  bus.publish("a", StateUpdate{7, 1, BehaviorState::Pick, 1.5}, 1.5);
  ASSERT_EQ(s1.size(), 1u);
  ASSERT_EQ(s2.size(), 1u);
  EXPECT_EQ(s1.front().payload, s2.front().payload);
  EXPECT_EQ(s1.poll()->as<StateUpdate>().person_id, 7);
  EXPECT_EQ(s2.poll()->as<StateUpdate>().state, BehaviorState::Pick);
  EXPECT_FALSE(s1.poll().has_value());
}

TEST(MessageBus, NoSubscriberCountsADrop) {
  MessageBus bus;
  bus.create_topic("a", 0);
  bus.publish("a", StateUpdate{}, 0);
  EXPECT_EQ(bus.dropped(), 1u);
  EXPECT_EQ(bus.published(), 1u);
}

TEST(MessageBus, SequenceNumbersIncrease) {
  MessageBus bus;
  bus.create_topic("a", 0);
  auto s = bus.subscribe("a");
  for (int i = 0; i < 1000; ++i) bus.publish("a", StateUpdate{}, i);
  std::uint64_t last = 0;
  for (int i = 0; i < 1000; ++i) {
    const Envelope e = *s.poll();
    if (i > 0) {
      EXPECT_GT(e.seq, last);
    }
    last = e.seq;
  }
}

TEST(MessageBus, UnknownTopicsAndRankClashes) {
  MessageBus bus;
  bus.create_topic("a", 0);
  EXPECT_NO_THROW(bus.create_topic("a", 0));
  EXPECT_THROW(bus.create_topic("a", 1), BusError);
  EXPECT_THROW(bus.subscribe("b"), BusError);
  EXPECT_THROW(bus.publish("b", StateUpdate{}, 0), BusError);
  EXPECT_EQ(bus.rank("a"), 0);
}

TEST(Scheduler, ThreeNodeChainDeliversEveryFrame) {
  for (auto mode : {ExecutionMode::Deterministic, ExecutionMode::Concurrent}) {
    MessageBus bus;
    chain_topics(bus);
    Relay a("a", topics::kCamera, "mid"), b("b", "mid", "top");
    Sink sink("top");
    Scheduler s(bus);
    s.add_node(a);
    s.add_node(b);
    s.add_node(sink);
    const auto report = s.run(frames(100), mode);
    EXPECT_EQ(sink.times.size(), 100u);
    EXPECT_TRUE(std::is_sorted(sink.times.begin(), sink.times.end()));
    EXPECT_TRUE(std::is_sorted(sink.seqs.begin(), sink.seqs.end()));
    EXPECT_EQ(report.frames, 100u);
    EXPECT_EQ(report.deliveries, 300u);
    EXPECT_EQ(report.published, 300u);
  }
}

TEST(Scheduler, TranscriptIsIdenticalAcrossRunsAndModes) {
  auto run = [](ExecutionMode mode) {
    MessageBus bus;
    chain_topics(bus);
    Relay a("a", topics::kCamera, "mid"), b("b", "mid", "top"), c("c", "mid", "top");
    Sink sink("top");
    Scheduler s(bus);
    s.add_node(a);
    s.add_node(b);
    s.add_node(c);
    s.add_node(sink);
    return s.run(frames(50), mode, true);
  };
  const auto d1 = run(ExecutionMode::Deterministic);
  const auto d2 = run(ExecutionMode::Deterministic);
  const auto c1 = run(ExecutionMode::Concurrent);
  EXPECT_EQ(d1.transcript, d2.transcript);
  EXPECT_EQ(d1.transcript, c1.transcript);
  EXPECT_EQ(d1.transcript_hash, c1.transcript_hash);
  EXPECT_EQ(transcript_hash(d1.transcript), d1.transcript_hash);
  ASSERT_FALSE(d1.transcript.empty());
  EXPECT_EQ(d1.transcript.front(), "0\t0\t0\tcamera\ta");
}

TEST(Scheduler, EmptyTraceCompletes) {
  MessageBus bus;
  chain_topics(bus);
  Relay a("a", topics::kCamera, "mid");
  Scheduler s(bus);
  s.add_node(a);
  const auto report = s.run({}, ExecutionMode::Concurrent);
  EXPECT_EQ(report.frames, 0u);
  EXPECT_EQ(report.deliveries, 0u);
}

TEST(Scheduler, PublishingDownwardIsAnError) {
  for (auto mode : {ExecutionMode::Deterministic, ExecutionMode::Concurrent}) {
    MessageBus bus;
    chain_topics(bus);
    Relay a("a", topics::kCamera, "mid");
    Downward d;
    Scheduler s(bus);
    s.add_node(a);
    s.add_node(d);
    try {
      s.run(frames(3), mode);
      ADD_FAILURE() << "expected BusError";
    } catch (const BusError& e) {
      EXPECT_NE(std::string(e.what()).find("node 'downward' failed at frame 0"), std::string::npos) << e.what();
    }
  }
}

TEST(BoundedChannel, PassesValuesInOrderAcrossThreads) {
  BoundedChannel<int> ch(4);
  std::thread producer([&] {
    for (int i = 0; i < 1000; ++i) ch.push(i);
  });
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(ch.pop(), i);
  producer.join();
}
