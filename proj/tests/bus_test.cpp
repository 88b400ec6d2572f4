#include <gtest/gtest.h>

#include <thread>
#include <vector>

#include "tsnzeek/bus.hpp"

using namespace tsnzeek;

namespace {

BusEvent frer(double ts, std::uint16_t seq) {
  RTagFrame f;
  f.sequence_number = seq;
  return make_event(ts, TsnFrame{f});
}

std::uint16_t seq_of(const BusEvent& e) { return std::get<RTagFrame>(e.payload).sequence_number; }

BusEvent talker(double ts) {
  SrpTalkerAdvertise adv;
  return make_event(ts, TsnFrame{adv});
}

}  // namespace

TEST(Bus, FanOutToEverySubscriber) {
  EventBus bus;
  auto a = bus.subscribe(Topic::Frer);
  auto b = bus.subscribe(Topic::Frer);
  bus.publish(frer(1.0, 5));
  ASSERT_EQ(a.pending(), 1u);
  ASSERT_EQ(b.pending(), 1u);
  EXPECT_EQ(seq_of(*a.try_next()), 5);
  EXPECT_EQ(seq_of(*b.try_next()), 5);
  EXPECT_FALSE(a.try_next());
}

TEST(Bus, NoSubscribersIsNoOp) {
  EventBus bus;
  EXPECT_NO_THROW(bus.publish(frer(0.0, 1)));
}

TEST(Bus, FifoAndNoReplay) {
  EventBus bus;
  for (int i = 0; i < 5; ++i) bus.publish(frer(i, static_cast<std::uint16_t>(i)));
  auto late = bus.subscribe(Topic::Frer);
  for (int i = 5; i < 8; ++i) bus.publish(frer(i, static_cast<std::uint16_t>(i)));
  std::vector<std::uint16_t> got;
  while (auto e = late.try_next()) got.push_back(seq_of(*e));
  EXPECT_EQ(got, (std::vector<std::uint16_t>{5, 6, 7}));
}

TEST(Bus, TopicsAreIsolated) {
  EventBus bus;
  auto f = bus.subscribe(Topic::Frer);
  auto t = bus.subscribe(Topic::SrpTalker);
  bus.publish(talker(1.0));
  bus.publish(frer(2.0, 1));
  EXPECT_EQ(f.pending(), 1u);
  EXPECT_EQ(t.pending(), 1u);
  EXPECT_EQ(t.try_next()->topic, Topic::SrpTalker);
}

TEST(Bus, MultiTopicSubscriptionKeepsPublishOrder) {
  EventBus bus;
  auto s = bus.subscribe({Topic::Frer, Topic::SrpTalker});
  bus.publish(talker(1.0));
  bus.publish(frer(2.0, 1));
  bus.publish(talker(3.0));
  EXPECT_EQ(s.try_next()->timestamp, 1.0);
  EXPECT_EQ(s.try_next()->timestamp, 2.0);
  EXPECT_EQ(s.try_next()->timestamp, 3.0);
}

TEST(Bus, MismatchedTopicRejected) {
  EventBus bus;
  auto e = frer(0.0, 1);
  e.topic = Topic::Notice;
  EXPECT_THROW(bus.publish(e), std::invalid_argument);
}

TEST(Bus, ClosedBusRejectsAndDrains) {
  EventBus bus;
  auto s = bus.subscribe(Topic::Frer);
  bus.publish(frer(0.0, 1));
  bus.close();
  EXPECT_THROW(bus.publish(frer(1.0, 2)), BusClosed);
  EXPECT_THROW((void)bus.subscribe(Topic::Frer), BusClosed);
  EXPECT_TRUE(s.next());
  EXPECT_FALSE(s.next());
}

// Bounded queues: the publisher blocks instead of dropping, and every event
// arrives in order at every subscriber.
TEST(Bus, BackpressureIsLossless) {
  constexpr int kEvents = 20000;
  EventBus bus(16);
  auto a = bus.subscribe(Topic::Frer);
  auto b = bus.subscribe(Topic::Frer);
  auto consume = [](Subscription& s, std::vector<std::uint16_t>& out) {
    while (auto e = s.next()) out.push_back(seq_of(*e));
  };
  std::vector<std::uint16_t> ga, gb;
  std::thread ta(consume, std::ref(a), std::ref(ga));
  std::thread tb(consume, std::ref(b), std::ref(gb));
  for (int i = 0; i < kEvents; ++i) bus.publish(frer(i, static_cast<std::uint16_t>(i)));
  bus.close();
  ta.join();
  tb.join();
  ASSERT_EQ(ga.size(), static_cast<std::size_t>(kEvents));
  EXPECT_EQ(ga, gb);
  for (int i = 0; i < kEvents; ++i) ASSERT_EQ(ga[i], static_cast<std::uint16_t>(i));
}

TEST(Bus, ConcurrentPublishersKeepPerPublisherOrder) {
  EventBus bus(8);
  auto s = bus.subscribe(Topic::Frer);
  std::vector<std::uint16_t> got;
  std::thread consumer([&] {
    while (auto e = s.next()) got.push_back(seq_of(*e));
  });
  auto produce = [&](std::uint16_t base) {
    for (std::uint16_t i = 0; i < 1000; ++i) bus.publish(frer(0.0, static_cast<std::uint16_t>(base + i)));
  };
  std::thread p1(produce, 0), p2(produce, 10000);
  p1.join();
  p2.join();
  bus.close();
  consumer.join();
  ASSERT_EQ(got.size(), 2000u);
  int last1 = -1, last2 = -1;
  for (auto v : got) {
    int& last = v < 10000 ? last1 : last2;
    ASSERT_GT(static_cast<int>(v), last);
    last = v;
  }
}

TEST(Bus, DroppedSubscriptionNoLongerBlocks) {
  EventBus bus(2);
  {
    auto s = bus.subscribe(Topic::Frer);
    bus.publish(frer(0.0, 1));
    bus.publish(frer(0.0, 2));
  }
  EXPECT_NO_THROW(bus.publish(frer(0.0, 3)));
}
