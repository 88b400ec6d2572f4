#pragma once

// In-process publish/subscribe channel between frame ingestion, detection and
// notice logging. Delivery is FIFO per subscription; a subscription may cover
// several topics, in which case it observes them in global publish order.
// Queues are bounded and publishers block when any target queue is full.

#include <algorithm>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <initializer_list>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <variant>
#include <vector>

#include "tsnzeek/notice.hpp"
#include "tsnzeek/wire.hpp"

namespace tsnzeek {

enum class Topic : std::uint8_t { Frer, SrpTalker, SrpListener, Notice };

inline std::string_view to_string(Topic t) noexcept {
  switch (t) {
    case Topic::Frer: return "FRER";
    case Topic::SrpTalker: return "SRP talker";
    case Topic::SrpListener: return "SRP listener";
    case Topic::Notice: return "notice";
  }
  return "";
}

using BusPayload = std::variant<SrpTalkerAdvertise, SrpListenerResponse, RTagFrame, Notice>;

struct BusEvent {
  Topic topic{};
  double timestamp = 0.0;  // capture clock, seconds
  BusPayload payload;
};

[[nodiscard]] inline Topic topic_of(const BusPayload& p) noexcept {
  struct Visitor {
    Topic operator()(const SrpTalkerAdvertise&) const { return Topic::SrpTalker; }
    Topic operator()(const SrpListenerResponse&) const { return Topic::SrpListener; }
    Topic operator()(const RTagFrame&) const { return Topic::Frer; }
    Topic operator()(const Notice&) const { return Topic::Notice; }
  };
  return std::visit(Visitor{}, p);
}

[[nodiscard]] inline BusEvent make_event(double ts, TsnFrame frame) {
  BusPayload payload = std::visit([](auto&& m) -> BusPayload { return std::move(m); },
                                  std::move(frame));
  Topic t = topic_of(payload);
  return BusEvent{t, ts, std::move(payload)};
}

[[nodiscard]] inline BusEvent make_event(double ts, Notice n) {
  return BusEvent{Topic::Notice, ts, std::move(n)};
}

class BusClosed : public std::runtime_error {
public:
  BusClosed() : std::runtime_error("event bus is closed") {}
};

namespace detail {
struct BusQueue {
  std::uint8_t topic_mask = 0;
  std::deque<BusEvent> events;
  std::condition_variable not_empty;
};

struct BusState {
  explicit BusState(std::size_t cap) : capacity(cap) {}
  std::mutex mutex;
  std::condition_variable not_full;
  std::vector<std::shared_ptr<BusQueue>> queues;
  std::size_t capacity;
  bool closed = false;
};

constexpr std::uint8_t topic_bit(Topic t) noexcept {
  return static_cast<std::uint8_t>(1U << static_cast<unsigned>(t));
}
}  // namespace detail

/// Handle returned by EventBus::subscribe. Unregisters itself on destruction.
class Subscription {
public:
  Subscription(Subscription&&) noexcept = default;
  Subscription& operator=(Subscription&& other) noexcept {
    if (this != &other) {
      unregister();
      state_ = std::move(other.state_);
      queue_ = std::move(other.queue_);
    }
    return *this;
  }
  Subscription(const Subscription&) = delete;
  Subscription& operator=(const Subscription&) = delete;
  ~Subscription() { unregister(); }

  /// Blocks until an event arrives. Returns nullopt once the bus is closed and
  /// this subscription's queue is drained.
  std::optional<BusEvent> next() {
    std::unique_lock lock(state_->mutex);
    queue_->not_empty.wait(lock, [&] { return !queue_->events.empty() || state_->closed; });
    return pop_locked();
  }

  /// Non-blocking variant of next().
  std::optional<BusEvent> try_next() {
    std::lock_guard lock(state_->mutex);
    return pop_locked();
  }

  [[nodiscard]] std::size_t pending() const {
    std::lock_guard lock(state_->mutex);
    return queue_->events.size();
  }

private:
  friend class EventBus;
  Subscription(std::shared_ptr<detail::BusState> state, std::shared_ptr<detail::BusQueue> queue)
      : state_(std::move(state)), queue_(std::move(queue)) {}

  std::optional<BusEvent> pop_locked() {
    if (queue_->events.empty()) return std::nullopt;
    BusEvent ev = std::move(queue_->events.front());
    queue_->events.pop_front();
    state_->not_full.notify_all();
    return ev;
  }

  void unregister() noexcept {
    if (!state_) return;
    {
      std::lock_guard lock(state_->mutex);
      auto& qs = state_->queues;
      qs.erase(std::remove(qs.begin(), qs.end(), queue_), qs.end());
    }
    state_->not_full.notify_all();
    state_.reset();
    queue_.reset();
  }

  std::shared_ptr<detail::BusState> state_;
  std::shared_ptr<detail::BusQueue> queue_;
};

class EventBus {
public:
  static constexpr std::size_t kDefaultCapacity = 4096;

  explicit EventBus(std::size_t queue_capacity = kDefaultCapacity)
      : state_(std::make_shared<detail::BusState>(std::max<std::size_t>(1, queue_capacity))) {}

  EventBus(const EventBus&) = delete;
  EventBus& operator=(const EventBus&) = delete;
  ~EventBus() { close(); }

  /// Delivers a copy of the event to every current subscriber of its topic.
  /// Throws std::invalid_argument if the payload does not match the topic and
  /// BusClosed if the bus was closed before or while waiting for queue space.
  void publish(BusEvent event) {
    if (topic_of(event.payload) != event.topic) {
      throw std::invalid_argument("bus event payload does not match topic");
    }
    const auto bit = detail::topic_bit(event.topic);
    std::unique_lock lock(state_->mutex);
    if (state_->closed) throw BusClosed();

    auto has_room = [&] {
      return std::all_of(state_->queues.begin(), state_->queues.end(), [&](const auto& q) {
        return (q->topic_mask & bit) == 0 || q->events.size() < state_->capacity;
      });
    };
    state_->not_full.wait(lock, [&] { return state_->closed || has_room(); });
    if (state_->closed) throw BusClosed();

    detail::BusQueue* last = nullptr;
    for (auto& q : state_->queues) {
      if (q->topic_mask & bit) last = q.get();
    }
    for (auto& q : state_->queues) {
      if ((q->topic_mask & bit) == 0) continue;
      if (q.get() == last) {
        q->events.push_back(std::move(event));
      } else {
        q->events.push_back(event);
      }
      q->not_empty.notify_one();
    }
  }

  Subscription subscribe(Topic topic) { return subscribe({topic}); }

  /// One queue for several topics; events keep their relative publish order.
  Subscription subscribe(std::initializer_list<Topic> topics) {
    auto q = std::make_shared<detail::BusQueue>();
    for (Topic t : topics) q->topic_mask |= detail::topic_bit(t);
    std::lock_guard lock(state_->mutex);
    if (state_->closed) throw BusClosed();
    state_->queues.push_back(q);
    return Subscription(state_, std::move(q));
  }

  /// Rejects further publishes. Subscribers drain what is queued, then see nullopt.
  void close() {
    {
      std::lock_guard lock(state_->mutex);
      if (state_->closed) return;
      state_->closed = true;
      for (auto& q : state_->queues) q->not_empty.notify_all();
    }
    state_->not_full.notify_all();
  }

  [[nodiscard]] bool closed() const {
    std::lock_guard lock(state_->mutex);
    return state_->closed;
  }

private:
  std::shared_ptr<detail::BusState> state_;
};

}  // namespace tsnzeek
