#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace omnifuse {

using Nanos = std::chrono::nanoseconds;
using TickId = std::uint64_t;

// All hub time reads go through a Clock so tests can drive time by hand.
class Clock {
  public:
    virtual ~Clock() = default;
    virtual Nanos now() const = 0;
    // Blocks until notified or `deadline` (on this clock) passes. Spurious
    // wake-ups are allowed; callers re-check their predicate.
    virtual void wait_until(std::unique_lock<std::mutex> &lock, std::condition_variable &cv, Nanos deadline) = 0;
    // Called whenever time jumps. Returns a handle for unsubscribe.
    virtual std::size_t subscribe(std::function<void()>) { return 0; }
    virtual void unsubscribe(std::size_t) {}
};

class SteadyClock final : public Clock {
  public:
    Nanos now() const override;
    void wait_until(std::unique_lock<std::mutex> &lock, std::condition_variable &cv, Nanos deadline) override;
};

// Time moves only through advance()/set().
class VirtualClock final : public Clock {
  public:
    explicit VirtualClock(Nanos start = Nanos{0}) : now_(start.count()) {}

    Nanos now() const override { return Nanos{now_.load(std::memory_order_acquire)}; }
    void wait_until(std::unique_lock<std::mutex> &lock, std::condition_variable &cv, Nanos deadline) override;
    std::size_t subscribe(std::function<void()> fn) override;
    void unsubscribe(std::size_t handle) override;

    void advance(Nanos d);
    void set(Nanos t);

  private:
    void notify();

    std::atomic<std::int64_t> now_;
    std::mutex listeners_mu_;
    std::map<std::size_t, std::function<void()>> listeners_;
    std::size_t next_handle_ = 1;
};

struct RadarDetection {
    Eigen::Vector2d xz = Eigen::Vector2d::Zero(); // meters
};

struct CameraPayload {
    std::uint64_t frame_id = 0;
    Nanos timestamp{0};
};

struct RadarSnapshot {
    int radar_id = 0;
    TickId tick = 0;
    Nanos capture_time{0};
    std::vector<RadarDetection> detections;
    bool present = false; // false for radars missing from a Partial frame
};

enum class AssemblyStatus { Complete, Partial };

struct FusedFrame {
    TickId tick = 0;
    CameraPayload camera;
    std::vector<RadarSnapshot> radar_snapshots; // one per registered radar, registration order
    AssemblyStatus status = AssemblyStatus::Complete;
    std::vector<int> missing_radars;
};

struct HubOptions {
    Nanos timeout = std::chrono::milliseconds(50);
    // Ticks issued but not yet assembled; beyond this the oldest is dropped.
    std::size_t queue_capacity = 8;
};

// Tick-and-queue synchronization of one camera with N radars. The camera
// thread calls tick() and assemble(); each radar thread waits for requests
// with await_request() and answers with submit_snapshot().
class SensorHub {
  public:
    SensorHub(std::vector<int> radar_ids, HubOptions opts = {}, std::shared_ptr<Clock> clock = nullptr);
    ~SensorHub();
    SensorHub(const SensorHub &) = delete;
    SensorHub &operator=(const SensorHub &) = delete;

    // Opens a new tick and closes the previous one to submissions.
    // Throws LifecycleError once stopped.
    TickId tick(CameraPayload payload);

    // Accepted iff `tick` is the open tick, its deadline has not passed and
    // this radar has not answered yet. Throws RegistrationError for unknown ids.
    bool submit_snapshot(int radar_id, TickId tick, std::vector<RadarDetection> detections,
                         std::optional<Nanos> capture_time = std::nullopt);

    // Waits for every radar or the tick deadline, whichever comes first.
    // Ticks must be assembled oldest first; anything else is a LifecycleError.
    FusedFrame assemble(TickId tick);

    // Radar side: blocks until a tick newer than `after` is open. Returns
    // nullopt after stop().
    std::optional<TickId> await_request(int radar_id, TickId after);

    void stop();
    bool running() const;

    std::size_t radar_count() const { return radar_ids_.size(); }
    TickId tick_counter() const;
    std::uint64_t stale_rejections() const;
    std::uint64_t duplicate_rejections() const;
    std::uint64_t dropped_ticks() const;
    // Snapshots received so far for a pending tick (0 if unknown).
    std::size_t received(TickId tick) const;
    Clock &clock() { return *clock_; }

  private:
    struct Pending {
        TickId id = 0;
        CameraPayload camera;
        Nanos deadline{0};
        bool open = true;
        std::size_t received = 0;
        std::vector<std::optional<RadarSnapshot>> slots;
    };

    std::size_t slot_of(int radar_id) const;

    std::vector<int> radar_ids_;
    HubOptions opts_;
    std::shared_ptr<Clock> clock_;
    std::size_t clock_handle_ = 0;

    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<Pending> pending_;
    TickId counter_ = 0;
    bool stopped_ = false;
    std::uint64_t stale_ = 0, duplicates_ = 0, dropped_ = 0;
};

enum class BackpressurePolicy { Block, DropOldest };

// Bounded multi-producer / multi-consumer FIFO.
template <typename T>
class BoundedQueue {
  public:
    explicit BoundedQueue(std::size_t capacity, BackpressurePolicy policy = BackpressurePolicy::Block)
        : capacity_(capacity == 0 ? 1 : capacity), policy_(policy) {}

    // Returns false once closed.
    bool push(T item) {
        std::unique_lock lk(mu_);
        if (policy_ == BackpressurePolicy::Block) {
            not_full_.wait(lk, [&] { return closed_ || items_.size() < capacity_; });
        } else if (items_.size() >= capacity_) {
            items_.pop_front();
            ++dropped_;
        }
        if (closed_)
            return false;
        items_.push_back(std::move(item));
        high_water_ = std::max(high_water_, items_.size());
        not_empty_.notify_one();
        return true;
    }

    // nullopt once closed and drained.
    std::optional<T> pop() {
        std::unique_lock lk(mu_);
        not_empty_.wait(lk, [&] { return closed_ || !items_.empty(); });
        if (items_.empty())
            return std::nullopt;
        T item = std::move(items_.front());
        items_.pop_front();
        not_full_.notify_one();
        return item;
    }

    void close() {
        std::lock_guard lk(mu_);
        closed_ = true;
        not_empty_.notify_all();
        not_full_.notify_all();
    }

    std::size_t size() const {
        std::lock_guard lk(mu_);
        return items_.size();
    }
    std::size_t high_water() const {
        std::lock_guard lk(mu_);
        return high_water_;
    }
    std::uint64_t dropped() const {
        std::lock_guard lk(mu_);
        return dropped_;
    }
    std::size_t capacity() const { return capacity_; }

  private:
    const std::size_t capacity_;
    const BackpressurePolicy policy_;
    mutable std::mutex mu_;
    std::condition_variable not_empty_, not_full_;
    std::deque<T> items_;
    bool closed_ = false;
    std::size_t high_water_ = 0;
    std::uint64_t dropped_ = 0;
};

} // namespace omnifuse
