#include "omnifuse/sync.h"

#include <algorithm>
#include <string>

#include "omnifuse/errors.h"

namespace omnifuse {

Nanos SteadyClock::now() const {
    return std::chrono::duration_cast<Nanos>(std::chrono::steady_clock::now().time_since_epoch());
}

void SteadyClock::wait_until(std::unique_lock<std::mutex> &lock, std::condition_variable &cv, Nanos deadline) {
    cv.wait_until(lock, std::chrono::steady_clock::time_point(
                            std::chrono::duration_cast<std::chrono::steady_clock::duration>(deadline)));
}

void VirtualClock::wait_until(std::unique_lock<std::mutex> &lock, std::condition_variable &cv, Nanos deadline) {
    if (now() >= deadline)
        return;
    // Woken by advance() through the owner's subscription, or by the owner.
    cv.wait(lock);
}

std::size_t VirtualClock::subscribe(std::function<void()> fn) {
    std::lock_guard lk(listeners_mu_);
    const std::size_t h = next_handle_++;
    listeners_.emplace(h, std::move(fn));
    return h;
}

void VirtualClock::unsubscribe(std::size_t handle) {
    std::lock_guard lk(listeners_mu_);
    listeners_.erase(handle);
}

void VirtualClock::advance(Nanos d) {
    now_.fetch_add(d.count(), std::memory_order_acq_rel);
    notify();
}

void VirtualClock::set(Nanos t) {
    now_.store(t.count(), std::memory_order_release);
    notify();
}

void VirtualClock::notify() {
    std::vector<std::function<void()>> fns;
    {
        std::lock_guard lk(listeners_mu_);
        for (auto &[h, fn] : listeners_)
            fns.push_back(fn);
    }
    for (auto &fn : fns)
        fn();
}

SensorHub::SensorHub(std::vector<int> radar_ids, HubOptions opts, std::shared_ptr<Clock> clock)
    : radar_ids_(std::move(radar_ids)), opts_(opts), clock_(clock ? std::move(clock) : std::make_shared<SteadyClock>()) {
    auto sorted = radar_ids_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw RegistrationError("duplicate radar id");
    if (opts_.queue_capacity == 0)
        opts_.queue_capacity = 1;
    // Taking the hub mutex before notifying closes the window between a
    // waiter's deadline check and its wait.
    clock_handle_ = clock_->subscribe([this] {
        { std::lock_guard lk(mu_); }
        cv_.notify_all();
    });
}

SensorHub::~SensorHub() {
    stop();
    clock_->unsubscribe(clock_handle_);
}

std::size_t SensorHub::slot_of(int radar_id) const {
    auto it = std::find(radar_ids_.begin(), radar_ids_.end(), radar_id);
    if (it == radar_ids_.end())
        throw RegistrationError("radar " + std::to_string(radar_id) + " is not registered");
    return static_cast<std::size_t>(it - radar_ids_.begin());
}

TickId SensorHub::tick(CameraPayload payload) {
    std::lock_guard lk(mu_);
    if (stopped_)
        throw LifecycleError("tick on a stopped hub");
    if (!pending_.empty())
        pending_.back().open = false;
    while (pending_.size() >= opts_.queue_capacity) {
        pending_.pop_front();
        ++dropped_;
    }
    Pending p;
    p.id = ++counter_;
    p.camera = payload;
    p.deadline = clock_->now() + opts_.timeout;
    p.slots.resize(radar_ids_.size());
    pending_.push_back(std::move(p));
    cv_.notify_all();
    return counter_;
}

bool SensorHub::submit_snapshot(int radar_id, TickId tick, std::vector<RadarDetection> detections,
                                std::optional<Nanos> capture_time) {
    const std::size_t slot = slot_of(radar_id);
    std::lock_guard lk(mu_);
    const Nanos now = clock_->now();
    if (pending_.empty() || pending_.back().id != tick || !pending_.back().open || now >= pending_.back().deadline) {
        ++stale_;
        return false;
    }
    Pending &p = pending_.back();
    if (p.slots[slot]) {
        ++duplicates_;
        return false;
    }
    RadarSnapshot snap;
    snap.radar_id = radar_id;
    snap.tick = tick;
    snap.capture_time = capture_time.value_or(now);
    snap.detections = std::move(detections);
    snap.present = true;
    p.slots[slot] = std::move(snap);
    ++p.received;
    cv_.notify_all();
    return true;
}

FusedFrame SensorHub::assemble(TickId tick) {
    std::unique_lock lk(mu_);
    auto it = std::find_if(pending_.begin(), pending_.end(), [&](const Pending &p) { return p.id == tick; });
    if (it == pending_.end())
        throw LifecycleError("tick " + std::to_string(tick) + " is not pending");
    if (it != pending_.begin())
        throw LifecycleError("tick " + std::to_string(tick) + " assembled before older pending ticks");

    const std::size_t n = radar_ids_.size();
    while (pending_.front().open && pending_.front().received < n && !stopped_ &&
           clock_->now() < pending_.front().deadline) {
        clock_->wait_until(lk, cv_, pending_.front().deadline);
    }

    Pending p = std::move(pending_.front());
    pending_.pop_front();

    FusedFrame frame;
    frame.tick = p.id;
    frame.camera = p.camera;
    frame.radar_snapshots.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (p.slots[i]) {
            frame.radar_snapshots.push_back(std::move(*p.slots[i]));
        } else {
            RadarSnapshot missing;
            missing.radar_id = radar_ids_[i];
            missing.tick = p.id;
            frame.radar_snapshots.push_back(std::move(missing));
            frame.missing_radars.push_back(radar_ids_[i]);
        }
    }
    frame.status = frame.missing_radars.empty() ? AssemblyStatus::Complete : AssemblyStatus::Partial;
    return frame;
}

std::optional<TickId> SensorHub::await_request(int radar_id, TickId after) {
    slot_of(radar_id);
    std::unique_lock lk(mu_);
    cv_.wait(lk, [&] { return stopped_ || (!pending_.empty() && pending_.back().open && pending_.back().id > after); });
    if (stopped_)
        return std::nullopt;
    return pending_.back().id;
}

void SensorHub::stop() {
    {
        std::lock_guard lk(mu_);
        stopped_ = true;
    }
    cv_.notify_all();
}

bool SensorHub::running() const {
    std::lock_guard lk(mu_);
    return !stopped_;
}

TickId SensorHub::tick_counter() const {
    std::lock_guard lk(mu_);
    return counter_;
}

std::uint64_t SensorHub::stale_rejections() const {
    std::lock_guard lk(mu_);
    return stale_;
}

std::uint64_t SensorHub::duplicate_rejections() const {
    std::lock_guard lk(mu_);
    return duplicates_;
}

std::uint64_t SensorHub::dropped_ticks() const {
    std::lock_guard lk(mu_);
    return dropped_;
}

std::size_t SensorHub::received(TickId tick) const {
    std::lock_guard lk(mu_);
    for (const auto &p : pending_) {
        if (p.id == tick)
            return p.received;
    }
    return 0;
}

} // namespace omnifuse
