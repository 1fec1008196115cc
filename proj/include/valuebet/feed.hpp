#pragma once

#include "valuebet/market_data.hpp"

#include <chrono>
#include <functional>
#include <optional>
#include <thread>
#include <vector>

namespace valuebet {

/// Source of live quotes. Implementations must yield events with
/// non-decreasing observed_at; nullopt means the feed is exhausted.
class FeedAdapter {
public:
    virtual ~FeedAdapter() = default;
    virtual std::optional<QuoteEvent> next() = 0;
};

/// Replays a recorded quote stream. With speedup > 0 the gaps between
/// consecutive events are slept, divided by speedup; speedup <= 0 replays as
/// fast as the consumer pulls.
class ReplayFeed final : public FeedAdapter {
public:
    using Sleeper = std::function<void(std::chrono::duration<double>)>;

    ReplayFeed(std::vector<QuoteEvent> events, double speedup = 0.0, Sleeper sleeper = default_sleeper())
        : events_(std::move(events)), speedup_(speedup), sleeper_(std::move(sleeper))
    {
    }

    explicit ReplayFeed(const Dataset& ds, double speedup = 0.0, Sleeper sleeper = default_sleeper())
        : ReplayFeed(std::vector<QuoteEvent>(ds.quotes().begin(), ds.quotes().end()), speedup, std::move(sleeper))
    {
    }

    std::optional<QuoteEvent> next() override
    {
        if (pos_ >= events_.size())
            return std::nullopt;
        const auto& ev = events_[pos_];
        if (speedup_ > 0.0 && pos_ > 0) {
            auto gap = ev.observed_at - events_[pos_ - 1].observed_at;
            if (gap.count() > 0)
                sleeper_(std::chrono::duration<double>(static_cast<double>(gap.count()) / speedup_));
        }
        return events_[pos_++];
    }

    std::size_t remaining() const noexcept { return events_.size() - pos_; }

    static Sleeper default_sleeper()
    {
        return [](std::chrono::duration<double> d) { std::this_thread::sleep_for(d); };
    }

private:
    std::vector<QuoteEvent> events_;
    std::size_t pos_ = 0;
    double speedup_;
    Sleeper sleeper_;
};

} // namespace valuebet
