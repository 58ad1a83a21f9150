/*
 * Copyright 2026 The Tilesim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

#include "tilesim/types.hpp"

namespace tilesim {

// A clock with edges at integer multiples of its period (phase 0).
class ClockDomain {
public:
    ClockDomain() = default;
    // freq_hz must divide one tick-second evenly; 4 GHz gives a 250-tick
    // period, 1 GHz gives 1000.
    explicit ClockDomain(std::uint64_t freq_hz);

    SimTime period() const { return period_; }
    std::uint64_t freq_hz() const { return freq_hz_; }

    // n-th rising edge strictly after t. With a 1000-tick period,
    // next_edge(0) == 1000, next_edge(999) == 1000, next_edge(1000) == 2000.
    SimTime next_edge(SimTime t, std::uint64_t n = 1) const {
        return (t / period_ + n) * period_;
    }

    // Cycle index containing tick t.
    std::uint64_t cycle_of(SimTime t) const { return t / period_; }

    SimTime cycles(std::uint64_t n) const { return n * period_; }

private:
    std::uint64_t freq_hz_ = 0;
    SimTime period_ = 1;
};

enum class StopReason {
    drained,   // event queue empty
    limit,     // time limit hit with work outstanding
    stopped,   // a handler asked the kernel to stop (workload finished)
};

// Global discrete-event scheduler. Events at the same tick run in insertion
// order, which together with seeded RNG makes whole runs reproducible.
class Kernel {
public:
    SimTime now() const { return now_; }

    void schedule_at(SimTime t, std::function<void()> fn);
    void schedule_in(SimTime dt, std::function<void()> fn) { schedule_at(now_ + dt, std::move(fn)); }
    void schedule_edge(const ClockDomain& clk, std::uint64_t n, std::function<void()> fn) {
        schedule_at(clk.next_edge(now_, n), std::move(fn));
    }

    // Runs events with timestamp <= limit in order. Returns why it returned.
    StopReason run_until(SimTime limit);

    void request_stop() { stop_requested_ = true; }
    bool stop_requested() const { return stop_requested_; }

    std::uint64_t events_processed() const { return events_processed_; }
    bool empty() const { return queue_.empty(); }

    // Hook invoked after every processed event; used by the protocol
    // invariant scanner in checked runs. Null by default.
    std::function<void()> post_event_hook;

private:
    struct Ev {
        SimTime when;
        std::uint64_t seq;
        std::function<void()> fn;
    };
    struct Later {
        bool operator()(const Ev& a, const Ev& b) const {
            if (a.when != b.when) return a.when > b.when;
            return a.seq > b.seq;
        }
    };

    std::priority_queue<Ev, std::vector<Ev>, Later> queue_;
    SimTime now_ = 0;
    std::uint64_t next_seq_ = 0;
    std::uint64_t events_processed_ = 0;
    bool stop_requested_ = false;
};

}  // namespace tilesim
