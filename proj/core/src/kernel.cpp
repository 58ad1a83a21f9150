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

#include "tilesim/kernel.hpp"

#include <cassert>
#include <stdexcept>

namespace tilesim {

ClockDomain::ClockDomain(std::uint64_t freq_hz) : freq_hz_(freq_hz) {
    if (freq_hz == 0 || kTicksPerSecond % freq_hz != 0) {
        throw std::invalid_argument("clock frequency must divide 1e12 ticks/s");
    }
    period_ = kTicksPerSecond / freq_hz;
}

void Kernel::schedule_at(SimTime t, std::function<void()> fn) {
    assert(t >= now_ && "cannot schedule into the past");
    queue_.push(Ev{t, next_seq_++, std::move(fn)});
}

StopReason Kernel::run_until(SimTime limit) {
    while (!queue_.empty()) {
        if (stop_requested_) return StopReason::stopped;
        const Ev& top = queue_.top();
        if (top.when > limit) {
            now_ = limit;
            return StopReason::limit;
        }
        // Move the handler out before popping so it can schedule freely.
        auto fn = std::move(const_cast<Ev&>(top).fn);
        now_ = top.when;
        queue_.pop();
        fn();
        ++events_processed_;
        if (post_event_hook) post_event_hook();
    }
    if (stop_requested_) return StopReason::stopped;
    now_ = limit;
    return StopReason::drained;
}

}  // namespace tilesim
