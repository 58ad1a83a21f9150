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

#include "tilesim/stride_prefetcher.hpp"

namespace tilesim {

std::vector<Addr> StridePrefetcher::observe(std::uint64_t stream_id, Addr addr) {
    std::vector<Addr> out;
    if (!params_.enabled || table_.empty()) return out;

    Entry* entry = nullptr;
    Entry* lru = &table_[0];
    for (Entry& e : table_) {
        if (e.used && e.stream == stream_id) {
            entry = &e;
            break;
        }
        if (!e.used || e.lru < lru->lru) lru = &e;
    }
    if (!entry) {
        entry = lru;
        *entry = Entry{};
        entry->used = true;
        entry->stream = stream_id;
        entry->last_addr = addr;
        entry->lru = ++lru_clock_;
        return out;
    }
    entry->lru = ++lru_clock_;

    const std::int64_t stride = static_cast<std::int64_t>(addr) - static_cast<std::int64_t>(entry->last_addr);
    if (stride == 0) return out;  // same address, keep state
    if (stride == entry->stride) {
        const bool just_confirmed = entry->confirmations == 1;
        if (entry->confirmations < 2) ++entry->confirmations;
        if (entry->confirmations >= 2) {
            // Full ramp on the confirming access, then steady one-ahead.
            const std::uint32_t first = just_confirmed ? 1 : params_.degree;
            Addr prev_line = line_of(addr);
            for (std::uint32_t i = first; i <= params_.degree; ++i) {
                const std::int64_t target =
                    static_cast<std::int64_t>(addr) + stride * static_cast<std::int64_t>(i);
                if (target < 0) break;
                const Addr tl = line_of(static_cast<Addr>(target));
                if (tl != prev_line) out.push_back(tl);
                prev_line = tl;
            }
        }
    } else {
        entry->stride = stride;
        entry->confirmations = 1;
    }
    entry->last_addr = addr;
    return out;
}

}  // namespace tilesim
