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
#include <vector>

#include "tilesim/types.hpp"

namespace tilesim {

struct StridePrefetcherParams {
    bool enabled = true;
    std::uint32_t degree = 4;
    std::uint32_t table_entries = 64;
};

// Per-stream stride detector. A stream confirms after two consecutive equal
// strides; on confirmation the full ramp up to `degree` strides ahead is
// issued, afterwards one new target per access keeps the lead at `degree`.
class StridePrefetcher {
public:
    explicit StridePrefetcher(const StridePrefetcherParams& params) : params_(params) {
        table_.resize(params.table_entries);
    }

    // Returns line-aligned prefetch targets for this access, possibly empty.
    std::vector<Addr> observe(std::uint64_t stream_id, Addr addr);

private:
    struct Entry {
        bool used = false;
        std::uint64_t stream = 0;
        Addr last_addr = 0;
        std::int64_t stride = 0;
        std::uint32_t confirmations = 0;
        std::uint64_t lru = 0;
    };

    StridePrefetcherParams params_;
    std::vector<Entry> table_;
    std::uint64_t lru_clock_ = 0;
};

}  // namespace tilesim
