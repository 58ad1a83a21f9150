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

#include <array>
#include <cstdint>
#include <functional>

#include "tilesim/types.hpp"

namespace tilesim {

struct CacheResp {
    Addr paddr = 0;
    // Full line content at completion; readers extract their bytes.
    std::array<std::uint8_t, kLineBytes> line{};
    SimTime completed_at = 0;
};

// A physical-address request into a private cache stack. Write bytes sit at
// their line offsets in wdata with the matching bits set in wmask.
struct CacheReq {
    enum class Kind : std::uint8_t { read, write, ifetch, ptw_read, prefetch };

    Kind kind = Kind::read;
    Addr paddr = 0;  // [paddr, paddr+size) must stay within one line
    std::uint8_t size = 0;
    std::uint8_t pf_level = 2;    // prefetch fill depth: 1 fills L1D too, 2 stops at L2
    std::uint64_t stream_id = 0;  // stride-detector tag for reads
    std::array<std::uint8_t, kLineBytes> wdata{};
    std::uint64_t wmask = 0;
    std::function<void(const CacheResp&)> done;  // may be empty

    Addr line() const { return line_of(paddr); }
};

constexpr std::uint64_t byte_mask(std::uint32_t offset, std::uint32_t size) {
    const std::uint64_t ones = size >= 64 ? ~0ull : ((1ull << size) - 1);
    return ones << offset;
}

}  // namespace tilesim
