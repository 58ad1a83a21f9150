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
#include <cstddef>

namespace tilesim {

// Simulated time in integer ticks. One tick is one picosecond, so a 4 GHz
// clock has a 250-tick period and a 1 GHz clock a 1000-tick period.
using SimTime = std::uint64_t;

constexpr SimTime kTicksPerSecond = 1'000'000'000'000ull;

// Physical and virtual addresses. The simulated machine is 64-bit but only a
// few GiB of physical space are ever mapped.
using Addr = std::uint64_t;

constexpr std::uint32_t kLineBytes = 64;
constexpr std::uint32_t kLineShift = 6;
constexpr std::uint32_t kPageBytes = 4096;
constexpr std::uint32_t kPageShift = 12;
constexpr std::uint64_t kHugePageBytes = 2ull << 20;
constexpr std::uint32_t kHugePageShift = 21;

constexpr Addr line_of(Addr a) { return a & ~static_cast<Addr>(kLineBytes - 1); }
constexpr std::uint32_t line_offset(Addr a) { return static_cast<std::uint32_t>(a & (kLineBytes - 1)); }
constexpr Addr page_of(Addr a) { return a & ~static_cast<Addr>(kPageBytes - 1); }
constexpr Addr huge_page_of(Addr a) { return a & ~static_cast<Addr>(kHugePageBytes - 1); }

constexpr Addr align_up(Addr a, std::uint64_t align) { return (a + align - 1) & ~(align - 1); }

using CoreId = std::uint32_t;

// Identifies a coherence participant on the mesh: private cache stacks of
// cores, the engine-side cache, L3 home slices and memory channels all get
// distinct agent ids.
using AgentId = std::uint32_t;
constexpr AgentId kInvalidAgent = ~0u;

}  // namespace tilesim
