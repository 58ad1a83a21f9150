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
#include <map>
#include <optional>
#include <vector>

#include "tilesim/backing_store.hpp"
#include "tilesim/types.hpp"

namespace tilesim {

// x86-style 4-level radix tree with 4 KiB leaves and 2 MiB entries at the PD
// level. Entry layout: bit 0 present, bit 1 huge (PD level only), bits 12+
// physical frame. Tables live in simulated physical memory so timed walks
// generate real cache traffic.
inline constexpr int kPteShiftPresent = 0;
inline constexpr int kPteShiftHuge = 1;
inline constexpr std::uint64_t kPteAddrMask = ((1ull << 52) - 1) & ~0xFFFull;

inline constexpr unsigned pt_index(Addr vaddr, int level) {
    return static_cast<unsigned>((vaddr >> (kPageShift + 9 * (level - 1))) & 0x1FF);
}

enum class PagePolicy : std::uint8_t {
    thp,        // 2 MiB pages for regions of at least 2 MiB, else 4 KiB
    small_only, // 4 KiB everywhere
    huge_only,  // 2 MiB everywhere (lengths rounded up)
};

std::uint32_t page_shift_for(PagePolicy policy, std::uint64_t length);

struct Translation {
    Addr paddr = 0;
    std::uint32_t page_shift = kPageShift;
};

// One address space per simulation. Frames come from a bump allocator over a
// data region; table nodes from a separate reserved region so they never
// collide with workload data.
class AddressSpace {
public:
    using Writer = std::function<void(Addr, const void*, std::size_t)>;
    using Reader = std::function<void(Addr, void*, std::size_t)>;

    // `write` defaults to storing straight into `phys`; runs with a shadow
    // image pass a hook that updates both.
    AddressSpace(BackingStore& phys, Addr table_base, std::uint64_t table_bytes, Addr frame_base,
                 std::uint64_t frame_bytes, Writer write = nullptr);

    struct Region {
        Addr vbase = 0;
        std::uint64_t length = 0;
        std::uint32_t page_shift = kPageShift;
        Addr pbase = 0;  // frames are contiguous per region
    };

    // Maps [vaddr, vaddr+length) with pages of 1 << page_shift bytes.
    // Throws std::invalid_argument on misalignment or overlap,
    // std::runtime_error on frame or table exhaustion.
    const Region& map_region(Addr vaddr, std::uint64_t length, std::uint32_t page_shift);

    // Software walker over the in-memory tree; the reference for both the
    // timed and the functional translation paths.
    std::optional<Translation> translate(Addr vaddr) const;

    Addr root() const { return root_; }
    const std::vector<Region>& regions() const { return regions_; }
    std::uint64_t frames_used() const { return frame_cursor_ - frame_base_; }
    std::uint64_t tables_used() const { return (table_cursor_ - table_base_) / kPageBytes; }

private:
    Addr alloc_table();
    Addr alloc_frames(std::uint64_t bytes, std::uint64_t align);
    void install_pte(Addr vaddr, Addr frame, std::uint32_t page_shift);
    std::uint64_t read_pte(Addr entry_addr) const { return phys_.read_uint(entry_addr, 8); }
    void write_pte(Addr entry_addr, std::uint64_t value);

    BackingStore& phys_;
    Writer write_;
    Addr table_base_, table_cursor_, table_end_;
    Addr frame_base_, frame_cursor_, frame_end_;
    Addr root_ = 0;
    std::vector<Region> regions_;
    std::map<Addr, std::uint64_t> vmap_;  // vbase -> length, for overlap checks
};

// Untimed setup write at a virtual address, page chunk by page chunk.
// Throws std::invalid_argument when any page in the range is unmapped.
void poke_virtual(const AddressSpace& as, const AddressSpace::Writer& write, Addr vaddr,
                  const void* data, std::size_t n);

// Untimed read back; the functional counterpart used by reference oracles.
void peek_virtual(const AddressSpace& as, const BackingStore& phys, Addr vaddr, void* out,
                  std::size_t n);

// Same, but through a caller-supplied physical reader (e.g. a coherent cache
// peek instead of raw memory).
void peek_virtual(const AddressSpace& as, const AddressSpace::Reader& read, Addr vaddr, void* out,
                  std::size_t n);

}  // namespace tilesim
