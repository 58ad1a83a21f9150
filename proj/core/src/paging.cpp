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

#include "tilesim/paging.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace tilesim {

std::uint32_t page_shift_for(PagePolicy policy, std::uint64_t length) {
    switch (policy) {
        case PagePolicy::small_only: return kPageShift;
        case PagePolicy::huge_only: return kHugePageShift;
        case PagePolicy::thp: return length >= kHugePageBytes ? kHugePageShift : kPageShift;
    }
    throw std::invalid_argument("bad page policy");
}

AddressSpace::AddressSpace(BackingStore& phys, Addr table_base, std::uint64_t table_bytes,
                           Addr frame_base, std::uint64_t frame_bytes, Writer write)
    : phys_(phys),
      write_(std::move(write)),
      table_base_(table_base),
      table_cursor_(table_base),
      table_end_(table_base + table_bytes),
      frame_base_(frame_base),
      frame_cursor_(frame_base),
      frame_end_(frame_base + frame_bytes) {
    if (!write_) write_ = [this](Addr a, const void* p, std::size_t n) { phys_.write(a, p, n); };
    if (table_base % kPageBytes != 0 || table_bytes % kPageBytes != 0)
        throw std::invalid_argument("table region must be page aligned");
    phys_.check_range(table_base, table_bytes);
    phys_.check_range(frame_base, frame_bytes);
    root_ = alloc_table();
}

Addr AddressSpace::alloc_table() {
    if (table_cursor_ + kPageBytes > table_end_) throw std::runtime_error("page-table space exhausted");
    Addr a = table_cursor_;
    table_cursor_ += kPageBytes;
    // Backing store reads unwritten ranges as zero, so fresh nodes need no
    // explicit clear.
    return a;
}

Addr AddressSpace::alloc_frames(std::uint64_t bytes, std::uint64_t align) {
    Addr a = align_up(frame_cursor_, align);
    if (a + bytes > frame_end_) throw std::runtime_error("frame space exhausted");
    frame_cursor_ = a + bytes;
    return a;
}

void AddressSpace::write_pte(Addr entry_addr, std::uint64_t value) {
    write_(entry_addr, &value, 8);
}

void AddressSpace::install_pte(Addr vaddr, Addr frame, std::uint32_t page_shift) {
    const int leaf_level = page_shift == kHugePageShift ? 2 : 1;
    Addr table = root_;
    for (int level = 4; level > leaf_level; --level) {
        const Addr entry_addr = table + pt_index(vaddr, level) * 8ull;
        std::uint64_t pte = read_pte(entry_addr);
        if (!(pte & (1ull << kPteShiftPresent))) {
            const Addr node = alloc_table();
            pte = node | (1ull << kPteShiftPresent);
            write_pte(entry_addr, pte);
        }
        assert(!(pte & (1ull << kPteShiftHuge)));
        table = pte & kPteAddrMask;
    }
    const Addr entry_addr = table + pt_index(vaddr, leaf_level) * 8ull;
    assert(!(read_pte(entry_addr) & (1ull << kPteShiftPresent)));
    std::uint64_t pte = frame | (1ull << kPteShiftPresent);
    if (leaf_level == 2) pte |= 1ull << kPteShiftHuge;
    write_pte(entry_addr, pte);
}

const AddressSpace::Region& AddressSpace::map_region(Addr vaddr, std::uint64_t length,
                                                     std::uint32_t page_shift) {
    if (page_shift != kPageShift && page_shift != kHugePageShift)
        throw std::invalid_argument("unsupported page size");
    const std::uint64_t page = 1ull << page_shift;
    if (length == 0 || vaddr % page != 0 || length % page != 0)
        throw std::invalid_argument("map range must be page aligned and non-empty");
    for (const auto& [vb, len] : vmap_)
        if (vaddr < vb + len && vb < vaddr + length)
            throw std::invalid_argument("map range overlaps existing region");

    Region r;
    r.vbase = vaddr;
    r.length = length;
    r.page_shift = page_shift;
    r.pbase = alloc_frames(length, page);
    for (std::uint64_t off = 0; off < length; off += page)
        install_pte(vaddr + off, r.pbase + off, page_shift);
    vmap_[vaddr] = length;
    regions_.push_back(r);
    return regions_.back();
}

namespace {

template <typename Fn>
void for_each_page_chunk(const AddressSpace& as, Addr vaddr, std::size_t n, Fn&& fn) {
    std::size_t done = 0;
    while (done < n) {
        const Addr va = vaddr + done;
        const auto t = as.translate(va);
        if (!t) throw std::invalid_argument("virtual range not mapped");
        const std::uint64_t page = 1ull << t->page_shift;
        const std::uint64_t room = page - (va & (page - 1));
        const std::size_t chunk = static_cast<std::size_t>(std::min<std::uint64_t>(room, n - done));
        fn(t->paddr, done, chunk);
        done += chunk;
    }
}

}  // namespace

void poke_virtual(const AddressSpace& as, const AddressSpace::Writer& write, Addr vaddr,
                  const void* data, std::size_t n) {
    const auto* bytes = static_cast<const std::uint8_t*>(data);
    for_each_page_chunk(as, vaddr, n, [&](Addr paddr, std::size_t off, std::size_t chunk) {
        write(paddr, bytes + off, chunk);
    });
}

void peek_virtual(const AddressSpace& as, const BackingStore& phys, Addr vaddr, void* out,
                  std::size_t n) {
    auto* bytes = static_cast<std::uint8_t*>(out);
    for_each_page_chunk(as, vaddr, n, [&](Addr paddr, std::size_t off, std::size_t chunk) {
        phys.read(paddr, bytes + off, chunk);
    });
}

void peek_virtual(const AddressSpace& as, const AddressSpace::Reader& read, Addr vaddr, void* out,
                  std::size_t n) {
    auto* bytes = static_cast<std::uint8_t*>(out);
    for_each_page_chunk(as, vaddr, n, [&](Addr paddr, std::size_t off, std::size_t chunk) {
        read(paddr, bytes + off, chunk);
    });
}

std::optional<Translation> AddressSpace::translate(Addr vaddr) const {
    Addr table = root_;
    for (int level = 4; level >= 1; --level) {
        const std::uint64_t pte = read_pte(table + pt_index(vaddr, level) * 8ull);
        if (!(pte & (1ull << kPteShiftPresent))) return std::nullopt;
        if (level == 2 && (pte & (1ull << kPteShiftHuge)))
            return Translation{(pte & kPteAddrMask) + (vaddr & (kHugePageBytes - 1)),
                               kHugePageShift};
        if (level == 1)
            return Translation{(pte & kPteAddrMask) + (vaddr & (kPageBytes - 1)), kPageShift};
        table = pte & kPteAddrMask;
    }
    return std::nullopt;
}

}  // namespace tilesim
