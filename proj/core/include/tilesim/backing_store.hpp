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
#include <memory>
#include <unordered_map>

#include "tilesim/types.hpp"

namespace tilesim {

// Sparse byte-addressable physical memory image, allocated in 4 KiB pages on
// first write. Reads of untouched pages return zeros. Also used as the shadow
// image by the data-value checker.
class BackingStore {
public:
    explicit BackingStore(std::uint64_t capacity_bytes) : capacity_(capacity_bytes) {}

    std::uint64_t capacity() const { return capacity_; }

    void read(Addr a, void* out, std::size_t n) const;
    void write(Addr a, const void* in, std::size_t n);

    std::array<std::uint8_t, kLineBytes> read_line(Addr line) const;
    void write_line(Addr line, const std::array<std::uint8_t, kLineBytes>& data);

    std::uint64_t read_uint(Addr a, std::size_t n) const;
    void write_uint(Addr a, std::uint64_t v, std::size_t n);

    // True when both images hold the same bytes everywhere (missing pages
    // compare equal to all-zero pages).
    bool same_image(const BackingStore& other) const;

    std::uint64_t pages_allocated() const { return pages_.size(); }

    // Throws std::out_of_range if [a, a+n) exceeds capacity.
    void check_range(Addr a, std::size_t n) const;

private:
    using Page = std::array<std::uint8_t, kPageBytes>;

    const Page* find_page(Addr a) const;
    Page& touch_page(Addr a);

    std::uint64_t capacity_;
    std::unordered_map<std::uint64_t, std::unique_ptr<Page>> pages_;
};

}  // namespace tilesim
