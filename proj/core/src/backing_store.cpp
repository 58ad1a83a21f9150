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

#include "tilesim/backing_store.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

namespace tilesim {

void BackingStore::check_range(Addr a, std::size_t n) const {
    if (a + n > capacity_ || a + n < a) {
        throw std::out_of_range("physical access beyond installed memory");
    }
}

const BackingStore::Page* BackingStore::find_page(Addr a) const {
    auto it = pages_.find(a >> kPageShift);
    return it == pages_.end() ? nullptr : it->second.get();
}

BackingStore::Page& BackingStore::touch_page(Addr a) {
    auto& slot = pages_[a >> kPageShift];
    if (!slot) slot = std::make_unique<Page>();
    return *slot;
}

void BackingStore::read(Addr a, void* out, std::size_t n) const {
    check_range(a, n);
    auto* dst = static_cast<std::uint8_t*>(out);
    while (n > 0) {
        const std::size_t in_page = std::min<std::size_t>(n, kPageBytes - (a & (kPageBytes - 1)));
        if (const Page* p = find_page(a)) {
            std::memcpy(dst, p->data() + (a & (kPageBytes - 1)), in_page);
        } else {
            std::memset(dst, 0, in_page);
        }
        a += in_page;
        dst += in_page;
        n -= in_page;
    }
}

void BackingStore::write(Addr a, const void* in, std::size_t n) {
    check_range(a, n);
    const auto* src = static_cast<const std::uint8_t*>(in);
    while (n > 0) {
        const std::size_t in_page = std::min<std::size_t>(n, kPageBytes - (a & (kPageBytes - 1)));
        std::memcpy(touch_page(a).data() + (a & (kPageBytes - 1)), src, in_page);
        a += in_page;
        src += in_page;
        n -= in_page;
    }
}

std::array<std::uint8_t, kLineBytes> BackingStore::read_line(Addr line) const {
    std::array<std::uint8_t, kLineBytes> out;
    read(line, out.data(), out.size());
    return out;
}

void BackingStore::write_line(Addr line, const std::array<std::uint8_t, kLineBytes>& data) {
    write(line, data.data(), data.size());
}

std::uint64_t BackingStore::read_uint(Addr a, std::size_t n) const {
    std::uint64_t v = 0;
    read(a, &v, n);  // little-endian host assumed (x86-64/aarch64-le)
    return v;
}

void BackingStore::write_uint(Addr a, std::uint64_t v, std::size_t n) {
    write(a, &v, n);
}

bool BackingStore::same_image(const BackingStore& other) const {
    static const Page kZero{};
    auto covers = [](const BackingStore& a, const BackingStore& b) {
        for (const auto& [idx, page] : a.pages_) {
            auto it = b.pages_.find(idx);
            const Page& theirs = it == b.pages_.end() ? kZero : *it->second;
            if (std::memcmp(page->data(), theirs.data(), kPageBytes) != 0) return false;
        }
        return true;
    };
    return covers(*this, other) && covers(other, *this);
}

}  // namespace tilesim
