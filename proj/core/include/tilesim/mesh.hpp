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
#include <optional>
#include <string>
#include <vector>

namespace tilesim {

enum class TileKind : std::uint8_t { core, l3only, engine, mem, empty };

struct Coord {
    std::uint32_t x = 0;  // column
    std::uint32_t y = 0;  // row
    friend bool operator==(const Coord&, const Coord&) = default;
};

// Tile grid parsed from token rows, e.g. "C L L M". Tokens: C = core tile,
// L = L3-only tile, E = engine tile, M = memory tile, . = empty.
// Core and L3-only tiles each host one shared-L3 slice.
class MeshDescription {
public:
    static MeshDescription parse(const std::vector<std::string>& rows);
    static std::vector<std::string> default_rows();

    std::uint32_t width() const { return width_; }
    std::uint32_t height() const { return height_; }
    TileKind at(Coord c) const { return tiles_[c.y * width_ + c.x]; }

    // All orderings below are row-major scan order, which fixes core ids,
    // slice ids and memory-tile ids deterministically.
    const std::vector<Coord>& core_tiles() const { return cores_; }
    const std::vector<Coord>& slice_tiles() const { return slices_; }
    const std::vector<Coord>& mem_tiles() const { return mems_; }
    std::optional<Coord> engine_tile() const { return engine_; }

    std::vector<std::string> to_rows() const;

    static std::uint32_t hops(Coord a, Coord b);
    // Dimension-ordered path: X first, then Y. Returns intermediate tiles
    // plus the destination; empty when src == dst.
    static std::vector<Coord> xy_route(Coord src, Coord dst);

private:
    std::uint32_t width_ = 0;
    std::uint32_t height_ = 0;
    std::vector<TileKind> tiles_;
    std::vector<Coord> cores_;
    std::vector<Coord> slices_;
    std::vector<Coord> mems_;
    std::optional<Coord> engine_;
};

}  // namespace tilesim
