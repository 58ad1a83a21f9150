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

#include "tilesim/mesh.hpp"

#include <cstdlib>
#include <stdexcept>

namespace tilesim {

namespace {

TileKind kind_of_token(char c) {
    switch (c) {
        case 'C': return TileKind::core;
        case 'L': return TileKind::l3only;
        case 'E': return TileKind::engine;
        case 'M': return TileKind::mem;
        case '.': return TileKind::empty;
        default: throw std::invalid_argument(std::string("unknown tile token '") + c + "'");
    }
}

char token_of_kind(TileKind k) {
    switch (k) {
        case TileKind::core: return 'C';
        case TileKind::l3only: return 'L';
        case TileKind::engine: return 'E';
        case TileKind::mem: return 'M';
        case TileKind::empty: return '.';
    }
    return '?';
}

}  // namespace

MeshDescription MeshDescription::parse(const std::vector<std::string>& rows) {
    MeshDescription m;
    if (rows.empty()) throw std::invalid_argument("mesh has no rows");
    for (const auto& row : rows) {
        std::vector<TileKind> parsed;
        for (char c : row) {
            if (c == ' ' || c == '\t') continue;
            parsed.push_back(kind_of_token(c));
        }
        if (m.width_ == 0) {
            m.width_ = static_cast<std::uint32_t>(parsed.size());
        } else if (parsed.size() != m.width_) {
            throw std::invalid_argument("mesh rows have unequal widths");
        }
        m.tiles_.insert(m.tiles_.end(), parsed.begin(), parsed.end());
    }
    if (m.width_ == 0) throw std::invalid_argument("mesh rows are empty");
    m.height_ = static_cast<std::uint32_t>(m.tiles_.size() / m.width_);

    for (std::uint32_t y = 0; y < m.height_; ++y) {
        for (std::uint32_t x = 0; x < m.width_; ++x) {
            Coord c{x, y};
            switch (m.at(c)) {
                case TileKind::core:
                    m.cores_.push_back(c);
                    m.slices_.push_back(c);
                    break;
                case TileKind::l3only: m.slices_.push_back(c); break;
                case TileKind::engine:
                    if (m.engine_) throw std::invalid_argument("mesh has more than one engine tile");
                    m.engine_ = c;
                    break;
                case TileKind::mem: m.mems_.push_back(c); break;
                case TileKind::empty: break;
            }
        }
    }
    if (m.mems_.empty()) throw std::invalid_argument("mesh needs at least one memory tile");
    return m;
}

std::vector<std::string> MeshDescription::default_rows() {
    return {"C L L M", "L . L M", "E L L C"};
}

std::vector<std::string> MeshDescription::to_rows() const {
    std::vector<std::string> rows;
    for (std::uint32_t y = 0; y < height_; ++y) {
        std::string row;
        for (std::uint32_t x = 0; x < width_; ++x) {
            if (x) row.push_back(' ');
            row.push_back(token_of_kind(at(Coord{x, y})));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::uint32_t MeshDescription::hops(Coord a, Coord b) {
    auto d = [](std::uint32_t p, std::uint32_t q) { return p > q ? p - q : q - p; };
    return d(a.x, b.x) + d(a.y, b.y);
}

std::vector<Coord> MeshDescription::xy_route(Coord src, Coord dst) {
    std::vector<Coord> path;
    Coord cur = src;
    while (cur.x != dst.x) {
        cur.x += cur.x < dst.x ? 1 : -1;
        path.push_back(cur);
    }
    while (cur.y != dst.y) {
        cur.y += cur.y < dst.y ? 1 : -1;
        path.push_back(cur);
    }
    return path;
}

}  // namespace tilesim
