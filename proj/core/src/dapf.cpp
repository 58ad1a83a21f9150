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

#include "tilesim/dapf.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace tilesim {

namespace {

std::uint64_t extract(const std::array<std::uint8_t, kLineBytes>& data, Addr vaddr,
                      std::uint32_t size) {
    const std::uint32_t off = static_cast<std::uint32_t>(vaddr - line_of(vaddr));
    assert(off + size <= kLineBytes);
    std::uint64_t v = 0;
    for (std::uint32_t b = 0; b < size; ++b)
        v |= static_cast<std::uint64_t>(data[off + b]) << (8 * b);
    return v;
}

}  // namespace

DataAwarePrefetcher::DataAwarePrefetcher(EngineHarness& harness, const DapfParams& p,
                                         StatRegistry& stats)
    : eng_(harness),
      p_(p),
      hints_(stats.counter("dapf.hints")),
      lines_(stats.counter("dapf.lines")),
      abandoned_(stats.counter("dapf.abandoned")),
      bad_cmds_(stats.counter("dapf.bad_commands")) {}

bool DataAwarePrefetcher::touch(Addr a) {
    const Addr ln = line_of(a);
    if (std::find(hint_->touched.begin(), hint_->touched.end(), ln) != hint_->touched.end())
        return false;
    hint_->touched.push_back(ln);
    return true;
}

void DataAwarePrefetcher::fetch_line(Addr line) {
    ++*lines_;
    if (on_prefetch) on_prefetch(line);
}

void DataAwarePrefetcher::abort_hint() {
    if (!hint_->aborted) {
        hint_->aborted = true;
        ++*abandoned_;
    }
}

bool DataAwarePrefetcher::pop_hint() {
    const std::uint32_t n = eng_.core_count();
    for (std::uint32_t scan = 0; scan < n; ++scan) {
        const CoreId c = (next_core_ + scan) % n;
        if (eng_.queue_empty(c)) continue;
        OffloadCommand cmd = eng_.queue_front(c);
        eng_.queue_pop(c);
        next_core_ = (c + 1) % n;
        if (cmd.opcode() != kDapfHintOpcode) {
            ++*bad_cmds_;
            continue;
        }
        if (!dig_loaded_) {
            dig_ = DigDescriptor::deserialize(eng_.descriptor());
            if (dig_.nodes.size() != 4 ||
                dig_.edges[0].rel != DigEdge::Relation::index_by_value ||
                dig_.edges[1].rel != DigEdge::Relation::range_pair ||
                dig_.edges[2].rel != DigEdge::Relation::index_by_value)
                throw std::invalid_argument("dapf: descriptor is not a 4-node traversal chain");
            dig_loaded_ = true;
        }
        ++*hints_;
        ++gen_;
        hint_.emplace();
        hint_->target = cmd.arg(0) + p_.distance;
        if (on_hint) on_hint(hint_->target);
        return true;
    }
    return false;
}

// Wraps mem_read so late completions of a superseded hint are ignored.
void DataAwarePrefetcher::guarded_read(Addr a,
                                       std::function<void(const std::array<std::uint8_t, kLineBytes>&)> on_data,
                                       std::function<void()> on_fault) {
    ++hint_->outstanding;
    const std::uint64_t gen = gen_;
    eng_.mem_read(
        a,
        [this, gen, on_data](const std::array<std::uint8_t, kLineBytes>& data) {
            if (!hint_ || gen != gen_) return;
            --hint_->outstanding;
            if (on_data) on_data(data);
            eng_.request_step();
        },
        [this, gen, on_fault](Addr) {
            if (!hint_ || gen != gen_) return;
            --hint_->outstanding;
            if (on_fault) on_fault();
            eng_.request_step();
        });
}

void DataAwarePrefetcher::issue_queue_read(std::uint32_t& budget) {
    const DigNode& q = dig_.nodes[0];
    const Addr a = q.base + hint_->target * q.elem_size;
    touch(a);
    fetch_line(line_of(a));
    --budget;
    hint_->stage = Stage::queue_wait;
    guarded_read(
        a,
        [this, a](const std::array<std::uint8_t, kLineBytes>& data) {
            hint_->u = extract(data, a, dig_.nodes[0].elem_size);
            hint_->stage = Stage::range_issue;
        },
        [this] { abort_hint(); });
}

bool DataAwarePrefetcher::issue_range_reads(std::uint32_t& budget) {
    const DigNode& r = dig_.nodes[1];
    const Addr lo_a = r.base + hint_->u * r.elem_size;
    const Addr hi_a = lo_a + r.elem_size;
    const bool one_line = line_of(lo_a) == line_of(hi_a);
    const std::uint32_t need = one_line ? 1 : 2;
    if (budget < need) return false;  // retry next cycle with a fresh budget
    budget -= need;
    hint_->stage = Stage::range_wait;
    hint_->lo_seen = hint_->hi_seen = false;
    if (one_line) {
        touch(lo_a);
        fetch_line(line_of(lo_a));
        guarded_read(
            lo_a,
            [this, lo_a, hi_a](const std::array<std::uint8_t, kLineBytes>& data) {
                const std::uint32_t es = dig_.nodes[1].elem_size;
                hint_->lo = extract(data, lo_a, es);
                hint_->hi = extract(data, hi_a, es);
                hint_->next_edge = hint_->lo;
                hint_->stage = Stage::edge_reads;
            },
            [this] { abort_hint(); });
        return true;
    }
    auto bound_done = [this] {
        if (hint_->lo_seen && hint_->hi_seen) {
            hint_->next_edge = hint_->lo;
            hint_->stage = Stage::edge_reads;
        }
    };
    touch(lo_a);
    fetch_line(line_of(lo_a));
    guarded_read(
        lo_a,
        [this, lo_a, bound_done](const std::array<std::uint8_t, kLineBytes>& data) {
            hint_->lo = extract(data, lo_a, dig_.nodes[1].elem_size);
            hint_->lo_seen = true;
            bound_done();
        },
        [this] { abort_hint(); });
    touch(hi_a);
    fetch_line(line_of(hi_a));
    guarded_read(
        hi_a,
        [this, hi_a, bound_done](const std::array<std::uint8_t, kLineBytes>& data) {
            hint_->hi = extract(data, hi_a, dig_.nodes[1].elem_size);
            hint_->hi_seen = true;
            bound_done();
        },
        [this] { abort_hint(); });
    return true;
}

bool DataAwarePrefetcher::issue_edge_read(std::uint32_t& budget) {
    const DigNode& e = dig_.nodes[2];
    if (hint_->next_edge >= hint_->hi) return false;
    const Addr a = e.base + hint_->next_edge * e.elem_size;
    const Addr ln = line_of(a);
    assert(line_of(e.base) == e.base && "edge array base must be line aligned");
    const std::uint64_t per_line = kLineBytes / e.elem_size;
    const std::uint64_t first_in_line = (ln - e.base) / e.elem_size;
    hint_->next_edge = std::min(hint_->hi, first_in_line + per_line);
    touch(a);
    fetch_line(ln);
    --budget;
    guarded_read(
        a,
        [this, ln](const std::array<std::uint8_t, kLineBytes>& data) { parse_edge_line(ln, data); },
        // A lost edge line loses its targets but the rest of the span walks on.
        nullptr);
    return true;
}

void DataAwarePrefetcher::parse_edge_line(Addr line, const std::array<std::uint8_t, 64>& data) {
    const DigNode& e = dig_.nodes[2];
    const DigNode& v = dig_.nodes[3];
    const std::uint64_t first = (line - e.base) / e.elem_size;
    const std::uint64_t last = std::min(hint_->hi, first + kLineBytes / e.elem_size);
    for (std::uint64_t k = std::max(first, hint_->lo); k < last; ++k) {
        const std::uint64_t node = extract(data, e.base + k * e.elem_size, e.elem_size);
        const Addr va = v.base + node * v.elem_size;
        if (touch(va)) hint_->fetch_only.push_back(line_of(va));
    }
}

bool DataAwarePrefetcher::step() {
    std::uint32_t budget = p_.reads_per_cycle;
    bool blocked = false;
    while (budget && !blocked) {
        if (!hint_ && !pop_hint()) break;
        if (hint_->aborted) {
            if (hint_->outstanding == 0)
                hint_.reset();  // stragglers done; next loop pops a fresh hint
            else
                blocked = true;
            continue;
        }
        switch (hint_->stage) {
            case Stage::queue_issue:
                issue_queue_read(budget);
                break;
            case Stage::queue_wait:
            case Stage::range_wait:
                blocked = true;  // value in flight
                break;
            case Stage::range_issue:
                if (!issue_range_reads(budget)) blocked = true;
                break;
            case Stage::edge_reads:
                if (issue_edge_read(budget)) break;
                if (hint_->outstanding) {
                    blocked = true;  // parses pending, more targets may appear
                    break;
                }
                hint_->stage = Stage::draining;
                break;
            case Stage::draining:
                if (!hint_->fetch_only.empty()) {
                    const Addr ln = hint_->fetch_only.front();
                    hint_->fetch_only.pop_front();
                    fetch_line(ln);
                    --budget;
                    guarded_read(ln, nullptr, nullptr);
                    break;
                }
                if (hint_->outstanding) {
                    blocked = true;
                    break;
                }
                hint_.reset();
                break;
        }
    }
    if (hint_) return true;
    for (std::uint32_t c = 0; c < eng_.core_count(); ++c)
        if (!eng_.queue_empty(c)) return true;
    return false;
}

bool DataAwarePrefetcher::idle() const { return !hint_.has_value(); }

}  // namespace tilesim
