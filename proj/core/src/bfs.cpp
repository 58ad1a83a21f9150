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

#include "tilesim/bfs.hpp"

#include <cassert>
#include <cstring>
#include <deque>

#include "tilesim/dapf.hpp"

namespace tilesim {

std::vector<std::uint64_t> bfs_reference(const CsrGraph& g, std::uint64_t src) {
    std::vector<std::uint64_t> parent(g.n, kNoParent);
    if (src >= g.n) return parent;
    std::deque<std::uint64_t> q;
    parent[src] = src;
    q.push_back(src);
    while (!q.empty()) {
        const std::uint64_t u = q.front();
        q.pop_front();
        for (std::uint64_t k = g.offsets[u]; k < g.offsets[u + 1]; ++k) {
            const std::uint64_t w = g.neighbors[k];
            if (parent[w] != kNoParent) continue;
            parent[w] = u;
            q.push_back(w);
        }
    }
    return parent;
}

namespace {

// Stream tags keep the stride detector's per-stream state separate.
constexpr std::uint64_t kStreamQueue = 1;
constexpr std::uint64_t kStreamOffsets = 2;
constexpr std::uint64_t kStreamEdges = 3;
constexpr std::uint64_t kStreamVisited = 4;
constexpr std::uint64_t kStreamHint = 5;

MicroOp load_op(Addr a, std::uint8_t size, std::uint64_t stream) {
    MicroOp op;
    op.kind = MicroOp::Kind::load;
    op.vaddr = a;
    op.size = size;
    op.stream = stream;
    return op;
}

MicroOp store_u64(Addr a, std::uint64_t v) {
    MicroOp op;
    op.kind = MicroOp::Kind::store;
    op.vaddr = a;
    op.size = 8;
    std::memcpy(op.data.data(), &v, 8);
    return op;
}

}  // namespace

BfsSource::BfsSource(const CsrGraph& g, const BfsLayout& l, const BfsStreamConfig& c,
                     StatRegistry& stats)
    : g_(g),
      l_(l),
      c_(c),
      visited_(g.n, 0),
      queue_(g.n, 0),
      visited_c_(stats.counter("bfs.visited_nodes")),
      edges_c_(stats.counter("bfs.edge_loads")),
      hints_c_(stats.counter("bfs.hints")) {
    assert(c.source < g.n);
    queue_[0] = c.source;
    visited_[c.source] = 1;
}

MicroOp BfsSource::out(MicroOp op) {
    ++emitted_;
    return op;
}

bool BfsSource::finished() const { return head_ == tail_; }

std::optional<MicroOp> BfsSource::next() {
    while (head_ != tail_) {
        switch (st_) {
            case St::pop: {
                u_ = queue_[head_];
                ++*visited_c_;
                q_seq_ = seq_now();
                st_ = St::off_lo;
                return out(load_op(l_.queue + head_ * 8, 8, kStreamQueue));
            }
            case St::off_lo: {
                lo_ = g_.offsets[u_];
                off_lo_seq_ = seq_now();
                st_ = St::off_hi;
                return out(load_op(l_.offsets + u_ * 8, 8, kStreamOffsets).depends_on(q_seq_));
            }
            case St::off_hi: {
                hi_ = g_.offsets[u_ + 1];
                off_hi_seq_ = seq_now();
                k_ = lo_;
                const bool eligible =
                    c_.hints && head_ + c_.hint_distance < tail_;
                hint_left_ = eligible ? 9 : 0;
                st_ = eligible ? St::hint : St::edge;
                return out(load_op(l_.offsets + (u_ + 1) * 8, 8, kStreamOffsets).depends_on(q_seq_));
            }
            case St::hint: {
                // Nine ops: occupancy load, branch, six address-generation
                // computes, then the command store to the engine doorbell.
                --hint_left_;
                if (hint_left_ == 8) {
                    h_load_seq_ = seq_now();
                    return out(load_op(l_.qsize, 8, kStreamHint));
                }
                if (hint_left_ == 7) {
                    h_br_seq_ = seq_now();
                    MicroOp op;
                    op.kind = MicroOp::Kind::compute;
                    return out(op.depends_on(h_load_seq_));
                }
                if (hint_left_ >= 1) {
                    if (hint_left_ == 2) h_agu_a_ = seq_now();
                    if (hint_left_ == 1) h_agu_b_ = seq_now();
                    MicroOp op;
                    op.kind = MicroOp::Kind::compute;
                    return out(op.depends_on(h_br_seq_));
                }
                ++*hints_c_;
                st_ = St::edge;
                OffloadCommand cmd;
                cmd.bytes[0] = kDapfHintOpcode;
                cmd.set_arg(0, head_);
                MicroOp op;
                op.kind = MicroOp::Kind::uc_store;
                op.vaddr = c_.doorbell;
                op.size = kLineBytes;
                op.data = cmd.bytes;
                op.depends_on(h_br_seq_).depends_on(h_agu_a_).depends_on(h_agu_b_);
                return out(op);
            }
            case St::edge: {
                if (k_ == hi_) {
                    ++head_;
                    st_ = St::pop;
                    break;
                }
                w_ = g_.neighbors[k_];
                ++*edges_c_;
                nb_seq_ = seq_now();
                st_ = St::vis;
                return out(load_op(l_.neighbors + k_ * 8, 8, kStreamEdges)
                               .depends_on(off_lo_seq_)
                               .depends_on(off_hi_seq_));
            }
            case St::vis: {
                vis_seq_ = seq_now();
                st_ = St::branch;
                return out(load_op(l_.visited + w_, 1, kStreamVisited).depends_on(nb_seq_));
            }
            case St::branch: {
                br_seq_ = seq_now();
                if (visited_[w_]) {
                    ++k_;
                    st_ = St::edge;
                } else {
                    st_ = St::st_vis;
                }
                MicroOp op;
                op.kind = MicroOp::Kind::compute;
                return out(op.depends_on(vis_seq_));
            }
            case St::st_vis: {
                visited_[w_] = 1;
                st_ = St::st_par;
                MicroOp op;
                op.kind = MicroOp::Kind::store;
                op.vaddr = l_.visited + w_;
                op.size = 1;
                op.data[0] = 1;
                return out(op.depends_on(nb_seq_).depends_on(br_seq_));
            }
            case St::st_par: {
                st_ = St::st_q;
                return out(store_u64(l_.parent + w_ * 8, u_)
                               .depends_on(nb_seq_)
                               .depends_on(br_seq_)
                               .depends_on(q_seq_));
            }
            case St::st_q: {
                queue_[tail_] = w_;
                MicroOp op = store_u64(l_.queue + tail_ * 8, w_);
                ++tail_;
                ++k_;
                st_ = St::edge;
                return out(op.depends_on(nb_seq_).depends_on(br_seq_));
            }
        }
    }
    return std::nullopt;
}

ArrayInitSource::ArrayInitSource(const BfsLayout& l, std::uint64_t next_source) {
    fills_.push_back({l.visited, l.n, 0x00});
    fills_.push_back({l.parent, l.n * 8, 0xFF});
    seeds_.push_back(store_u64(l.queue, next_source));
    {
        MicroOp op;
        op.kind = MicroOp::Kind::store;
        op.vaddr = l.visited + next_source;
        op.size = 1;
        op.data[0] = 1;
        seeds_.push_back(op);
    }
    seeds_.push_back(store_u64(l.parent + next_source * 8, next_source));
}

bool ArrayInitSource::finished() const {
    return fill_ >= fills_.size() && seed_ >= seeds_.size();
}

std::optional<MicroOp> ArrayInitSource::next() {
    while (fill_ < fills_.size()) {
        const Fill& f = fills_[fill_];
        if (off_ >= f.bytes) {
            ++fill_;
            off_ = 0;
            continue;
        }
        const Addr a = f.base + off_;
        const std::uint64_t in_line = kLineBytes - a % kLineBytes;
        const std::uint8_t size =
            static_cast<std::uint8_t>(std::min<std::uint64_t>(in_line, f.bytes - off_));
        off_ += size;
        MicroOp op;
        op.kind = MicroOp::Kind::store;
        op.vaddr = a;
        op.size = size;
        op.data.fill(f.value);
        return op;
    }
    if (seed_ < seeds_.size()) return seeds_[seed_++];
    return std::nullopt;
}

}  // namespace tilesim
