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

#include "tilesim/qsort_stream.hpp"

#include <cassert>
#include <cstring>

#include "tilesim/qsort_accel.hpp"

namespace tilesim {

namespace {

constexpr std::uint64_t kStreamFwd = 1;
constexpr std::uint64_t kStreamBwd = 2;

struct Median {
    std::uint32_t value = 0;
    std::uint64_t index = 0;
};

Median median3(std::uint32_t va, std::uint64_t ia, std::uint32_t vc, std::uint64_t ic,
               std::uint32_t vb, std::uint64_t ib) {
    if ((va <= vc) == (vc <= vb)) return {vc, ic};
    if ((vc <= va) == (va <= vb)) return {va, ia};
    return {vb, ib};
}

void insertion_with_counts(std::vector<std::uint32_t>& v, std::uint64_t lo, std::uint64_t hi,
                           std::uint64_t& compares) {
    for (std::uint64_t k = lo + 1; k < hi; ++k) {
        const std::uint32_t x = v[k];
        std::uint64_t m = k;
        while (m > lo) {
            ++compares;
            if (v[m - 1] <= x) break;
            v[m] = v[m - 1];
            --m;
        }
        v[m] = x;
    }
}

void reference_sort_range(std::vector<std::uint32_t>& v, std::uint64_t lo, std::uint64_t hi,
                          std::uint32_t cutoff, QsortCounts& c) {
    if (hi - lo <= cutoff) {
        insertion_with_counts(v, lo, hi, c.compares);
        return;
    }
    const std::uint64_t mid = lo + (hi - lo) / 2;
    const Median med = median3(v[lo], lo, v[mid], mid, v[hi - 1], hi - 1);
    c.compares += 3;
    if (med.index != lo) {
        std::swap(v[lo], v[med.index]);
        ++c.swaps;
    }
    const std::uint32_t pivot = med.value;
    std::int64_t i = static_cast<std::int64_t>(lo) - 1;
    std::int64_t j = static_cast<std::int64_t>(hi);
    while (true) {
        do {
            ++i;
            ++c.compares;
        } while (v[static_cast<std::uint64_t>(i)] < pivot);
        do {
            --j;
            ++c.compares;
        } while (v[static_cast<std::uint64_t>(j)] > pivot);
        if (i >= j) break;
        std::swap(v[static_cast<std::uint64_t>(i)], v[static_cast<std::uint64_t>(j)]);
        ++c.swaps;
    }
    const std::uint64_t sp = static_cast<std::uint64_t>(j) + 1;
    reference_sort_range(v, lo, sp, cutoff, c);
    reference_sort_range(v, sp, hi, cutoff, c);
}

MicroOp load_u32(Addr a, std::uint64_t stream) {
    MicroOp op;
    op.kind = MicroOp::Kind::load;
    op.vaddr = a;
    op.size = 4;
    op.stream = stream;
    return op;
}

MicroOp store_u32(Addr a, std::uint32_t v) {
    MicroOp op;
    op.kind = MicroOp::Kind::store;
    op.vaddr = a;
    op.size = 4;
    std::memcpy(op.data.data(), &v, 4);
    return op;
}

}  // namespace

QsortCounts reference_quicksort(std::vector<std::uint32_t>& v, std::uint32_t cutoff) {
    assert(cutoff >= 1);
    QsortCounts c;
    if (v.size() > 1) reference_sort_range(v, 0, v.size(), cutoff, c);
    return c;
}

SoftwareQsortSource::SoftwareQsortSource(const QsortLayout& l, std::vector<std::uint32_t> input,
                                         std::uint32_t cutoff, std::uint64_t base_seq,
                                         StatRegistry& stats)
    : l_(l),
      a_(std::move(input)),
      cutoff_(cutoff),
      base_seq_(base_seq),
      compares_(stats.counter("qsw.compares")),
      swaps_(stats.counter("qsw.swaps")) {
    assert(cutoff_ >= 1);
    assert(a_.size() == l_.n);
    if (a_.size() > 1) stack_.push_back({0, a_.size()});
}

MicroOp SoftwareQsortSource::out(MicroOp op) {
    ++emitted_;
    return op;
}

bool SoftwareQsortSource::finished() const {
    return st_ == St::pick && stack_.empty();
}

void SoftwareQsortSource::open_range() {
    const Range r = stack_.back();
    stack_.pop_back();
    if (r.hi - r.lo <= cutoff_) {
        open_leaf(r);
        st_ = St::leaf;
        return;
    }
    cur_ = r;
    sub_ = 0;
    st_ = St::pv_loads;
}

void SoftwareQsortSource::open_leaf(const Range& r) {
    leaf_ops_.clear();
    leaf_at_ = 0;
    const std::uint64_t base = seq_now();
    const std::uint64_t L = r.hi - r.lo;
    std::vector<std::uint32_t> vals(a_.begin() + static_cast<std::ptrdiff_t>(r.lo),
                                    a_.begin() + static_cast<std::ptrdiff_t>(r.hi));
    // Producer op (absolute seq) of each position's current value.
    std::vector<std::uint64_t> prov(L);
    for (std::uint64_t t = 0; t < L; ++t) {
        leaf_ops_.push_back(load_u32(addr_of(r.lo + t), kStreamFwd));
        prov[t] = base + t;
    }
    for (std::uint64_t k = 1; k < L; ++k) {
        const std::uint32_t x = vals[k];
        const std::uint64_t x_prov = prov[k];
        std::uint64_t m = k;
        std::uint64_t last_cmp = kNoDep;
        while (m > 0) {
            ++*compares_;
            MicroOp cmp;
            cmp.kind = MicroOp::Kind::compute;
            cmp.depends_on(x_prov).depends_on(prov[m - 1]);
            if (last_cmp != kNoDep) cmp.depends_on(last_cmp);
            leaf_ops_.push_back(cmp);
            last_cmp = base + leaf_ops_.size() - 1;
            if (vals[m - 1] <= x) break;
            vals[m] = vals[m - 1];
            leaf_ops_.push_back(store_u32(addr_of(r.lo + m), vals[m]).depends_on(last_cmp));
            prov[m] = base + leaf_ops_.size() - 1;
            --m;
        }
        vals[m] = x;
        if (m != k) {
            leaf_ops_.push_back(store_u32(addr_of(r.lo + m), x).depends_on(last_cmp));
            prov[m] = base + leaf_ops_.size() - 1;
        }
    }
    std::copy(vals.begin(), vals.end(), a_.begin() + static_cast<std::ptrdiff_t>(r.lo));
}

void SoftwareQsortSource::finish_partition() {
    const std::uint64_t sp = static_cast<std::uint64_t>(j_) + 1;
    assert(sp > cur_.lo && sp < cur_.hi);
    const Range a{cur_.lo, sp}, b{sp, cur_.hi};
    if (a.hi - a.lo >= b.hi - b.lo) {
        stack_.push_back(a);
        stack_.push_back(b);
    } else {
        stack_.push_back(b);
        stack_.push_back(a);
    }
    st_ = St::pick;
}

std::optional<MicroOp> SoftwareQsortSource::next() {
    while (true) {
        switch (st_) {
            case St::pick:
                if (stack_.empty()) return std::nullopt;
                open_range();
                continue;
            case St::pv_loads: {
                const std::uint64_t mid = cur_.lo + (cur_.hi - cur_.lo) / 2;
                const std::uint64_t idx[3] = {cur_.lo, mid, cur_.hi - 1};
                pv_seq_[sub_] = seq_now();
                const MicroOp op =
                    load_u32(addr_of(idx[sub_]), sub_ == 2 ? kStreamBwd : kStreamFwd);
                if (++sub_ == 3) st_ = St::pv_med;
                return out(op);
            }
            case St::pv_med: {
                const std::uint64_t mid = cur_.lo + (cur_.hi - cur_.lo) / 2;
                const Median med =
                    median3(a_[cur_.lo], cur_.lo, a_[mid], mid, a_[cur_.hi - 1], cur_.hi - 1);
                *compares_ += 3;
                pivot_ = med.value;
                med_idx_ = med.index;
                med_seq_ = seq_now();
                i_ = static_cast<std::int64_t>(cur_.lo) - 1;
                j_ = static_cast<std::int64_t>(cur_.hi);
                sub_ = 0;
                st_ = med_idx_ != cur_.lo ? St::pv_place : St::fwd_load;
                MicroOp op;
                op.kind = MicroOp::Kind::compute;
                op.latency = 3;
                op.depends_on(pv_seq_[0]).depends_on(pv_seq_[1]).depends_on(pv_seq_[2]);
                return out(op);
            }
            case St::pv_place: {
                if (sub_ == 0) {
                    ++sub_;
                    const std::uint32_t old_front = a_[cur_.lo];
                    a_[cur_.lo] = pivot_;
                    a_[med_idx_] = old_front;
                    ++*swaps_;
                    return out(store_u32(addr_of(cur_.lo), pivot_).depends_on(med_seq_));
                }
                st_ = St::fwd_load;
                return out(store_u32(addr_of(med_idx_), a_[med_idx_]).depends_on(med_seq_));
            }
            case St::fwd_load: {
                f_load_seq_ = seq_now();
                st_ = St::fwd_cmp;
                return out(load_u32(addr_of(static_cast<std::uint64_t>(i_ + 1)), kStreamFwd));
            }
            case St::fwd_cmp: {
                ++i_;
                ++*compares_;
                const std::uint32_t v = a_[static_cast<std::uint64_t>(i_)];
                st_ = v < pivot_ ? St::fwd_load : St::bwd_load;
                MicroOp op;
                op.kind = MicroOp::Kind::compute;
                return out(op.depends_on(f_load_seq_).depends_on(med_seq_));
            }
            case St::bwd_load: {
                b_load_seq_ = seq_now();
                st_ = St::bwd_cmp;
                return out(load_u32(addr_of(static_cast<std::uint64_t>(j_ - 1)), kStreamBwd));
            }
            case St::bwd_cmp: {
                --j_;
                ++*compares_;
                const std::uint32_t v = a_[static_cast<std::uint64_t>(j_)];
                MicroOp op;
                op.kind = MicroOp::Kind::compute;
                op.depends_on(b_load_seq_).depends_on(med_seq_);
                if (v > pivot_) {
                    st_ = St::bwd_load;
                } else if (i_ >= j_) {
                    finish_partition();
                } else {
                    sub_ = 0;
                    st_ = St::swap;
                }
                return out(op);
            }
            case St::swap: {
                const std::uint64_t ui = static_cast<std::uint64_t>(i_);
                const std::uint64_t uj = static_cast<std::uint64_t>(j_);
                if (sub_ == 0) {
                    ++sub_;
                    const std::uint32_t vj = a_[uj];
                    return out(store_u32(addr_of(ui), vj)
                                   .depends_on(f_load_seq_)
                                   .depends_on(b_load_seq_));
                }
                const std::uint32_t vi = a_[ui];
                std::swap(a_[ui], a_[uj]);
                ++*swaps_;
                st_ = St::fwd_load;
                return out(store_u32(addr_of(uj), vi)
                               .depends_on(f_load_seq_)
                               .depends_on(b_load_seq_));
            }
            case St::leaf: {
                if (leaf_at_ < leaf_ops_.size()) return out(leaf_ops_[leaf_at_++]);
                st_ = St::pick;
                continue;
            }
        }
    }
}

OffloadQsortSource::OffloadQsortSource(Addr doorbell, Addr status_addr, Addr base,
                                       std::uint64_t n)
    : doorbell_(doorbell), status_addr_(status_addr), base_(base), n_(n) {}

bool OffloadQsortSource::finished() const { return done_; }

std::optional<MicroOp> OffloadQsortSource::next() {
    if (!sent_) {
        sent_ = true;
        OffloadCommand cmd;
        cmd.bytes[0] = kQsortSortOpcode;
        cmd.set_arg(0, base_);
        cmd.set_arg(1, n_);
        MicroOp op;
        op.kind = MicroOp::Kind::uc_store;
        op.vaddr = doorbell_;
        op.size = kLineBytes;
        op.data = cmd.bytes;
        return op;
    }
    if (done_ || waiting_) return std::nullopt;
    waiting_ = true;
    MicroOp op;
    op.kind = MicroOp::Kind::uc_load;
    op.vaddr = status_addr_;
    op.size = 8;
    op.on_value = [this](std::uint64_t v) {
        waiting_ = false;
        const EngineState s = status_state(v);
        if (s == EngineState::done) done_ = true;
        if (s == EngineState::fault) {
            faulted_ = true;
            done_ = true;
        }
    };
    return op;
}

}  // namespace tilesim
