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

#include "tilesim/qsort_accel.hpp"

#include <algorithm>
#include <cassert>
#include <cstring>

namespace tilesim {

// ---------------------------------------------------------------------------
// StoreBuffer

void StoreBuffer::seed(Addr line) {
    assert(find(line) == nullptr);
    pending_writers_[line] += 1;
}

const StoreBuffer::Entry* StoreBuffer::find(Addr line) const {
    for (const Entry& e : entries_)
        if (e.line == line) return &e;
    return nullptr;
}

StoreBuffer::Entry* StoreBuffer::find_mut(Addr line) {
    for (Entry& e : entries_)
        if (e.line == line) return &e;
    return nullptr;
}

bool StoreBuffer::covers(Addr vaddr, std::uint32_t n) const {
    const Entry* e = find(line_of(vaddr));
    if (!e) return false;
    const std::uint32_t off = static_cast<std::uint32_t>(vaddr - e->line);
    assert(off + n <= kLineBytes);
    for (std::uint32_t b = 0; b < n; ++b)
        if (!(e->valid >> (off + b) & 1)) return false;
    return true;
}

bool StoreBuffer::write(Addr vaddr, const std::uint8_t* bytes, std::uint32_t n) {
    const Addr ln = line_of(vaddr);
    Entry* e = find_mut(ln);
    if (!e) {
        if (full()) return false;
        Entry fresh;
        fresh.line = ln;
        auto it = pending_writers_.find(ln);
        assert(it != pending_writers_.end() && "write to a line the task never seeded");
        fresh.writers = it->second;
        pending_writers_.erase(it);
        entries_.push_back(fresh);
        e = &entries_.back();
    }
    const std::uint32_t off = static_cast<std::uint32_t>(vaddr - ln);
    assert(off + n <= kLineBytes);
    std::memcpy(e->data.data() + off, bytes, n);
    for (std::uint32_t b = 0; b < n; ++b) e->valid |= std::uint64_t{1} << (off + b);
    return true;
}

void StoreBuffer::merge_into(Addr line, std::array<std::uint8_t, kLineBytes>& io) const {
    const Entry* e = find(line);
    if (!e) return;
    for (std::uint32_t b = 0; b < kLineBytes; ++b)
        if (e->valid >> b & 1) io[b] = e->data[b];
}

void StoreBuffer::note_split(Addr line) {
    if (Entry* e = find_mut(line)) {
        ++e->writers;
        return;
    }
    auto it = pending_writers_.find(line);
    assert(it != pending_writers_.end() && "split inside a line the task never seeded");
    ++it->second;
}

std::optional<StoreBuffer::Entry> StoreBuffer::complete_span(Addr line) {
    for (auto it = entries_.begin(); it != entries_.end(); ++it) {
        if (it->line != line) continue;
        assert(it->writers > 0);
        if (--it->writers > 0) return std::nullopt;
        Entry out = std::move(*it);
        entries_.erase(it);
        return out;
    }
    // The line was force-evicted after this span's bytes were flushed.
    auto it = pending_writers_.find(line);
    assert(it != pending_writers_.end());
    if (--it->second == 0) pending_writers_.erase(it);
    return std::nullopt;
}

std::optional<StoreBuffer::Entry> StoreBuffer::force_evict() {
    if (entries_.empty()) return std::nullopt;
    Entry out = std::move(entries_.front());
    entries_.pop_front();
    if (out.writers > 0) pending_writers_[out.line] += out.writers;
    return out;
}

// ---------------------------------------------------------------------------
// QuicksortEngine

QuicksortEngine::QuicksortEngine(EngineHarness& harness, const QsortParams& p,
                                 StatRegistry& stats)
    : eng_(harness),
      p_(p),
      buf_(p.store_buffer_entries),
      compares_(stats.counter("qsort.compares")),
      swaps_(stats.counter("qsort.swaps")),
      tasks_(stats.counter("qsort.tasks")),
      forced_(stats.counter("qsort.forced_evictions")),
      releases_(stats.counter("qsort.line_writes")) {
    assert(p_.cutoff >= 1);
    assert(p_.compares_per_cycle >= 1);
    assert(p_.store_buffer_entries >= 2);
}

bool QuicksortEngine::start_task() {
    for (CoreId c = 0; c < eng_.core_count(); ++c) {
        if (eng_.queue_empty(c)) continue;
        OffloadCommand cmd = eng_.queue_front(c);
        eng_.queue_pop(c);
        if (cmd.opcode() != kQsortSortOpcode) continue;
        ++*tasks_;
        ++gen_;
        active_ = true;
        core_ = c;
        base_ = cmd.arg(0);
        n_ = cmd.arg(1);
        assert(base_ % 4 == 0);
        stack_.clear();
        phase_ = Phase::pick_range;
        swap_pending_ = false;
        left_ = right_ = scratch_ = left_pre_ = right_pre_ = Window{};
        if (n_ > 0) {
            for (Addr ln = line_of(base_); ln < base_ + n_ * 4; ln += kLineBytes) buf_.seed(ln);
            stack_.push_back({0, n_});
        }
        return true;
    }
    return false;
}

void QuicksortEngine::finish_task() {
    assert(buf_.empty());
    active_ = false;
    eng_.set_status(core_, EngineState::done, 0);
}

void QuicksortEngine::open_range(const Range& r) {
    cur_ = r;
    if (r.hi - r.lo <= p_.cutoff) {
        phase_ = Phase::leaf_fetch;
        leaf_lines_.clear();
        leaf_vals_.clear();
        for (Addr ln = line_of(addr_of(r.lo)); ln < addr_of(r.hi); ln += kLineBytes)
            leaf_lines_.push_back({ln, {}, false});
    } else {
        phase_ = Phase::pivot_fetch;
        pivot_placed_ = false;
    }
}

void QuicksortEngine::fetch(Window& w, Addr line) {
    if (w.pending) return;
    w.line = line;
    w.have = false;
    w.pending = true;
    const std::uint64_t gen = gen_;
    eng_.mem_read(
        line,
        [this, gen, &w](const std::array<std::uint8_t, kLineBytes>& data) {
            if (gen != gen_) return;
            w.data = data;
            buf_.merge_into(w.line, w.data);
            w.have = true;
            w.pending = false;
            eng_.request_step();
        },
        [this, gen, &w](Addr) {
            if (gen != gen_) return;
            w.pending = false;  // dropped on fault; the next step refetches
            eng_.request_step();
        });
}

bool QuicksortEngine::ensure_value(std::uint64_t idx, Window& w, std::uint32_t& out) {
    const Addr a = addr_of(idx);
    const Addr ln = line_of(a);
    if (buf_.covers(a, 4)) {
        const StoreBuffer::Entry* e = buf_.find(ln);
        std::memcpy(&out, e->data.data() + (a - ln), 4);
        return true;
    }
    for (Window* cand : {&left_, &right_, &scratch_, &left_pre_, &right_pre_}) {
        if (cand->have && cand->line == ln) {
            std::memcpy(&out, cand->data.data() + (a - ln), 4);
            return true;
        }
    }
    if (!w.pending) fetch(w, ln);
    return false;
}

bool QuicksortEngine::ensure_stream(std::uint64_t idx, Window& w, Window& pre, int dir,
                                    std::uint32_t& out) {
    const Addr a = addr_of(idx);
    const Addr ln = line_of(a);
    const Addr first = line_of(addr_of(cur_.lo));
    const Addr last = line_of(addr_of(cur_.hi - 1));
    const Addr next = dir > 0 ? ln + kLineBytes : ln - kLineBytes;
    const bool next_ok = dir > 0 ? next <= last : ln > first;
    auto covered = [this](Addr t) {
        for (Window* c : {&left_, &right_, &scratch_, &left_pre_, &right_pre_})
            if ((c->have || c->pending) && c->line == t) return true;
        return false;
    };
    // Fetches go only into a window of this stream that is not mid-flight and
    // does not hold the line still being consumed; in-flight completions
    // address windows by reference, so a busy window is never retargeted.
    auto issue = [&](Addr target) {
        if (covered(target)) return;
        for (Window* c : {&w, &pre}) {
            if (c->pending) continue;
            if (c->have && c->line == ln) continue;
            fetch(*c, target);
            return;
        }
    };

    if (buf_.covers(a, 4)) {
        const StoreBuffer::Entry* e = buf_.find(ln);
        std::memcpy(&out, e->data.data() + (a - ln), 4);
        if (next_ok) issue(next);
        return true;
    }
    for (Window* cand : {&left_, &right_, &scratch_, &left_pre_, &right_pre_}) {
        if (!cand->have || cand->line != ln) continue;
        std::memcpy(&out, cand->data.data() + (a - ln), 4);
        if (next_ok) issue(next);
        return true;
    }
    issue(ln);
    if (next_ok) issue(next);
    return false;
}

void QuicksortEngine::update_windows(Addr a, const std::uint8_t* bytes, std::uint32_t n) {
    const Addr ln = line_of(a);
    for (Window* w : {&left_, &right_, &scratch_, &left_pre_, &right_pre_}) {
        if (w->have && w->line == ln) std::memcpy(w->data.data() + (a - ln), bytes, n);
    }
}

void QuicksortEngine::release(StoreBuffer::Entry e) {
    ++writes_outstanding_;
    const Addr line = e.line;
    const auto data = e.data;
    const std::uint64_t mask = e.valid;
    eng_.mem_write(
        line, data, mask,
        [this] {
            ++*releases_;
            --writes_outstanding_;
            eng_.request_step();
        },
        [this, e = std::move(e)](Addr) {
            --writes_outstanding_;
            retry_.push_back(e);
            eng_.request_step();
        });
}

void QuicksortEngine::buffered_write(Addr a, const std::uint8_t* bytes, std::uint32_t n) {
    while (!buf_.write(a, bytes, n)) {
        auto ev = buf_.force_evict();
        assert(ev.has_value());
        ++*forced_;
        release(std::move(*ev));
    }
    update_windows(a, bytes, n);
}

void QuicksortEngine::write_elem(std::uint64_t idx, std::uint32_t v) {
    std::uint8_t bytes[4];
    std::memcpy(bytes, &v, 4);
    buffered_write(addr_of(idx), bytes, 4);
}

bool QuicksortEngine::step_pivot() {
    const std::uint64_t lo = cur_.lo, hi = cur_.hi;
    const std::uint64_t mid = lo + (hi - lo) / 2;
    std::uint32_t va = 0, vb = 0, vc = 0;
    // First touches of a fresh range: the range's first and last lines.
    bool ok = ensure_value(lo, left_, va);
    ok &= ensure_value(hi - 1, right_, vb);
    ok &= ensure_value(mid, scratch_, vc);
    if (!ok) return false;
    // Median of (va, vc, vb); move it to the front so the canonical Hoare
    // loop, which pivots on the first element's value, always terminates
    // with both sides non-empty.
    std::uint64_t med_idx = mid;
    std::uint32_t med = vc;
    if ((va <= vc) == (vc <= vb)) {
        med = vc;
        med_idx = mid;
    } else if ((vc <= va) == (va <= vb)) {
        med = va;
        med_idx = lo;
    } else {
        med = vb;
        med_idx = hi - 1;
    }
    if (med_idx != lo) {
        std::uint32_t front = va;
        write_elem(lo, med);
        write_elem(med_idx, front);
        ++*swaps_;
    }
    pivot_ = med;
    *compares_ += 3;
    i_ = static_cast<std::int64_t>(lo) - 1;
    j_ = static_cast<std::int64_t>(hi);
    scan_forward_ = true;
    charge_owed_ = 3;
    phase_ = Phase::pivot_charge;
    return true;
}

QuicksortEngine::Blocked QuicksortEngine::step_scan(std::uint32_t& credit) {
    while (true) {
        if (swap_pending_) {
            std::uint32_t vi = 0;
            if (!ensure_value(static_cast<std::uint64_t>(i_), left_, vi)) return Blocked::memory;
            write_elem(static_cast<std::uint64_t>(i_), swap_v_);
            write_elem(static_cast<std::uint64_t>(j_), vi);
            ++*swaps_;
            swap_pending_ = false;
            scan_forward_ = true;
        }
        if (credit == 0) return Blocked::credit;
        if (scan_forward_) {
            const std::uint64_t target = static_cast<std::uint64_t>(i_ + 1);
            std::uint32_t v = 0;
            if (!ensure_stream(target, left_, left_pre_, 1, v)) return Blocked::memory;
            --credit;
            ++*compares_;
            i_ = static_cast<std::int64_t>(target);
            if (v < pivot_) continue;
            scan_forward_ = false;
            continue;
        }
        const std::uint64_t target = static_cast<std::uint64_t>(j_ - 1);
        std::uint32_t v = 0;
        if (!ensure_stream(target, right_, right_pre_, -1, v)) return Blocked::memory;
        --credit;
        ++*compares_;
        j_ = static_cast<std::int64_t>(target);
        if (v > pivot_) continue;
        if (i_ >= j_) {
            split_done(static_cast<std::uint64_t>(j_) + 1);
            return Blocked::no;
        }
        swap_pending_ = true;
        swap_v_ = v;
    }
}

void QuicksortEngine::split_done(std::uint64_t sp) {
    assert(sp > cur_.lo && sp < cur_.hi);
    if (addr_of(sp) % kLineBytes != 0) buf_.note_split(line_of(addr_of(sp)));
    const Range a{cur_.lo, sp}, b{sp, cur_.hi};
    // Larger child first so the smaller one is sorted next: bounds live
    // boundary lines in the store buffer to the recursion depth.
    if (a.hi - a.lo >= b.hi - b.lo) {
        stack_.push_back(a);
        stack_.push_back(b);
    } else {
        stack_.push_back(b);
        stack_.push_back(a);
    }
    phase_ = Phase::pick_range;
}

bool QuicksortEngine::step_leaf_fetch() {
    bool all = true;
    std::uint32_t wsel = 0;
    for (LeafLine& ll : leaf_lines_) {
        if (ll.have) continue;
        // Skip memory when the buffer already holds every needed byte.
        const Addr need_lo = std::max(ll.line, addr_of(cur_.lo));
        const Addr need_hi = std::min(ll.line + kLineBytes, addr_of(cur_.hi));
        if (buf_.covers(need_lo, static_cast<std::uint32_t>(need_hi - need_lo))) {
            buf_.merge_into(ll.line, ll.data);
            ll.have = true;
            continue;
        }
        bool copied = false;
        for (Window* w : {&left_, &right_, &scratch_, &left_pre_, &right_pre_}) {
            if (w->have && w->line == ll.line) {
                ll.data = w->data;  // fetch already merged buffered bytes
                ll.have = true;
                copied = true;
                break;
            }
        }
        if (copied) continue;
        all = false;
        Window* slots[] = {&left_, &right_, &left_pre_, &right_pre_};
        Window& w = *slots[wsel++ % 4];
        if (!w.pending) fetch(w, ll.line);
    }
    if (!all) return false;
    leaf_vals_.clear();
    for (std::uint64_t k = cur_.lo; k < cur_.hi; ++k) {
        const Addr a = addr_of(k);
        const auto& data = leaf_lines_[(line_of(a) - leaf_lines_.front().line) / kLineBytes].data;
        std::uint32_t v = 0;
        std::memcpy(&v, data.data() + (a - line_of(a)), 4);
        leaf_vals_.push_back(v);
    }
    // Insertion sort with honest compare counts.
    std::uint64_t cmp = 0;
    for (std::size_t k = 1; k < leaf_vals_.size(); ++k) {
        const std::uint32_t v = leaf_vals_[k];
        std::size_t m = k;
        while (m > 0) {
            ++cmp;
            if (leaf_vals_[m - 1] <= v) break;
            leaf_vals_[m] = leaf_vals_[m - 1];
            --m;
        }
        leaf_vals_[m] = v;
    }
    *compares_ += cmp;
    charge_owed_ = static_cast<std::uint32_t>(cmp);
    if (charge_owed_ == 0) charge_owed_ = 1;  // fetch-to-write turnaround
    phase_ = Phase::leaf_sort;
    return true;
}

void QuicksortEngine::leaf_complete() {
    for (std::uint64_t k = cur_.lo; k < cur_.hi; ++k)
        write_elem(k, leaf_vals_[k - cur_.lo]);
    for (Addr ln = line_of(addr_of(cur_.lo)); ln < addr_of(cur_.hi); ln += kLineBytes) {
        if (auto e = buf_.complete_span(ln)) release(std::move(*e));
    }
    phase_ = Phase::pick_range;
}

bool QuicksortEngine::step() {
    while (!retry_.empty()) {
        StoreBuffer::Entry e = std::move(retry_.front());
        retry_.pop_front();
        release(std::move(e));
    }
    if (!active_ && !start_task()) return false;
    std::uint32_t credit = p_.compares_per_cycle;
    while (true) {
        switch (phase_) {
            case Phase::pick_range:
                if (stack_.empty()) {
                    phase_ = Phase::drain;
                    break;
                }
                {
                    const Range r = stack_.back();
                    stack_.pop_back();
                    open_range(r);
                }
                break;
            case Phase::pivot_fetch:
                if (!step_pivot()) return false;
                break;
            case Phase::pivot_charge: {
                const std::uint32_t pay = std::min(credit, charge_owed_);
                credit -= pay;
                charge_owed_ -= pay;
                if (charge_owed_) return true;
                phase_ = Phase::scan;
                break;
            }
            case Phase::scan:
                switch (step_scan(credit)) {
                    case Blocked::memory:
                        return false;
                    case Blocked::credit:
                        return true;
                    case Blocked::no:
                        break;  // split pushed; phase is pick_range
                }
                break;
            case Phase::leaf_fetch:
                if (!step_leaf_fetch()) return false;
                break;
            case Phase::leaf_sort: {
                const std::uint32_t pay = std::min(credit, charge_owed_);
                credit -= pay;
                charge_owed_ -= pay;
                if (charge_owed_) return true;
                leaf_complete();
                break;
            }
            case Phase::drain:
                if (writes_outstanding_ || !retry_.empty()) return false;
                finish_task();
                if (!start_task()) return false;
                break;
        }
        if (credit == 0) return true;
    }
}

bool QuicksortEngine::idle() const {
    return !active_ && writes_outstanding_ == 0 && retry_.empty();
}

}  // namespace tilesim
