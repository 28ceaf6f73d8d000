#include "pav/decomposition.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace pav {

namespace {

u32 interval_of(const std::vector<u32>& starts, u32 coord) {
    auto it = std::upper_bound(starts.begin(), starts.end() - 1, coord);
    return static_cast<u32>(it - starts.begin()) - 1;
}

void build_csr(u32 groups, std::vector<std::pair<u32, u32>>& pairs, std::vector<u32>& ptr, std::vector<u32>& out) {
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    ptr.assign(groups + 1, 0);
    out.clear();
    out.reserve(pairs.size());
    for (auto [g, x] : pairs) {
        ++ptr[g + 1];
        out.push_back(x);
    }
    for (u32 g = 0; g < groups; ++g) ptr[g + 1] += ptr[g];
}

}  // namespace

u32 Division::row_of(u32 coord) const { return interval_of(rowStarts, coord); }
u32 Division::col_of(u32 coord) const { return interval_of(colStarts, coord); }

u32 Division::max_cells() const {
    u32 best = 0;
    for (u32 r = 0; r < rows(); ++r) best = std::max(best, row_cells(r));
    for (u32 c = 0; c < cols(); ++c) best = std::max(best, col_cells(c));
    return best;
}

Division Division::transposed() const {
    Division t;
    t.n = n;
    t.rowStarts = colStarts;
    t.colStarts = rowStarts;
    t.rowPtr = colPtr;
    t.rowCells = colCells;
    t.colPtr = rowPtr;
    t.colCells = rowCells;
    return t;
}

bool Division::operator==(const Division& o) const {
    return n == o.n && rowStarts == o.rowStarts && colStarts == o.colStarts && rowPtr == o.rowPtr &&
           rowCells == o.rowCells && colPtr == o.colPtr && colCells == o.colCells;
}

void Division::save(Writer& w) const {
    w.u64(n);
    w.vec(rowStarts);
    w.vec(colStarts);
    w.vec(rowPtr);
    w.vec(rowCells);
}

void Division::load(Reader& r) {
    n = static_cast<u32>(r.u64());
    rowStarts = r.vec<u32>();
    colStarts = r.vec<u32>();
    rowPtr = r.vec<u32>();
    rowCells = r.vec<u32>();
    if (rowStarts.size() < 2 || colStarts.size() < 2 || rowPtr.size() != rowStarts.size() ||
        rowPtr.back() != rowCells.size())
        throw std::runtime_error("corrupt index: division");
    std::vector<std::pair<u32, u32>> pairs;
    for (u32 rr = 0; rr < rows(); ++rr)
        for (u32 k = rowPtr[rr]; k < rowPtr[rr + 1]; ++k) {
            if (rowCells[k] >= cols()) throw std::runtime_error("corrupt index: division cell");
            pairs.emplace_back(rowCells[k], rr);
        }
    build_csr(cols(), pairs, colPtr, colCells);
}

Division make_division(const Permutation& tau, std::vector<u32> rowStarts, std::vector<u32> colStarts) {
    Division d;
    d.n = tau.size();
    d.rowStarts = std::move(rowStarts);
    d.colStarts = std::move(colStarts);
    std::vector<std::pair<u32, u32>> byRow, byCol;
    byRow.reserve(d.n);
    byCol.reserve(d.n);
    for (u32 i = 1; i <= d.n; ++i) {
        u32 r = d.row_of(tau.at(i)), c = d.col_of(i);
        byRow.emplace_back(r, c);
        byCol.emplace_back(c, r);
    }
    build_csr(d.rows(), byRow, d.rowPtr, d.rowCells);
    build_csr(d.cols(), byCol, d.colPtr, d.colCells);
    return d;
}

Hierarchy Hierarchy::transposed() const {
    Hierarchy h = *this;
    for (auto& d : h.divisions) d = d.transposed();
    return h;
}

// ---------------------------------------------------------------------------

DecompositionEngine::DecompositionEngine(const Permutation& tau, std::vector<u32> m) : n_(tau.size()) {
    for (size_t k = 0; k < m.size(); ++k) {
        if (m[k] <= 1 || m[k] >= n_) throw std::invalid_argument("division sizes must lie strictly between 1 and n");
        if (k && m[k] <= m[k - 1]) throw std::invalid_argument("division sizes must be strictly increasing");
    }
    mExt_.push_back(1);
    mExt_.insert(mExt_.end(), m.begin(), m.end());
    mExt_.push_back(n_);
    j_ = static_cast<u32>(m.size());
    tau_ = tau.values();

    for (int s = 0; s < 2; ++s) {
        strips_[s].resize(n_);
        for (u32 k = 0; k < n_; ++k) {
            Strip& t = strips_[s][k];
            t.prev = int(k) - 1;
            t.next = k + 1 < n_ ? int(k) + 1 : -1;
            t.id = k + 1;
            t.cells = 1;
            t.cellsWithNext = k + 1 < n_ ? 2 : kInf;
        }
        count_[s] = n_;
        head_[s] = n_ ? 0 : -1;
        stamp_[s].assign(n_, 0);
        flags_[s].assign(n_, 0);
    }
    // One cell per point; cell k sits in column k and row tau(k+1)-1.
    cells_.resize(n_);
    for (u32 k = 0; k < n_; ++k) {
        cells_[k].col = int(k);
        cells_[k].row = int(tau_[k]) - 1;
        strips_[1][k].firstCell = int(k);
        strips_[0][tau_[k] - 1].firstCell = int(k);
    }
    bucket_.resize(n_ + 1);
    requeue_all();
}

bool DecompositionEngine::tall(Side s, int t) const {
    return u64(strips_[int(s)][t].size) * count_[int(s)] > u64(kDelta) * n_;
}

bool DecompositionEngine::dense(Side s, int t) const {
    return u64(strips_[int(s)][t].density) * mExt_[j_] > u64(kDelta) * mExt_[j_ + 1];
}

bool DecompositionEngine::enqueue_if_mergeable(Side s, int t) {
    ++stats_.queueCalls;
    if (t < 0) return false;
    auto& S = strips_[int(s)];
    Strip& a = S[t];
    if (!a.alive || a.next < 0) return false;
    Strip& b = S[a.next];
    if (a.inQueue || b.inQueue) return false;
    if (tall(s, t) || tall(s, a.next) || dense(s, t) || dense(s, a.next)) return false;
    if (a.cellsWithNext > d_) return false;
    a.inQueue = b.inQueue = true;
    queue_[int(s)].push_back(t);
    ++stats_.queuePushes;
    return true;
}

int DecompositionEngine::pop(Side s) {
    auto& q = queue_[int(s)];
    if (q.empty()) throw std::logic_error("pop from empty merge queue");
    int t = q.front();
    q.pop_front();
    return t;
}

void DecompositionEngine::requeue_all() {
    for (Side s : {Side::row, Side::col})
        for (int t = head_[int(s)]; t >= 0; t = strips_[int(s)][t].next) enqueue_if_mergeable(s, t);
}

void DecompositionEngine::double_d() {
    d_ *= 2;
    ++stats_.doublings;
    stats_.dTrace.push_back(d_);
    requeue_all();
}

void DecompositionEngine::bucket_expire(u32 i) {
    if (i >= bucket_.size()) return;
    auto items = std::move(bucket_[i]);
    bucket_[i].clear();
    for (auto [s, t] : items) {
        if (!strips_[s][t].alive) continue;
        enqueue_if_mergeable(Side(s), strips_[s][t].prev);
        enqueue_if_mergeable(Side(s), t);
    }
}

void DecompositionEngine::phase_boundary() {
    if (j_ == 0) throw std::logic_error("no phase left");
    snapshots_.push_back(current_division());
    for (auto& S : strips_)
        for (auto& t : S) t.density = 1;
    --j_;
    requeue_all();
}

u32 DecompositionEngine::union_count(Side s, int a, int b) {
    int p = strips_[int(s)][a].firstCell, q = strips_[int(s)][b].firstCell;
    u32 cnt = 0;
    while (p >= 0 || q >= 0) {
        ++stats_.cellOps;
        ++cnt;
        if (q < 0) {
            p = along_next(s, cells_[p]);
        } else if (p < 0) {
            q = along_next(s, cells_[q]);
        } else {
            int cp = cross_owner(s, cells_[p]), cq = cross_owner(s, cells_[q]);
            if (cp == cq) {
                p = along_next(s, cells_[p]);
                q = along_next(s, cells_[q]);
            } else if (cp < cq) {
                p = along_next(s, cells_[p]);
            } else {
                q = along_next(s, cells_[q]);
            }
        }
    }
    return cnt;
}

void DecompositionEngine::merge(Side s, int a) {
    const int si = int(s);
    const Side x = s == Side::row ? Side::col : Side::row;
    const int xi = int(x);
    auto& S = strips_[si];
    auto& X = strips_[xi];
    assert(a >= 0 && S[a].alive && S[a].next >= 0);
    const int b = S[a].next;
    Strip& A = S[a];
    Strip& B = S[b];

    A.size += B.size;
    A.density += B.density;
    A.next = B.next;
    if (B.next >= 0) S[B.next].prev = a;
    B.alive = false;
    A.inQueue = B.inQueue = false;
    --count_[si];
    ++stats_.merges;

    ++stampGen_;
    affected_.clear();
    auto mark = [&](int c, unsigned char bit) {
        if (stamp_[xi][c] != stampGen_) {
            stamp_[xi][c] = stampGen_;
            flags_[xi][c] = 0;
            affected_.push_back(c);
        }
        flags_[xi][c] |= bit;
    };
    auto flag = [&](int c) -> unsigned char { return stamp_[xi][c] == stampGen_ ? flags_[xi][c] : 0; };

    int p = A.firstCell, q = B.firstCell, head = -1, tail = -1;
    u32 cnt = 0;
    auto append = [&](int c) {
        along_prev(s, cells_[c]) = tail;
        along_next(s, cells_[c]) = -1;
        if (tail >= 0)
            along_next(s, cells_[tail]) = c;
        else
            head = c;
        tail = c;
        ++cnt;
    };
    while (p >= 0 || q >= 0) {
        ++stats_.cellOps;
        int cp = p >= 0 ? cross_owner(s, cells_[p]) : -1;
        int cq = q >= 0 ? cross_owner(s, cells_[q]) : -1;
        if (p >= 0 && q >= 0 && cp == cq) {
            // Same orthogonal strip: keep p, unlink q from that strip's chain.
            int after = cross_next(s, cells_[q]);
            assert(cross_next(s, cells_[p]) == q);
            cross_next(s, cells_[p]) = after;
            if (after >= 0) cross_prev(s, cells_[after]) = p;
            --X[cp].cells;
            mark(cp, 3);
            int pn = along_next(s, cells_[p]), qn = along_next(s, cells_[q]);
            owner(s, cells_[q]) = -1;
            append(p);
            p = pn;
            q = qn;
        } else if (q < 0 || (p >= 0 && cp < cq)) {
            mark(cp, 1);
            int pn = along_next(s, cells_[p]);
            append(p);
            p = pn;
        } else {
            mark(cq, 2);
            owner(s, cells_[q]) = a;
            int qn = along_next(s, cells_[q]);
            append(q);
            q = qn;
        }
    }
    A.firstCell = head;
    A.cells = cnt;

    // Orthogonal pairs (C, C.next) lose one distinct cell iff the pair saw both halves.
    for (int c : affected_) {
        int nx = X[c].next;
        if (nx >= 0) {
            unsigned char f = flag(c) | flag(nx);
            if ((f & 1) && (f & 2)) --X[c].cellsWithNext;
        }
        int pv = X[c].prev;
        if (pv >= 0 && stamp_[xi][pv] != stampGen_) {
            unsigned char f = flag(c);
            if ((f & 1) && (f & 2)) --X[pv].cellsWithNext;
        }
    }

    A.cellsWithNext = A.next >= 0 ? union_count(s, a, A.next) : kInf;
    if (A.prev >= 0) S[A.prev].cellsWithNext = union_count(s, A.prev, a);

    if (tall(s, a)) bucket_[u64(kDelta) * n_ / A.size].emplace_back(si, a);

    enqueue_if_mergeable(s, A.prev);
    enqueue_if_mergeable(s, a);
    for (int c : affected_) {
        enqueue_if_mergeable(x, X[c].prev);
        enqueue_if_mergeable(x, c);
    }
}

Division DecompositionEngine::current_division() const {
    Division d;
    d.n = n_;
    std::vector<u32> rank[2];
    for (int s = 0; s < 2; ++s) {
        rank[s].assign(n_, 0);
        auto& starts = s == 0 ? d.rowStarts : d.colStarts;
        u32 r = 0;
        for (int t = head_[s]; t >= 0; t = strips_[s][t].next) {
            rank[s][t] = r++;
            starts.push_back(strips_[s][t].id);
        }
        starts.push_back(n_ + 1);
    }
    for (int s = 0; s < 2; ++s) {
        auto& ptr = s == 0 ? d.rowPtr : d.colPtr;
        auto& out = s == 0 ? d.rowCells : d.colCells;
        ptr.assign(1, 0);
        for (int t = head_[s]; t >= 0; t = strips_[s][t].next) {
            for (int c = strips_[s][t].firstCell; c >= 0;) {
                const Cell& cell = cells_[c];
                out.push_back(rank[1 - s][s == 0 ? cell.col : cell.row]);
                c = s == 0 ? cell.rowNext : cell.colNext;
            }
            ptr.push_back(static_cast<u32>(out.size()));
        }
    }
    return d;
}

bool DecompositionEngine::verify_consistency(std::string* why) const {
    auto bad = [&](std::string msg) {
        if (why) *why = std::move(msg);
        return false;
    };
    Division live = current_division();
    Division ref = make_division(Permutation(tau_), live.rowStarts, live.colStarts);
    if (!(live == ref)) return bad("cell lists differ from recomputation");
    for (int s = 0; s < 2; ++s) {
        const auto& starts = s == 0 ? live.rowStarts : live.colStarts;
        const auto& ptr = s == 0 ? live.rowPtr : live.colPtr;
        const auto& out = s == 0 ? live.rowCells : live.colCells;
        u32 r = 0, alive = 0;
        int prev = -1;
        for (int t = head_[s]; t >= 0; t = strips_[s][t].next, ++r) {
            const Strip& st = strips_[s][t];
            if (st.prev != prev) return bad("broken prev link");
            prev = t;
            if (st.size != starts[r + 1] - starts[r]) return bad("size mismatch");
            if (st.cells != ptr[r + 1] - ptr[r]) return bad("cell count mismatch");
            u32 expect = kInf;
            if (st.next >= 0) {
                std::vector<u32> u;
                std::set_union(out.begin() + ptr[r], out.begin() + ptr[r + 1], out.begin() + ptr[r + 1],
                               out.begin() + ptr[r + 2], std::back_inserter(u));
                expect = static_cast<u32>(u.size());
            }
            if (st.cellsWithNext != expect) return bad("cellsWithNext mismatch");
            // Cross links of each cell must point at the cell's true neighbours.
            for (int c = st.firstCell; c >= 0;) {
                const Cell& cell = cells_[c];
                int own = s == 0 ? cell.row : cell.col;
                if (own != t) return bad("owner link mismatch");
                int nx = s == 0 ? cell.rowNext : cell.colNext;
                if (nx >= 0 && (s == 0 ? cells_[nx].rowPrev : cells_[nx].colPrev) != c)
                    return bad("along links not symmetric");
                c = nx;
            }
        }
        for (const auto& st : strips_[s]) alive += st.alive;
        if (alive != count_[s] || r != count_[s]) return bad("strip count mismatch");
    }
    for (int s = 0; s < 2; ++s) {
        std::vector<char> seen(n_, 0);
        for (int t : queue_[s]) {
            const Strip& st = strips_[s][t];
            if (!st.alive || st.next < 0 || !st.inQueue || !strips_[s][st.next].inQueue)
                return bad("queued pair not valid");
            if (st.cellsWithNext > d_) return bad("queued pair over sparsity bound");
            if (seen[t] || seen[st.next]) return bad("strip queued twice");
            seen[t] = seen[st.next] = 1;
        }
        for (u32 t = 0; t < n_; ++t)
            if (strips_[s][t].alive && bool(strips_[s][t].inQueue) != bool(seen[t])) return bad("inQueue flag stale");
    }
    return true;
}

Hierarchy DecompositionEngine::run() {
    for (u32 i = n_; i-- > 1;) {
        while (queue_empty(Side::row) || queue_empty(Side::col)) {
            if (d_ > 4 * n_ + 4) throw std::logic_error("decomposition made no progress");
            double_d();
        }
        merge(Side::row, pop(Side::row));
        merge(Side::col, pop(Side::col));
        bucket_expire(i);
        if (j_ >= 1 && i == mExt_[j_]) phase_boundary();
    }
    Hierarchy h;
    h.n = n_;
    h.m.assign(mExt_.begin() + 1, mExt_.end() - 1);
    h.divisions.assign(snapshots_.rbegin(), snapshots_.rend());
    h.dMax = d_;
    h.delta = kDelta;
    h.stats = stats_;
    return h;
}

Hierarchy build_hierarchy(const Permutation& tau, const std::vector<u32>& m) {
    DecompositionEngine e(tau, m);
    return e.run();
}

// ---------------------------------------------------------------------------

InvariantReport check_hierarchy(const Hierarchy& h, const Permutation& tau) {
    InvariantReport rep;
    const u32 n = tau.size();
    if (h.n != n) rep.fail("n mismatch");
    if (h.divisions.size() != h.m.size()) {
        rep.fail("division count differs from size list");
        return rep;
    }
    auto ext = [&](size_t k) -> u64 { return k < h.m.size() ? h.m[k] : n; };
    for (size_t k = 0; k < h.divisions.size(); ++k) {
        const Division& d = h.divisions[k];
        const std::string tag = "division " + std::to_string(k) + ": ";
        auto ok_starts = [&](const std::vector<u32>& st) {
            if (st.size() < 2 || st.front() != 1 || st.back() != n + 1) return false;
            for (size_t i = 1; i < st.size(); ++i)
                if (st[i] <= st[i - 1]) return false;
            return true;
        };
        if (!ok_starts(d.rowStarts) || !ok_starts(d.colStarts)) {
            rep.fail(tag + "intervals do not partition [1..n]");
            continue;
        }
        // (b)
        if (d.rows() != h.m[k] || d.cols() != h.m[k]) rep.fail(tag + "wrong number of rows or columns");
        // cells recomputed from scratch
        Division ref = make_division(tau, d.rowStarts, d.colStarts);
        if (!(ref.rowPtr == d.rowPtr && ref.rowCells == d.rowCells && ref.colPtr == d.colPtr &&
              ref.colCells == d.colCells))
            rep.fail(tag + "non-zero cells differ from recomputation");
        // (c)
        for (u32 r = 0; r < d.rows(); ++r)
            if (u64(d.row_size(r)) * h.m[k] > 40ull * n) rep.fail(tag + "row " + std::to_string(r) + " too tall");
        for (u32 c = 0; c < d.cols(); ++c)
            if (u64(d.col_size(c)) * h.m[k] > 40ull * n) rep.fail(tag + "column " + std::to_string(c) + " too wide");
        // (d)
        if (ref.max_cells() > h.dMax) rep.fail(tag + "strip exceeds dMax non-zero cells");
        // (a) and (e)
        std::vector<u32> fineRows, fineCols;
        if (k + 1 < h.divisions.size()) {
            fineRows = h.divisions[k + 1].rowStarts;
            fineCols = h.divisions[k + 1].colStarts;
        } else {
            for (u32 i = 1; i <= n + 1; ++i) fineRows.push_back(i);
            fineCols = fineRows;
        }
        for (int side = 0; side < 2; ++side) {
            const auto& coarse = side == 0 ? d.rowStarts : d.colStarts;
            const auto& fine = side == 0 ? fineRows : fineCols;
            size_t f = 0;
            for (size_t i = 0; i + 1 < coarse.size(); ++i) {
                while (f < fine.size() && fine[f] < coarse[i]) ++f;
                if (f == fine.size() || fine[f] != coarse[i]) {
                    rep.fail(tag + "not a coarsening of the next division");
                    break;
                }
                size_t g = f;
                while (fine[g] < coarse[i + 1]) ++g;
                if (u64(g - f) * h.m[k] > 40ull * ext(k + 1))
                    rep.fail(tag + "interval " + std::to_string(i) + " merges too many finer intervals");
            }
        }
    }
    return rep;
}

}  // namespace pav
