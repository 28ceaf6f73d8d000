#include "pav/compact_index.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pav {

Bits SpaceReport::total() const {
    Bits b;
    for (const auto& c : components) b += c.bits;
    return b;
}

u64 SpaceReport::payload_bits() const {
    u64 s = 0;
    for (const auto& c : components)
        if (c.payload) s += c.bits.model;
    return s;
}

u64 SpaceReport::overhead_model_bits() const {
    u64 s = 0;
    for (const auto& c : components)
        if (!c.payload) s += c.bits.model;
    return s;
}

std::optional<LevelSizes> level_sizes(u32 n) {
    if (n < 4) return std::nullopt;
    u64 lg = ceil_log2(n);
    u64 sq = static_cast<u64>(std::ceil(std::sqrt(std::log2(double(n)))));
    LevelSizes s{static_cast<u32>(n / (lg * lg)), static_cast<u32>(n / sq)};
    if (1 < s.m1 && s.m1 < s.m2 && s.m2 < n) return s;
    return std::nullopt;
}

namespace {

// Min segment tree over pi; finds the leftmost position in a range holding
// a value below a threshold.
class FirstBelow {
public:
    explicit FirstBelow(const std::vector<u32>& pi) : n_(static_cast<u32>(pi.size())) {
        size_ = 1;
        while (size_ < n_) size_ <<= 1;
        t_.assign(2 * size_, ~0u);
        for (u32 i = 0; i < n_; ++i) t_[size_ + i] = pi[i];
        for (u32 i = size_; i-- > 1;) t_[i] = std::min(t_[2 * i], t_[2 * i + 1]);
    }
    // 1-based positions; 0 when none.
    u32 find(u32 lo, u32 hi, u32 below) const {
        if (lo > hi || lo < 1 || hi > n_) return 0;
        return go(1, 1, size_, lo, hi, below);
    }

private:
    u32 go(u32 node, u32 l, u32 r, u32 lo, u32 hi, u32 below) const {
        if (r < lo || l > hi || t_[node] >= below) return 0;
        if (l == r) return l;
        u32 mid = (l + r) / 2;
        if (u32 x = go(2 * node, l, mid, lo, hi, below)) return x;
        return go(2 * node + 1, mid + 1, r, lo, hi, below);
    }
    u32 n_, size_;
    std::vector<u32> t_;
};

// For every fine strip, the coarse strip containing it, and the first fine
// strip of every coarse strip (with a trailing sentinel).
void nest(const std::vector<u32>& coarse, const std::vector<u32>& fine, std::vector<u32>& parent,
          std::vector<u32>& first) {
    u32 fc = static_cast<u32>(fine.size()) - 1, cc = static_cast<u32>(coarse.size()) - 1;
    parent.assign(fc, 0);
    first.assign(cc + 1, fc);
    u32 J = 0;
    for (u32 f = 0; f < fc; ++f) {
        while (coarse[J + 1] <= fine[f]) ++J;
        if (coarse[J] == fine[f]) first[J] = f;
        parent[f] = J;
    }
}

u32 position_in(const std::vector<u32>& list, u32 from, u32 to, u32 x) {
    auto it = std::lower_bound(list.begin() + from, list.begin() + to, x);
    if (it == list.begin() + to || *it != x) throw std::logic_error("cell lists disagree");
    return static_cast<u32>(it - (list.begin() + from));
}

constexpr u32 kOffWidthBits = 6;

}  // namespace

namespace detail {

void StripSide::build(const std::vector<u32>& pi, const Hierarchy& h, StripAxis axis, bool withNext, u32 widthCap) {
    const u32 n = static_cast<u32>(pi.size());
    const Division& D1 = h.divisions.at(0);
    const Division& D2 = h.divisions.at(1);
    m1_ = D1.cols();
    withNext_ = withNext;
    const u32 m2 = D2.cols();

    std::vector<u32> coarseOfCol, firstCol, coarseOfRow, firstRow;
    nest(D1.colStarts, D2.colStarts, coarseOfCol, firstCol);
    nest(D1.rowStarts, D2.rowStarts, coarseOfRow, firstRow);
    std::vector<u32> rowOfValue(n + 1);
    for (u32 g = 0; g < D2.rows(); ++g)
        for (u32 v = D2.rowStarts[g]; v < D2.rowStarts[g + 1]; ++v) rowOfValue[v] = g;

    I = BitVector::from_positions(n, std::vector<u64>(D2.colStarts.begin(), D2.colStarts.end() - 1));
    std::vector<u32> degrees;
    degrees.push_back(m1_);
    for (u32 J = 0; J < m1_; ++J) degrees.push_back(firstCol[J + 1] - firstCol[J]);
    degrees.resize(1 + m1_ + m2, 0);
    T = OrderedTree(degrees);

    table = GriddedPermTable(axis, widthCap);
    std::vector<GriddedPermTable::Id> ids(m2);
    u32 maxW = 0;
    for (u32 f = 0; f < m2; ++f) {
        const u32 st = D2.colStarts[f], w = D2.col_size(f);
        maxW = std::max(maxW, w);
        std::vector<u32> vals(pi.begin() + (st - 1), pi.begin() + (st - 1 + w));
        std::vector<u32> sorted = vals;
        std::sort(sorted.begin(), sorted.end());
        GriddedPermutation gp;
        gp.perm.resize(w);
        for (u32 k = 0; k < w; ++k)
            gp.perm[k] = static_cast<u32>(std::lower_bound(sorted.begin(), sorted.end(), vals[k]) - sorted.begin()) + 1;
        gp.cells.assign(D2.col_cells(f), 0);
        for (u32 x : vals) ++gp.cells[position_in(D2.colCells, D2.colPtr[f], D2.colPtr[f + 1], rowOfValue[x])];
        ids[f] = table.intern(gp);
    }

    u32 maxQ = 0, maxSub = 0, maxCellSum = 0, maxCoarseW = 0, maxCoarseH = 0;
    for (u32 J = 0; J < m1_; ++J) {
        maxQ = std::max(maxQ, firstCol[J + 1] - firstCol[J]);
        maxCoarseW = std::max(maxCoarseW, D1.col_size(J));
        u32 cells = D2.colPtr[firstCol[J + 1]] - D2.colPtr[firstCol[J]];
        maxCellSum = std::max(maxCellSum, cells);
    }
    for (u32 I1 = 0; I1 < D1.rows(); ++I1) {
        maxSub = std::max(maxSub, firstRow[I1 + 1] - firstRow[I1]);
        maxCoarseH = std::max(maxCoarseH, D1.row_size(I1));
    }
    widthBits_ = bits_for(maxW);
    dBits_ = bits_for(std::max({h.dMax, D1.max_cells(), D2.max_cells()}));
    qBits_ = bits_for(maxQ);
    rBits_ = bits_for(maxSub);
    cbBits_ = bits_for(maxCellSum);
    rootCbBits_ = bits_for(D1.colCells.size());
    r1Bits_ = bits_for(D1.rows());
    nsJBits_ = withNext ? bits_for(maxCoarseW) : 0;
    nsIBits_ = withNext ? bits_for(maxCoarseH) : 0;
    nsBits_ = withNext ? bits_for(n) : 0;

    std::optional<FirstBelow> below;
    std::vector<u32> posOf;
    if (withNext) {
        below.emplace(pi);
        posOf.assign(n + 1, 0);
        for (u32 j = 1; j <= n; ++j) posOf[pi[j - 1]] = j;
    }

    std::vector<BitBuffer> level1(m1_);
    for (u32 J = 0; J < m1_; ++J) {
        const u32 q = firstCol[J + 1] - firstCol[J];
        BitBuffer kids;
        std::vector<u64> offs;
        for (u32 f = firstCol[J]; f < firstCol[J + 1]; ++f) {
            offs.push_back(kids.size());
            kids.append(ids[f].width, widthBits_);
            kids.append(ids[f].index, table.index_bits(ids[f].width));
        }
        const u32 offW = bits_for(kids.size());
        BitBuffer& b = level1[J];
        b.append(offW, kOffWidthBits);
        b.append(q, qBits_);
        u32 acc = 0;
        for (u32 f = firstCol[J]; f <= firstCol[J + 1]; ++f) {
            b.append(acc, cbBits_);
            if (f < firstCol[J + 1]) acc += D2.col_cells(f);
        }
        const u32 startJ = D1.colStarts[J], endJ = D1.colStarts[J + 1] - 1;
        for (u32 f = firstCol[J]; f < firstCol[J + 1]; ++f) {
            const u32 endF = D2.colStarts[f + 1] - 1;
            for (u32 k = D2.colPtr[f]; k < D2.colPtr[f + 1]; ++k) {
                const u32 g = D2.colCells[k], I1 = coarseOfRow[g];
                b.append(position_in(D2.rowCells, D2.rowPtr[g], D2.rowPtr[g + 1], f) + 1, dBits_);
                b.append(g - firstRow[I1] + 1, rBits_);
                b.append(position_in(D1.colCells, D1.colPtr[J], D1.colPtr[J + 1], I1) + 1, dBits_);
                if (withNext) {
                    u32 j = below->find(endF + 1, endJ, D2.rowStarts[g]);
                    b.append(j ? j - startJ + 1 : 0, nsJBits_);
                    u32 bestPos = 0, bestVal = 0;
                    for (u32 v = D1.rowStarts[I1]; v < D2.rowStarts[g]; ++v)
                        if (posOf[v] > endF && (bestPos == 0 || posOf[v] < bestPos)) {
                            bestPos = posOf[v];
                            bestVal = v;
                        }
                    b.append(bestPos ? bestVal - D1.rowStarts[I1] + 1 : 0, nsIBits_);
                }
            }
        }
        for (u64 o : offs) b.append(o, offW);
        b.append(kids);
    }

    G = BitBuffer();
    u64 total = 0;
    std::vector<u64> offs;
    for (const auto& b : level1) {
        offs.push_back(total);
        total += b.size();
    }
    const u32 offW = bits_for(total);
    G.append(offW, kOffWidthBits);
    u32 acc = 0;
    for (u32 J = 0; J <= m1_; ++J) {
        G.append(acc, rootCbBits_);
        if (J < m1_) acc += D1.col_cells(J);
    }
    for (u32 J = 0; J < m1_; ++J) {
        const u32 endJ = D1.colStarts[J + 1] - 1;
        for (u32 k = D1.colPtr[J]; k < D1.colPtr[J + 1]; ++k) {
            const u32 I1 = D1.colCells[k];
            G.append(position_in(D1.rowCells, D1.rowPtr[I1], D1.rowPtr[I1 + 1], J) + 1, dBits_);
            G.append(I1 + 1, r1Bits_);
            if (withNext) G.append(below->find(endJ + 1, n, D1.rowStarts[I1]), nsBits_);
        }
    }
    for (u64 o : offs) G.append(o, offW);
    for (const auto& b : level1) G.append(b);
    recount_payload();
}

void StripSide::recount_payload() {
    payloadBits_ = 0;
    for (u32 s = 1; s <= T.leaves(); ++s) {
        u32 w = fine(s, nullptr).entry->width();
        payloadBits_ += widthBits_ + table.index_bits(w);
    }
}

u64 StripSide::root_child(u32 s1, OpCounter* c) const {
    tick(c, 3);
    const u32 offW = static_cast<u32>(G.get(0, kOffWidthBits));
    const u64 nslots = G.get(kOffWidthBits + u64(m1_) * rootCbBits_, rootCbBits_);
    const u64 offStart = kOffWidthBits + u64(m1_ + 1) * rootCbBits_ + nslots * slot0_bits();
    return offStart + u64(m1_) * offW + G.get(offStart + u64(s1 - 1) * offW, offW);
}

StripSide::RootSlot StripSide::root_slot(u32 s1, u32 c1, OpCounter* c) const {
    tick(c, 4);
    const u64 cb = G.get(kOffWidthBits + u64(s1 - 1) * rootCbBits_, rootCbBits_);
    u64 p = kOffWidthBits + u64(m1_ + 1) * rootCbBits_ + (cb + c1 - 1) * slot0_bits();
    RootSlot s;
    s.cPrime = static_cast<u32>(G.get(p, dBits_));
    s.r = static_cast<u32>(G.get(p + dBits_, r1Bits_));
    s.next = static_cast<u32>(G.get(p + dBits_ + r1Bits_, nsBits_));
    return s;
}

u32 StripSide::level1_cells(u64 node, u32 s2, OpCounter* c) const {
    tick(c, 2);
    const u64 cbStart = node + kOffWidthBits + qBits_;
    return static_cast<u32>(G.get(cbStart + u64(s2) * cbBits_, cbBits_) - G.get(cbStart + u64(s2 - 1) * cbBits_, cbBits_));
}

u64 StripSide::level1_child(u64 node, u32 s2, OpCounter* c) const {
    tick(c, 4);
    const u32 offW = static_cast<u32>(G.get(node, kOffWidthBits));
    const u32 q = static_cast<u32>(G.get(node + kOffWidthBits, qBits_));
    const u64 cbStart = node + kOffWidthBits + qBits_;
    const u64 nslots = G.get(cbStart + u64(q) * cbBits_, cbBits_);
    const u64 offStart = cbStart + u64(q + 1) * cbBits_ + nslots * slot1_bits();
    return offStart + u64(q) * offW + G.get(offStart + u64(s2 - 1) * offW, offW);
}

StripSide::Level1Slot StripSide::level1_slot(u64 node, u32 s2, u32 c2, OpCounter* c) const {
    tick(c, 5);
    const u64 cbStart = node + kOffWidthBits + qBits_;
    const u32 q = static_cast<u32>(G.get(node + kOffWidthBits, qBits_));
    const u64 cb = G.get(cbStart + u64(s2 - 1) * cbBits_, cbBits_);
    u64 p = cbStart + u64(q + 1) * cbBits_ + (cb + c2 - 1) * slot1_bits();
    Level1Slot s;
    s.cPrime = static_cast<u32>(G.get(p, dBits_));
    p += dBits_;
    s.r = static_cast<u32>(G.get(p, rBits_));
    p += rBits_;
    s.parent = static_cast<u32>(G.get(p, dBits_));
    p += dBits_;
    s.nextInCoarse = static_cast<u32>(G.get(p, nsJBits_));
    s.nextInRow = static_cast<u32>(G.get(p + nsJBits_, nsIBits_));
    return s;
}

const GriddedEntry& StripSide::leaf(u64 pos, OpCounter* c) const {
    tick(c, 3);
    const u32 w = leaf_width(pos);
    const u32 idx = static_cast<u32>(G.get(pos + widthBits_, table.index_bits(w)));
    return table.entry(w, idx);
}

StripSide::Fine StripSide::fine(u32 s, OpCounter* c) const {
    tick(c, 5);
    Fine f;
    const u64 v = T.leaf_select(s);
    f.s2 = static_cast<u32>(T.child_rank(v)) + 1;
    f.s1 = static_cast<u32>(T.child_rank(T.parent(v))) + 1;
    f.start = static_cast<u32>(I.select(s));
    f.node1 = root_child(f.s1, c);
    f.entry = &leaf(level1_child(f.node1, f.s2, c), c);
    return f;
}

u32 StripSide::fine_index(u32 s1, u32 s2, OpCounter* c) const {
    tick(c, 3);
    return static_cast<u32>(T.leaf_rank(T.child(T.child(0, s1), s2))) + 1;
}

u32 StripSide::fine_start(u32 s, OpCounter* c) const {
    tick(c);
    return static_cast<u32>(I.select(s));
}

void StripSide::save(Writer& w) const {
    I.save(w);
    T.save(w);
    G.save(w);
    table.save(w);
    w.vec(std::vector<u32>{withNext_ ? 1u : 0u, widthBits_, dBits_, qBits_, rBits_, cbBits_, rootCbBits_, r1Bits_,
                           nsJBits_, nsIBits_, nsBits_});
}

void StripSide::load(Reader& r, u32 n, u32 m1) {
    I.load(r);
    T.load(r);
    G.load(r);
    table.load(r);
    auto f = r.vec<u32>();
    if (f.size() != 11) throw std::runtime_error("corrupt index: field widths");
    for (u32 i = 1; i < f.size(); ++i)
        if (f[i] > 32) throw std::runtime_error("corrupt index: field widths");
    withNext_ = f[0] != 0;
    widthBits_ = f[1], dBits_ = f[2], qBits_ = f[3], rBits_ = f[4], cbBits_ = f[5], rootCbBits_ = f[6];
    r1Bits_ = f[7], nsJBits_ = f[8], nsIBits_ = f[9], nsBits_ = f[10];
    m1_ = m1;
    if (I.size() != n || T.nodes() != 1 + m1 + I.ones() || T.degree(0) != m1)
        throw std::runtime_error("corrupt index: strip side shape");
    recount_payload();
}

bool StripSide::operator==(const StripSide& o) const {
    Writer a, b;
    save(a);
    o.save(b);
    return a.str() == b.str();
}

}  // namespace detail

CompactIndex CompactIndex::build(const Permutation& tau) {
    CompactIndex x;
    x.n_ = tau.size();
    auto sizes = level_sizes(x.n_);
    const auto& t = tau.values();
    if (!sizes) {
        x.fallback_ = true;
        std::vector<u64> tv(t.begin(), t.end()), iv(x.n_), nx(x.n_, 0);
        for (u32 i = 0; i < x.n_; ++i) {
            tv[i] -= 1;
            iv[t[i] - 1] = i;
        }
        std::vector<u32> st;
        for (u32 i = x.n_; i-- > 0;) {
            while (!st.empty() && t[st.back()] > t[i]) st.pop_back();
            nx[i] = st.empty() ? 0 : st.back() + 1;
            st.push_back(i);
        }
        auto pack = [&](const std::vector<u64>& v) {
            PackedArray p(v.size(), std::max(1u, ceil_log2(std::max<u64>(2, x.n_))));
            for (u64 i = 0; i < v.size(); ++i) p.set(i, v[i]);
            return p;
        };
        x.tau_ = pack(tv);
        x.inv_ = pack(iv);
        x.next_ = PackedArray::from(nx);
        x.colMin_.build_values(t);
        return x;
    }
    x.fallback_ = false;
    x.m1_ = sizes->m1;
    x.m2_ = sizes->m2;
    Hierarchy h = build_hierarchy(tau, {x.m1_, x.m2_});
    x.dMax_ = h.dMax;
    const u32 cap = fine_width_cap(x.n_);
    x.side_[0].build(t, h, StripAxis::column, true, cap);
    x.side_[1].build(tau.inverse().values(), h.transposed(), StripAxis::row, false, cap);

    std::vector<u32> mins(x.m2_);
    for (u32 s = 1; s <= x.m2_; ++s) mins[s - 1] = t[x.column_min_position(s) - 1];
    x.colMin_.build_values(mins);
    return x;
}

u32 CompactIndex::cross(int a, u32 x, OpCounter* ops) const {
    const auto& A = side_[a];
    const auto& B = side_[1 - a];
    tick(ops);
    const u32 s = static_cast<u32>(A.I.rank(x));
    const auto F = A.fine(s, ops);
    const u32 s3 = x - F.start + 1;
    tick(ops);
    const CellRef ref = F.entry->cell_of(s3);
    const auto sl = A.level1_slot(F.node1, F.s2, ref.c, ops);
    const auto rs = A.root_slot(F.s1, sl.parent, ops);
    const u64 node = B.root_child(rs.r, ops);
    const GriddedEntry& e = B.leaf(B.level1_child(node, sl.r, ops), ops);
    tick(ops);
    const u32 r3 = e.offset_of(sl.cPrime, ref.v);
    const u32 ri = B.fine_start(B.fine_index(rs.r, sl.r, ops), ops);
    return ri + r3 - 1;
}

u32 CompactIndex::rank(u32 i, OpCounter* ops) const {
    if (i < 1 || i > n_) throw std::out_of_range("rank argument out of range");
    if (fallback_) {
        tick(ops);
        return static_cast<u32>(tau_[i - 1]) + 1;
    }
    return cross(0, i, ops);
}

u32 CompactIndex::unrank(u32 v, OpCounter* ops) const {
    if (v < 1 || v > n_) throw std::out_of_range("unrank argument out of range");
    if (fallback_) {
        tick(ops);
        return static_cast<u32>(inv_[v - 1]) + 1;
    }
    return cross(1, v, ops);
}

std::pair<u32, u32> CompactIndex::cross_cell(int a, u32 s, u32 c, OpCounter* ops) const {
    const auto& A = side_[a];
    const auto F = A.fine(s, ops);
    const auto sl = A.level1_slot(F.node1, F.s2, c, ops);
    const auto rs = A.root_slot(F.s1, sl.parent, ops);
    return {side_[1 - a].fine_index(rs.r, sl.r, ops), sl.cPrime};
}

u32 CompactIndex::column_min_position(u32 s) const {
    const auto F = side_[0].fine(s, nullptr);
    return F.start + F.entry->range_min(1, F.entry->width()) - 1;
}

u32 CompactIndex::range_min(u32 a, u32 b) const {
    if (a < 1 || a > b || b > n_) throw std::out_of_range("range out of range");
    if (fallback_) {
        auto less = [&](u64 x, u64 y) { return tau_[x] < tau_[y]; };
        return static_cast<u32>(colMin_.query(a - 1, b - 1, less)) + 1;
    }
    const auto& C = side_[0];
    const u32 sa = static_cast<u32>(C.I.rank(a)), sb = static_cast<u32>(C.I.rank(b));
    const auto Fa = C.fine(sa, nullptr);
    if (sa == sb) return Fa.start + Fa.entry->range_min(a - Fa.start + 1, b - Fa.start + 1) - 1;
    const auto Fb = C.fine(sb, nullptr);
    u32 best = Fa.start + Fa.entry->range_min(a - Fa.start + 1, Fa.entry->width()) - 1;
    u32 bestVal = rank(best);
    auto offer = [&](u32 pos) {
        u32 v = rank(pos);
        if (v < bestVal) best = pos, bestVal = v;
    };
    offer(Fb.start + Fb.entry->range_min(1, b - Fb.start + 1) - 1);
    if (sb - sa >= 2) {
        auto less = [&](u64 x, u64 y) {
            return rank(column_min_position(static_cast<u32>(x) + 1)) < rank(column_min_position(static_cast<u32>(y) + 1));
        };
        // fine strips sa+1..sb-1 are 0-based sa..sb-2
        u64 win = colMin_.query(sa, sb - 2, less);
        offer(column_min_position(static_cast<u32>(win) + 1));
    }
    return best;
}

std::optional<u32> CompactIndex::next_smaller(u32 i) const {
    if (i < 1 || i > n_) throw std::out_of_range("next-smaller argument out of range");
    if (fallback_) {
        u32 j = static_cast<u32>(next_[i - 1]);
        return j ? std::optional<u32>(j) : std::nullopt;
    }
    const auto& C = side_[0];
    const auto& R = side_[1];
    std::optional<u32> best;
    auto offer = [&](u32 j) {
        if (!best || j < *best) best = j;
    };
    const u32 s = static_cast<u32>(C.I.rank(i));
    const auto F = C.fine(s, nullptr);
    const u32 s3 = i - F.start + 1;
    // (1) inside the fine column
    if (u32 k = F.entry->next_smaller(s3)) offer(F.start + k - 1);
    const CellRef ref = F.entry->cell_of(s3);
    const auto sl = C.level1_slot(F.node1, F.s2, ref.c, nullptr);
    const auto rs = C.root_slot(F.s1, sl.parent, nullptr);
    // (2) inside the fine row
    const GriddedEntry& e = R.leaf(R.level1_child(R.root_child(rs.r, nullptr), sl.r, nullptr), nullptr);
    const u32 r3 = e.offset_of(sl.cPrime, ref.v);
    if (u32 k = e.next_smaller(r3)) {
        const u32 ri = R.fine_start(R.fine_index(rs.r, sl.r, nullptr), nullptr);
        offer(unrank(ri + k - 1));
    }
    // (3) above the 2-cell, later fine columns of the same coarse column
    if (sl.nextInCoarse) offer(C.fine_start(C.fine_index(F.s1, 1, nullptr), nullptr) + sl.nextInCoarse - 1);
    // (4) fine rows above inside the coarse row, anywhere to the right
    if (sl.nextInRow) offer(unrank(R.fine_start(R.fine_index(rs.r, 1, nullptr), nullptr) + sl.nextInRow - 1));
    // (5) above and right of the 1-cell
    if (rs.next) offer(rs.next);
    return best;
}

SpaceReport CompactIndex::space_report() const {
    SpaceReport r;
    r.n = n_;
    auto add = [&](std::string name, Bits b, bool payload = false) { r.components.push_back({std::move(name), b, payload}); };
    if (fallback_) {
        add("direct.tau", {tau_.bits(), tau_.bits()}, true);
        add("direct.inverse", {inv_.bits(), inv_.bits()});
        add("direct.nextSmaller", {next_.bits(), next_.bits()});
        add("columnMinRMQ", colMin_.space());
        return r;
    }
    const char* tag[2] = {"C", "R"};
    for (int a = 0; a < 2; ++a) {
        const auto& S = side_[a];
        std::string t = tag[a];
        add("I_" + t, S.I.space());
        add("T_" + t, S.T.space());
        u64 structure = S.G.size() - S.payload_bits();
        add("G_" + t + ".nodes", {structure, structure});
        add("G_" + t + ".payload", {S.payload_bits(), S.payload_bits()}, true);
        add("tables." + t, S.table.space());
    }
    add("columnMinRMQ", colMin_.space());
    return r;
}

std::string CompactIndex::serialize() const {
    Writer w;
    w.u64(kMagic);
    w.u64(kVersion);
    w.u64(n_);
    w.u64(m1_);
    w.u64(m2_);
    w.u64(dMax_);
    w.u64(fallback_ ? 1 : 0);
    auto component = [&](auto&& fn) {
        Writer c;
        fn(c);
        w.bytes(c.str());
    };
    if (fallback_) {
        component([&](Writer& c) { tau_.save(c); });
        component([&](Writer& c) { inv_.save(c); });
        component([&](Writer& c) { next_.save(c); });
    } else {
        component([&](Writer& c) { side_[0].save(c); });
        component([&](Writer& c) { side_[1].save(c); });
    }
    component([&](Writer& c) { colMin_.save(c); });
    return w.take();
}

CompactIndex CompactIndex::deserialize(const std::string& bytes) {
    Reader r(bytes);
    if (r.u64() != kMagic) throw std::runtime_error("corrupt index: bad magic");
    if (r.u64() != kVersion) throw std::runtime_error("corrupt index: unsupported version");
    CompactIndex x;
    x.n_ = static_cast<u32>(r.u64());
    x.m1_ = static_cast<u32>(r.u64());
    x.m2_ = static_cast<u32>(r.u64());
    x.dMax_ = static_cast<u32>(r.u64());
    x.fallback_ = r.u64() != 0;
    auto component = [&](auto&& fn) {
        std::string part = r.bytes();
        Reader c(part);
        fn(c);
        if (!c.done()) throw std::runtime_error("corrupt index: trailing bytes in component");
    };
    if (x.fallback_) {
        component([&](Reader& c) { x.tau_.load(c); });
        component([&](Reader& c) { x.inv_.load(c); });
        component([&](Reader& c) { x.next_.load(c); });
        if (x.tau_.size() != x.n_ || x.inv_.size() != x.n_ || x.next_.size() != x.n_)
            throw std::runtime_error("corrupt index: direct arrays");
    } else {
        auto sizes = level_sizes(x.n_);
        if (!sizes || sizes->m1 != x.m1_ || sizes->m2 != x.m2_) throw std::runtime_error("corrupt index: level sizes");
        component([&](Reader& c) { x.side_[0].load(c, x.n_, x.m1_); });
        component([&](Reader& c) { x.side_[1].load(c, x.n_, x.m1_); });
        if (x.side_[0].I.ones() != x.m2_ || x.side_[1].I.ones() != x.m2_)
            throw std::runtime_error("corrupt index: fine strip count");
    }
    component([&](Reader& c) { x.colMin_.load(c); });
    if (!r.done()) throw std::runtime_error("corrupt index: trailing bytes");
    return x;
}

}  // namespace pav
