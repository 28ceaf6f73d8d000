#include "pav/geo_index.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace pav {

namespace {

using i64 = std::int64_t;

// floor(w^{5/6}), exact where w^5 fits in 128 bits.
u64 pow_five_sixths(u64 w) {
    auto r = static_cast<u64>(std::floor(std::pow(double(w), 5.0 / 6.0)));
    if (w >= (u64{1} << 25)) return r;
    using u128 = unsigned __int128;
    auto p6 = [](u64 x) {
        u128 y = x;
        return y * y * y * y * y * y;
    };
    const u128 w5 = u128(w) * w * w * w * w;
    while (r > 0 && p6(r) > w5) --r;
    while (p6(r + 1) <= w5) ++r;
    return r;
}

void nest(const std::vector<u32>& coarse, const std::vector<u32>& fine, std::vector<u32>& first) {
    u32 fc = static_cast<u32>(fine.size()) - 1, cc = static_cast<u32>(coarse.size()) - 1;
    first.assign(cc + 1, fc);
    u32 J = 0;
    for (u32 f = 0; f < fc; ++f) {
        while (coarse[J + 1] <= fine[f]) ++J;
        if (coarse[J] == fine[f]) first[J] = f;
    }
}

std::vector<u32> strip_of(const std::vector<u32>& starts, u32 n) {
    std::vector<u32> of(n + 1, 0);
    for (u32 j = 0; j + 1 < starts.size(); ++j)
        for (u32 x = starts[j]; x < starts[j + 1]; ++x) of[x] = j;
    return of;
}

// Points of the first c non-zero cells of an entry.
u32 prefix_points(const GriddedEntry& e, u32 c) { return c >= e.cell_count() ? e.width() : e.cell_start(c + 1); }

}  // namespace

std::vector<u32> geo_level_sizes(u32 n, u32 mFine, std::vector<u64>* widths) {
    if (mFine < 2 || mFine >= n) return {};
    std::vector<u64> w{n};
    std::vector<u32> m;
    for (;;) {
        u64 next = std::min(pow_five_sixths(w.back()), w.back() - 1);
        w.push_back(next);
        if (n / next >= mFine) {
            m.push_back(mFine);
            break;
        }
        m.push_back(static_cast<u32>(n / next));
    }
    if (widths) *widths = w;
    if (m.front() <= 1) return {};
    for (size_t i = 1; i < m.size(); ++i)
        if (m[i] <= m[i - 1]) return {};
    return m;
}

namespace detail {

void DenseLevel::build(const std::vector<u32>& pi, const Division& U, const Division& D) {
    const u32 n = static_cast<u32>(pi.size());
    std::vector<u32> firstSub, firstSubRow;
    nest(U.colStarts, D.colStarts, firstSub);
    nest(U.rowStarts, D.rowStarts, firstSubRow);
    const std::vector<u32> colOf = strip_of(D.colStarts, n), rowOf = strip_of(D.rowStarts, n),
                           upperRowOf = strip_of(U.rowStarts, n);

    std::vector<u64> cellPtr{0}, rowBase, tabPtr{0}, K, P;
    std::vector<u32> cnt;
    for (u32 J = 0; J < U.cols(); ++J) {
        const u32 from = U.colPtr[J], to = U.colPtr[J + 1];
        const u64 base = rowBase.size();
        u32 H = 0;
        rowBase.push_back(0);
        for (u32 t = from; t < to; ++t) {
            const u32 I = U.colCells[t];
            H += firstSubRow[I + 1] - firstSubRow[I];
            rowBase.push_back(H);
        }
        const u32 q = firstSub[J + 1] - firstSub[J];
        cnt.assign(u64(q) * H, 0);
        for (u32 x = U.colStarts[J]; x < U.colStarts[J + 1]; ++x) {
            const u32 v = pi[x - 1], g = rowOf[v], I = upperRowOf[v];
            auto it = std::lower_bound(U.colCells.begin() + from, U.colCells.begin() + to, I);
            if (it == U.colCells.begin() + to || *it != I) throw std::logic_error("cell lists disagree");
            const u32 c = static_cast<u32>(it - (U.colCells.begin() + from));
            const u32 y = static_cast<u32>(rowBase[base + c]) + g - firstSubRow[I];
            ++cnt[u64(colOf[x] - firstSub[J]) * H + y];
        }
        for (u32 i = 0; i < q; ++i) {
            const u64 prev = K.size() - (H + 1);
            u32 nz = 0, pts = 0;
            for (u32 y = 0; y <= H; ++y) {
                K.push_back(nz);
                P.push_back((i ? P[prev + y] : 0) + pts);
                if (y < H) {
                    const u32 k = cnt[u64(i) * H + y];
                    pts += k;
                    nz += k > 0;
                }
            }
        }
        cellPtr.push_back(cellPtr.back() + (to - from));
        tabPtr.push_back(tabPtr.back() + u64(q) * (H + 1));
    }
    cellPtr_ = PackedArray::from(cellPtr);
    rowBase_ = PackedArray::from(rowBase);
    tabPtr_ = PackedArray::from(tabPtr);
    k_ = PackedArray::from(K);
    p_ = PackedArray::from(P);
}

Bits DenseLevel::space() const {
    u64 b = cellPtr_.bits() + rowBase_.bits() + tabPtr_.bits() + k_.bits() + p_.bits();
    return {b, b};
}

void DenseLevel::save(Writer& w) const {
    cellPtr_.save(w);
    rowBase_.save(w);
    tabPtr_.save(w);
    k_.save(w);
    p_.save(w);
}

void DenseLevel::load(Reader& r) {
    cellPtr_.load(r);
    rowBase_.load(r);
    tabPtr_.load(r);
    k_.load(r);
    p_.load(r);
    if (cellPtr_.size() == 0 || tabPtr_.size() != cellPtr_.size() ||
        rowBase_.size() != cellPtr_[cellPtr_.size() - 1] + cellPtr_.size() - 1 ||
        k_.size() != tabPtr_[tabPtr_.size() - 1] || p_.size() != k_.size())
        throw std::runtime_error("corrupt index: dense level");
}

}  // namespace detail

GeoIndex GeoIndex::build(const Permutation& tau) {
    GeoIndex g;
    g.n_ = tau.size();
    g.base_ = CompactIndex::build(tau);
    std::vector<u32> m;
    if (!g.base_.fallback()) m = geo_level_sizes(g.n_, g.base_.m2());
    if (m.empty()) {
        g.fallback_ = true;
        g.tau_ = PackedArray::from(tau.values());
        return g;
    }
    g.fallback_ = false;
    g.m_ = m;
    const u32 n = g.n_, L = g.levels();
    const Hierarchy h = build_hierarchy(tau, m);

    auto same = [&](const BitVector& I, const std::vector<u32>& starts) {
        if (I.ones() + 1 != starts.size()) return false;
        for (size_t j = 0; j + 1 < starts.size(); ++j)
            if (!I.read(starts[j])) return false;
        return true;
    };
    const Division& fine = h.divisions.back();
    if (!same(g.base_.side(0).I, fine.colStarts) || !same(g.base_.side(1).I, fine.rowStarts))
        throw std::logic_error("fine divisions of the two indexes differ");

    const Hierarchy ht = h.transposed();
    const Permutation inv = tau.inverse();
    for (int a = 0; a < 2; ++a) {
        const Hierarchy& H = a ? ht : h;
        const Permutation& p = a ? inv : tau;
        std::vector<Division> D;
        D.push_back(make_division(p, {1, n + 1}, {1, n + 1}));
        for (const auto& d : H.divisions) D.push_back(d);
        std::vector<u32> deg, first;
        for (u32 k = 0; k < L; ++k) {
            nest(D[k].colStarts, D[k + 1].colStarts, first);
            for (u32 J = 0; J < D[k].cols(); ++J) deg.push_back(first[J + 1] - first[J]);
        }
        deg.resize(deg.size() + m.back(), 0);
        g.tree_[a] = OrderedTree(deg);
        g.dense_[a].resize(L);
        for (u32 k = 0; k < L; ++k) g.dense_[a][k].build(p.values(), D[k], D[k + 1]);
    }
    g.derive();
    return g;
}

void GeoIndex::derive() {
    const u32 L = levels();
    levelStart_.assign(L + 2, 0);
    levelStart_[1] = 1;
    for (u32 k = 1; k <= L; ++k) levelStart_[k + 1] = levelStart_[k] + m_[k - 1];
    for (int a = 0; a < 2; ++a) {
        const BitVector& I = base_.side(a).I;
        const OrderedTree& T = tree_[a];
        starts_[a].assign(L + 1, {});
        firstChild_[a].assign(L, {});
        auto& fine = starts_[a][L];
        for (u64 j = 1; j <= I.ones(); ++j) fine.push_back(static_cast<u32>(I.select(j)));
        fine.push_back(n_ + 1);
        for (u32 k = L; k-- > 0;) {
            const u32 count = k == 0 ? 1 : m_[k - 1];
            auto& st = starts_[a][k];
            auto& fc = firstChild_[a][k];
            for (u32 J = 0; J < count; ++J) {
                const u32 c = static_cast<u32>(T.child(levelStart_[k] + J, 1) - levelStart_[k + 1]);
                fc.push_back(c);
                st.push_back(starts_[a][k + 1][c]);
            }
            fc.push_back(m_[k]);
            st.push_back(n_ + 1);
        }
    }
}

// One boundary of the query followed from the root to its fine strip.
// Index k refers to levels: g[k] is the level-k strip holding x, sub[k] its
// 1-based rank among the children of g[k-1] (sub[l+1] is the offset inside
// the fine strip), al[k] whether x sits on the outer edge of g[k]. For the
// perpendicular ends f, c[k][f] and b[k][f] give the number of non-zero
// level-k cells of strip g[k] before the perpendicular boundary, and
// whether the cell holding that boundary is non-zero.
struct GeoIndex::Walk {
    u32 x = 0, s = 0, start = 0;
    std::vector<u32> g, sub;
    std::vector<char> al;
    std::vector<std::array<u32, 2>> c;
    std::vector<std::array<char, 2>> b;
    const GriddedEntry* entry = nullptr;
};

u64 GeoIndex::rect_count(const QueryRect& R, LevelTrace* tr, std::vector<GeoPiece>* pieces) const {
    if (!R.valid(n_)) throw std::out_of_range("query rectangle out of range");
    LevelTrace local;
    LevelTrace& T = tr ? *tr : local;
    if (fallback_) {
        u64 s = 0;
        for (u32 i = R.colLo; i <= R.colHi; ++i) {
            const u64 v = tau_[i - 1];
            s += R.rowLo <= v && v <= R.rowHi;
        }
        T.nodeVisits += 1;
        T.tableLookups += R.colHi - R.colLo + 1;
        T.pieces += 1;
        if (pieces) pieces->push_back({0, 'C', 0, R, s});
        return s;
    }
    const u32 L = levels();
    const u32 x[2][2] = {{R.colLo, R.colHi}, {R.rowLo, R.rowHi}};
    if (x[0][0] == 1 && x[0][1] == n_ && x[1][0] == 1 && x[1][1] == n_) {
        T.pieces += 1;
        if (pieces) pieces->push_back({0, 'C', 0, R, n_});
        return n_;
    }
    u32 s[2][2];
    for (int a = 0; a < 2; ++a)
        for (int e = 0; e < 2; ++e) s[a][e] = static_cast<u32>(base_.side(a).I.rank(x[a][e]));
    T.tableLookups += 4;
    for (int a = 0; a < 2; ++a)
        if (s[a][0] == s[a][1]) return single_strip(a, x, T, pieces);

    Walk W[2][2];
    for (int a = 0; a < 2; ++a) {
        const BitVector& I = base_.side(a).I;
        const OrderedTree& Tr = tree_[a];
        for (int e = 0; e < 2; ++e) {
            Walk& w = W[a][e];
            w.x = x[a][e];
            w.s = s[a][e];
            w.g.assign(L + 1, 0);
            w.sub.assign(L + 2, 0);
            w.al.assign(L + 2, 1);
            std::vector<u32> deg(L + 1, 0);
            u64 id = Tr.leaf_select(w.s);
            for (u32 k = L; k >= 1; --k) {
                w.g[k] = static_cast<u32>(id - levelStart_[k]);
                w.sub[k] = static_cast<u32>(Tr.child_rank(id)) + 1;
                id = Tr.parent(id);
                if (e) deg[k - 1] = static_cast<u32>(Tr.degree(id));
            }
            w.start = static_cast<u32>(I.select(w.s));
            w.sub[L + 1] = w.x - w.start + 1;
            w.al[L] = e == 0 ? w.x == w.start : (w.x == n_ || I.read(w.x + 1));
            for (u32 k = L; k-- > 0;) w.al[k] = w.al[k + 1] && (e == 0 ? w.sub[k + 1] == 1 : w.sub[k + 1] == deg[k]);
            w.c.assign(L + 1, {0, 0});
            w.b.assign(L + 1, {1, 1});
            T.tableLookups += 3 * L + 3;
        }
    }
    for (u32 k = 0; k < L; ++k) {
        for (int a = 0; a < 2; ++a) {
            const detail::DenseLevel& D = dense_[a][k];
            for (int e = 0; e < 2; ++e) {
                Walk& w = W[a][e];
                const u32 J = w.g[k], i = w.sub[k + 1];
                ++T.nodeVisits;
                for (int f = 0; f < 2; ++f) {
                    const u32 c = w.c[k][f];
                    const bool bb = w.b[k][f];
                    const u32 Y = D.row_base(J, c) + (bb ? W[1 - a][f].sub[k + 1] - 1 : 0);
                    const u32 c2 = D.cell_rank(J, i, Y);
                    w.c[k + 1][f] = c2;
                    w.b[k + 1][f] = bb && D.cell_rank(J, i, Y + 1) > c2;
                    T.tableLookups += bb ? 3 : 2;
                }
            }
        }
    }
    for (int a = 0; a < 2; ++a)
        for (int e = 0; e < 2; ++e) {
            W[a][e].entry = base_.side(a).fine(W[a][e].s, nullptr).entry;
            ++T.nodeVisits;
        }

    // Perpendicular bound of a piece in the level-(k-1) node of walk (a,e),
    // at granularity k or, for coarse, k-1.
    auto cut = [&](int a, int e, u32 k, int f, bool coarse) -> u32 {
        const Walk& w = W[a][e];
        const Walk& p = W[1 - a][f];
        const u32 c = w.c[k - 1][f];
        const bool bb = w.b[k - 1][f];
        ++T.tableLookups;
        if (coarse) {
            const bool al = p.al[k - 1];
            const u32 c2 = c + (((f == 0) ? !al : al) && bb ? 1 : 0);
            return k == L + 1 ? prefix_points(*w.entry, c2) : dense_[a][k - 1].row_base(w.g[k - 1], c2);
        }
        if (k == L + 1) {
            u32 t = prefix_points(*w.entry, c);
            if (bb) {
                ++T.tableLookups;
                t += p.entry->cell_offset(p.x - p.start + (f == 1 ? 1 : 0), p.c[L][e] + 1);
            }
            return t;
        }
        u32 y = dense_[a][k - 1].row_base(w.g[k - 1], c);
        if (bb) y += p.sub[k] - 1 + (f == 0 ? (p.al[k] ? 0 : 1) : (p.al[k] ? 1 : 0));
        return y;
    };
    auto substrips = [&](int a, int e, u32 k) -> u32 {
        ++T.tableLookups;
        if (k == L + 1) return W[a][e].entry->width();
        return static_cast<u32>(tree_[a].degree(levelStart_[k - 1] + W[a][e].g[k - 1]));
    };
    auto lo_i = [&](int a, u32 k) { return W[a][0].sub[k] + (W[a][0].al[k] ? 0 : 1); };
    auto hi_i = [&](int a, u32 k) { return W[a][1].sub[k] - (W[a][1].al[k] ? 0 : 1); };
    // level-k strips of axis a lying inside the query
    auto spans = [&](int a, u32 k) {
        if (k == L + 1) return true;
        const i64 A = i64(W[a][0].g[k]) + (W[a][0].al[k] ? 0 : 1);
        const i64 B = i64(W[a][1].g[k]) - (W[a][1].al[k] ? 0 : 1);
        return A <= B;
    };

    u64 total = 0;
    auto emit = [&](u32 k, char kind, int a, int e, u32 i1, u32 i2, bool coarse) {
        const Walk& w = W[a][e];
        const u32 t1 = cut(a, e, k, 0, coarse), t2 = cut(a, e, k, 1, coarse);
        u64 cnt = 0;
        if (i1 <= i2 && t1 < t2) {
            cnt = k == L + 1 ? w.entry->box_count(i1, i2, t1, t2) : dense_[a][k - 1].box(w.g[k - 1], i1, i2, t1, t2);
            T.tableLookups += 4;
        }
        total += cnt;
        ++T.pieces;
        if (!pieces) return;
        const int b = 1 - a;
        u32 lo, hi;
        if (k == L + 1) {
            lo = w.start + i1 - 1;
            hi = w.start + i2 - 1;
        } else {
            const u32 fc = firstChild_[a][k - 1][w.g[k - 1]];
            lo = starts_[a][k][fc + i1 - 1];
            hi = starts_[a][k][fc + i2] - 1;
        }
        u32 plo, phi;
        const u32 pk = coarse ? k - 1 : k;
        if (pk == L + 1) {
            plo = x[b][0];
            phi = x[b][1];
        } else {
            plo = starts_[b][pk][W[b][0].g[pk] + (W[b][0].al[pk] ? 0 : 1)];
            phi = starts_[b][pk][W[b][1].g[pk] + (W[b][1].al[pk] ? 1 : 0)] - 1;
        }
        if (i1 > i2 || lo > hi || plo > phi) return;
        QueryRect q = a == 0 ? QueryRect{plo, phi, lo, hi} : QueryRect{lo, hi, plo, phi};
        pieces->push_back({k, kind, a, q, cnt});
    };

    static constexpr char kFrame[2][2] = {{'W', 'E'}, {'N', 'S'}};
    bool inside = false;
    for (u32 k = 1; k <= L + 1; ++k) {
        if (inside) {
            for (int a = 0; a < 2; ++a)
                for (int e = 0; e < 2; ++e) {
                    if (W[a][e].al[k - 1]) continue;
                    if (e == 0)
                        emit(k, kFrame[a][e], a, e, lo_i(a, k), substrips(a, e, k), a == 1);
                    else
                        emit(k, kFrame[a][e], a, e, 1, hi_i(a, k), a == 1);
                }
        } else if (spans(0, k) && spans(1, k)) {
            const int a = spans(0, k - 1) ? 1 : 0;
            if (W[a][0].g[k - 1] == W[a][1].g[k - 1]) {
                emit(k, 'C', a, 0, lo_i(a, k), hi_i(a, k), false);
            } else {
                emit(k, 'C', a, 0, lo_i(a, k), substrips(a, 0, k), false);
                emit(k, 'C', a, 1, 1, hi_i(a, k), false);
            }
            inside = true;
        }
    }
    return total;
}

u64 GeoIndex::single_strip(int a, const u32 (&x)[2][2], LevelTrace& T, std::vector<GeoPiece>* pieces) const {
    const int b = 1 - a;
    const auto& A = base_.side(a);
    const auto& B = base_.side(b);
    const u32 s = static_cast<u32>(A.I.rank(x[a][0]));
    const auto F = A.fine(s, nullptr);
    const GriddedEntry& E = *F.entry;
    const u32 cells = E.cell_count();
    T.shortCircuit = true;
    T.nodeVisits += 1;
    u32 t[2];
    for (int f = 0; f < 2; ++f) {
        const u32 target = static_cast<u32>(B.I.rank(x[b][f]));
        // first non-zero cell of the strip at or past the target strip
        u32 lo = 1, hi = cells + 1;
        while (lo < hi) {
            const u32 mid = (lo + hi) / 2;
            ++T.tableLookups;
            if (base_.cross_cell(a, s, mid).first >= target)
                hi = mid;
            else
                lo = mid + 1;
        }
        t[f] = prefix_points(E, lo - 1);
        if (lo <= cells) {
            const auto [other, cPrime] = base_.cross_cell(a, s, lo);
            if (other == target) {
                const auto G = B.fine(target, nullptr);
                ++T.nodeVisits;
                t[f] += G.entry->cell_offset(x[b][f] - G.start + f, cPrime);
            }
        }
        T.tableLookups += 2;
    }
    const u32 i1 = x[a][0] - F.start + 1, i2 = x[a][1] - F.start + 1;
    const u64 cnt = t[0] < t[1] ? E.box_count(i1, i2, t[0], t[1]) : 0;
    T.tableLookups += 4;
    T.pieces += 1;
    if (pieces) {
        QueryRect q{x[1][0], x[1][1], x[0][0], x[0][1]};
        pieces->push_back({levels() + 1, 'C', a, q, cnt});
    }
    return cnt;
}

std::optional<u32> GeoIndex::rect_min(const QueryRect& r, LevelTrace* trace) const {
    if (rect_count(r, trace) == 0) return std::nullopt;
    u32 lo = r.rowLo, hi = r.rowHi;
    while (lo < hi) {
        const u32 mid = lo + (hi - lo) / 2;
        if (rect_count({r.rowLo, mid, r.colLo, r.colHi}, trace) > 0)
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}

u64 GeoIndex::dense_model_bits() const {
    u64 s = 0;
    for (int a = 0; a < 2; ++a)
        for (const auto& d : dense_[a]) s += d.space().model;
    return s;
}

SpaceReport GeoIndex::space_report() const {
    SpaceReport r;
    r.n = n_;
    if (fallback_) {
        r.components.push_back({"direct.tau", {tau_.bits(), tau_.bits()}, false});
        return r;
    }
    const char* tag[2] = {"C", "R"};
    for (int a = 0; a < 2; ++a) {
        r.components.push_back({std::string("T'_") + tag[a], tree_[a].space(), false});
        Bits d;
        for (const auto& lv : dense_[a]) d += lv.space();
        r.components.push_back({std::string("dense_") + tag[a], d, false});
    }
    return r;
}

std::string GeoIndex::serialize() const {
    Writer w;
    w.u64(kMagic);
    w.u64(kVersion);
    w.u64(n_);
    w.u64(fallback_ ? 1 : 0);
    w.bytes(base_.serialize());
    if (fallback_) {
        tau_.save(w);
        return w.take();
    }
    w.vec(m_);
    for (int a = 0; a < 2; ++a) {
        tree_[a].save(w);
        w.u64(dense_[a].size());
        for (const auto& d : dense_[a]) d.save(w);
    }
    return w.take();
}

GeoIndex GeoIndex::deserialize(const std::string& bytes) {
    Reader r(bytes);
    if (r.u64() != kMagic) throw std::runtime_error("not a rectangle index");
    if (r.u64() != kVersion) throw std::runtime_error("unsupported rectangle index version");
    GeoIndex g;
    const u64 n = r.u64();
    const u64 fb = r.u64();
    if (n > 0xffffffffull || fb > 1) throw std::runtime_error("corrupt index: header");
    g.n_ = static_cast<u32>(n);
    g.fallback_ = fb == 1;
    g.base_ = CompactIndex::deserialize(r.bytes());
    if (g.base_.size() != g.n_) throw std::runtime_error("corrupt index: size mismatch");
    if (g.fallback_) {
        g.tau_.load(r);
        if (g.tau_.size() != n) throw std::runtime_error("corrupt index: fallback array");
    } else {
        g.m_ = r.vec<u32>();
        if (g.base_.fallback() || g.m_ != geo_level_sizes(g.n_, g.base_.m2()))
            throw std::runtime_error("corrupt index: level sizes");
        u64 nodes = 1;
        for (u32 m : g.m_) nodes += m;
        for (int a = 0; a < 2; ++a) {
            g.tree_[a].load(r);
            if (g.tree_[a].nodes() != nodes || g.tree_[a].leaves() != g.m_.back())
                throw std::runtime_error("corrupt index: tree shape");
            if (r.u64() != g.m_.size()) throw std::runtime_error("corrupt index: dense levels");
            g.dense_[a].resize(g.m_.size());
            for (u32 k = 0; k < g.m_.size(); ++k) {
                g.dense_[a][k].load(r);
                if (g.dense_[a][k].nodes() != (k == 0 ? 1 : g.m_[k - 1]))
                    throw std::runtime_error("corrupt index: dense level size");
            }
        }
        try {
            g.derive();
        } catch (const std::logic_error&) {
            throw std::runtime_error("corrupt index: tree structure");
        }
    }
    if (!r.done()) throw std::runtime_error("corrupt index: trailing bytes");
    return g;
}

}  // namespace pav
