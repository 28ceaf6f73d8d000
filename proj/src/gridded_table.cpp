#include "pav/gridded_table.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pav {

std::string GriddedPermutation::encode() const {
    std::string s;
    auto put = [&](u32 x) {
        s.push_back(char(x & 0xff));
        s.push_back(char(x >> 8));
    };
    put(width());
    for (u32 x : perm) put(x);
    put(static_cast<u32>(cells.size()));
    for (u32 x : cells) put(x);
    return s;
}

bool GriddedPermutation::valid() const {
    const u32 w = width();
    if (w == 0 || w > 0xfffe) return false;
    std::vector<bool> seen(w + 1);
    for (u32 x : perm) {
        if (x < 1 || x > w || seen[x]) return false;
        seen[x] = true;
    }
    u64 sum = 0;
    for (u32 c : cells) {
        if (c == 0) return false;
        sum += c;
    }
    return sum == w;
}

GriddedEntry::GriddedEntry(const GriddedPermutation& gp, StripAxis axis) : w_(gp.width()), axis_(axis) {
    if (!gp.valid()) throw std::invalid_argument("malformed gridded permutation");
    const u32 w = w_, cc = static_cast<u32>(gp.cells.size());
    perm_.assign(gp.perm.begin(), gp.perm.end());
    cellStart_.assign(cc + 1, 0);
    for (u32 c = 0; c < cc; ++c) cellStart_[c + 1] = uint16_t(cellStart_[c] + gp.cells[c]);

    std::vector<uint16_t> cellOfRank(w + 1);
    for (u32 c = 1; c <= cc; ++c)
        for (u32 t = cellStart_[c - 1] + 1; t <= cellStart_[c]; ++t) cellOfRank[t] = uint16_t(c);

    refC_.resize(w);
    refV_.resize(w);
    inv_.resize(w);
    std::vector<uint16_t> seen(cc + 1, 0);
    for (u32 k = 1; k <= w; ++k) {
        u32 t = perm_[k - 1], c = cellOfRank[t];
        u32 v = axis == StripAxis::column ? t - 1 - cellStart_[c - 1] : seen[c]++;
        refC_[k - 1] = uint16_t(c);
        refV_[k - 1] = uint16_t(v);
        inv_[cellStart_[c - 1] + v] = uint16_t(k);
    }

    rmq_.assign(size_t(w) * w, 0);
    for (u32 a = 1; a <= w; ++a) {
        u32 best = a;
        for (u32 b = a; b <= w; ++b) {
            if (perm_[b - 1] < perm_[best - 1]) best = b;
            rmq_[size_t(a - 1) * w + (b - 1)] = uint16_t(best);
        }
    }

    ns_.assign(w, 0);
    for (u32 k = 1; k <= w; ++k) {
        if (axis == StripAxis::column) {
            for (u32 j = k + 1; j <= w; ++j)
                if (perm_[j - 1] < perm_[k - 1]) {
                    ns_[k - 1] = uint16_t(j);
                    break;
                }
        } else {
            // Earlier offset (smaller value), later position, leftmost such.
            u32 best = 0;
            for (u32 j = 1; j < k; ++j)
                if (perm_[j - 1] > perm_[k - 1] && (best == 0 || perm_[j - 1] < perm_[best - 1])) best = j;
            ns_[k - 1] = uint16_t(best);
        }
    }

    q_.assign(size_t(w + 1) * (w + 1), 0);
    for (u32 a = 1; a <= w; ++a)
        for (u32 t = 1; t <= w; ++t)
            q_[a * (w + 1) + t] = uint16_t(q_[(a - 1) * (w + 1) + t] + q_[a * (w + 1) + t - 1] -
                                          q_[(a - 1) * (w + 1) + t - 1] + (perm_[a - 1] == t));
}

CellRef GriddedEntry::cell_of(u32 k) const {
    if (k < 1 || k > w_) throw std::out_of_range("offset out of range");
    return {refC_[k - 1], refV_[k - 1]};
}

u32 GriddedEntry::offset_of(u32 c, u32 v) const {
    if (c < 1 || c > cell_count() || v >= cell_size(c)) throw std::out_of_range("cell reference out of range");
    return inv_[cellStart_[c - 1] + v];
}

u32 GriddedEntry::range_min(u32 a, u32 b) const {
    if (a < 1 || a > b || b > w_) throw std::out_of_range("range out of range");
    return rmq_[size_t(a - 1) * w_ + (b - 1)];
}

u32 GriddedEntry::next_smaller(u32 k) const {
    if (k < 1 || k > w_) throw std::out_of_range("offset out of range");
    return ns_[k - 1];
}

u32 GriddedEntry::box_count(u32 i1, u32 i2, u32 t1, u32 t2) const {
    if (i1 > i2 + 1 || i2 > w_ || t1 > w_ || t2 > w_) throw std::out_of_range("box out of range");
    if (i1 < 1) i1 = 1;
    if (i1 > i2 || t1 >= t2) return 0;
    return prefix(i2, t2) - prefix(i1 - 1, t2) - prefix(i2, t1) + prefix(i1 - 1, t1);
}

u32 GriddedEntry::rect_count(u32 i1, u32 i2, u32 c1, u32 j1, u32 c2, u32 j2) const {
    const u32 cc = cell_count();
    if (c1 < 1 || c2 > cc || c1 > c2) throw std::out_of_range("cell bounds out of range");
    auto low = [&](u32 c, u32 j) -> u32 {
        if (j == kRankBelow) return cellStart_[c - 1];
        if (j == kRankAbove) return cellStart_[c];
        if (j > cell_size(c)) throw std::out_of_range("cell rank out of range");
        return cellStart_[c - 1] + j - 1;
    };
    auto high = [&](u32 c, u32 j) -> u32 {
        if (j == kRankBelow) return cellStart_[c - 1];
        if (j == kRankAbove) return cellStart_[c];
        if (j > cell_size(c)) throw std::out_of_range("cell rank out of range");
        return cellStart_[c - 1] + j;
    };
    return box_count(i1, i2, low(c1, j1), high(c2, j2));
}

u32 GriddedEntry::cell_offset(u32 k, u32 c) const {
    if (k > w_ || c < 1 || c > cell_count()) throw std::out_of_range("cell offset out of range");
    return prefix(k, cellStart_[c]) - prefix(k, cellStart_[c - 1]);
}

GriddedPermutation GriddedEntry::gridded() const {
    GriddedPermutation gp;
    gp.perm.assign(perm_.begin(), perm_.end());
    for (u32 c = 1; c <= cell_count(); ++c) gp.cells.push_back(cell_size(c));
    return gp;
}

u64 GriddedEntry::model_bits() const {
    const u64 w = w_, lw = bits_for(w), lc = bits_for(cell_count());
    return w * lw + cell_count() * lw      // the gridded permutation itself
           + w * (lc + lw) + w * lw        // cell references and their inverse
           + w * w * lw + w * bits_for(w)  // range minima, next smaller
           + (w + 1) * (w + 1) * lw;       // 2D prefix counts
}

u64 GriddedEntry::physical_bits() const {
    return 16ull * (perm_.size() + cellStart_.size() + refC_.size() + refV_.size() + inv_.size() + rmq_.size() +
                    ns_.size() + q_.size());
}

GriddedPermTable::Id GriddedPermTable::intern(const GriddedPermutation& gp) {
    const u32 w = gp.width();
    if (w > cap_) throw std::logic_error("strip width " + std::to_string(w) + " exceeds cap " + std::to_string(cap_));
    if (w >= byWidth_.size()) {
        byWidth_.resize(w + 1);
        dict_.resize(w + 1);
    }
    auto [it, fresh] = dict_[w].try_emplace(gp.encode(), static_cast<u32>(byWidth_[w].size()));
    if (fresh) byWidth_[w].emplace_back(gp, axis_);
    return {w, it->second};
}

u64 GriddedPermTable::total_entries() const {
    u64 s = 0;
    for (const auto& v : byWidth_) s += v.size();
    return s;
}

Bits GriddedPermTable::space() const {
    Bits b;
    for (const auto& v : byWidth_)
        for (const auto& e : v) {
            b.model += e.model_bits();
            b.physical += e.physical_bits();
        }
    return b;
}

void GriddedPermTable::save(Writer& w) const {
    w.u64(static_cast<u32>(axis_));
    w.u64(cap_);
    w.u64(byWidth_.size());
    for (const auto& v : byWidth_) {
        w.u64(v.size());
        for (const auto& e : v) {
            GriddedPermutation gp = e.gridded();
            w.raw(std::vector<uint16_t>(gp.perm.begin(), gp.perm.end()));
            w.raw(std::vector<uint16_t>(gp.cells.begin(), gp.cells.end()));
        }
    }
}

void GriddedPermTable::load(Reader& r) {
    axis_ = static_cast<StripAxis>(r.u64());
    if (axis_ != StripAxis::column && axis_ != StripAxis::row) throw std::runtime_error("corrupt index: table axis");
    cap_ = static_cast<u32>(r.u64());
    u64 widths = r.u64();
    if (widths > 0x10000) throw std::runtime_error("corrupt index: table widths");
    byWidth_.clear();
    dict_.clear();
    for (u64 w = 0; w < widths; ++w) {
        u64 count = r.u64();
        for (u64 i = 0; i < count; ++i) {
            GriddedPermutation gp;
            auto perm = r.raw<uint16_t>();
            auto cells = r.raw<uint16_t>();
            gp.perm.assign(perm.begin(), perm.end());
            gp.cells.assign(cells.begin(), cells.end());
            if (gp.width() != w || !gp.valid()) throw std::runtime_error("corrupt index: table entry");
            Id id = intern(gp);
            if (id.index != i) throw std::runtime_error("corrupt index: duplicate table entry");
        }
    }
    byWidth_.resize(widths);
    dict_.resize(widths);
}

u32 fine_width_cap(u32 n) {
    double lg = std::log2(std::max(2.0, double(n)));
    return static_cast<u32>(std::ceil(80.0 * std::sqrt(lg)));
}

}  // namespace pav
