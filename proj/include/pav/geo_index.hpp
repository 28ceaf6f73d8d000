#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pav/compact_index.hpp"

namespace pav {

// Visit statistics of one rectangle query.
struct LevelTrace {
    u64 nodeVisits = 0;    // dense nodes and fine strips touched
    u64 tableLookups = 0;  // precomputed slots read
    u64 pieces = 0;
    bool shortCircuit = false;
};

// One disjoint piece of a rectangle query: a block of level-`level` cells
// counted inside a single node (axis 0: column node, 1: row node). Level
// levels()+1 means single points counted in a fine-strip table.
struct GeoPiece {
    u32 level = 0;
    char kind = 'C';  // W, E, N, S frames or C for the central layer
    int axis = 0;
    QueryRect rect;   // geometric extent
    u64 count = 0;
};

// w_0 = n, w_i = floor(w_{i-1}^{5/6}); sizes m_i = floor(n / w_i) until
// floor(n / w_l) >= mFine, where m_l = mFine. Empty if the sequence is not
// strictly increasing from above 1.
std::vector<u32> geo_level_sizes(u32 n, u32 mFine, std::vector<u64>* widths = nullptr);

namespace detail {

// Precomputed tables of all nodes of one level of a dense structure. A node
// is a level-k strip; its coordinates are (i, y): i the rank of a (k+1)-
// substrip, y enumerates the (k+1)-strips of the other axis inside the
// node's non-zero k-cells, in order. row_base(J, c) is the first y of the
// (c+1)-th non-zero k-cell.
class DenseLevel {
public:
    void build(const std::vector<u32>& pi, const Division& upper, const Division& lower);

    u32 cells(u32 J) const { return static_cast<u32>(cellPtr_[J + 1] - cellPtr_[J]); }
    u32 row_base(u32 J, u32 c) const { return static_cast<u32>(rowBase_[cellPtr_[J] + J + c]); }
    // non-empty (k+1)-cells of substrip i with coordinate < y
    u32 cell_rank(u32 J, u32 i, u32 y) const {
        return static_cast<u32>(k_[tabPtr_[J] + u64(i - 1) * (row_base(J, cells(J)) + 1) + y]);
    }
    // points in substrips 1..i with coordinate < y; i may be 0
    u32 points(u32 J, u32 i, u32 y) const {
        if (i == 0) return 0;
        return static_cast<u32>(p_[tabPtr_[J] + u64(i - 1) * (row_base(J, cells(J)) + 1) + y]);
    }
    u32 box(u32 J, u32 i1, u32 i2, u32 y1, u32 y2) const {
        if (i1 > i2 || y1 >= y2) return 0;
        return points(J, i2, y2) - points(J, i1 - 1, y2) - points(J, i2, y1) + points(J, i1 - 1, y1);
    }
    u32 nodes() const { return static_cast<u32>(cellPtr_.size()) - 1; }

    Bits space() const;
    void save(Writer& w) const;
    void load(Reader& r);

private:
    PackedArray cellPtr_, rowBase_, tabPtr_, k_, p_;
};

}  // namespace detail

class GeoIndex {
public:
    static constexpr u64 kMagic = 0x314f454756415000ull;  // "\0PAVGEO1"
    static constexpr u64 kVersion = 1;

    GeoIndex() = default;
    static GeoIndex build(const Permutation& tau);

    u32 size() const { return n_; }
    bool fallback() const { return fallback_; }
    u32 levels() const { return static_cast<u32>(m_.size()); }  // l
    const std::vector<u32>& level_sizes() const { return m_; }
    const CompactIndex& base() const { return base_; }
    const OrderedTree& tree(int a) const { return tree_[a]; }
    const detail::DenseLevel& dense(int a, u32 k) const { return dense_[a][k]; }
    // 1-based starts of the level-k strips of axis a, with sentinel n+1.
    const std::vector<u32>& strip_starts(int a, u32 k) const { return starts_[a][k]; }
    const std::vector<u32>& first_child(int a, u32 k) const { return firstChild_[a][k]; }

    u64 rect_count(const QueryRect& r, LevelTrace* trace = nullptr, std::vector<GeoPiece>* pieces = nullptr) const;
    std::optional<u32> rect_min(const QueryRect& r, LevelTrace* trace = nullptr) const;

    // Trees and dense structures only; the base index reports separately.
    SpaceReport space_report() const;
    u64 dense_model_bits() const;

    std::string serialize() const;
    static GeoIndex deserialize(const std::string& bytes);

private:
    struct Walk;
    void derive();
    u64 single_strip(int a, const u32 (&x)[2][2], LevelTrace& tr, std::vector<GeoPiece>* pieces) const;

    u32 n_ = 0;
    bool fallback_ = true;
    std::vector<u32> m_;
    CompactIndex base_;
    OrderedTree tree_[2];
    std::vector<detail::DenseLevel> dense_[2];
    PackedArray tau_;  // fallback only
    // derived on build and load
    std::vector<u64> levelStart_;
    std::vector<std::vector<u32>> starts_[2], firstChild_[2];
};

}  // namespace pav
