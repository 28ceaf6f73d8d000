#pragma once

#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pav/serialize.hpp"
#include "pav/succinct.hpp"

namespace pav {

// The points of one fine strip: perm[k-1] is the rank (1..w) of the k-th
// point's other coordinate, and cells lists the point counts of the non-zero
// cells in increasing order of that other coordinate.
struct GriddedPermutation {
    std::vector<u32> perm;
    std::vector<u32> cells;

    u32 width() const { return static_cast<u32>(perm.size()); }
    std::string encode() const;  // canonical key: (w, perm, cell counts)
    bool valid() const;
};

// Non-zero cell rank (1-based) and within-cell rank (0-based).
struct CellRef {
    u32 c = 0;
    u32 v = 0;
    bool operator==(const CellRef&) const = default;
};

// Which coordinate orders the points of a cell when forming v. Column
// strips rank by value (the other coordinate), row strips by offset, so
// that both sides agree on v for the point shared through a 2-cell.
enum class StripAxis : u32 { column = 0, row = 1 };

// Sentinel cell ranks for the j arguments of rect_count.
inline constexpr u32 kRankBelow = 0;
inline constexpr u32 kRankAbove = std::numeric_limits<u32>::max();

class GriddedEntry {
public:
    GriddedEntry(const GriddedPermutation& gp, StripAxis axis);

    u32 width() const { return w_; }
    u32 cell_count() const { return static_cast<u32>(cellStart_.size()) - 1; }
    u32 cell_size(u32 c) const { return cellStart_[c] - cellStart_[c - 1]; }
    u32 cell_start(u32 c) const { return cellStart_[c - 1]; }  // points in cells before c
    u32 rank_of(u32 k) const { return perm_[k - 1]; }

    CellRef cell_of(u32 k) const;          // colPerm / rowPerm
    u32 offset_of(u32 c, u32 v) const;     // colPermInv / rowPermInv
    u32 range_min(u32 a, u32 b) const;     // offset of the smallest rank in [a..b]
    u32 next_smaller(u32 k) const;         // 0 when there is none
    // Points with offset in [i1..i2] whose rank lies between the (c1,j1) and
    // (c2,j2) bounds; j is a 1-based rank inside the cell or a sentinel.
    u32 rect_count(u32 i1, u32 i2, u32 c1, u32 j1, u32 c2, u32 j2) const;
    // Points with offset in [i1..i2] and 0-based rank in [t1, t2).
    u32 box_count(u32 i1, u32 i2, u32 t1, u32 t2) const;
    u32 cell_offset(u32 k, u32 c) const;   // points of cell c among offsets 1..k

    GriddedPermutation gridded() const;
    u64 model_bits() const;
    u64 physical_bits() const;

private:
    u32 prefix(u32 a, u32 t) const { return q_[a * (w_ + 1) + t]; }
    u32 w_;
    StripAxis axis_;
    std::vector<uint16_t> perm_, cellStart_, refC_, refV_, inv_, rmq_, ns_, q_;
};

class GriddedPermTable {
public:
    struct Id {
        u32 width = 0;
        u32 index = 0;
        bool operator==(const Id&) const = default;
    };

    explicit GriddedPermTable(StripAxis axis = StripAxis::column, u32 widthCap = kRankAbove)
        : axis_(axis), cap_(widthCap) {}

    StripAxis axis() const { return axis_; }
    u32 width_cap() const { return cap_; }
    Id intern(const GriddedPermutation& gp);  // throws std::logic_error above the cap
    // References stay valid only until the next intern().
    const GriddedEntry& entry(Id id) const { return byWidth_[id.width][id.index]; }
    const GriddedEntry& entry(u32 width, u32 index) const { return byWidth_[width][index]; }

    u32 max_width() const { return byWidth_.empty() ? 0 : static_cast<u32>(byWidth_.size()) - 1; }
    u64 entries(u32 width) const { return width < byWidth_.size() ? byWidth_[width].size() : 0; }
    u64 total_entries() const;
    u32 index_bits(u32 width) const { return ceil_log2(std::max<u64>(1, entries(width))); }
    Bits space() const;

    void save(Writer& w) const;
    void load(Reader& r);

private:
    StripAxis axis_;
    u32 cap_;
    std::vector<std::vector<GriddedEntry>> byWidth_;
    std::vector<std::unordered_map<std::string, u32>> dict_;
};

// Width cap for fine strips of an n-element index: 2 * 40 * sqrt(lg n).
u32 fine_width_cap(u32 n);

}  // namespace pav
