#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pav/decomposition.hpp"
#include "pav/gridded_table.hpp"
#include "pav/permutation.hpp"
#include "pav/succinct.hpp"

namespace pav {

// Counts primitive operations (bitvector, tree, field and table accesses)
// performed by one query.
struct OpCounter {
    u64 ops = 0;
};

inline void tick(OpCounter* c, u64 k = 1) {
    if (c) c->ops += k;
}

struct SpaceReport {
    struct Component {
        std::string name;
        Bits bits;
        bool payload = false;
    };
    u64 n = 0;
    std::vector<Component> components;
    std::optional<double> lgS;  // optional lg s_pi for headroom reporting

    Bits total() const;
    u64 payload_bits() const;
    u64 overhead_model_bits() const;  // model bits of every non-payload component
    double bits_per_element() const { return n ? double(total().model) / double(n) : 0.0; }
    double payload_per_element() const { return n ? double(payload_bits()) / double(n) : 0.0; }
};

struct LevelSizes {
    u32 m1 = 0, m2 = 0;
};

// m1 = floor(n / ceil(lg n)^2), m2 = floor(n / ceil(sqrt(lg n))); empty when
// 1 < m1 < m2 < n fails and the direct-array index is used instead.
std::optional<LevelSizes> level_sizes(u32 n);

namespace detail {

// One orientation of the two-level structure: strips along one axis of a
// permutation pi (tau for columns, tau^-1 for rows). The other orientation
// is built from the transposed input, so both sides share this code.
class StripSide {
public:
    struct RootSlot {
        u32 cPrime, r, next;
    };
    struct Level1Slot {
        u32 cPrime, r, parent, nextInCoarse, nextInRow;
    };

    void build(const std::vector<u32>& pi, const Hierarchy& h, StripAxis axis, bool withNext, u32 widthCap);

    // Node accessors used by rank and unrank; bit positions refer to G.
    u64 root_child(u32 s1, OpCounter* c) const;
    RootSlot root_slot(u32 s1, u32 c1, OpCounter* c) const;
    u32 level1_cells(u64 node, u32 s2, OpCounter* c) const;
    u64 level1_child(u64 node, u32 s2, OpCounter* c) const;
    Level1Slot level1_slot(u64 node, u32 s2, u32 c2, OpCounter* c) const;
    const GriddedEntry& leaf(u64 pos, OpCounter* c) const;

    // Fine strip s (1-based): s1, s2 from T and the leaf entry.
    struct Fine {
        u32 s1, s2, start;
        u64 node1;
        const GriddedEntry* entry;
    };
    Fine fine(u32 s, OpCounter* c) const;
    // First fine strip (1-based) of the tree path (s1, s2).
    u32 fine_index(u32 s1, u32 s2, OpCounter* c) const;
    u32 fine_start(u32 s, OpCounter* c) const;

    u64 payload_bits() const { return payloadBits_; }
    u64 leaf_count() const { return T.leaves(); }

    void save(Writer& w) const;
    void load(Reader& r, u32 n, u32 m1);
    bool operator==(const StripSide& o) const;

    BitVector I;
    OrderedTree T;
    BitBuffer G;
    GriddedPermTable table;

private:
    u64 level1_slot_pos(u64 node, u32 s2, u32 c2, OpCounter* c) const;
    u32 leaf_width(u64 pos) const { return static_cast<u32>(G.get(pos, widthBits_)); }
    u32 slot1_bits() const { return 2 * dBits_ + rBits_ + (withNext_ ? nsJBits_ + nsIBits_ : 0); }
    u32 slot0_bits() const { return dBits_ + r1Bits_ + (withNext_ ? nsBits_ : 0); }
    void recount_payload();

    u32 m1_ = 0;
    bool withNext_ = false;
    u32 widthBits_ = 0, dBits_ = 0, qBits_ = 0, rBits_ = 0, cbBits_ = 0, rootCbBits_ = 0, r1Bits_ = 0;
    u32 nsJBits_ = 0, nsIBits_ = 0, nsBits_ = 0;
    u64 payloadBits_ = 0;
};

}  // namespace detail

class CompactIndex {
public:
    static constexpr u64 kMagic = 0x3158444956415000ull;  // "\0PAVIDX1"
    static constexpr u64 kVersion = 1;

    CompactIndex() = default;
    static CompactIndex build(const Permutation& tau);

    u32 size() const { return n_; }
    bool fallback() const { return fallback_; }
    u32 m1() const { return m1_; }
    u32 m2() const { return m2_; }
    u32 d_max() const { return dMax_; }

    u32 rank(u32 i, OpCounter* ops = nullptr) const;    // tau(i)
    u32 unrank(u32 v, OpCounter* ops = nullptr) const;  // tau^-1(v)
    u32 range_min(u32 a, u32 b) const;                  // index of the minimum of tau_a..tau_b
    std::optional<u32> next_smaller(u32 i) const;

    SpaceReport space_report() const;

    std::string serialize() const;
    static CompactIndex deserialize(const std::string& bytes);

    // Orientation 0 holds column strips, 1 holds row strips. Used by the
    // rectangle index, which shares the fine division.
    const detail::StripSide& side(int s) const { return side_[s]; }
    // The fine strip on the other axis through the c-th non-zero 2-cell of
    // fine strip s on axis a, and that cell's rank inside it.
    std::pair<u32, u32> cross_cell(int a, u32 s, u32 c, OpCounter* ops = nullptr) const;

private:
    u32 cross(int a, u32 x, OpCounter* ops) const;
    u32 column_min_position(u32 s) const;

    u32 n_ = 0, m1_ = 0, m2_ = 0, dMax_ = 0;
    bool fallback_ = true;
    detail::StripSide side_[2];
    RangeMinIndex colMin_;
    // direct-array fallback
    PackedArray tau_, inv_, next_;
};

}  // namespace pav
