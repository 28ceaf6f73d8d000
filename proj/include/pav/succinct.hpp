#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <vector>

#include "pav/serialize.hpp"

namespace pav {

using u32 = std::uint32_t;
using u64 = std::uint64_t;

// Number of bits to store values in [0..maxValue].
inline u32 bits_for(u64 maxValue) { return maxValue == 0 ? 1 : 64 - std::countl_zero(maxValue); }
inline u32 ceil_log2(u64 x) { return x <= 1 ? 0 : 64 - std::countl_zero(x - 1); }
double log2_binomial(u64 n, u64 k);

// Bit accounting carried by every component: what the object occupies
// (physical) and what the space model charges for it (model).
struct Bits {
    u64 physical = 0;
    u64 model = 0;
    Bits& operator+=(const Bits& o) {
        physical += o.physical;
        model += o.model;
        return *this;
    }
};

// Fixed-width packed integer array.
class PackedArray {
public:
    PackedArray() = default;
    PackedArray(u64 size, u32 width) { reset(size, width); }
    static PackedArray from(const std::vector<u64>& v);
    static PackedArray from(const std::vector<u32>& v);

    void reset(u64 size, u32 width);
    u64 size() const { return n_; }
    u32 width() const { return w_; }
    u64 get(u64 i) const {
        if (w_ == 0) return 0;
        u64 bit = i * w_, word = bit >> 6, off = bit & 63;
        u64 x = words_[word] >> off;
        if (off + w_ > 64) x |= words_[word + 1] << (64 - off);
        return w_ == 64 ? x : (x & ((u64{1} << w_) - 1));
    }
    void set(u64 i, u64 x);
    u64 operator[](u64 i) const { return get(i); }
    u64 bits() const { return n_ * w_; }

    void save(Writer& w) const;
    void load(Reader& r);
    bool operator==(const PackedArray& o) const { return n_ == o.n_ && w_ == o.w_ && words_ == o.words_; }

private:
    u64 n_ = 0;
    u32 w_ = 0;
    std::vector<u64> words_;
};

// Append-only bit string with random-access reads of variable-width
// fields; used for the concatenated node encodings of the strip structures.
class BitBuffer {
public:
    u64 size() const { return n_; }
    void append(u64 x, u32 width);
    void append(const BitBuffer& o);
    u64 get(u64 pos, u32 width) const {
        if (width == 0) return 0;
        u64 word = pos >> 6, off = pos & 63;
        u64 x = words_[word] >> off;
        if (off + width > 64) x |= words_[word + 1] << (64 - off);
        return width == 64 ? x : (x & ((u64{1} << width) - 1));
    }
    void save(Writer& w) const;
    void load(Reader& r);
    bool operator==(const BitBuffer& o) const { return n_ == o.n_ && words_ == o.words_; }

private:
    std::vector<u64> words_;
    u64 n_ = 0;
};

// Static bitvector with a two-level rank directory and sampled select.
// Positions are 1-based in the public API: rank(i) counts ones in B[1..i],
// select(j) returns the position of the j-th one.
class BitVector {
public:
    BitVector() = default;
    explicit BitVector(const std::vector<bool>& bits);
    static BitVector from_positions(u64 n, const std::vector<u64>& onesAt1Based);

    u64 size() const { return n_; }
    u64 ones() const { return ones_; }
    bool read(u64 i) const { return (words_[(i - 1) >> 6] >> ((i - 1) & 63)) & 1; }
    u64 rank(u64 i) const;  // ones in [1..i], rank(0) = 0
    u64 rank0(u64 i) const { return i - rank(i); }
    u64 select(u64 j) const;   // throws std::out_of_range("select out of range")
    u64 select0(u64 j) const;  // position of j-th zero

    double entropy_bits() const;  // n * H0
    Bits space() const;

    void save(Writer& w) const;
    void load(Reader& r);

private:
    void build();
    u64 n_ = 0, ones_ = 0;
    std::vector<u64> words_;
    std::vector<u32> super_;   // ones before each 512-bit superblock
    std::vector<uint16_t> block_;  // ones before each word, relative to its superblock
    std::vector<u32> sel1_, sel0_;  // word index holding every 256th one / zero
};

// Static ordinal tree in breadth-first (level-contiguous) layout encoded as
// LOUDS. Nodes are 0-based BFS numbers, the root is 0.
class OrderedTree {
public:
    OrderedTree() = default;
    // degrees[v] = number of children of node v, nodes listed in BFS order.
    explicit OrderedTree(const std::vector<u32>& degrees);

    u64 nodes() const { return nodes_; }
    u64 leaves() const { return leafBits_.ones(); }
    u64 parent(u64 v) const;            // throws for the root
    u64 child(u64 v, u64 i) const;      // i-th child, 1-based
    u64 child_rank(u64 v) const;        // number of left siblings
    u64 degree(u64 v) const;
    bool is_leaf(u64 v) const { return leafBits_.read(v + 1); }
    u64 leaf_select(u64 i) const;       // i-th leaf from the left, 1-based
    u64 leaf_rank(u64 v) const;         // leaves strictly left of v

    Bits space() const;
    void save(Writer& w) const;
    void load(Reader& r);

private:
    u64 nodes_ = 0;
    BitVector louds_;      // per node: 1^deg 0
    BitVector leafBits_;   // leaf flags in BFS order
    bool leavesInOrder_ = true;
    PackedArray bfsToDfs_, dfsToBfs_;  // leaf order maps, empty when the orders agree
};

// Range-minimum index over an array of length m. Stores argmin positions
// and in-block stack masks only; the few candidate comparisons a query
// needs go through a caller-supplied comparator on positions.
class RangeMinIndex {
public:
    using Less = std::function<bool(u64, u64)>;  // positions 0-based

    RangeMinIndex() = default;
    // less(i,j) must be a strict order; ties broken toward the smaller index
    // by the index itself.
    void build(u64 m, const Less& less);
    template <class T>
    void build_values(const std::vector<T>& vals) {
        build(vals.size(), [&](u64 i, u64 j) { return vals[i] < vals[j] || (vals[i] == vals[j] && i < j); });
    }

    // argmin over [a..b], 0-based inclusive. Throws on an empty range.
    u64 query(u64 a, u64 b, const Less& less) const;
    u64 size() const { return m_; }

    Bits space() const;
    void save(Writer& w) const;
    void load(Reader& r);

private:
    static constexpr u32 kBlock = 32;
    u64 in_block(u64 a, u64 b) const {
        u32 mask = masks_[b] & (~0u << (a & (kBlock - 1)));
        return (b & ~u64(kBlock - 1)) + std::countr_zero(mask);
    }
    u64 m_ = 0;
    std::vector<u32> masks_;
    std::vector<PackedArray> table_;  // table_[k][i] = argmin over blocks i..i+2^k-1
};

}  // namespace pav
