#include "pav/succinct.hpp"

#include <cmath>
#include <stdexcept>

namespace pav {

double log2_binomial(u64 n, u64 k) {
    if (k == 0 || k >= n) return 0.0;
    return (std::lgamma(double(n) + 1) - std::lgamma(double(k) + 1) - std::lgamma(double(n - k) + 1)) / std::log(2.0);
}

// ---------------------------------------------------------------- PackedArray

void PackedArray::reset(u64 size, u32 width) {
    if (width > 64) throw std::invalid_argument("packed width > 64");
    n_ = size;
    w_ = width;
    words_.assign((n_ * w_ + 63) / 64 + 1, 0);
}

void PackedArray::set(u64 i, u64 x) {
    if (w_ == 0) return;
    u64 mask = w_ == 64 ? ~u64{0} : ((u64{1} << w_) - 1);
    x &= mask;
    u64 bit = i * w_, word = bit >> 6, off = bit & 63;
    words_[word] = (words_[word] & ~(mask << off)) | (x << off);
    if (off + w_ > 64) {
        u32 spill = off + w_ - 64;
        u64 m2 = (u64{1} << spill) - 1;
        words_[word + 1] = (words_[word + 1] & ~m2) | (x >> (64 - off));
    }
}

PackedArray PackedArray::from(const std::vector<u64>& v) {
    u64 mx = 0;
    for (u64 x : v) mx = std::max(mx, x);
    PackedArray p(v.size(), bits_for(mx));
    for (u64 i = 0; i < v.size(); ++i) p.set(i, v[i]);
    return p;
}

PackedArray PackedArray::from(const std::vector<u32>& v) {
    u64 mx = 0;
    for (u32 x : v) mx = std::max<u64>(mx, x);
    PackedArray p(v.size(), bits_for(mx));
    for (u64 i = 0; i < v.size(); ++i) p.set(i, v[i]);
    return p;
}

void PackedArray::save(Writer& w) const {
    w.u64(n_);
    w.u64(w_);
    w.vec(words_);
}

void PackedArray::load(Reader& r) {
    n_ = r.u64();
    w_ = static_cast<u32>(r.u64());
    words_ = r.vec<u64>();
    if (w_ > 64 || (words_.size() != (n_ * w_ + 63) / 64 + 1 && !(n_ == 0 && words_.empty()))) throw std::runtime_error("corrupt packed array");
}

// ---------------------------------------------------------------- BitBuffer

void BitBuffer::append(u64 x, u32 width) {
    if (width == 0) return;
    if (width < 64) x &= (u64{1} << width) - 1;
    u64 off = n_ & 63;
    if (off == 0) words_.push_back(0);
    words_.back() |= x << off;
    if (off + width > 64) words_.push_back(x >> (64 - off));
    n_ += width;
}

void BitBuffer::append(const BitBuffer& o) {
    u64 full = o.n_ / 64;
    for (u64 i = 0; i < full; ++i) append(o.words_[i], 64);
    if (o.n_ & 63) append(o.words_[full], o.n_ & 63);
}

void BitBuffer::save(Writer& w) const {
    w.u64(n_);
    w.raw(words_);
}

void BitBuffer::load(Reader& r) {
    n_ = r.u64();
    words_ = r.raw<u64>();
    if (words_.size() != (n_ + 63) / 64) throw std::runtime_error("corrupt index: bit buffer");
}

// ---------------------------------------------------------------- BitVector

BitVector::BitVector(const std::vector<bool>& bits) : n_(bits.size()) {
    words_.assign(n_ / 64 + 1, 0);
    for (u64 i = 0; i < n_; ++i)
        if (bits[i]) words_[i >> 6] |= u64{1} << (i & 63);
    build();
}

BitVector BitVector::from_positions(u64 n, const std::vector<u64>& onesAt1Based) {
    BitVector b;
    b.n_ = n;
    b.words_.assign(n / 64 + 1, 0);
    for (u64 p : onesAt1Based) {
        if (p < 1 || p > n) throw std::out_of_range("bit position out of range");
        b.words_[(p - 1) >> 6] |= u64{1} << ((p - 1) & 63);
    }
    b.build();
    return b;
}

void BitVector::build() {
    const u64 nw = words_.size();
    super_.assign(nw / 8 + 2, 0);
    block_.assign(nw, 0);
    sel1_.clear();
    sel0_.clear();
    u64 total = 0, zeros = 0;
    for (u64 w = 0; w < nw; ++w) {
        if ((w & 7) == 0) super_[w >> 3] = static_cast<u32>(total);
        block_[w] = static_cast<uint16_t>(total - super_[w >> 3]);
        u64 x = words_[w];
        u64 valid = (w + 1) * 64 <= n_ ? 64 : (n_ > w * 64 ? n_ - w * 64 : 0);
        u64 c = std::popcount(x);
        // sample every 256th one / zero: record the word that holds it
        while (sel1_.size() * 256 + 1 <= total + c) sel1_.push_back(static_cast<u32>(w));
        u64 z = valid - c;
        while (sel0_.size() * 256 + 1 <= zeros + z) sel0_.push_back(static_cast<u32>(w));
        total += c;
        zeros += z;
    }
    super_[nw / 8 + 1] = static_cast<u32>(total);
    ones_ = total;
}

u64 BitVector::rank(u64 i) const {
    if (i > n_) i = n_;
    u64 w = i >> 6;
    u64 r = super_[w >> 3] + block_[w];
    if (i & 63) r += std::popcount(words_[w] & ((u64{1} << (i & 63)) - 1));
    return r;
}

namespace {
inline u64 select_in_word(u64 x, u64 r) {  // r-th one (1-based) of x
    for (u64 t = 1; t < r; ++t) x &= x - 1;
    return std::countr_zero(x);
}
}  // namespace

u64 BitVector::select(u64 j) const {
    if (j < 1 || j > ones_) throw std::out_of_range("select out of range");
    u64 w = sel1_[(j - 1) / 256];
    while (true) {
        u64 before = super_[w >> 3] + block_[w];
        u64 c = std::popcount(words_[w]);
        if (before + c >= j) return w * 64 + select_in_word(words_[w], j - before) + 1;
        ++w;
    }
}

u64 BitVector::select0(u64 j) const {
    if (j < 1 || j > n_ - ones_) throw std::out_of_range("select out of range");
    u64 w = sel0_[(j - 1) / 256];
    while (true) {
        u64 before = w * 64 - (super_[w >> 3] + block_[w]);
        u64 c = 64 - std::popcount(words_[w]);
        if (before + c >= j) return w * 64 + select_in_word(~words_[w], j - before) + 1;
        ++w;
    }
}

double BitVector::entropy_bits() const { return log2_binomial(n_, ones_); }

Bits BitVector::space() const {
    Bits b;
    b.physical = words_.size() * 64 + super_.size() * 32 + block_.size() * 16 + (sel1_.size() + sel0_.size()) * 32;
    u64 lg = std::max<u64>(1, ceil_log2(n_ + 1));
    b.model = static_cast<u64>(std::ceil(entropy_bits())) + 2 * ((n_ + lg - 1) / lg);
    return b;
}

void BitVector::save(Writer& w) const {
    w.u64(n_);
    w.vec(words_);
}

void BitVector::load(Reader& r) {
    n_ = r.u64();
    words_ = r.vec<u64>();
    if (words_.size() != n_ / 64 + 1) throw std::runtime_error("corrupt bitvector");
    build();
}

// ---------------------------------------------------------------- OrderedTree

OrderedTree::OrderedTree(const std::vector<u32>& degrees) : nodes_(degrees.size()) {
    if (degrees.empty()) throw std::invalid_argument("empty tree");
    u64 sum = 0;
    for (u32 d : degrees) sum += d;
    if (sum + 1 != degrees.size()) throw std::invalid_argument("degree sequence is not a tree");
    std::vector<u64> ones;
    ones.reserve(sum);
    u64 pos = 0;
    std::vector<bool> leaf(nodes_);
    for (u64 v = 0; v < nodes_; ++v) {
        for (u32 k = 0; k < degrees[v]; ++k) ones.push_back(++pos);
        ++pos;  // the terminating zero
        leaf[v] = degrees[v] == 0;
    }
    louds_ = BitVector::from_positions(pos, ones);
    leafBits_ = BitVector(leaf);

    // Left-to-right leaf order is depth-first; compare with BFS order.
    std::vector<u64> first(nodes_);
    u64 acc = 1;
    for (u64 v = 0; v < nodes_; ++v) {
        first[v] = acc;
        acc += degrees[v];
    }
    std::vector<u64> dfsLeaves;
    std::vector<u64> st{0};
    while (!st.empty()) {
        u64 v = st.back();
        st.pop_back();
        if (degrees[v] == 0) dfsLeaves.push_back(v);
        for (u32 k = degrees[v]; k-- > 0;) st.push_back(first[v] + k);
    }
    leavesInOrder_ = true;
    for (u64 i = 1; i < dfsLeaves.size(); ++i)
        if (dfsLeaves[i] < dfsLeaves[i - 1]) leavesInOrder_ = false;
    if (!leavesInOrder_) {
        std::vector<u64> b2d(dfsLeaves.size()), d2b(dfsLeaves.size());
        for (u64 i = 0; i < dfsLeaves.size(); ++i) {
            u64 b = leafBits_.rank(dfsLeaves[i]);
            d2b[i] = b;
            b2d[b] = i;
        }
        bfsToDfs_ = PackedArray::from(b2d);
        dfsToBfs_ = PackedArray::from(d2b);
    }
}

u64 OrderedTree::parent(u64 v) const {
    if (v == 0 || v >= nodes_) throw std::out_of_range("root has no parent");
    return louds_.rank0(louds_.select(v));
}

u64 OrderedTree::degree(u64 v) const {
    u64 start = v == 0 ? 1 : louds_.select0(v) + 1;
    return louds_.select0(v + 1) - start;
}

u64 OrderedTree::child(u64 v, u64 i) const {
    u64 start = v == 0 ? 1 : louds_.select0(v) + 1;
    if (i < 1 || start + i - 1 > louds_.size() || !louds_.read(start + i - 1))
        throw std::out_of_range("child index out of range");
    return louds_.rank(start + i - 1);
}

u64 OrderedTree::child_rank(u64 v) const {
    if (v == 0 || v >= nodes_) throw std::out_of_range("root has no parent");
    u64 q = louds_.select(v);
    u64 p = louds_.rank0(q);
    u64 start = p == 0 ? 1 : louds_.select0(p) + 1;
    return q - start;
}

u64 OrderedTree::leaf_select(u64 i) const {
    if (i < 1 || i > leaves()) throw std::out_of_range("leaf index out of range");
    u64 b = leavesInOrder_ ? i : dfsToBfs_.get(i - 1) + 1;
    return leafBits_.select(b) - 1;
}

u64 OrderedTree::leaf_rank(u64 v) const {
    u64 b = leafBits_.rank(v);
    if (leavesInOrder_ || !is_leaf(v)) return b;
    return bfsToDfs_.get(b);
}

Bits OrderedTree::space() const {
    Bits b = louds_.space();
    b += leafBits_.space();
    b.physical += bfsToDfs_.bits() + dfsToBfs_.bits();
    b.model += bfsToDfs_.bits() + dfsToBfs_.bits();
    return b;
}

void OrderedTree::save(Writer& w) const {
    w.u64(nodes_);
    louds_.save(w);
    leafBits_.save(w);
    w.u64(leavesInOrder_);
    bfsToDfs_.save(w);
    dfsToBfs_.save(w);
}

void OrderedTree::load(Reader& r) {
    nodes_ = r.u64();
    louds_.load(r);
    leafBits_.load(r);
    leavesInOrder_ = r.u64() != 0;
    bfsToDfs_.load(r);
    dfsToBfs_.load(r);
}

// ---------------------------------------------------------------- RangeMinIndex

void RangeMinIndex::build(u64 m, const Less& less) {
    m_ = m;
    masks_.assign(m, 0);
    std::vector<u32> stack;
    for (u64 b0 = 0; b0 < m; b0 += kBlock) {
        u32 bits = 0;
        stack.clear();
        for (u64 j = b0; j < std::min(m, b0 + kBlock); ++j) {
            while (!stack.empty() && less(j, b0 + stack.back())) {
                bits &= ~(1u << stack.back());
                stack.pop_back();
            }
            stack.push_back(static_cast<u32>(j - b0));
            bits |= 1u << (j - b0);
            masks_[j] = bits;
        }
    }
    table_.clear();
    u64 nb = (m + kBlock - 1) / kBlock;
    if (nb == 0) return;
    u32 width = bits_for(m - 1);
    std::vector<u64> level(nb);
    for (u64 b = 0; b < nb; ++b) level[b] = in_block(b * kBlock, std::min(m, (b + 1) * kBlock) - 1);
    for (u64 len = 1;; len *= 2) {
        PackedArray p(level.size(), width);
        for (u64 i = 0; i < level.size(); ++i) p.set(i, level[i]);
        table_.push_back(std::move(p));
        if (2 * len > nb) break;
        std::vector<u64> next(nb - 2 * len + 1);
        for (u64 i = 0; i < next.size(); ++i) {
            u64 x = level[i], y = level[i + len];
            next[i] = less(y, x) ? y : x;
        }
        level.swap(next);
    }
}

u64 RangeMinIndex::query(u64 a, u64 b, const Less& less) const {
    if (a > b || b >= m_) throw std::out_of_range("empty range");
    u64 ba = a / kBlock, bb = b / kBlock;
    if (ba == bb) return in_block(a, b);
    u64 best = in_block(a, ba * kBlock + kBlock - 1);
    if (ba + 1 < bb) {
        u64 x = ba + 1, y = bb - 1;
        u32 k = 63 - std::countl_zero(y - x + 1);
        u64 c1 = table_[k].get(x), c2 = table_[k].get(y + 1 - (u64{1} << k));
        u64 mid = less(c2, c1) ? c2 : c1;
        if (less(mid, best)) best = mid;
    }
    u64 right = in_block(bb * kBlock, b);
    if (less(right, best)) best = right;
    return best;
}

Bits RangeMinIndex::space() const {
    Bits b;
    b.physical = masks_.size() * kBlock;
    for (const auto& t : table_) b.physical += t.bits();
    b.model = b.physical;
    return b;
}

void RangeMinIndex::save(Writer& w) const {
    w.u64(m_);
    w.raw(masks_);
    w.u64(table_.size());
    for (const auto& t : table_) t.save(w);
}

void RangeMinIndex::load(Reader& r) {
    m_ = r.u64();
    masks_ = r.raw<u32>();
    table_.resize(r.u64());
    for (auto& t : table_) t.load(r);
}

}  // namespace pav
