#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "pav/succinct.hpp"

using namespace pav;

TEST(BitVector, SmallExamples) {
    BitVector b(std::vector<bool>{true, false, true});
    EXPECT_EQ(b.rank(2), 1u);
    EXPECT_EQ(b.select(2), 3u);
    EXPECT_EQ(b.select0(1), 2u);
    EXPECT_THROW(b.select(3), std::out_of_range);
}

TEST(BitVector, RandomAgainstScan) {
    std::mt19937_64 rng(1);
    for (int it = 0; it < 1000; ++it) {
        u64 n = 1 + rng() % (it < 900 ? 300 : 5000);
        double density = (rng() % 100) / 100.0;
        std::vector<bool> bits(n);
        for (u64 i = 0; i < n; ++i) bits[i] = (rng() % 1000) < density * 1000;
        BitVector b(bits);
        u64 ones = 0, zeros = 0;
        ASSERT_EQ(b.rank(0), 0u);
        for (u64 i = 1; i <= n; ++i) {
            ASSERT_EQ(b.read(i), bits[i - 1]);
            if (bits[i - 1]) {
                ++ones;
                ASSERT_EQ(b.select(ones), i);
            } else {
                ++zeros;
                ASSERT_EQ(b.select0(zeros), i);
            }
            ASSERT_EQ(b.rank(i), ones);
            if (b.rank(i) >= 1) ASSERT_LE(b.select(b.rank(i)), i);
        }
        EXPECT_EQ(b.ones(), ones);
    }
}

TEST(BitVector, SparseModelBound) {
    // Sparse vector shaped like the strip-boundary vectors at n = 2^18.
    const u64 n = 1u << 18, m = n / 5;
    std::vector<u64> pos;
    std::mt19937_64 rng(3);
    std::vector<bool> bits(n);
    bits[0] = true;
    for (u64 k = 1; k < m; ++k) bits[rng() % n] = true;
    BitVector b(bits);
    double lg = std::log2(double(n));
    EXPECT_LE(double(b.space().model), b.entropy_bits() + 1 + 3.0 * n / lg);
}

TEST(OrderedTree, ThreeLevel) {
    OrderedTree t(std::vector<u32>{2, 2, 2, 0, 0, 0, 0});
    EXPECT_EQ(t.leaf_select(3), t.child(2, 1));
    EXPECT_EQ(t.parent(5), 2u);
    EXPECT_EQ(t.child_rank(6), 1u);
    EXPECT_EQ(t.degree(0), 2u);
    EXPECT_THROW(t.parent(0), std::out_of_range);
    EXPECT_THROW(t.child(1, 3), std::out_of_range);
    for (u64 v = 3; v < 7; ++v) EXPECT_EQ(t.leaf_select(t.leaf_rank(v) + 1), v);
}

TEST(OrderedTree, RandomAgainstAdjacency) {
    std::mt19937_64 rng(2);
    for (int it = 0; it < 20; ++it) {
        u64 n = it < 19 ? 2 + rng() % 200 : 10000;
        // random tree by attaching each new node to a random earlier node,
        // then relabel in BFS order.
        std::vector<std::vector<u64>> kids(n);
        for (u64 v = 1; v < n; ++v) kids[rng() % v].push_back(v);
        std::vector<u64> bfs{0}, label(n);
        for (size_t h = 0; h < bfs.size(); ++h)
            for (u64 c : kids[bfs[h]]) bfs.push_back(c);
        for (u64 i = 0; i < n; ++i) label[bfs[i]] = i;
        std::vector<u32> deg(n);
        std::vector<u64> par(n, 0), crank(n, 0);
        std::vector<std::vector<u64>> ch(n);
        for (u64 i = 0; i < n; ++i) {
            u64 v = bfs[i];
            deg[i] = static_cast<u32>(kids[v].size());
            for (u64 k = 0; k < kids[v].size(); ++k) {
                u64 c = label[kids[v][k]];
                ch[i].push_back(c);
                par[c] = i;
                crank[c] = k;
            }
        }
        // leaves left to right by DFS
        std::vector<u64> leaves, st{0};
        while (!st.empty()) {
            u64 v = st.back();
            st.pop_back();
            if (ch[v].empty()) leaves.push_back(v);
            for (size_t k = ch[v].size(); k-- > 0;) st.push_back(ch[v][k]);
        }
        OrderedTree t(deg);
        for (u64 v = 0; v < n; ++v) {
            ASSERT_EQ(t.degree(v), ch[v].size());
            for (u64 k = 0; k < ch[v].size(); ++k) ASSERT_EQ(t.child(v, k + 1), ch[v][k]);
            if (v) {
                ASSERT_EQ(t.parent(v), par[v]);
                ASSERT_EQ(t.child_rank(v), crank[v]);
                ASSERT_EQ(t.child(t.parent(v), t.child_rank(v) + 1), v);
            }
        }
        for (u64 i = 0; i < leaves.size(); ++i) {
            ASSERT_EQ(t.leaf_select(i + 1), leaves[i]);
            ASSERT_EQ(t.leaf_rank(leaves[i]), i);
        }
    }
}

TEST(RangeMin, Examples) {
    std::vector<int> v{3, 1, 2};
    RangeMinIndex r;
    r.build_values(v);
    auto less = [&](u64 i, u64 j) { return v[i] < v[j] || (v[i] == v[j] && i < j); };
    EXPECT_EQ(r.query(0, 2, less), 1u);
    std::vector<int> inc(100);
    std::iota(inc.begin(), inc.end(), 0);
    RangeMinIndex r2;
    r2.build_values(inc);
    auto less2 = [&](u64 i, u64 j) { return inc[i] < inc[j]; };
    for (u64 a = 0; a < 100; a += 7)
        for (u64 b = a; b < 100; b += 5) EXPECT_EQ(r2.query(a, b, less2), a);
    EXPECT_THROW(r2.query(5, 4, less2), std::out_of_range);
}

TEST(RangeMin, RandomAgainstScanWithTies) {
    std::mt19937_64 rng(4);
    std::vector<int> v(10000);
    for (auto& x : v) x = static_cast<int>(rng() % 500);
    RangeMinIndex r;
    r.build_values(v);
    auto less = [&](u64 i, u64 j) { return v[i] < v[j] || (v[i] == v[j] && i < j); };
    for (int q = 0; q < 1000; ++q) {
        u64 a = rng() % v.size(), b = rng() % v.size();
        if (a > b) std::swap(a, b);
        u64 best = a;
        for (u64 i = a; i <= b; ++i)
            if (v[i] < v[best]) best = i;
        ASSERT_EQ(r.query(a, b, less), best);
    }
}

TEST(Packed, RoundTrip) {
    std::mt19937_64 rng(9);
    for (u32 w = 1; w <= 64; ++w) {
        PackedArray p(257, w);
        std::vector<u64> ref(257);
        for (u64 i = 0; i < 257; ++i) {
            ref[i] = w == 64 ? rng() : rng() & ((u64{1} << w) - 1);
            p.set(i, ref[i]);
        }
        for (u64 i = 0; i < 257; ++i) ASSERT_EQ(p.get(i), ref[i]);
        Writer wr;
        p.save(wr);
        Reader rd(wr.str());
        PackedArray q;
        q.load(rd);
        EXPECT_TRUE(q == p);
    }
}
