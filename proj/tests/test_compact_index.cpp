#include <gtest/gtest.h>

#include <random>
#include <set>

#include "pav/compact_index.hpp"

using namespace pav;

namespace {

void check_all(const Permutation& t, const CompactIndex& x, std::mt19937_64& rng, u32 rangeQueries) {
    const u32 n = t.size();
    for (u32 i = 1; i <= n; ++i) {
        ASSERT_EQ(x.rank(i), t.at(i)) << "rank " << i;
        ASSERT_EQ(x.unrank(t.at(i)), i) << "unrank " << t.at(i);
        ASSERT_EQ(x.next_smaller(i), oracle::next_smaller(t, i)) << "next smaller " << i;
    }
    for (u32 q = 0; q < rangeQueries; ++q) {
        u32 a = 1 + rng() % n, b = 1 + rng() % n;
        if (a > b) std::swap(a, b);
        ASSERT_EQ(x.range_min(a, b), oracle::range_min(t, a, b)) << a << ".." << b;
    }
}

}  // namespace

TEST(CompactIndex, LevelSizes) {
    EXPECT_FALSE(level_sizes(32));
    auto s = level_sizes(1u << 18);
    ASSERT_TRUE(s);
    EXPECT_EQ(s->m1, (1u << 18) / 324);
    EXPECT_EQ(s->m2, (1u << 18) / 5);
    auto t = level_sizes(1u << 14);
    ASSERT_TRUE(t);
    EXPECT_EQ(t->m1, (1u << 14) / 196);
    EXPECT_EQ(t->m2, (1u << 14) / 4);
}

TEST(CompactIndex, IdentityAndReverse) {
    const u32 n = 1u << 14;
    CompactIndex id = CompactIndex::build(Permutation::identity(n));
    ASSERT_FALSE(id.fallback());
    for (u32 i = 1; i <= n; ++i) {
        ASSERT_EQ(id.rank(i), i);
        ASSERT_EQ(id.unrank(i), i);
        ASSERT_EQ(id.next_smaller(i), std::nullopt);
    }
    // every 2-cell of the identity is diagonal
    for (u32 s = 1; s <= id.m2(); ++s) EXPECT_EQ(id.cross_cell(0, s, 1).first, s);
    EXPECT_EQ(id.range_min(5, 900), 5u);

    CompactIndex rev = CompactIndex::build(generate("reverse", 8, 0));
    EXPECT_TRUE(rev.fallback());
    EXPECT_EQ(rev.rank(3), 6u);
    Permutation big = generate("reverse", 5000, 0);
    CompactIndex r2 = CompactIndex::build(big);
    ASSERT_FALSE(r2.fallback());
    for (u32 i = 1; i < 5000; ++i) ASSERT_EQ(r2.next_smaller(i), std::optional<u32>(i + 1));
    EXPECT_EQ(r2.next_smaller(5000), std::nullopt);
}

TEST(CompactIndex, FallbackIsCorrect) {
    std::mt19937_64 rng(3);
    for (u32 n : {1u, 2u, 5u, 32u, 60u}) {
        Permutation t = generate("uniform", n, rng());
        CompactIndex x = CompactIndex::build(t);
        EXPECT_TRUE(x.fallback());
        check_all(t, x, rng, 200);
        auto rep = x.space_report();
        EXPECT_EQ(rep.payload_bits(), u64(n) * ceil_log2(std::max<u64>(2, n)));
    }
}

TEST(CompactIndex, ExhaustiveAcrossFamilies) {
    std::mt19937_64 rng(17);
    for (std::string fam : {"avoid231", "separable", "interleavedRuns(4)", "uniform"}) {
        for (u32 n : {200u, 2048u, 5000u}) {
            Permutation t = generate(fam, n, rng());
            CompactIndex x = CompactIndex::build(t);
            SCOPED_TRACE(fam + " n=" + std::to_string(n));
            check_all(t, x, rng, 3000);
        }
    }
}

TEST(CompactIndex, LargeAvoiderSampled) {
    const u32 n = 100000;
    Permutation t = generate("avoid231", n, 4);
    CompactIndex x = CompactIndex::build(t);
    std::mt19937_64 rng(1);
    for (int q = 0; q < 10000; ++q) {
        u32 i = 1 + rng() % n;
        ASSERT_EQ(x.rank(i), t.at(i));
        ASSERT_EQ(x.unrank(x.rank(i)), i);
        ASSERT_EQ(x.next_smaller(i), oracle::next_smaller(t, i));
        u32 a = 1 + rng() % n, b = 1 + rng() % n;
        if (a > b) std::swap(a, b);
        ASSERT_EQ(x.range_min(a, b), oracle::range_min(t, a, b));
    }
}

TEST(CompactIndex, OpCounterIsFlat) {
    std::set<u64> seen;
    for (u32 n : {1u << 12, 1u << 16}) {
        for (std::string fam : {"avoid231", "interleavedRuns(4)"}) {
            CompactIndex x = CompactIndex::build(generate(fam, n, 9));
            std::mt19937_64 rng(2);
            for (int q = 0; q < 500; ++q) {
                OpCounter a, b;
                x.rank(1 + rng() % n, &a);
                x.unrank(1 + rng() % n, &b);
                seen.insert(a.ops);
                seen.insert(b.ops);
            }
        }
    }
    EXPECT_EQ(seen.size(), 1u);
}

TEST(CompactIndex, SerializationRoundTrip) {
    for (u32 n : {40u, 3000u, 20000u}) {
        Permutation t = generate("separable", n, 6);
        CompactIndex x = CompactIndex::build(t);
        std::string bytes = x.serialize();
        CompactIndex y = CompactIndex::deserialize(bytes);
        EXPECT_EQ(y.serialize(), bytes);
        std::mt19937_64 rng(5);
        for (int q = 0; q < 1000; ++q) {
            u32 i = 1 + rng() % n;
            ASSERT_EQ(y.rank(i), x.rank(i));
            ASSERT_EQ(y.unrank(i), x.unrank(i));
            ASSERT_EQ(y.next_smaller(i), x.next_smaller(i));
        }
        EXPECT_EQ(y.space_report().total().model, x.space_report().total().model);
        EXPECT_THROW(CompactIndex::deserialize(bytes.substr(0, bytes.size() / 2)), std::runtime_error);
        std::string bad = bytes;
        bad[0] ^= 1;
        EXPECT_THROW(CompactIndex::deserialize(bad), std::runtime_error);
    }
}

TEST(CompactIndex, SpaceReportBookkeeping) {
    CompactIndex x = CompactIndex::build(generate("avoid231", 1u << 14, 1));
    auto rep = x.space_report();
    u64 model = 0, payload = 0;
    for (const auto& c : rep.components) {
        model += c.bits.model;
        if (c.payload) payload += c.bits.model;
    }
    EXPECT_EQ(rep.total().model, model);
    EXPECT_EQ(rep.payload_bits(), payload);
    EXPECT_EQ(rep.overhead_model_bits() + payload, model);
    EXPECT_GT(payload, 0u);
    // payload is one width field and one packed index per fine strip and side
    u64 expect = 0;
    for (int a = 0; a < 2; ++a) {
        const auto& S = x.side(a);
        for (u32 s = 1; s <= x.m2(); ++s) {
            u32 w = S.fine(s, nullptr).entry->width();
            expect += S.table.index_bits(w);
        }
    }
    EXPECT_LE(expect, payload);
}
