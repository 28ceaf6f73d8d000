#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "pav/geo_index.hpp"

using namespace pav;

namespace {

QueryRect random_rect(std::mt19937_64& rng, u32 n) {
    u32 a = 1 + rng() % n, b = 1 + rng() % n, c = 1 + rng() % n, d = 1 + rng() % n;
    if (a > b) std::swap(a, b);
    if (c > d) std::swap(c, d);
    return {a, b, c, d};
}

// Rectangles whose sides fall on strip boundaries of the index, where the
// alignment flags matter.
QueryRect boundary_rect(std::mt19937_64& rng, const GeoIndex& g) {
    const u32 n = g.size();
    u32 v[4];
    for (int i = 0; i < 4; ++i) {
        const auto& I = g.base().side(i / 2).I;
        u32 s = 1 + rng() % I.ones();
        u32 p = static_cast<u32>(I.select(s));
        v[i] = (rng() & 1) ? p : (p > 1 ? p - 1 : p);
        v[i] = std::clamp<u32>(v[i] + (rng() % 3 == 0 ? 1 : 0), 1, n);
    }
    if (v[0] > v[1]) std::swap(v[0], v[1]);
    if (v[2] > v[3]) std::swap(v[2], v[3]);
    return {v[2], v[3], v[0], v[1]};
}

u64 area(const QueryRect& r) { return u64(r.rowHi - r.rowLo + 1) * (r.colHi - r.colLo + 1); }

bool overlap(const QueryRect& a, const QueryRect& b) {
    return a.rowLo <= b.rowHi && b.rowLo <= a.rowHi && a.colLo <= b.colHi && b.colLo <= a.colHi;
}

void check_pieces(const Permutation& t, const QueryRect& r, const std::vector<GeoPiece>& ps) {
    u64 sum = 0;
    for (size_t i = 0; i < ps.size(); ++i) {
        const auto& p = ps[i].rect;
        ASSERT_TRUE(r.rowLo <= p.rowLo && p.rowHi <= r.rowHi && r.colLo <= p.colLo && p.colHi <= r.colHi);
        ASSERT_EQ(ps[i].count, oracle::rect_count(t, p)) << "piece " << i << " kind " << ps[i].kind;
        for (size_t j = 0; j < i; ++j) ASSERT_FALSE(overlap(p, ps[j].rect)) << i << " " << j;
        sum += area(p);
    }
    ASSERT_EQ(sum, area(r));
}

void check_queries(const Permutation& t, const GeoIndex& g, std::mt19937_64& rng, int queries) {
    const u32 n = t.size();
    for (int q = 0; q < queries; ++q) {
        QueryRect r = (q % 3 == 0 || g.fallback()) ? random_rect(rng, n) : boundary_rect(rng, g);
        std::vector<GeoPiece> ps;
        LevelTrace tr;
        ASSERT_EQ(g.rect_count(r, &tr, &ps), oracle::rect_count(t, r))
            << r.rowLo << ".." << r.rowHi << " x " << r.colLo << ".." << r.colHi;
        check_pieces(t, r, ps);
        ASSERT_LE(tr.nodeVisits, 4 * (g.levels() + 1u));
        if (q % 4 == 0) ASSERT_EQ(g.rect_min(r), oracle::rect_min(t, r));
    }
}

}  // namespace

TEST(GeoIndex, LevelSizes) {
    std::vector<u64> w;
    auto m = geo_level_sizes(1u << 10, 256, &w);
    EXPECT_EQ(m, (std::vector<u32>{3, 8, 18, 37, 68, 113, 170, 256}));
    EXPECT_EQ(w[1], 322u);
    EXPECT_TRUE(geo_level_sizes(16, 16).empty());
    auto big = geo_level_sizes(1u << 18, (1u << 18) / 5);
    ASSERT_FALSE(big.empty());
    EXPECT_EQ(big.back(), (1u << 18) / 5);
    for (size_t i = 1; i < big.size(); ++i) EXPECT_LT(big[i - 1], big[i]);
}

TEST(GeoIndex, SmallIsFallback) {
    std::mt19937_64 rng(1);
    for (u32 n : {1u, 3u, 40u}) {
        Permutation t = generate("uniform", n, rng());
        GeoIndex g = GeoIndex::build(t);
        EXPECT_TRUE(g.fallback());
        check_queries(t, g, rng, 300);
    }
}

TEST(GeoIndex, BruteForceAcrossFamilies) {
    std::mt19937_64 rng(7);
    for (std::string fam : {"identity", "reverse", "avoid231", "separable", "interleavedRuns(3)", "uniform"}) {
        for (u32 n : {128u, 700u, 1024u, 3000u}) {
            Permutation t = generate(fam, n, rng());
            GeoIndex g = GeoIndex::build(t);
            SCOPED_TRACE(fam + " n=" + std::to_string(n));
            ASSERT_FALSE(g.fallback());
            check_queries(t, g, rng, 1500);
        }
    }
}

TEST(GeoIndex, ExhaustiveTiny) {
    Permutation t = generate("separable", 128, 3);
    GeoIndex g = GeoIndex::build(t);
    ASSERT_FALSE(g.fallback());
    std::mt19937_64 rng(2);
    for (u32 c1 = 1; c1 <= 128; c1 += 5)
        for (u32 c2 = c1; c2 <= 128; c2 += 7)
            for (u32 r1 = 1; r1 <= 128; r1 += 6)
                for (u32 r2 = r1; r2 <= 128; r2 += 9) {
                    QueryRect r{r1, r2, c1, c2};
                    std::vector<GeoPiece> ps;
                    ASSERT_EQ(g.rect_count(r, nullptr, &ps), oracle::rect_count(t, r));
                    check_pieces(t, r, ps);
                }
}

TEST(GeoIndex, FullAndSingleton) {
    const u32 n = 4096;
    Permutation t = generate("avoid231", n, 5);
    GeoIndex g = GeoIndex::build(t);
    std::vector<GeoPiece> ps;
    EXPECT_EQ(g.rect_count({1, n, 1, n}, nullptr, &ps), n);
    ASSERT_EQ(ps.size(), 1u);
    EXPECT_EQ(ps[0].level, 0u);
    for (u32 i = 1; i <= n; i += 37) {
        EXPECT_EQ(g.rect_count({t.at(i), t.at(i), i, i}), 1u);
        EXPECT_EQ(g.rect_min({1, n, i, i}), std::optional<u32>(t.at(i)));
        EXPECT_EQ(g.rect_count({1, n, i, n}), n - i + 1);
    }
}

TEST(GeoIndex, LargeSampled) {
    const u32 n = 1u << 16;
    for (std::string fam : {"avoid231", "interleavedRuns(4)"}) {
        Permutation t = generate(fam, n, 11);
        GeoIndex g = GeoIndex::build(t);
        std::mt19937_64 rng(3);
        for (int q = 0; q < 400; ++q) {
            QueryRect r = q % 2 ? random_rect(rng, n) : boundary_rect(rng, g);
            LevelTrace tr;
            ASSERT_EQ(g.rect_count(r, &tr), oracle::rect_count(t, r));
            ASSERT_LE(tr.nodeVisits, 4 * (g.levels() + 1u));
        }
    }
}

TEST(GeoIndex, SerializationRoundTrip) {
    for (u32 n : {50u, 2000u}) {
        Permutation t = generate("separable", n, 8);
        GeoIndex g = GeoIndex::build(t);
        std::string bytes = g.serialize();
        GeoIndex h = GeoIndex::deserialize(bytes);
        EXPECT_EQ(h.serialize(), bytes);
        std::mt19937_64 rng(4);
        for (int q = 0; q < 500; ++q) {
            QueryRect r = random_rect(rng, n);
            std::vector<GeoPiece> a, b;
            ASSERT_EQ(h.rect_count(r, nullptr, &b), g.rect_count(r, nullptr, &a));
            ASSERT_EQ(a.size(), b.size());
        }
        EXPECT_EQ(h.dense_model_bits(), g.dense_model_bits());
        EXPECT_THROW(GeoIndex::deserialize(bytes.substr(0, bytes.size() - 3)), std::runtime_error);
    }
}

// Every dense node against its own cells, recomputed from the strip starts.
TEST(GeoIndex, DenseNodeInvariants) {
    for (std::string fam : {"identity", "avoid231"}) {
        const u32 n = 1u << 16;
        Permutation t = generate(fam, n, 12);
        GeoIndex g = GeoIndex::build(t);
        ASSERT_FALSE(g.fallback());
        const Permutation inv = t.inverse();
        for (int a = 0; a < 2; ++a) {
            const Permutation& p = a ? inv : t;
            for (u32 k = 0; k < g.levels(); ++k) {
                const auto& D = g.dense(a, k);
                const auto& cs = g.strip_starts(a, k);
                const auto& sub = g.strip_starts(a, k + 1);
                const auto& fc = g.first_child(a, k);
                const auto& rs = g.strip_starts(1 - a, k);
                const auto& subRows = g.strip_starts(1 - a, k + 1);
                auto strip = [](const std::vector<u32>& st, u32 x) {
                    return static_cast<u32>(std::upper_bound(st.begin(), st.end(), x) - st.begin()) - 1;
                };
                for (u32 J = 0; J + 1 < cs.size(); ++J) {
                    const u32 q = fc[J + 1] - fc[J];
                    std::set<u32> rows;
                    std::vector<std::map<u32, std::set<u32>>> hit(q);
                    for (u32 x = cs[J]; x < cs[J + 1]; ++x) {
                        const u32 v = p.at(x), i = strip(sub, x) - fc[J];
                        rows.insert(strip(rs, v));
                        hit[i][strip(rs, v)].insert(strip(subRows, v));
                    }
                    ASSERT_EQ(D.cells(J), rows.size());
                    const u32 H = D.row_base(J, D.cells(J));
                    ASSERT_EQ(D.box(J, 1, q, 0, H), cs[J + 1] - cs[J]);
                    u32 c = 0;
                    for (u32 I : rows) {
                        for (u32 i = 1; i <= q; ++i) {
                            const u32 nz = D.cell_rank(J, i, D.row_base(J, c + 1)) - D.cell_rank(J, i, D.row_base(J, c));
                            ASSERT_EQ(nz, hit[i - 1].count(I) ? hit[i - 1][I].size() : 0u);
                        }
                        ++c;
                    }
                    for (u32 i = 1; i <= q; ++i)
                        ASSERT_EQ(D.box(J, i, i, 0, H), sub[fc[J] + i] - sub[fc[J] + i - 1]);
                }
            }
        }
    }
}
