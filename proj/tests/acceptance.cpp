// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pav/geo_index.hpp"

using namespace pav;

namespace {

// Frozen constants.
constexpr double kPayloadSlack = 8.0;  // criterion 3
constexpr u64 kVisitSlack = 0;         // C0, criterion 5

const std::vector<std::string> kFamilies = {"avoid231", "separable", "interleavedRuns(4)"};
const std::vector<u32> kSizes = {1u << 11, 1u << 14, 1u << 16, 1u << 18};
constexpr u64 kSeed = 1;

struct Result {
    bool pass = true;
    std::string detail;
    void fail(const std::string& why) {
        if (pass) detail = why;
        pass = false;
    }
};

void report(int id, const char* name, const Result& r) {
    std::printf("criterion %d %s: %s%s%s\n", id, r.pass ? "PASS" : "FAIL", name, r.detail.empty() ? "" : "; ",
                r.detail.c_str());
    std::fflush(stdout);
}

QueryRect random_rect(std::mt19937_64& rng, u32 n) {
    u32 a = 1 + rng() % n, b = 1 + rng() % n, c = 1 + rng() % n, d = 1 + rng() % n;
    if (a > b) std::swap(a, b);
    if (c > d) std::swap(c, d);
    return {a, b, c, d};
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

struct Measured {
    // avoid231 builds, by n
    std::map<u32, double> payloadPerElement;
    std::map<u32, u64> overheadBits, denseBits, levels, maxVisits;
};

// Criteria 1 and 2 over the whole corpus; also collects avoid231 figures.
void oracle_and_invariants(Result& c1, Result& c2, Measured& m) {
    u64 checked = 0, mismatches = 0, snapshots = 0;
    for (const auto& fam : kFamilies) {
        for (u32 n : kSizes) {
            const std::string tag = fam + " n=" + std::to_string(n);
            const Permutation t = generate(fam, n, kSeed);
            const GeoIndex g = GeoIndex::build(t);
            const CompactIndex& x = g.base();
            std::mt19937_64 rng(kSeed * 1000003 + n);
            u64 bad = 0;
            auto expect = [&](bool ok) {
                ++checked;
                bad += !ok;
            };
            if (n <= (1u << 14)) {
                for (u32 i = 1; i <= n; ++i) {
                    expect(x.rank(i) == t.at(i));
                    expect(x.unrank(t.at(i)) == i);
                }
            } else {
                const Permutation inv = t.inverse();
                for (int q = 0; q < 10000; ++q) {
                    const u32 i = 1 + rng() % n;
                    expect(x.rank(i) == t.at(i));
                    expect(x.unrank(i) == inv.at(i));
                }
            }
            for (int q = 0; q < 10000; ++q) {
                u32 a = 1 + rng() % n, b = 1 + rng() % n;
                if (a > b) std::swap(a, b);
                expect(x.range_min(a, b) == oracle::range_min(t, a, b));
                const u32 i = 1 + rng() % n;
                expect(x.next_smaller(i) == oracle::next_smaller(t, i));
                const QueryRect r = random_rect(rng, n);
                LevelTrace tr;
                expect(g.rect_count(r, &tr) == oracle::rect_count(t, r));
                if (fam == "avoid231") m.maxVisits[n] = std::max<u64>(m.maxVisits[n], tr.nodeVisits);
                const QueryRect s = random_rect(rng, n);
                expect(g.rect_min(s) == oracle::rect_min(t, s));
            }
            if (bad) {
                mismatches += bad;
                c1.fail(std::to_string(bad) + " mismatches on " + tag);
            }

            // every hierarchy the two indexes are built from, twice
            std::vector<std::vector<u32>> seqs;
            if (!x.fallback()) seqs.push_back({x.m1(), x.m2()});
            if (!g.fallback()) seqs.push_back(g.level_sizes());
            for (const auto& seq : seqs) {
                const Hierarchy h = build_hierarchy(t, seq);
                const InvariantReport rep = check_hierarchy(h, t);
                snapshots += h.divisions.size();
                if (!rep.ok) c2.fail(tag + ": " + rep.violations.front());
                const Hierarchy again = build_hierarchy(t, seq);
                if (!(again == h) || again.dMax != h.dMax) c2.fail(tag + ": rebuild differs");
            }
            if (seqs.empty()) c2.fail(tag + ": no decomposition built");

            if (fam == "avoid231") {
                const SpaceReport rep = x.space_report();
                m.payloadPerElement[n] = rep.payload_per_element();
                m.overheadBits[n] = rep.overhead_model_bits() + g.space_report().total().model - g.dense_model_bits();
                m.denseBits[n] = g.dense_model_bits();
                m.levels[n] = g.levels();
            }
            std::printf("  built and checked %s (levels %u, dMax %u)\n", tag.c_str(), g.levels(), x.d_max());
            std::fflush(stdout);
        }
    }
    if (c1.pass) c1.detail = std::to_string(checked) + " answers, 0 mismatches";
    if (c2.pass) c2.detail = std::to_string(snapshots) + " snapshots, constant 40, deterministic rebuilds";
    (void)mismatches;
}

Result payload(Measured& m) {
    Result r;
    for (u32 lg : {15u, 17u}) {
        const u32 n = 1u << lg;
        m.payloadPerElement[n] = CompactIndex::build(generate("avoid231", n, kSeed)).space_report().payload_per_element();
    }
    const double n = double(1u << 18), lg = 18.0;
    const double bound = 4.0 + kPayloadSlack * std::log2(lg) / std::sqrt(lg);
    const double at = m.payloadPerElement.at(1u << 18);
    std::string series;
    double prev = 1e300;
    bool monotone = true;
    for (auto [k, v] : m.payloadPerElement) {
        if (k < (1u << 14)) continue;
        series += (series.empty() ? "" : " ") + fmt("%.3f", v);
        if (v > prev) monotone = false;
        prev = v;
    }
    r.detail = "payload/n at 2^18 " + fmt("%.3f", at) + " vs bound " + fmt("%.3f", bound) + ", 2^14..2^18: " + series;
    if (at * n > bound * n) r.fail(r.detail);
    if (!monotone) {
        r.pass = false;
        r.detail += " (not non-increasing)";
    }
    return r;
}

Result overhead(const Measured& m) {
    Result r;
    const u32 n = 1u << 18;
    const double o = double(m.overheadBits.at(n)) / n, d = double(m.denseBits.at(n)) / n;
    r.detail = "non-payload " + fmt("%.2f", o) + " bits/element, dense " + fmt("%.2f", d) + " bits/element, budget 0.5 each";
    if (m.overheadBits.at(n) * 2 > n || m.denseBits.at(n) * 2 > n) r.pass = false;
    return r;
}

Result flatness(const Measured& m) {
    Result r;
    std::set<u64> ops;
    for (u32 n : {1u << 12, 1u << 18}) {
        const CompactIndex x = CompactIndex::build(generate("avoid231", n, kSeed));
        if (x.fallback()) r.fail("fallback at n=" + std::to_string(n));
        std::mt19937_64 rng(n);
        for (int q = 0; q < 2000; ++q) {
            OpCounter a, b;
            x.rank(1 + rng() % n, &a);
            x.unrank(1 + rng() % n, &b);
            ops.insert(a.ops);
            ops.insert(b.ops);
        }
    }
    std::string ell;
    bool visits = true;
    for (auto [n, l] : m.levels) {
        const u64 bound = 4 * (l + 1) + kVisitSlack;
        ell += " n=2^" + std::to_string(std::countr_zero(n)) + " l=" + std::to_string(l) + " max " +
               std::to_string(m.maxVisits.at(n)) + "/" + std::to_string(bound);
        if (m.maxVisits.at(n) > bound) visits = false;
    }
    const u64 l18 = m.levels.at(1u << 18);
    r.detail = "rank/unrank ops " + std::string(ops.size() == 1 ? "constant " + std::to_string(*ops.begin()) : "vary") +
               ", visits" + (visits ? " within 4(l+1)+C0:" : " exceed 4(l+1)+C0:") + ell + ", l<=6 at 2^18 " +
               (l18 <= 6 ? "holds" : "fails");
    if (ops.size() != 1 || !visits || l18 > 6) r.pass = false;
    return r;
}

u64 area(const QueryRect& r) { return u64(r.rowHi - r.rowLo + 1) * (r.colHi - r.colLo + 1); }

Result soundness() {
    Result r;
    u64 rects = 0, pieces = 0;
    for (const auto& fam : kFamilies) {
        for (u32 n : {1u << 8, 1u << 10}) {
            const Permutation t = generate(fam, n, kSeed);
            const GeoIndex g = GeoIndex::build(t);
            if (g.fallback()) r.fail("fallback at " + fam);
            std::mt19937_64 rng(n + 7);
            for (int q = 0; q < 1000; ++q) {
                const QueryRect R = random_rect(rng, n);
                std::vector<GeoPiece> ps;
                const u64 cnt = g.rect_count(R, nullptr, &ps);
                ++rects;
                pieces += ps.size();
                u64 sum = 0, total = 0;
                for (size_t i = 0; i < ps.size(); ++i) {
                    const QueryRect& p = ps[i].rect;
                    if (p.rowLo < R.rowLo || p.rowHi > R.rowHi || p.colLo < R.colLo || p.colHi > R.colHi)
                        r.fail("piece outside the query");
                    if (ps[i].count != oracle::rect_count(t, p)) r.fail("piece count differs from brute force");
                    for (size_t j = 0; j < i; ++j) {
                        const QueryRect& o = ps[j].rect;
                        if (p.rowLo <= o.rowHi && o.rowLo <= p.rowHi && p.colLo <= o.colHi && o.colLo <= p.colHi)
                            r.fail("overlapping pieces");
                    }
                    sum += area(p);
                    total += ps[i].count;
                }
                if (sum != area(R)) r.fail("pieces do not cover the query");
                if (total != cnt) r.fail("piece counts do not add up");
            }
        }
    }
    if (r.pass) r.detail = std::to_string(rects) + " rectangles, " + std::to_string(pieces) + " pieces";
    return r;
}

Result round_trip() {
    Result r;
    u64 answers = 0;
    for (const auto& fam : kFamilies) {
        for (u32 n : {40u, 1u << 14, 1u << 16}) {
            const Permutation t = generate(fam, n, kSeed + 1);
            const GeoIndex g = GeoIndex::build(t);
            const std::string bytes = g.serialize();
            const GeoIndex h = GeoIndex::deserialize(bytes);
            if (h.serialize() != bytes) r.fail("re-serialization differs for " + fam);
            const std::string cb = g.base().serialize();
            if (CompactIndex::deserialize(cb).serialize() != cb) r.fail("compact re-serialization differs for " + fam);
            std::mt19937_64 rng(n);
            for (int q = 0; q < 1000; ++q) {
                const u32 i = 1 + rng() % n;
                const QueryRect R = random_rect(rng, n);
                bool same = h.base().rank(i) == g.base().rank(i) && h.base().unrank(i) == g.base().unrank(i) &&
                            h.base().next_smaller(i) == g.base().next_smaller(i) &&
                            h.base().range_min(R.colLo, R.colHi) == g.base().range_min(R.colLo, R.colHi) &&
                            h.rect_count(R) == g.rect_count(R) && h.rect_min(R) == g.rect_min(R);
                answers += 6;
                if (!same) r.fail("post-load answer differs for " + fam);
            }
        }
    }
    if (r.pass) r.detail = std::to_string(answers) + " post-load answers identical, byte-identical re-serialization";
    return r;
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    Result c1, c2;
    Measured m;
    oracle_and_invariants(c1, c2, m);
    const Result c3 = payload(m), c4 = overhead(m), c5 = flatness(m), c6 = soundness(), c7 = round_trip();
    report(1, "oracle equivalence", c1);
    report(2, "decomposition invariants", c2);
    report(3, "payload compactness", c3);
    report(4, "sublinear overhead", c4);
    report(5, "query-cost flatness", c5);
    report(6, "piece-wise soundness", c6);
    report(7, "round-trip serialization", c7);
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("total %.1f s\n", sec);
    return c1.pass && c2.pass && c3.pass && c4.pass && c5.pass && c6.pass && c7.pass ? 0 : 1;
}
