#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pav/geo_index.hpp"

using namespace pav;
using json = nlohmann::ordered_json;

namespace {

// Failed validation or check: message on stderr, exit code 1.
struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure("cannot open " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()))) throw Failure("cannot write " + path);
}

std::vector<u32> parse_list(const std::string& s) {
    std::vector<u32> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        std::size_t used = 0;
        unsigned long long x = 0;
        try {
            x = std::stoull(tok, &used, 0);
        } catch (const std::exception&) {
            throw Failure("bad list element '" + tok + "'");
        }
        if (used != tok.size() || x == 0 || x > 0xffffffffull) throw Failure("bad list element '" + tok + "'");
        v.push_back(static_cast<u32>(x));
    }
    if (v.empty()) throw Failure("empty list");
    return v;
}

// An index file holds either a compact index or a rectangle index (which
// embeds its compact index).
struct LoadedIndex {
    CompactIndex compact;
    std::optional<GeoIndex> geo;
    const CompactIndex& base() const { return geo ? geo->base() : compact; }
};

LoadedIndex load_index(const std::string& path) {
    const std::string bytes = read_file(path);
    if (bytes.size() < 8) throw Failure(path + ": not an index file");
    u64 magic = 0;
    for (int i = 0; i < 8; ++i) magic |= u64(static_cast<unsigned char>(bytes[i])) << (8 * i);
    LoadedIndex x;
    try {
        if (magic == GeoIndex::kMagic)
            x.geo = GeoIndex::deserialize(bytes);
        else if (magic == CompactIndex::kMagic)
            x.compact = CompactIndex::deserialize(bytes);
        else
            throw Failure(path + ": not an index file");
    } catch (const std::runtime_error& e) {
        throw Failure(path + ": " + e.what());
    }
    return x;
}

u32 parse_u32(const std::string& s) {
    std::size_t used = 0;
    unsigned long long x = 0;
    try {
        x = std::stoull(s, &used);
    } catch (const std::exception&) {
        throw Failure("bad number '" + s + "'");
    }
    if (used != s.size() || x > 0xffffffffull) throw Failure("bad number '" + s + "'");
    return static_cast<u32>(x);
}

std::string answer(const LoadedIndex& x, const std::vector<std::string>& q) {
    if (q.empty()) throw Failure("empty query");
    const std::string& op = q[0];
    auto arg = [&](size_t i) { return parse_u32(q.at(i)); };
    auto want = [&](size_t k) {
        if (q.size() != k + 1) throw Failure(op + " takes " + std::to_string(k) + " arguments");
    };
    const CompactIndex& b = x.base();
    const u32 n = b.size();
    auto in_range = [&](u32 v) {
        if (v < 1 || v > n) throw Failure("argument out of range [1.." + std::to_string(n) + "]");
        return v;
    };
    auto opt = [](std::optional<u32> v) { return v ? std::to_string(*v) : std::string("none"); };
    if (op == "rank") {
        want(1);
        return std::to_string(b.rank(in_range(arg(1))));
    }
    if (op == "unrank") {
        want(1);
        return std::to_string(b.unrank(in_range(arg(1))));
    }
    if (op == "rangemin") {
        want(2);
        const u32 lo = in_range(arg(1)), hi = in_range(arg(2));
        if (lo > hi) throw Failure("empty range");
        return std::to_string(b.range_min(lo, hi));
    }
    if (op == "nextsmaller") {
        want(1);
        return opt(b.next_smaller(in_range(arg(1))));
    }
    if (op == "rect" || op == "rectmin") {
        want(4);
        if (!x.geo) throw Failure("rectangle queries need an index built with --geo");
        QueryRect r{arg(1), arg(2), arg(3), arg(4)};
        if (!r.valid(n)) throw Failure("invalid rectangle");
        return op == "rect" ? std::to_string(x.geo->rect_count(r)) : opt(x.geo->rect_min(r));
    }
    throw Failure("unknown query '" + op + "'");
}

std::vector<std::string> split_words(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> w;
    for (std::string s; in >> s;) w.push_back(s);
    return w;
}

json bits_json(const SpaceReport& r) {
    json comps = json::array();
    for (const auto& c : r.components)
        comps.push_back({{"name", c.name}, {"physicalBits", c.bits.physical}, {"modelBits", c.bits.model}, {"payload", c.payload}});
    return {{"totalModelBits", r.total().model},
            {"totalPhysicalBits", r.total().physical},
            {"payloadBits", r.payload_bits()},
            {"bitsPerElement", r.bits_per_element()},
            {"components", comps}};
}

json stats_json(const LoadedIndex& x) {
    const CompactIndex& b = x.base();
    json j;
    j["kind"] = x.geo ? "rectangle" : "compact";
    j["n"] = b.size();
    j["fallback"] = b.fallback();
    j["m1"] = b.m1();
    j["m2"] = b.m2();
    j["dMax"] = b.d_max();
    j["space"] = bits_json(b.space_report());
    if (!b.fallback()) {
        const char* tag[2] = {"columns", "rows"};
        json widths, tables;
        for (int a = 0; a < 2; ++a) {
            std::map<u32, u64> hist;
            const auto& S = b.side(a);
            for (u32 s = 1; s <= b.m2(); ++s) ++hist[S.fine(s, nullptr).entry->width()];
            json h = json::object(), t = json::object();
            for (auto [w, c] : hist) h[std::to_string(w)] = c;
            for (u32 w = 1; w <= S.table.max_width(); ++w)
                if (S.table.entries(w)) t[std::to_string(w)] = S.table.entries(w);
            widths[tag[a]] = h;
            tables[tag[a]] = {{"entriesByWidth", t}, {"precomputedBits", S.table.space().physical}};
        }
        j["fineWidthHistogram"] = widths;
        j["tables"] = tables;
    }
    if (x.geo) {
        json g;
        g["fallback"] = x.geo->fallback();
        g["levels"] = x.geo->levels();
        g["levelSizes"] = x.geo->level_sizes();
        g["space"] = bits_json(x.geo->space_report());
        g["denseModelBits"] = x.geo->dense_model_bits();
        j["rectangle"] = g;
    }
    return j;
}

json division_json(const Division& d) {
    json cells = json::array();
    for (u32 r = 0; r < d.rows(); ++r)
        for (u32 t = d.rowPtr[r]; t < d.rowPtr[r + 1]; ++t) cells.push_back({r, d.rowCells[t]});
    return {{"m", d.rows()}, {"rowStarts", d.rowStarts}, {"colStarts", d.colStarts}, {"nonZeroCells", cells}};
}

double median(std::vector<double> v) {
    if (v.empty()) return 0;
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
}

QueryRect random_rect(std::mt19937_64& rng, u32 n) {
    u32 a = 1 + rng() % n, b = 1 + rng() % n, c = 1 + rng() % n, d = 1 + rng() % n;
    if (a > b) std::swap(a, b);
    if (c > d) std::swap(c, d);
    return {a, b, c, d};
}

// Times fn over the queries one by one; nanoseconds.
template <class F>
double median_ns(u32 count, F fn) {
    std::vector<double> t;
    t.reserve(count);
    for (u32 q = 0; q < count; ++q) {
        auto t0 = std::chrono::steady_clock::now();
        fn(q);
        t.push_back(std::chrono::duration<double, std::nano>(std::chrono::steady_clock::now() - t0).count());
    }
    return median(std::move(t));
}

volatile u64 g_sink = 0;

json bench_one(const std::string& family, u32 n, u64 seed, u32 queries) {
    const Permutation t = generate(family, n, seed);
    auto t0 = std::chrono::steady_clock::now();
    const GeoIndex g = GeoIndex::build(t);
    const double buildSec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const CompactIndex& b = g.base();
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<u32> idx(queries);
    std::vector<QueryRect> rects(queries);
    for (u32 q = 0; q < queries; ++q) {
        idx[q] = 1 + rng() % n;
        rects[q] = random_rect(rng, n);
    }
    std::set<u64> rankOps, unrankOps;
    u64 maxVisits = 0;
    for (u32 q = 0; q < std::min<u32>(queries, 1000); ++q) {
        OpCounter a, c;
        b.rank(idx[q], &a);
        b.unrank(idx[q], &c);
        rankOps.insert(a.ops);
        unrankOps.insert(c.ops);
        LevelTrace tr;
        g.rect_count(rects[q], &tr);
        maxVisits = std::max(maxVisits, tr.nodeVisits);
    }
    auto ops = [](const std::set<u64>& s) { return s.size() == 1 ? json(*s.begin()) : json(std::vector<u64>(s.begin(), s.end())); };
    json lat;
    lat["rank"] = median_ns(queries, [&](u32 q) { g_sink = g_sink + b.rank(idx[q]); });
    lat["unrank"] = median_ns(queries, [&](u32 q) { g_sink = g_sink + b.unrank(idx[q]); });
    lat["rangemin"] = median_ns(queries, [&](u32 q) { g_sink = g_sink + b.range_min(rects[q].colLo, rects[q].colHi); });
    lat["nextsmaller"] = median_ns(queries, [&](u32 q) { g_sink = g_sink + b.next_smaller(idx[q]).value_or(0); });
    lat["rect"] = median_ns(queries, [&](u32 q) { g_sink = g_sink + g.rect_count(rects[q]); });
    lat["rectmin"] = median_ns(std::min<u32>(queries, 2000), [&](u32 q) { g_sink = g_sink + g.rect_min(rects[q]).value_or(0); });
    return {{"n", n},
            {"buildSeconds", buildSec},
            {"bitsPerElement", b.space_report().bits_per_element()},
            {"payloadPerElement", b.space_report().payload_per_element()},
            {"levels", g.levels()},
            {"rankOps", ops(rankOps)},
            {"unrankOps", ops(unrankOps)},
            {"maxRectVisits", maxVisits},
            {"medianNs", lat}};
}

// Oracle comparison over a bounded corpus; returns the number of mismatches.
u64 selftest(u64 seed, u32 maxN, std::ostream& log) {
    u64 bad = 0;
    std::mt19937_64 rng(seed);
    for (std::string fam : {"identity", "reverse", "uniform", "avoid231", "separable", "interleavedRuns(4)"}) {
        for (u32 n : {16u, 300u, 2048u, 1u << 13}) {
            if (n > maxN) continue;
            const Permutation t = generate(fam, n, rng());
            const GeoIndex g = GeoIndex::deserialize(GeoIndex::build(t).serialize());
            const CompactIndex& b = g.base();
            u64 miss = 0;
            for (u32 i = 1; i <= n; ++i) {
                miss += b.rank(i) != t.at(i);
                miss += b.unrank(t.at(i)) != i;
                miss += b.next_smaller(i) != oracle::next_smaller(t, i);
            }
            for (int q = 0; q < 500; ++q) {
                QueryRect r = random_rect(rng, n);
                miss += b.range_min(r.colLo, r.colHi) != oracle::range_min(t, r.colLo, r.colHi);
                miss += g.rect_count(r) != oracle::rect_count(t, r);
                if (q % 5 == 0) miss += g.rect_min(r) != oracle::rect_min(t, r);
            }
            if (auto sizes = level_sizes(n)) {
                InvariantReport rep = check_hierarchy(build_hierarchy(t, {sizes->m1, sizes->m2}), t);
                miss += rep.ok ? 0 : 1;
            }
            log << (miss ? "FAIL " : "ok   ") << fam << " n=" << n << " mismatches=" << miss << '\n';
            bad += miss;
        }
    }
    return bad;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compact indexes for permutations from restricted classes"};
    app.require_subcommand(1);
    u64 seed = 1;
    app.add_option("--seed", seed, "seed for generated inputs and random queries");

    std::string input, output, index;
    bool geo = false;
    auto* build = app.add_subcommand("build", "build an index from a permutation file");
    build->add_option("input", input, "permutation file")->required()->check(CLI::ExistingFile);
    build->add_option("-o,--output", output, "index file")->required();
    build->add_flag("--geo", geo, "also build the rectangle index");

    std::vector<std::string> query;
    std::string batch;
    auto* qry = app.add_subcommand("query", "answer queries against an index file");
    qry->add_option("index", index, "index file")->required()->check(CLI::ExistingFile);
    qry->add_option("query", query, "rank i | unrank v | rangemin a b | nextsmaller i | rect r1 r2 c1 c2 | rectmin r1 r2 c1 c2");
    qry->add_option("--batch", batch, "file with one query per line")->check(CLI::ExistingFile);

    auto* stats = app.add_subcommand("stats", "space report and decomposition statistics as JSON");
    stats->add_option("index", index, "index file")->required()->check(CLI::ExistingFile);

    std::string sizes;
    auto* dec = app.add_subcommand("decompose", "run the decomposition only and check its invariants");
    dec->add_option("input", input, "permutation file")->required()->check(CLI::ExistingFile);
    dec->add_option("--sizes", sizes, "comma-separated ascending level sizes")->required();

    std::string family = "avoid231", format = "text";
    u32 queries = 10000;
    auto* bench = app.add_subcommand("bench", "build and time query sweeps across sizes");
    bench->add_option("--family", family, "generator family");
    bench->add_option("--sizes", sizes, "comma-separated n values")->required();
    bench->add_option("--queries", queries, "queries per operation")->check(CLI::Range(1u, 10000000u));
    bench->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));

    u32 maxN = 1u << 13;
    auto* self = app.add_subcommand("selftest", "compare every query against the brute-force oracle");
    self->add_option("--max-n", maxN, "largest n in the corpus");

    u32 genN = 0;
    auto* gen = app.add_subcommand("generate", "write a generated permutation");
    gen->add_option("--family", family, "generator family")->required();
    gen->add_option("-n", genN, "size")->required()->check(CLI::Range(1u, 1u << 30));
    gen->add_option("-o,--output", output, "permutation file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*build) {
            const Permutation t = load_permutation(input);
            write_file(output, geo ? GeoIndex::build(t).serialize() : CompactIndex::build(t).serialize());
        } else if (*qry) {
            if (query.empty() == batch.empty()) throw Failure("give either one query or --batch");
            const LoadedIndex x = load_index(index);
            if (!batch.empty()) {
                std::ifstream in(batch);
                std::string line;
                u64 lineNo = 0;
                while (std::getline(in, line)) {
                    ++lineNo;
                    auto words = split_words(line);
                    if (words.empty() || words[0][0] == '#') continue;
                    try {
                        std::cout << answer(x, words) << '\n';
                    } catch (const Failure& e) {
                        throw Failure("line " + std::to_string(lineNo) + ": " + e.what());
                    }
                }
            } else {
                std::cout << answer(x, query) << '\n';
            }
        } else if (*stats) {
            std::cout << stats_json(load_index(index)).dump(2) << '\n';
        } else if (*dec) {
            const Permutation t = load_permutation(input);
            const std::vector<u32> m = parse_list(sizes);
            for (size_t i = 0; i < m.size(); ++i)
                if (m[i] > t.size() || (i && m[i] <= m[i - 1])) throw Failure("sizes must ascend within [1..n]");
            const Hierarchy h = build_hierarchy(t, m);
            const InvariantReport rep = check_hierarchy(h, t);
            json divs = json::array();
            for (const auto& d : h.divisions) divs.push_back(division_json(d));
            json out = {{"n", h.n},
                        {"sizes", h.m},
                        {"dMax", h.dMax},
                        {"divisions", divs},
                        {"stats", {{"merges", h.stats.merges}, {"doublings", h.stats.doublings}, {"queuePushes", h.stats.queuePushes}}},
                        {"check", {{"ok", rep.ok}, {"violations", rep.violations}}}};
            std::cout << out.dump(2) << '\n';
            if (!rep.ok) return 1;
        } else if (*bench) {
            json rows = json::array();
            for (u32 n : parse_list(sizes)) rows.push_back(bench_one(family, n, seed, queries));
            if (format == "json") {
                std::cout << json{{"family", family}, {"seed", seed}, {"queries", queries}, {"runs", rows}}.dump(2) << '\n';
            } else {
                std::cout << "n\tbuild_s\tbits/el\tl\trankOps\tunrankOps\tmaxVisits\trank_ns\tunrank_ns\trangemin_ns\tnextsmaller_ns\trect_ns\trectmin_ns\n";
                for (const auto& r : rows) {
                    const auto& l = r["medianNs"];
                    std::cout << r["n"] << '\t' << r["buildSeconds"].get<double>() << '\t' << r["bitsPerElement"].get<double>() << '\t'
                              << r["levels"] << '\t' << r["rankOps"].dump() << '\t' << r["unrankOps"].dump() << '\t'
                              << r["maxRectVisits"] << '\t' << l["rank"] << '\t' << l["unrank"] << '\t' << l["rangemin"]
                              << '\t' << l["nextsmaller"] << '\t' << l["rect"] << '\t' << l["rectmin"] << '\n';
                }
            }
        } else if (*self) {
            const u64 bad = selftest(seed, maxN, std::cout);
            std::cout << (bad ? "selftest FAILED" : "selftest passed") << '\n';
            if (bad) return 1;
        } else if (*gen) {
            save_permutation(output, generate(family, genN, seed));
        }
    } catch (const Failure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
