#include "pav/permutation.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

namespace pav {

Permutation::Permutation(std::vector<u32> values) : v_(std::move(values)) {
    if (v_.empty() || !is_bijection(v_)) throw std::invalid_argument("not a permutation of [1..n]");
}

Permutation Permutation::identity(u32 n) {
    std::vector<u32> v(n);
    std::iota(v.begin(), v.end(), 1u);
    return Permutation(std::move(v));
}

bool Permutation::is_bijection(const std::vector<u32>& values) {
    std::vector<char> seen(values.size() + 1, 0);
    for (u32 x : values) {
        if (x == 0 || x > values.size() || seen[x]) return false;
        seen[x] = 1;
    }
    return true;
}

Permutation Permutation::inverse() const {
    std::vector<u32> w(v_.size());
    for (u32 i = 0; i < v_.size(); ++i) w[v_[i] - 1] = i + 1;
    return Permutation(std::move(w));
}

Permutation Permutation::reversed() const {
    std::vector<u32> w(v_.rbegin(), v_.rend());
    return Permutation(std::move(w));
}

Pattern make_pattern(std::vector<u32> values) {
    if (values.empty() || !Permutation::is_bijection(values))
        throw std::invalid_argument("pattern is not a permutation of [1..k]");
    return Pattern{std::move(values)};
}

namespace {

// Successor table: succ[p * (n + 2) + lo] = smallest value > lo among
// positions >= p (0-based), or n + 1. Only built for small n.
struct SuffixSucc {
    u32 n = 0;
    std::vector<u32> t;
    explicit SuffixSucc(const std::vector<u32>& tau) : n(static_cast<u32>(tau.size())) {
        t.assign(static_cast<size_t>(n + 1) * (n + 2), n + 1);
        for (u32 p = n; p-- > 0;) {
            u32* row = &t[static_cast<size_t>(p) * (n + 2)];
            const u32* nxt = &t[static_cast<size_t>(p + 1) * (n + 2)];
            std::copy(nxt, nxt + n + 2, row);
            u32 x = tau[p];
            for (u32 lo = 0; lo < x; ++lo) row[lo] = std::min(row[lo], x);
        }
    }
    bool any(u32 from, u32 lo, u32 hi) const {  // value in (lo, hi) at position >= from
        if (from >= n) return false;
        return t[static_cast<size_t>(from) * (n + 2) + lo] < hi;
    }
};

struct Matcher {
    const std::vector<u32>& tau;
    const std::vector<u32>& pi;
    u32 n, k;
    std::vector<u32> chosen;  // values chosen for pattern positions 0..depth-1
    const SuffixSucc* succ = nullptr;

    // Value window allowed for pattern position d given already chosen values.
    void window(u32 d, u32& lo, u32& hi) const {
        lo = 0;
        hi = n + 1;
        for (u32 e = 0; e < d; ++e) {
            if (pi[e] < pi[d])
                lo = std::max(lo, chosen[e]);
            else
                hi = std::min(hi, chosen[e]);
        }
    }

    bool rec(u32 d, u32 from) {
        u32 lo, hi;
        window(d, lo, hi);
        if (lo + 1 >= hi) return false;
        if (n - from < k - d) return false;
        if (d + 1 == k) {
            if (succ) return succ->any(from, lo, hi);
            for (u32 p = from; p < n; ++p)
                if (tau[p] > lo && tau[p] < hi) return true;
            return false;
        }
        for (u32 p = from; p + (k - d) <= n; ++p) {
            u32 x = tau[p];
            if (x <= lo || x >= hi) continue;
            chosen[d] = x;
            if (rec(d + 1, p + 1)) return true;
        }
        return false;
    }
};

bool monotone(const std::vector<u32>& pi, bool increasing) {
    for (size_t i = 1; i < pi.size(); ++i)
        if ((pi[i] > pi[i - 1]) != increasing) return false;
    return true;
}

// Length of the longest strictly increasing (or decreasing) subsequence.
u32 longest_monotone(const std::vector<u32>& tau, bool increasing) {
    std::vector<u32> tails;
    for (u32 x : tau) {
        u32 key = increasing ? x : static_cast<u32>(tau.size()) + 1 - x;
        auto it = std::lower_bound(tails.begin(), tails.end(), key);
        if (it == tails.end())
            tails.push_back(key);
        else
            *it = key;
    }
    return static_cast<u32>(tails.size());
}

}  // namespace

bool contains(const std::vector<u32>& tau, const Pattern& pi) {
    const u32 n = static_cast<u32>(tau.size()), k = pi.size();
    if (k == 0) return true;
    if (k > n) return false;
    if (k == 1) return n >= 1;
    if (monotone(pi.values, true)) return longest_monotone(tau, true) >= k;
    if (monotone(pi.values, false)) return longest_monotone(tau, false) >= k;
    // Values of tau may be any distinct integers; compress to [1..n].
    std::vector<u32> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](u32 a, u32 b) { return tau[a] < tau[b]; });
    std::vector<u32> t(n);
    for (u32 r = 0; r < n; ++r) t[order[r]] = r + 1;
    Matcher m{t, pi.values, n, k, std::vector<u32>(k, 0)};
    std::optional<SuffixSucc> succ;
    if (n <= 2500) {
        succ.emplace(t);
        m.succ = &*succ;
    }
    return m.rec(0, 0);
}

GeneratorSpec parse_family(const std::string& id) {
    if (id == "identity") return {Family::identity};
    if (id == "reverse") return {Family::reverse};
    if (id == "uniform" || id == "uniformRandom") return {Family::uniformRandom};
    if (id == "avoid231") return {Family::avoid231};
    if (id == "separable") return {Family::separable};
    auto parse_k = [&](const std::string& s) {
        size_t used = 0;
        unsigned long k = std::stoul(s, &used);
        if (used != s.size() || k < 1 || k > 64) throw std::invalid_argument("bad run count: " + id);
        return static_cast<u32>(k);
    };
    const std::string p1 = "interleavedRuns(", p2 = "runs:";
    if (id.rfind(p1, 0) == 0 && id.back() == ')')
        return {Family::interleavedRuns, parse_k(id.substr(p1.size(), id.size() - p1.size() - 1))};
    if (id.rfind(p2, 0) == 0) return {Family::interleavedRuns, parse_k(id.substr(p2.size()))};
    throw std::invalid_argument("unknown family: " + id);
}

std::string family_name(const GeneratorSpec& spec) {
    switch (spec.family) {
        case Family::identity: return "identity";
        case Family::reverse: return "reverse";
        case Family::uniformRandom: return "uniform";
        case Family::avoid231: return "avoid231";
        case Family::separable: return "separable";
        case Family::interleavedRuns: return "interleavedRuns(" + std::to_string(spec.runs) + ")";
    }
    return "?";
}

namespace {

// Remy's algorithm: uniform binary tree with n internal nodes. Internal
// nodes get in-order labels; the preorder sequence of labels avoids 231.
std::vector<u32> gen_avoid231(u32 n, std::mt19937_64& rng) {
    // Nodes 0..2n; children[2x], children[2x+1]; -1 means none.
    const u32 total = 2 * n + 1;
    std::vector<int> left(total, -1), right(total, -1), parent(total, -1);
    std::vector<char> internal(total, 0);
    u32 used = 1;
    int root = 0;
    for (u32 step = 0; step < n; ++step) {
        std::uniform_int_distribution<u32> pick(0, used - 1);
        int x = static_cast<int>(pick(rng));
        bool leafLeft = rng() & 1;
        int v = static_cast<int>(used++), leaf = static_cast<int>(used++);
        internal[v] = 1;
        int p = parent[x];
        if (p < 0)
            root = v;
        else if (left[p] == x)
            left[p] = v;
        else
            right[p] = v;
        parent[v] = p;
        if (leafLeft) {
            left[v] = leaf;
            right[v] = x;
        } else {
            left[v] = x;
            right[v] = leaf;
        }
        parent[x] = v;
        parent[leaf] = v;
    }
    // In-order labels for internal nodes.
    std::vector<u32> label(total, 0);
    u32 next = 1;
    std::vector<int> st;
    int cur = root;
    while (cur >= 0 || !st.empty()) {
        while (cur >= 0) {
            st.push_back(cur);
            cur = left[cur];
        }
        cur = st.back();
        st.pop_back();
        if (internal[cur]) label[cur] = next++;
        cur = right[cur];
    }
    std::vector<u32> out;
    out.reserve(n);
    st.assign(1, root);
    while (!st.empty()) {
        int x = st.back();
        st.pop_back();
        if (!internal[x]) continue;
        out.push_back(label[x]);
        st.push_back(right[x]);
        st.push_back(left[x]);
    }
    return out;
}

// Random signed binary decomposition tree; every block is a direct or a
// skew sum of two smaller blocks.
std::vector<u32> gen_separable(u32 n, std::mt19937_64& rng) {
    std::vector<u32> out(n);
    struct Block { u32 pos, val, size; };
    std::vector<Block> st{{0, 1, n}};
    while (!st.empty()) {
        Block b = st.back();
        st.pop_back();
        if (b.size == 1) {
            out[b.pos] = b.val;
            continue;
        }
        std::uniform_int_distribution<u32> cut(1, b.size - 1);
        u32 k = cut(rng);
        bool skew = rng() & 1;
        if (!skew) {
            st.push_back({b.pos, b.val, k});
            st.push_back({b.pos + k, b.val + k, b.size - k});
        } else {
            st.push_back({b.pos, b.val + (b.size - k), k});
            st.push_back({b.pos + k, b.val, b.size - k});
        }
    }
    return out;
}

// Union of k increasing runs: positions and values are each split at random
// into k groups of equal sizes, and group g maps its positions to its
// values in increasing order. Avoids the decreasing pattern of length k+1.
std::vector<u32> gen_runs(u32 n, u32 k, std::mt19937_64& rng) {
    std::uniform_int_distribution<u32> g(0, k - 1);
    std::vector<u32> posGroup(n), valGroup(n);
    for (auto& x : posGroup) x = g(rng);
    valGroup = posGroup;
    std::shuffle(valGroup.begin(), valGroup.end(), rng);
    std::vector<std::vector<u32>> vals(k);
    for (u32 v = 0; v < n; ++v) vals[valGroup[v]].push_back(v + 1);
    std::vector<u32> cursor(k, 0), out(n);
    for (u32 i = 0; i < n; ++i) out[i] = vals[posGroup[i]][cursor[posGroup[i]]++];
    return out;
}

}  // namespace

Permutation generate(const GeneratorSpec& spec, u32 n, u64 seed) {
    if (n == 0) throw std::invalid_argument("n must be >= 1");
    std::mt19937_64 rng(seed);
    switch (spec.family) {
        case Family::identity: return Permutation::identity(n);
        case Family::reverse: return Permutation::identity(n).reversed();
        case Family::uniformRandom: {
            std::vector<u32> v(n);
            std::iota(v.begin(), v.end(), 1u);
            std::shuffle(v.begin(), v.end(), rng);
            return Permutation(std::move(v));
        }
        case Family::avoid231: return Permutation(gen_avoid231(n, rng));
        case Family::separable: return Permutation(gen_separable(n, rng));
        case Family::interleavedRuns: return Permutation(gen_runs(n, spec.runs, rng));
    }
    throw std::invalid_argument("unknown family");
}

Permutation generate(const std::string& family, u32 n, u64 seed) {
    return generate(parse_family(family), n, seed);
}

std::vector<Pattern> avoided_patterns(const GeneratorSpec& spec) {
    switch (spec.family) {
        case Family::avoid231: return {make_pattern({2, 3, 1})};
        case Family::separable: return {make_pattern({2, 4, 1, 3}), make_pattern({3, 1, 4, 2})};
        case Family::interleavedRuns: {
            std::vector<u32> d(spec.runs + 1);
            for (u32 i = 0; i <= spec.runs; ++i) d[i] = spec.runs + 1 - i;
            return {make_pattern(d)};
        }
        case Family::identity: return {make_pattern({2, 1})};
        case Family::reverse: return {make_pattern({1, 2})};
        default: return {};
    }
}

namespace oracle {

static void check_index(const Permutation& t, u32 i) {
    if (i < 1 || i > t.size()) throw std::out_of_range("index out of range");
}

u32 rank(const Permutation& t, u32 i) {
    check_index(t, i);
    return t.at(i);
}

u32 unrank(const Permutation& t, u32 v) {
    check_index(t, v);
    for (u32 i = 1; i <= t.size(); ++i)
        if (t.at(i) == v) return i;
    throw std::logic_error("value not found");
}

u32 range_min(const Permutation& t, u32 a, u32 b) {
    check_index(t, a);
    check_index(t, b);
    if (a > b) throw std::out_of_range("empty range");
    u32 best = a;
    for (u32 i = a + 1; i <= b; ++i)
        if (t.at(i) < t.at(best)) best = i;
    return best;
}

std::optional<u32> next_smaller(const Permutation& t, u32 i) {
    check_index(t, i);
    for (u32 j = i + 1; j <= t.size(); ++j)
        if (t.at(j) < t.at(i)) return j;
    return std::nullopt;
}

u64 rect_count(const Permutation& t, const QueryRect& r) {
    if (!r.valid(t.size())) throw std::out_of_range("invalid rectangle");
    const u32* v = t.values().data();
    u64 c = 0;
    for (u32 i = r.colLo - 1; i < r.colHi; ++i) c += (v[i] >= r.rowLo) & (v[i] <= r.rowHi);
    return c;
}

std::optional<u32> rect_min(const Permutation& t, const QueryRect& r) {
    if (!r.valid(t.size())) throw std::out_of_range("invalid rectangle");
    const u32* v = t.values().data();
    u32 best = UINT32_MAX;
    for (u32 i = r.colLo - 1; i < r.colHi; ++i)
        if (v[i] >= r.rowLo && v[i] <= r.rowHi && v[i] < best) best = v[i];
    if (best == UINT32_MAX) return std::nullopt;
    return best;
}

}  // namespace oracle

Permutation read_permutation(std::istream& in) {
    long long n = 0;
    if (!(in >> n) || n < 1 || n > (1ll << 31)) throw std::runtime_error("bad permutation header");
    std::vector<u32> v(static_cast<size_t>(n));
    for (auto& x : v) {
        long long y;
        if (!(in >> y) || y < 1 || y > n) throw std::runtime_error("bad permutation entry");
        x = static_cast<u32>(y);
    }
    if (!Permutation::is_bijection(v)) throw std::runtime_error("input is not a bijection on [1..n]");
    return Permutation(std::move(v));
}

void write_permutation(std::ostream& out, const Permutation& t) {
    out << t.size() << '\n';
    for (u32 i = 1; i <= t.size(); ++i) out << t.at(i) << (i == t.size() ? '\n' : ' ');
}

Permutation load_permutation(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_permutation(in);
}

void save_permutation(const std::string& path, const Permutation& t) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    write_permutation(out, t);
}

}  // namespace pav
