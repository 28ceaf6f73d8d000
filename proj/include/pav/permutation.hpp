#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pav {

using u32 = std::uint32_t;
using u64 = std::uint64_t;

// One-line notation, 1-based semantics: at(i) = tau_i for i in [1..n].
// The matrix M_tau has its point of column i in row tau_i; rows are
// numbered top to bottom, so "above" means a smaller value.
class Permutation {
public:
    Permutation() = default;
    explicit Permutation(std::vector<u32> values);

    static Permutation identity(u32 n);

    u32 size() const { return static_cast<u32>(v_.size()); }
    u32 at(u32 i) const { return v_[i - 1]; }
    const std::vector<u32>& values() const { return v_; }

    Permutation inverse() const;
    Permutation reversed() const;

    bool operator==(const Permutation& o) const { return v_ == o.v_; }

    static bool is_bijection(const std::vector<u32>& values);

private:
    std::vector<u32> v_;
};

// A pattern is a permutation of [1..k]; kept separate for readability of
// the containment API.
struct Pattern {
    std::vector<u32> values;
    u32 size() const { return static_cast<u32>(values.size()); }
};

Pattern make_pattern(std::vector<u32> values);

// Inclusive bounds; rows are values, columns are indices.
struct QueryRect {
    u32 rowLo = 1, rowHi = 1, colLo = 1, colHi = 1;
    bool valid(u32 n) const {
        return 1 <= rowLo && rowLo <= rowHi && rowHi <= n && 1 <= colLo && colLo <= colHi &&
               colHi <= n;
    }
};

// Exact containment test by pruned backtracking. Test-path only.
bool contains(const std::vector<u32>& tau, const Pattern& pi);
inline bool contains(const Permutation& tau, const Pattern& pi) {
    return contains(tau.values(), pi);
}

enum class Family { identity, reverse, uniformRandom, avoid231, separable, interleavedRuns };

struct GeneratorSpec {
    Family family = Family::identity;
    u32 runs = 2;  // only for interleavedRuns
};

// Parses "identity", "reverse", "uniform", "avoid231", "separable",
// "interleavedRuns(k)" / "runs:k". Throws std::invalid_argument otherwise.
GeneratorSpec parse_family(const std::string& id);
std::string family_name(const GeneratorSpec& spec);

Permutation generate(const GeneratorSpec& spec, u32 n, u64 seed);
Permutation generate(const std::string& family, u32 n, u64 seed);

// Patterns a family provably avoids (empty for identity/uniform/reverse).
std::vector<Pattern> avoided_patterns(const GeneratorSpec& spec);

namespace oracle {
u32 rank(const Permutation& t, u32 i);
u32 unrank(const Permutation& t, u32 v);
u32 range_min(const Permutation& t, u32 a, u32 b);
std::optional<u32> next_smaller(const Permutation& t, u32 i);
u64 rect_count(const Permutation& t, const QueryRect& r);
std::optional<u32> rect_min(const Permutation& t, const QueryRect& r);
}  // namespace oracle

Permutation read_permutation(std::istream& in);
void write_permutation(std::ostream& out, const Permutation& t);
Permutation load_permutation(const std::string& path);
void save_permutation(const std::string& path, const Permutation& t);

}  // namespace pav
