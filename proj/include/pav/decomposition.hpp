#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <string>
#include <vector>

#include "pav/permutation.hpp"
#include "pav/serialize.hpp"

namespace pav {

// A division of the n x n matrix into contiguous row and column intervals.
// Row/column indices are 0-based ranks; starts are 1-based coordinates with
// a trailing sentinel n+1. Non-zero cells are kept in both orientations.
struct Division {
    u32 n = 0;
    std::vector<u32> rowStarts, colStarts;
    std::vector<u32> rowPtr, rowCells;  // row r: columns rowCells[rowPtr[r]..rowPtr[r+1]) ascending
    std::vector<u32> colPtr, colCells;  // column c: rows ascending

    u32 rows() const { return static_cast<u32>(rowStarts.size()) - 1; }
    u32 cols() const { return static_cast<u32>(colStarts.size()) - 1; }
    u32 row_size(u32 r) const { return rowStarts[r + 1] - rowStarts[r]; }
    u32 col_size(u32 c) const { return colStarts[c + 1] - colStarts[c]; }
    u32 row_cells(u32 r) const { return rowPtr[r + 1] - rowPtr[r]; }
    u32 col_cells(u32 c) const { return colPtr[c + 1] - colPtr[c]; }
    u32 row_of(u32 coord) const;  // interval containing 1-based coordinate
    u32 col_of(u32 coord) const;
    u32 max_cells() const;

    Division transposed() const;
    bool operator==(const Division& o) const;

    void save(Writer& w) const;
    void load(Reader& r);
};

// Builds cell lists for given interval starts from scratch.
Division make_division(const Permutation& tau, std::vector<u32> rowStarts, std::vector<u32> colStarts);

struct DecompositionStats {
    u64 merges = 0;
    u64 doublings = 0;
    u64 queuePushes = 0;
    u64 queueCalls = 0;
    u64 cellOps = 0;
    std::vector<u32> dTrace;  // value of d after every doubling
};

// Output of the balanced decomposition: divisions[k] has exactly m[k] rows
// and columns, m ascending, divisions[k] coarsens divisions[k+1].
struct Hierarchy {
    u32 n = 0;
    std::vector<u32> m;
    std::vector<Division> divisions;
    u32 dMax = 0;
    u32 delta = 20;
    DecompositionStats stats;

    Hierarchy transposed() const;
    bool operator==(const Hierarchy& o) const {
        return n == o.n && m == o.m && divisions == o.divisions && dMax == o.dMax;
    }
};

enum class Side : int { row = 0, col = 1 };

// The merge-queue algorithm on linked Strip/Cell records. The public step
// methods exist so tests can drive individual merges; run() executes the
// whole algorithm.
class DecompositionEngine {
public:
    static constexpr u32 kInf = std::numeric_limits<u32>::max();
    static constexpr u32 kDelta = 20;

    struct Strip {
        int prev = -1, next = -1;
        u32 id = 0;
        u32 cells = 0;
        int firstCell = -1;
        u32 size = 1;
        bool inQueue = false;
        bool alive = true;
        u32 density = 1;
        u32 cellsWithNext = kInf;
    };
    struct Cell {
        // rowPrev/rowNext: left/right neighbours in the same row;
        // colPrev/colNext: below/above neighbours in the same column.
        int rowPrev = -1, rowNext = -1;
        int colPrev = -1, colNext = -1;
        int row = -1, col = -1;
    };

    DecompositionEngine(const Permutation& tau, std::vector<u32> m);

    Hierarchy run();

    // --- step-level interface
    u32 n() const { return n_; }
    u32 d() const { return d_; }
    u32 count(Side s) const { return count_[int(s)]; }
    int head(Side s) const { return head_[int(s)]; }
    const Strip& strip(Side s, int id) const { return strips_[int(s)][id]; }
    bool queue_empty(Side s) const { return queue_[int(s)].empty(); }
    int pop(Side s);
    bool enqueue_if_mergeable(Side s, int t);
    void double_d();
    void bucket_expire(u32 i);
    void phase_boundary();
    void merge(Side s, int first);  // merges first with first.next
    bool tall(Side s, int t) const;
    bool dense(Side s, int t) const;
    Division current_division() const;
    bool verify_consistency(std::string* why = nullptr) const;
    const DecompositionStats& stats() const { return stats_; }

private:
    int& along_next(Side s, Cell& c) { return s == Side::row ? c.rowNext : c.colNext; }
    int& along_prev(Side s, Cell& c) { return s == Side::row ? c.rowPrev : c.colPrev; }
    int& cross_next(Side s, Cell& c) { return s == Side::row ? c.colNext : c.rowNext; }
    int& cross_prev(Side s, Cell& c) { return s == Side::row ? c.colPrev : c.rowPrev; }
    int& owner(Side s, Cell& c) { return s == Side::row ? c.row : c.col; }
    int& cross_owner(Side s, Cell& c) { return s == Side::row ? c.col : c.row; }
    u32 union_count(Side s, int a, int b);
    void requeue_all();

    u32 n_;
    std::vector<u32> mExt_;  // 1, m_1..m_l, n
    u32 j_;                  // current phase index
    u32 d_ = 1;
    std::vector<Strip> strips_[2];
    std::vector<Cell> cells_;
    int head_[2] = {0, 0};
    u32 count_[2];
    std::deque<int> queue_[2];
    std::vector<std::vector<std::pair<int, int>>> bucket_;
    std::vector<u32> stamp_[2];  // scratch marks on cross strips during a merge
    std::vector<unsigned char> flags_[2];
    std::vector<int> affected_;
    u32 stampGen_ = 0;
    std::vector<Division> snapshots_;
    DecompositionStats stats_;
    std::vector<u32> tau_;
};

Hierarchy build_hierarchy(const Permutation& tau, const std::vector<u32>& m);

struct InvariantReport {
    bool ok = true;
    std::vector<std::string> violations;
    void fail(std::string s) {
        ok = false;
        if (violations.size() < 50) violations.push_back(std::move(s));
    }
};

// Independent checker: recomputes cells from tau and verifies the balanced
// decomposition properties with constant 2*delta = 40 and the dMax bound.
InvariantReport check_hierarchy(const Hierarchy& h, const Permutation& tau);

}  // namespace pav
