#pragma once

#include "policy_zoom/env.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace pz {

/// A dyadic cube of side 2^-level intersected with the state box,
/// identified by its integer anchor at that level.
struct Cell {
    int level = 0;
    std::vector<std::int64_t> anchor;

    bool operator==(const Cell& o) const { return level == o.level && anchor == o.anchor; }
    bool operator<(const Cell& o) const {
        if (level != o.level) return level < o.level;
        return anchor < o.anchor;
    }
};

struct PartitionConstants {
    double conc_scale = 1.0;  // c_d^b
    double horizon = 1.0;     // T
    double delta = 0.1;
    /// Precomputed c_d^b * log(T / delta).
    double scale_log() const;
};

/// Per-policy adaptive partition of the state box with visit counters.
/// Leaves split when their (lineage-inherited) count reaches N_max; the
/// children inherit the parent's count, so they start exactly at N_min.
class PartitionTree {
  public:
    PartitionTree(std::vector<Interval> state_bounds, PartitionConstants constants);

    int state_dim() const { return static_cast<int>(bounds_.size()); }
    const std::vector<Interval>& state_bounds() const { return bounds_; }
    const PartitionConstants& constants() const { return constants_; }

    /// Euclidean diameter assigned to a cell: sqrt(d_S) * 2^-level.
    double cell_diameter(const Cell& c) const;
    /// Representative point: cube center, clamped into the state box.
    StateVec representative(const Cell& c) const;
    /// Volume of the dyadic cube intersected with the state box.
    double cell_volume(const Cell& c) const;

    /// (N_min, N_max) activation thresholds of a cell.
    std::pair<double, double> thresholds(const Cell& c) const;

    /// The unique active leaf containing s; half-open along each axis with
    /// the upper boundary of the box closed.
    Cell locate(const StateVec& s) const;

    struct SplitEvent {
        Cell parent;
        std::vector<Cell> children;
    };

    /// Increments the count of the containing leaf; splits it when the
    /// count reaches N_max (children inherit the parent's final count).
    std::optional<SplitEvent> record_visit(const StateVec& s);

    std::int64_t count(const Cell& leaf) const;
    int max_level() const { return max_level_; }
    int initial_level() const { return initial_level_; }
    std::size_t leaf_count() const { return leaves_.size(); }
    std::vector<Cell> leaves() const;

    std::int64_t total_visits() const { return total_visits_; }
    /// Counts credited to leaves by inheritance rather than direct visits.
    std::int64_t inherited_offset() const { return inherited_offset_; }

    /// Representative points of all level-max_level cells tiling the box
    /// (a uniform fine grid, generally larger than the leaf set).
    std::vector<Cell> min_level_cells() const;
    std::vector<StateVec> min_level_grid() const;

    /// All cells of the given level tiling the state box, anchor-ordered.
    std::vector<Cell> level_tiling(int level) const;
    std::size_t tiling_size(int level) const;
    /// Index of a cell within level_tiling(cell.level).
    std::size_t tiling_index(const Cell& c) const;
    /// The level-`level` cell containing s (same boundary conventions as locate).
    Cell cell_at(const StateVec& s, int level) const;

  private:
    std::vector<Interval> bounds_;
    PartitionConstants constants_;
    int initial_level_ = 0;
    int max_level_ = 0;
    std::int64_t total_visits_ = 0;
    std::int64_t inherited_offset_ = 0;
    std::map<Cell, std::int64_t> leaves_;

    std::int64_t anchor_lo(int dim, int level) const;
    std::int64_t anchor_hi(int dim, int level) const; // one past the last anchor
};

} // namespace pz
