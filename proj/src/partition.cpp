#include "policy_zoom/partition.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace pz {

double PartitionConstants::scale_log() const { return conc_scale * std::log(horizon / delta); }

PartitionTree::PartitionTree(std::vector<Interval> state_bounds, PartitionConstants constants)
    : bounds_(std::move(state_bounds)), constants_(constants) {
    if (bounds_.empty()) throw ConfigError("partition: empty state box");
    for (const auto& iv : bounds_)
        if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.hi <= iv.lo)
            throw ConfigError("partition: state box must be bounded");

    // Smallest level whose cells have diameter at most 1.
    double d = std::sqrt(static_cast<double>(bounds_.size()));
    int level = 0;
    while (d * std::ldexp(1.0, -level) > 1.0 + 1e-12) ++level;
    initial_level_ = level;
    max_level_ = level;

    for (const Cell& c : level_tiling(level)) leaves_.emplace(c, 0);
}

std::int64_t PartitionTree::anchor_lo(int dim, int level) const {
    return static_cast<std::int64_t>(std::floor(bounds_[dim].lo * std::ldexp(1.0, level) + 1e-9));
}

std::int64_t PartitionTree::anchor_hi(int dim, int level) const {
    return static_cast<std::int64_t>(std::ceil(bounds_[dim].hi * std::ldexp(1.0, level) - 1e-9));
}

std::vector<Cell> PartitionTree::level_tiling(int level) const {
    std::vector<Cell> cells;
    std::vector<std::int64_t> lo(bounds_.size()), hi(bounds_.size());
    for (std::size_t d = 0; d < bounds_.size(); ++d) {
        lo[d] = anchor_lo(static_cast<int>(d), level);
        hi[d] = anchor_hi(static_cast<int>(d), level);
    }
    std::vector<std::int64_t> a(lo);
    while (true) {
        cells.push_back(Cell{level, a});
        std::size_t d = bounds_.size();
        while (d > 0 && ++a[d - 1] == hi[d - 1]) a[--d] = lo[d];
        if (d == 0) break;
    }
    return cells;
}

double PartitionTree::cell_diameter(const Cell& c) const {
    return std::sqrt(static_cast<double>(bounds_.size())) * std::ldexp(1.0, -c.level);
}

StateVec PartitionTree::representative(const Cell& c) const {
    double side = std::ldexp(1.0, -c.level);
    StateVec rep(bounds_.size());
    for (std::size_t d = 0; d < bounds_.size(); ++d) {
        double center = (static_cast<double>(c.anchor[d]) + 0.5) * side;
        rep[d] = std::min(std::max(center, bounds_[d].lo), bounds_[d].hi);
    }
    return rep;
}

double PartitionTree::cell_volume(const Cell& c) const {
    double side = std::ldexp(1.0, -c.level);
    double vol = 1.0;
    for (std::size_t d = 0; d < bounds_.size(); ++d) {
        double lo = std::max(static_cast<double>(c.anchor[d]) * side, bounds_[d].lo);
        double hi = std::min(static_cast<double>(c.anchor[d] + 1) * side, bounds_[d].hi);
        vol *= std::max(hi - lo, 0.0);
    }
    return vol;
}

std::pair<double, double> PartitionTree::thresholds(const Cell& c) const {
    double diam = cell_diameter(c);
    double exponent = static_cast<double>(bounds_.size()) + 2.0;
    double n_max = constants_.scale_log() * std::pow(2.0, exponent) / std::pow(diam, exponent);
    double n_min = c.level == 0 ? 0.0 : constants_.scale_log() / std::pow(diam, exponent);
    return {n_min, n_max};
}

Cell PartitionTree::cell_at(const StateVec& s, int level) const {
    assert(s.size() == bounds_.size());
    Cell probe;
    probe.level = level;
    probe.anchor.assign(bounds_.size(), 0);
    double scale = std::ldexp(1.0, level);
    for (std::size_t d = 0; d < bounds_.size(); ++d) {
        if (s[d] < bounds_[d].lo - 1e-9 || s[d] > bounds_[d].hi + 1e-9)
            throw std::invalid_argument("cell_at: state outside the state box");
        auto a = static_cast<std::int64_t>(std::floor(s[d] * scale));
        // the upper boundary of the box belongs to the last cell
        a = std::min(a, anchor_hi(static_cast<int>(d), level) - 1);
        a = std::max(a, anchor_lo(static_cast<int>(d), level));
        probe.anchor[d] = a;
    }
    return probe;
}

Cell PartitionTree::locate(const StateVec& s) const {
    for (int level = initial_level_; level <= max_level_; ++level) {
        Cell probe = cell_at(s, level);
        auto it = leaves_.find(probe);
        if (it != leaves_.end()) return probe;
    }
    throw std::logic_error("locate: no active leaf contains the state");
}

std::size_t PartitionTree::tiling_size(int level) const {
    std::size_t n = 1;
    for (std::size_t d = 0; d < bounds_.size(); ++d)
        n *= static_cast<std::size_t>(anchor_hi(static_cast<int>(d), level) -
                                      anchor_lo(static_cast<int>(d), level));
    return n;
}

std::size_t PartitionTree::tiling_index(const Cell& c) const {
    std::size_t idx = 0;
    for (std::size_t d = 0; d < bounds_.size(); ++d) {
        std::int64_t lo = anchor_lo(static_cast<int>(d), c.level);
        std::int64_t hi = anchor_hi(static_cast<int>(d), c.level);
        idx = idx * static_cast<std::size_t>(hi - lo) + static_cast<std::size_t>(c.anchor[d] - lo);
    }
    return idx;
}

std::optional<PartitionTree::SplitEvent> PartitionTree::record_visit(const StateVec& s) {
    Cell leaf = locate(s);
    auto it = leaves_.find(leaf);
    std::int64_t count = ++it->second;
    ++total_visits_;

    double n_max = thresholds(leaf).second;
    if (static_cast<double>(count) < n_max) return std::nullopt;

    // Replace the leaf by its children; each child inherits the parent's
    // final count, which equals its own N_min.
    leaves_.erase(it);
    SplitEvent ev;
    ev.parent = leaf;
    std::size_t dims = bounds_.size();
    for (std::uint64_t mask = 0; mask < (1ull << dims); ++mask) {
        Cell child;
        child.level = leaf.level + 1;
        child.anchor.resize(dims);
        bool inside = true;
        for (std::size_t d = 0; d < dims; ++d) {
            child.anchor[d] = 2 * leaf.anchor[d] + ((mask >> d) & 1u);
            if (child.anchor[d] < anchor_lo(static_cast<int>(d), child.level) ||
                child.anchor[d] >= anchor_hi(static_cast<int>(d), child.level))
                inside = false;
        }
        if (!inside) continue;
        leaves_.emplace(child, count);
        ev.children.push_back(std::move(child));
    }
    inherited_offset_ += (static_cast<std::int64_t>(ev.children.size()) - 1) * count;
    max_level_ = std::max(max_level_, leaf.level + 1);
    return ev;
}

std::int64_t PartitionTree::count(const Cell& leaf) const {
    auto it = leaves_.find(leaf);
    if (it == leaves_.end()) throw std::invalid_argument("count: not an active leaf");
    return it->second;
}

std::vector<Cell> PartitionTree::leaves() const {
    std::vector<Cell> out;
    out.reserve(leaves_.size());
    for (const auto& [cell, n] : leaves_) {
        (void)n;
        out.push_back(cell);
    }
    return out;
}

std::vector<Cell> PartitionTree::min_level_cells() const { return level_tiling(max_level_); }

std::vector<StateVec> PartitionTree::min_level_grid() const {
    std::vector<StateVec> grid;
    for (const Cell& c : min_level_cells()) grid.push_back(representative(c));
    return grid;
}

} // namespace pz
