#pragma once

#include "revlab/model.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace revlab {

/// Half-open interval [lo, hi) on one configuration coordinate.
struct CoordinateBound {
    std::size_t coordinate = 0;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    friend bool operator==(const CoordinateBound&, const CoordinateBound&) = default;
};

/// A set of configurations: the axis-aligned box cut out by its coordinate bounds.
/// Membership reads positions only, so s in R <=> time_reverse(s) in R.
class Region {
public:
    Region(std::string label, std::vector<CoordinateBound> bounds);

    /// Convenience: lo <= q < hi on the reaction coordinate.
    static Region reaction_interval(std::string label, double lo, double hi);

    const std::string& label() const noexcept { return label_; }
    const std::vector<CoordinateBound>& bounds() const noexcept { return bounds_; }

    bool contains(std::span<const double> q) const noexcept;
    bool contains(const PhasePoint& s) const noexcept { return contains(s.q()); }

    /// [lo, hi) on coordinate i; unconstrained coordinates give (-inf, inf).
    CoordinateBound bound_on(std::size_t coordinate) const noexcept;
    /// Configurational volume in a space of the given dimension (may be +inf).
    double volume(std::size_t dim) const noexcept;
    bool bounded(std::size_t dim) const noexcept;

    friend bool operator==(const Region& a, const Region& b) {
        return a.label_ == b.label_ && a.bounds_ == b.bounds_;
    }

private:
    std::string label_;
    std::vector<CoordinateBound> bounds_;  // sorted by coordinate, one entry per coordinate
};

/// A union of pairwise-disjoint metastable substates.
class Macrostate {
public:
    Macrostate(std::string label, std::vector<Region> substates);
    /// Single-substate macrostate.
    Macrostate(Region region);

    const std::string& label() const noexcept { return label_; }
    const std::vector<Region>& substates() const noexcept { return substates_; }

    bool contains(std::span<const double> q) const noexcept;
    bool contains(const PhasePoint& s) const noexcept { return contains(s.q()); }
    /// Index of the substate containing q, or npos.
    std::size_t substate_of(std::span<const double> q) const noexcept;
    double volume(std::size_t dim) const noexcept;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    friend bool operator==(const Macrostate& a, const Macrostate& b) {
        return a.label_ == b.label_ && a.substates_ == b.substates_;
    }

private:
    std::string label_;
    std::vector<Region> substates_;
};

struct DisjointnessReport {
    bool disjoint = true;
    std::size_t samples = 0;
    std::size_t overlaps = 0;
};

/// Rejection-sampling disjointness check over the bounding box of the union; infinite box
/// sides are clipped to [-clip, clip].
DisjointnessReport check_disjoint(const Macrostate& m, std::size_t dim, std::size_t samples,
                                  std::uint64_t seed, double clip = 10.0);

}  // namespace revlab
