#include "revlab/region.hpp"

#include "revlab/errors.hpp"
#include "revlab/rng.hpp"

#include <algorithm>
#include <cmath>

namespace revlab {

Region::Region(std::string label, std::vector<CoordinateBound> bounds)
    : label_(std::move(label)), bounds_(std::move(bounds)) {
    std::sort(bounds_.begin(), bounds_.end(),
              [](const CoordinateBound& a, const CoordinateBound& b) { return a.coordinate < b.coordinate; });
    for (std::size_t i = 0; i < bounds_.size(); ++i) {
        const auto& b = bounds_[i];
        if (std::isnan(b.lo) || std::isnan(b.hi) || !(b.hi > b.lo)) {
            throw ContractViolation("region '" + label_ + "' has an empty or invalid interval");
        }
        if (i > 0 && bounds_[i - 1].coordinate == b.coordinate) {
            throw ContractViolation("region '" + label_ + "' bounds a coordinate twice");
        }
    }
}

Region Region::reaction_interval(std::string label, double lo, double hi) {
    return Region(std::move(label), {CoordinateBound{0, lo, hi}});
}

bool Region::contains(std::span<const double> q) const noexcept {
    for (const auto& b : bounds_) {
        if (b.coordinate >= q.size()) return false;
        const double x = q[b.coordinate];
        if (!(x >= b.lo && x < b.hi)) return false;
    }
    return true;
}

CoordinateBound Region::bound_on(std::size_t coordinate) const noexcept {
    for (const auto& b : bounds_) {
        if (b.coordinate == coordinate) return b;
    }
    return CoordinateBound{coordinate};
}

double Region::volume(std::size_t dim) const noexcept {
    double v = 1.0;
    for (std::size_t i = 0; i < dim; ++i) {
        const auto b = bound_on(i);
        v *= b.hi - b.lo;
    }
    return v;
}

bool Region::bounded(std::size_t dim) const noexcept { return std::isfinite(volume(dim)); }

Macrostate::Macrostate(std::string label, std::vector<Region> substates)
    : label_(std::move(label)), substates_(std::move(substates)) {
    if (substates_.empty()) throw ContractViolation("macrostate '" + label_ + "' needs at least one substate");
}

Macrostate::Macrostate(Region region) : Macrostate(region.label(), {region}) {}

bool Macrostate::contains(std::span<const double> q) const noexcept { return substate_of(q) != npos; }

std::size_t Macrostate::substate_of(std::span<const double> q) const noexcept {
    for (std::size_t i = 0; i < substates_.size(); ++i) {
        if (substates_[i].contains(q)) return i;
    }
    return npos;
}

double Macrostate::volume(std::size_t dim) const noexcept {
    double v = 0.0;
    for (const auto& r : substates_) v += r.volume(dim);
    return v;
}

DisjointnessReport check_disjoint(const Macrostate& m, std::size_t dim, std::size_t samples,
                                  std::uint64_t seed, double clip) {
    std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
    std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
    for (const auto& r : m.substates()) {
        for (std::size_t i = 0; i < dim; ++i) {
            const auto b = r.bound_on(i);
            lo[i] = std::min(lo[i], std::max(b.lo, -clip));
            hi[i] = std::max(hi[i], std::min(b.hi, clip));
        }
    }
    DisjointnessReport report;
    report.samples = samples;
    Philox4x32 rng(seed, 0);
    std::vector<double> x(dim);
    for (std::size_t n = 0; n < samples; ++n) {
        for (std::size_t i = 0; i < dim; ++i) x[i] = lo[i] + (hi[i] - lo[i]) * uniform01(rng);
        std::size_t hits = 0;
        for (const auto& r : m.substates()) hits += r.contains(x) ? 1 : 0;
        if (hits > 1) ++report.overlaps;
    }
    report.disjoint = report.overlaps == 0;
    return report;
}

}  // namespace revlab
