// Copyright (c) ppsa contributors.
// SPDX-License-Identifier: Apache-2.0
#include "pps/semialg.hpp"

#include <algorithm>
#include <random>

namespace pps::semialg {

SemiAlgSet::SemiAlgSet(int dimension, std::vector<Constraint> constraints)
    : dim_(dimension), constraints_(std::move(constraints)) {
    for (const auto& c : constraints_) {
        if (c.r.dimension() != dim_)
            throw DimensionError("SemiAlgSet: constraint dimension mismatch");
    }
}

void SemiAlgSet::add(Constraint c) {
    if (c.r.dimension() != dim_)
        throw DimensionError("SemiAlgSet::add: constraint dimension mismatch");
    constraints_.push_back(std::move(c));
}

bool SemiAlgSet::contains(std::span<const double> x) const {
    for (const auto& c : constraints_)
        if (!c.holds(x)) return false;
    return true;
}

bool Box::contains(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dimension()) return false;
    for (size_t i = 0; i < ranges.size(); ++i)
        if (x[i] < ranges[i].first || x[i] > ranges[i].second) return false;
    return true;
}

std::optional<size_t> Partition::cell_at(std::span<const double> x) const {
    for (size_t i = 0; i < cells_.size(); ++i)
        if (cells_[i].contains(x)) return i;
    return std::nullopt;
}

int Partition::match_count(std::span<const double> x) const {
    int n = 0;
    for (const auto& c : cells_)
        if (c.contains(x)) ++n;
    return n;
}

PartitionReport validate_partition(const Partition& partition, const Box& box,
                                   int samples, uint64_t seed) {
    PartitionReport report;
    report.samples = samples;
    std::mt19937_64 rng(seed);
    std::vector<double> x(static_cast<size_t>(box.dimension()));
    for (int s = 0; s < samples; ++s) {
        for (size_t i = 0; i < x.size(); ++i) {
            std::uniform_real_distribution<double> dist(box.ranges[i].first,
                                                        box.ranges[i].second);
            x[i] = dist(rng);
        }
        int matches = partition.match_count(x);
        if (matches == 1) continue;
        if (matches == 0)
            ++report.uncovered;
        else
            ++report.overlapped;
        if (report.witnesses.size() < 8) report.witnesses.push_back(x);
    }
    return report;
}

int PpsSystem::update_degree(size_t cell) const {
    unsigned d = 1;
    for (const auto& t : updates[cell]) d = std::max(d, t.degree());
    return static_cast<int>(d);
}

void PpsSystem::validate() const {
    if (dimension < 1) throw DimensionError("PpsSystem: dimension must be >= 1");
    if (init.dimension() != dimension || guard.dimension() != dimension)
        throw DimensionError("PpsSystem: init/guard dimension mismatch");
    if (partition.size() == 0) throw Error("PpsSystem: no cells");
    if (partition.size() != updates.size())
        throw Error("PpsSystem: cell/update count mismatch");
    for (const auto& cell : partition.cells())
        if (cell.dimension() != dimension)
            throw DimensionError("PpsSystem: cell dimension mismatch");
    for (const auto& t : updates) {
        if (static_cast<int>(t.size()) != dimension)
            throw Error("PpsSystem: update arity mismatch");
        for (const auto& comp : t)
            if (comp.dimension() != dimension)
                throw DimensionError("PpsSystem: update component dimension mismatch");
    }
    if (!variables.empty() && static_cast<int>(variables.size()) != dimension)
        throw Error("PpsSystem: variable name count mismatch");
    if (init_box && init_box->dimension() != dimension)
        throw DimensionError("PpsSystem: init box dimension mismatch");
}

std::vector<std::string> PpsSystem::display_names() const {
    if (!variables.empty()) return variables;
    std::vector<std::string> names;
    for (int i = 0; i < dimension; ++i) names.push_back("x" + std::to_string(i + 1));
    return names;
}

std::optional<std::vector<double>> step(const PpsSystem& sys,
                                       std::span<const double> x) {
    if (!sys.guard.contains(x)) return std::nullopt;
    auto cell = sys.partition.cell_at(x);
    if (!cell) {
        std::string pt;
        for (double v : x) pt += (pt.empty() ? "" : ", ") + std::to_string(v);
        throw Error("step: no partition cell contains (" + pt + ")");
    }
    std::vector<double> next;
    next.reserve(static_cast<size_t>(sys.dimension));
    for (const auto& comp : sys.updates[*cell]) next.push_back(comp.eval(x));
    return next;
}

} // namespace pps::semialg
