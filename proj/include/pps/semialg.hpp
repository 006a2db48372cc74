// Copyright (c) ppsa contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pps/poly.hpp"

namespace pps::semialg {

// Comparison of a normalized constraint polynomial against zero.
enum class Cmp { Lt, Le };

// One constraint r(x) < 0 or r(x) <= 0.
struct Constraint {
    poly::Polynomial r;
    Cmp cmp = Cmp::Le;

    bool holds(std::span<const double> x) const {
        double v = r.eval(x);
        return cmp == Cmp::Le ? v <= 0.0 : v < 0.0;
    }
    bool operator==(const Constraint&) const = default;
};

// Finite conjunction of polynomial constraints; an empty list is the whole
// space.
class SemiAlgSet {
public:
    SemiAlgSet() = default;
    explicit SemiAlgSet(int dimension) : dim_(dimension) {}
    SemiAlgSet(int dimension, std::vector<Constraint> constraints);

    static SemiAlgSet whole_space(int dimension) { return SemiAlgSet(dimension); }

    int dimension() const { return dim_; }
    bool unconstrained() const { return constraints_.empty(); }
    const std::vector<Constraint>& constraints() const { return constraints_; }
    void add(Constraint c);

    bool contains(std::span<const double> x) const;
    bool operator==(const SemiAlgSet&) const = default;

private:
    int dim_ = 0;
    std::vector<Constraint> constraints_;
};

// Axis-aligned box, used for sampling and plotting.
struct Box {
    std::vector<std::pair<double, double>> ranges;

    int dimension() const { return static_cast<int>(ranges.size()); }
    bool contains(std::span<const double> x) const;
    bool operator==(const Box&) const = default;
};

// Cells intended to cover the ambient space pairwise disjointly.
class Partition {
public:
    Partition() = default;
    explicit Partition(std::vector<SemiAlgSet> cells) : cells_(std::move(cells)) {}

    size_t size() const { return cells_.size(); }
    const SemiAlgSet& cell(size_t i) const { return cells_[i]; }
    const std::vector<SemiAlgSet>& cells() const { return cells_; }

    // Index of the unique cell containing x; nullopt when no cell matches,
    // the lowest index when several do (the validator reports both defects).
    std::optional<size_t> cell_at(std::span<const double> x) const;
    // Number of cells containing x.
    int match_count(std::span<const double> x) const;

private:
    std::vector<SemiAlgSet> cells_;
};

// Result of randomized partition validation over a sampling box.
struct PartitionReport {
    int samples = 0;
    int uncovered = 0;       // points in no cell
    int overlapped = 0;      // points in more than one cell
    std::vector<std::vector<double>> witnesses; // up to 8 defective points

    bool clean() const { return uncovered == 0 && overlapped == 0; }
};

PartitionReport validate_partition(const Partition& partition, const Box& box,
                                   int samples, uint64_t seed);

// Constrained piecewise discrete-time polynomial system: initial set, loop
// guard, partitioned update law.
struct PpsSystem {
    int dimension = 0;
    std::vector<std::string> variables;     // display names, x1..xd if empty
    SemiAlgSet init;                        // where runs start
    SemiAlgSet guard;                       // loop condition (stay set)
    Partition partition;                    // update-law cells
    std::vector<std::vector<poly::Polynomial>> updates; // one map per cell
    std::optional<Box> init_box;            // sampling box when init is a box

    size_t cell_count() const { return partition.size(); }
    const std::vector<poly::Polynomial>& update(size_t cell) const {
        return updates[cell];
    }
    // Largest total degree over all update components of the cell, at least 1.
    int update_degree(size_t cell) const;
    void validate() const; // shape checks, throws on violation
    std::vector<std::string> display_names() const;
};

// One loop step from x: nullopt when the guard fails (the run halts), the
// successor state otherwise.  Throws Error when no cell matches x.
std::optional<std::vector<double>> step(const PpsSystem& sys,
                                       std::span<const double> x);

} // namespace pps::semialg
