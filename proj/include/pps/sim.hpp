// Copyright (c) ppsa contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pps/analysis.hpp"
#include "pps/poly.hpp"
#include "pps/semialg.hpp"

namespace pps::sim {

struct Trajectory {
    std::vector<std::vector<double>> points; // first point lies in the initial set
    bool halted = false;                     // left the stay set before the last step
};

struct SimOptions {
    int trajectories = 10;
    int steps = 100;
    uint64_t seed = 0;
    // Sampling box; defaults to the system's init box and is required when the
    // system does not carry one.
    std::optional<semialg::Box> box;
    int max_rejects = 200000; // per initial sample
};

// Uniform rejection-sampled initial states, stepped through the loop.
// Deterministic for a fixed seed: every trajectory has its own RNG stream
// derived from (seed, index), independent of scheduling or count.
std::vector<Trajectory> simulate(const semialg::PpsSystem& sys, const SimOptions& options);

// Empirical maximum of p over samples of box filtered by every region in
// `regions` (their intersection).  A lower bound on the true supremum, or
// nullopt when no sample is accepted.  Monotone non-decreasing in n for fixed
// seed: sample k is derived from (seed, k) regardless of n.
std::optional<double> sampled_sup(const poly::Polynomial& p,
                                  std::span<const semialg::SemiAlgSet> regions,
                                  const semialg::Box& box, int n, uint64_t seed);

// One row per (trajectory, step, x1..xd).
std::string to_csv(const std::vector<Trajectory>& trajectories,
                   std::span<const std::string> names);

// 2-D scatter of trajectories with the template sublevel boundaries
// p = w(p) overlaid (marching-squares contours on a grid).
std::string to_svg(const std::vector<Trajectory>& trajectories,
                   const analysis::TemplateBasis& basis,
                   const analysis::BoundVector& w, int resolution = 160);

} // namespace pps::sim
