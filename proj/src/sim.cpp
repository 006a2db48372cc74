// Copyright (c) ppsa contributors.
// SPDX-License-Identifier: Apache-2.0
#include "pps/sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "pps/common.hpp"

namespace pps::sim {

namespace {

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::mt19937_64 stream_for(uint64_t seed, uint64_t index) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ (index + 1)));
}

std::vector<double> draw_point(std::mt19937_64& rng, const semialg::Box& box) {
    std::vector<double> x(box.ranges.size());
    for (size_t v = 0; v < box.ranges.size(); ++v) {
        std::uniform_real_distribution<double> dist(box.ranges[v].first,
                                                    box.ranges[v].second);
        x[v] = dist(rng);
    }
    return x;
}

std::string fmt(double v, int precision = 17) {
    if (precision >= 17) return format_double(v);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    return buf;
}

} // namespace

std::vector<Trajectory> simulate(const semialg::PpsSystem& sys, const SimOptions& options) {
    const semialg::Box* box = options.box ? &*options.box
                              : sys.init_box ? &*sys.init_box
                                             : nullptr;
    if (!box)
        throw Error("simulate: the system has no init box; pass a sampling box");
    if (box->dimension() != sys.dimension)
        throw DimensionError("simulate: sampling box dimension mismatch");

    std::vector<Trajectory> out(static_cast<size_t>(std::max(0, options.trajectories)));
    for (size_t t = 0; t < out.size(); ++t) {
        auto rng = stream_for(options.seed, t);
        std::vector<double> x;
        int tries = 0;
        for (;;) {
            x = draw_point(rng, *box);
            if (sys.init.contains(x)) break;
            if (++tries >= options.max_rejects)
                throw Error("simulate: could not sample the initial set (" +
                            std::to_string(tries) + " rejects)");
        }
        Trajectory& traj = out[t];
        traj.points.push_back(x);
        for (int k = 0; k < options.steps; ++k) {
            auto next = semialg::step(sys, traj.points.back());
            if (!next) {
                traj.halted = true;
                break;
            }
            traj.points.push_back(std::move(*next));
        }
    }
    return out;
}

std::optional<double> sampled_sup(const poly::Polynomial& p,
                                  std::span<const semialg::SemiAlgSet> regions,
                                  const semialg::Box& box, int n, uint64_t seed) {
    std::optional<double> best;
    for (int k = 0; k < n; ++k) {
        auto rng = stream_for(seed, static_cast<uint64_t>(k));
        std::vector<double> x = draw_point(rng, box);
        bool inside = true;
        for (const auto& region : regions)
            if (!region.contains(x)) {
                inside = false;
                break;
            }
        if (!inside) continue;
        double value = p.eval(x);
        if (!best || value > *best) best = value;
    }
    return best;
}

std::string to_csv(const std::vector<Trajectory>& trajectories,
                   std::span<const std::string> names) {
    std::ostringstream out;
    out << "traj,step";
    for (const auto& name : names) out << ',' << name;
    out << '\n';
    for (size_t t = 0; t < trajectories.size(); ++t)
        for (size_t k = 0; k < trajectories[t].points.size(); ++k) {
            out << t << ',' << k;
            for (double v : trajectories[t].points[k]) out << ',' << fmt(v);
            out << '\n';
        }
    return out.str();
}

namespace {

struct ViewBox {
    double x0, y0, x1, y1;
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
};

// Marching squares: segments of {f = 0} on a regular grid over the view.
std::vector<std::array<double, 4>> contour_segments(const poly::Polynomial& f,
                                                    const ViewBox& view, int res) {
    std::vector<double> value(static_cast<size_t>((res + 1) * (res + 1)));
    const auto at = [&](int i, int j) -> double& {
        return value[static_cast<size_t>(j * (res + 1) + i)];
    };
    for (int j = 0; j <= res; ++j)
        for (int i = 0; i <= res; ++i) {
            double x = view.x0 + view.width() * i / res;
            double y = view.y0 + view.height() * j / res;
            const double pt[2] = {x, y};
            at(i, j) = f.eval(pt);
        }
    std::vector<std::array<double, 4>> segments;
    const auto interp = [&](double xa, double ya, double va, double xb, double yb,
                            double vb) -> std::pair<double, double> {
        double t = (va == vb) ? 0.5 : va / (va - vb);
        t = std::clamp(t, 0.0, 1.0);
        return {xa + t * (xb - xa), ya + t * (yb - ya)};
    };
    for (int j = 0; j < res; ++j)
        for (int i = 0; i < res; ++i) {
            double x0 = view.x0 + view.width() * i / res;
            double x1 = view.x0 + view.width() * (i + 1) / res;
            double y0 = view.y0 + view.height() * j / res;
            double y1 = view.y0 + view.height() * (j + 1) / res;
            // Corners: 0 = (x0,y0), 1 = (x1,y0), 2 = (x1,y1), 3 = (x0,y1).
            double v0 = at(i, j), v1 = at(i + 1, j), v2 = at(i + 1, j + 1),
                   v3 = at(i, j + 1);
            int mask = (v0 < 0 ? 1 : 0) | (v1 < 0 ? 2 : 0) | (v2 < 0 ? 4 : 0) |
                       (v3 < 0 ? 8 : 0);
            if (mask == 0 || mask == 15) continue;
            // Edge midcrossings: a = bottom, b = right, c = top, d = left.
            auto a = interp(x0, y0, v0, x1, y0, v1);
            auto b = interp(x1, y0, v1, x1, y1, v2);
            auto c = interp(x1, y1, v2, x0, y1, v3);
            auto d = interp(x0, y1, v3, x0, y0, v0);
            const auto add = [&](std::pair<double, double> p,
                                 std::pair<double, double> q) {
                segments.push_back({p.first, p.second, q.first, q.second});
            };
            switch (mask) {
            case 1: add(d, a); break;
            case 2: add(a, b); break;
            case 3: add(d, b); break;
            case 4: add(b, c); break;
            case 5: add(d, a); add(b, c); break;
            case 6: add(a, c); break;
            case 7: add(d, c); break;
            case 8: add(c, d); break;
            case 9: add(a, c); break;
            case 10: add(a, b); add(c, d); break;
            case 11: add(b, c); break;
            case 12: add(b, d); break;
            case 13: add(a, b); break;
            case 14: add(a, d); break;
            default: break;
            }
        }
    return segments;
}

} // namespace

std::string to_svg(const std::vector<Trajectory>& trajectories,
                   const analysis::TemplateBasis& basis,
                   const analysis::BoundVector& w, int resolution) {
    int dim = basis.size() > 0 ? basis.dimension()
              : (!trajectories.empty() && !trajectories[0].points.empty())
                  ? static_cast<int>(trajectories[0].points[0].size())
                  : 0;
    if (dim != 2) throw Error("to_svg: only 2-dimensional systems are plotted");
    if (w.size() != basis.size())
        throw DimensionError("to_svg: bound vector does not match the basis");
    resolution = std::clamp(resolution, 16, 2000);

    ViewBox view{-1, -1, 1, 1};
    bool any = false;
    for (const auto& traj : trajectories)
        for (const auto& pt : traj.points) {
            if (!any) {
                view = {pt[0], pt[1], pt[0], pt[1]};
                any = true;
            }
            view.x0 = std::min(view.x0, pt[0]);
            view.y0 = std::min(view.y0, pt[1]);
            view.x1 = std::max(view.x1, pt[0]);
            view.y1 = std::max(view.y1, pt[1]);
        }
    // Make room for the sublevel boundaries, which enclose the trajectories.
    for (size_t q = 0; q < basis.size(); ++q)
        if (std::isfinite(w[q]) && w[q] > 0) {
            double r = std::sqrt(w[q]) * 1.05;
            view.x0 = std::min(view.x0, -r);
            view.y0 = std::min(view.y0, -r);
            view.x1 = std::max(view.x1, r);
            view.y1 = std::max(view.y1, r);
        }
    double mx = std::max(1e-6, view.width()) * 0.1;
    double my = std::max(1e-6, view.height()) * 0.1;
    view = {view.x0 - mx, view.y0 - my, view.x1 + mx, view.y1 + my};

    const double kSize = 640.0;
    const double sx = kSize / view.width();
    const double sy = kSize / view.height();
    const auto px = [&](double x) { return (x - view.x0) * sx; };
    const auto py = [&](double y) { return kSize - (y - view.y0) * sy; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize
        << "\" height=\"" << kSize << "\" viewBox=\"0 0 " << kSize << " " << kSize
        << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    static const char* kPalette[] = {"#c23b22", "#2e7d32", "#6a40bf",
                                     "#b8860b", "#00696b", "#8b2252"};
    for (size_t q = 0; q < basis.size(); ++q) {
        if (!std::isfinite(w[q])) continue;
        poly::Polynomial f =
            basis[q] - poly::Polynomial::constant(basis.dimension(), w[q]);
        auto segments = contour_segments(f, view, resolution);
        const char* color = kPalette[q % (sizeof(kPalette) / sizeof(kPalette[0]))];
        out << "<g stroke=\"" << color << "\" stroke-width=\"1.5\" fill=\"none\">";
        for (const auto& s : segments)
            out << "<line x1=\"" << fmt(px(s[0]), 6) << "\" y1=\"" << fmt(py(s[1]), 6)
                << "\" x2=\"" << fmt(px(s[2]), 6) << "\" y2=\"" << fmt(py(s[3]), 6)
                << "\"/>";
        out << "</g>\n";
        out << "<text x=\"8\" y=\"" << 16 * (q + 1) << "\" fill=\"" << color
            << "\" font-size=\"12\">" << basis.labels()[q] << " = " << fmt(w[q], 6)
            << "</text>\n";
    }

    out << "<g stroke=\"#4878cf\" stroke-width=\"0.8\" stroke-opacity=\"0.55\" "
           "fill=\"none\">";
    for (const auto& traj : trajectories) {
        if (traj.points.size() < 2) continue;
        out << "<polyline points=\"";
        for (const auto& pt : traj.points)
            out << fmt(px(pt[0]), 6) << "," << fmt(py(pt[1]), 6) << " ";
        out << "\"/>";
    }
    out << "</g>\n<g fill=\"#1f3d7a\">";
    for (const auto& traj : trajectories)
        if (!traj.points.empty())
            out << "<circle cx=\"" << fmt(px(traj.points[0][0]), 6) << "\" cy=\""
                << fmt(py(traj.points[0][1]), 6) << "\" r=\"1.6\"/>";
    out << "</g>\n</svg>\n";
    return out.str();
}

} // namespace pps::sim
