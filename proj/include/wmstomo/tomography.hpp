#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "wmstomo/common.hpp"
#include "wmstomo/dli.hpp"
#include "wmstomo/spectroscopy.hpp"

namespace wmstomo {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

// Fan of parallel-beam projections covering the measurement plane.
struct BeamGeometry {
    struct Beam {
        Point2 start;
        Point2 end;
        double angle_deg = 0.0;   // projection angle
        double offset = 0.0;      // signed perpendicular offset from centre [cm]
    };
    std::vector<Beam> beams;
    std::vector<double> projection_angles_deg;
    double spacing = 0.0;      // neighbouring beam spacing d [cm]
    double beam_length = 0.0;  // emitter-detector distance [cm]
};

// Equiangular projections (180/n_projections apart), each with
// `beams_per_projection` parallel beams spaced `d` and centred on the
// region of interest.
inline BeamGeometry build_geometry(int n_projections, int beams_per_projection, double d,
                                   double beam_length) {
    if (n_projections < 1 || beams_per_projection < 1)
        throw config_error("geometry: projection and beam counts must be >= 1");
    if (!(d > 0.0) || !(beam_length > 0.0))
        throw config_error("geometry: spacing and beam length must be positive");
    BeamGeometry g;
    g.spacing = d;
    g.beam_length = beam_length;
    for (int p = 0; p < n_projections; ++p) {
        const double angle_deg = 180.0 * static_cast<double>(p) / static_cast<double>(n_projections);
        g.projection_angles_deg.push_back(angle_deg);
        const double a = angle_deg * pi / 180.0;
        const Point2 dir{std::cos(a), std::sin(a)};
        const Point2 normal{-std::sin(a), std::cos(a)};
        for (int k = 0; k < beams_per_projection; ++k) {
            const double off =
                (static_cast<double>(k) - 0.5 * static_cast<double>(beams_per_projection - 1)) * d;
            BeamGeometry::Beam b;
            b.angle_deg = angle_deg;
            b.offset = off;
            b.start = {off * normal.x - 0.5 * beam_length * dir.x,
                       off * normal.y - 0.5 * beam_length * dir.y};
            b.end = {off * normal.x + 0.5 * beam_length * dir.x,
                     off * normal.y + 0.5 * beam_length * dir.y};
            g.beams.push_back(b);
        }
    }
    return g;
}

// Square region of interest discretized into nx * ny pixels; origin is the
// lower-left corner. values of images over this grid are stored row-major
// with index iy * nx + ix, iy = 0 at the origin row.
struct PixelGrid {
    int nx = 0;
    int ny = 0;
    double extent = 0.0;  // side length [cm]
    Point2 origin{0.0, 0.0};

    static PixelGrid centered(int nx, int ny, double extent) {
        PixelGrid g;
        g.nx = nx;
        g.ny = ny;
        g.extent = extent;
        g.origin = {-0.5 * extent, -0.5 * extent};
        return g;
    }

    void validate() const {
        if (nx < 1 || ny < 1) throw config_error("grid: pixel counts must be >= 1");
        if (!(extent > 0.0)) throw config_error("grid: extent must be positive");
    }

    double pixel_w() const { return extent / static_cast<double>(nx); }
    double pixel_h() const { return extent / static_cast<double>(ny); }
    std::size_t cells() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    Point2 center(int ix, int iy) const {
        return {origin.x + (static_cast<double>(ix) + 0.5) * pixel_w(),
                origin.y + (static_cast<double>(iy) + 0.5) * pixel_h()};
    }
};

struct ConcentrationImage {
    PixelGrid grid;
    std::vector<double> values;  // mole fraction, row-major
};

// Sparse beam-pixel chord lengths; row i lists the pixels beam i crosses.
struct SystemMatrix {
    struct Entry {
        int pixel = 0;
        double chord = 0.0;  // [cm]
    };
    int n_pixels = 0;
    std::vector<std::vector<Entry>> rows;

    double row_sum(std::size_t i) const {
        double s = 0.0;
        for (const auto& e : rows[i]) s += e.chord;
        return s;
    }
};

/**
 * Exact chord lengths of every beam through every pixel via parametric
 * grid traversal: the ray is clipped to the region of interest, all
 * gridline crossings inside the clip are collected, and each interval
 * between consecutive crossings is assigned to the pixel containing its
 * midpoint. Beams that miss the region produce empty rows.
 */
inline SystemMatrix system_matrix(const BeamGeometry& geom, const PixelGrid& grid) {
    grid.validate();
    SystemMatrix M;
    M.n_pixels = static_cast<int>(grid.cells());
    M.rows.reserve(geom.beams.size());
    const double x1 = grid.origin.x, x2 = grid.origin.x + grid.extent;
    const double y1 = grid.origin.y, y2 = grid.origin.y + grid.extent;
    for (const auto& beam : geom.beams) {
        const double dx = beam.end.x - beam.start.x;
        const double dy = beam.end.y - beam.start.y;
        const double len = std::hypot(dx, dy);
        double t_in = 0.0, t_out = 1.0;
        bool hit = true;
        auto clip = [&](double p, double q) {
            // moving p*t <= q into [t_in, t_out]
            if (p == 0.0) {
                if (q < 0.0) hit = false;
                return;
            }
            const double r = q / p;
            if (p < 0.0)
                t_in = std::max(t_in, r);
            else
                t_out = std::min(t_out, r);
        };
        clip(-dx, beam.start.x - x1);
        clip(dx, x2 - beam.start.x);
        clip(-dy, beam.start.y - y1);
        clip(dy, y2 - beam.start.y);
        std::vector<SystemMatrix::Entry> row;
        if (hit && t_in < t_out) {
            std::vector<double> ts;
            ts.push_back(t_in);
            ts.push_back(t_out);
            if (dx != 0.0)
                for (int i = 0; i <= grid.nx; ++i) {
                    const double t = (x1 + static_cast<double>(i) * grid.pixel_w() - beam.start.x) / dx;
                    if (t > t_in && t < t_out) ts.push_back(t);
                }
            if (dy != 0.0)
                for (int i = 0; i <= grid.ny; ++i) {
                    const double t = (y1 + static_cast<double>(i) * grid.pixel_h() - beam.start.y) / dy;
                    if (t > t_in && t < t_out) ts.push_back(t);
                }
            std::sort(ts.begin(), ts.end());
            std::map<int, double> acc;
            for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
                const double t0 = ts[k], t1 = ts[k + 1];
                if (t1 - t0 <= 1e-14) continue;
                const double tm = 0.5 * (t0 + t1);
                const double px = beam.start.x + tm * dx;
                const double py = beam.start.y + tm * dy;
                int ix = static_cast<int>(std::floor((px - x1) / grid.pixel_w()));
                int iy = static_cast<int>(std::floor((py - y1) / grid.pixel_h()));
                ix = std::clamp(ix, 0, grid.nx - 1);
                iy = std::clamp(iy, 0, grid.ny - 1);
                acc[iy * grid.nx + ix] += (t1 - t0) * len;
            }
            for (const auto& [pixel, chord] : acc) row.push_back({pixel, chord});
        }
        M.rows.push_back(std::move(row));
    }
    return M;
}

// Forward projection b_i = sum_j w_ij * x_j * factor, where factor converts
// mole-fraction * cm of path into the measured absorbance.
inline std::vector<double> project_phantom(const ConcentrationImage& image, const SystemMatrix& M,
                                           double factor) {
    if (image.values.size() != static_cast<std::size_t>(M.n_pixels))
        throw config_error("project: image size does not match system matrix");
    std::vector<double> b(M.rows.size(), 0.0);
    for (std::size_t i = 0; i < M.rows.size(); ++i) {
        double acc = 0.0;
        for (const auto& e : M.rows[i]) acc += e.chord * image.values[static_cast<std::size_t>(e.pixel)];
        b[i] = acc * factor;
    }
    return b;
}

struct SartOptions {
    double relaxation = 1.0;  // lambda in (0, 2)
    int sweeps = 50;
    bool nonneg = true;
};

/**
 * Simultaneous algebraic reconstruction: each sweep back-projects all
 * row residuals at once,
 *   x_j += lambda / W+j * sum_i w_ij (b_i - <w_i, x>) / Wi+
 * with row sums Wi+ and column sums W+j, optionally clamping the image to
 * non-negative values after every sweep. Beams that miss the grid (empty
 * rows) are excluded from the update.
 */
inline ConcentrationImage sart_reconstruct(const SystemMatrix& M, const std::vector<double>& b,
                                           const PixelGrid& grid, const SartOptions& opts = {}) {
    grid.validate();
    if (b.size() != M.rows.size()) throw config_error("sart: measurement count does not match matrix rows");
    if (!(opts.relaxation > 0.0) || !(opts.relaxation < 2.0))
        throw config_error("sart: relaxation must be in (0, 2)");
    if (opts.sweeps < 1) throw config_error("sart: need at least one sweep");
    if (static_cast<std::size_t>(M.n_pixels) != grid.cells())
        throw config_error("sart: matrix pixel count does not match grid");

    std::vector<double> row_sum(M.rows.size(), 0.0);
    std::vector<double> col_sum(static_cast<std::size_t>(M.n_pixels), 0.0);
    bool any = false;
    for (std::size_t i = 0; i < M.rows.size(); ++i) {
        for (const auto& e : M.rows[i]) {
            row_sum[i] += e.chord;
            col_sum[static_cast<std::size_t>(e.pixel)] += e.chord;
            if (e.chord > 0.0) any = true;
        }
    }
    if (!any) throw config_error("sart: system matrix is all zero");

    ConcentrationImage img;
    img.grid = grid;
    img.values.assign(grid.cells(), 0.0);
    std::vector<double> update(grid.cells());
    for (int sweep = 0; sweep < opts.sweeps; ++sweep) {
        std::fill(update.begin(), update.end(), 0.0);
        for (std::size_t i = 0; i < M.rows.size(); ++i) {
            if (row_sum[i] <= 0.0) continue;
            double proj = 0.0;
            for (const auto& e : M.rows[i]) proj += e.chord * img.values[static_cast<std::size_t>(e.pixel)];
            const double scaled_residual = (b[i] - proj) / row_sum[i];
            for (const auto& e : M.rows[i])
                update[static_cast<std::size_t>(e.pixel)] += e.chord * scaled_residual;
        }
        for (std::size_t j = 0; j < img.values.size(); ++j) {
            if (col_sum[j] <= 0.0) continue;
            img.values[j] += opts.relaxation * update[j] / col_sum[j];
            if (opts.nonneg && img.values[j] < 0.0) img.values[j] = 0.0;
        }
    }
    return img;
}

// Path-integrated absorbance from the spectrum peak, scaled by the
// simulated reference pair (A_s, P_s): A_m = P_m * A_s / P_s.
inline double peak_absorbance(const HarmonicSpectrum& spectrum, double ref_peak, double ref_absorbance) {
    if (spectrum.values.empty()) throw config_error("peak_absorbance: empty spectrum");
    if (!(ref_peak > 0.0) || !(ref_absorbance > 0.0))
        throw config_error("peak_absorbance: reference peak and absorbance must be positive");
    const double peak = *std::max_element(spectrum.values.begin(), spectrum.values.end());
    return peak * ref_absorbance / ref_peak;
}

// Peak line-centre absorbance per unit (mole fraction * cm) at (T, P);
// evaluated in the dilute limit so images come out in mole fraction.
inline double absorbance_factor(const AbsorptionLine& line, double T, double P) {
    BeamGasState gas{1.0, P, T, 0.0};
    return lineshape(line.nu0, line, gas) * P * line_strength(line, T);
}

// Gaussian blob test distribution over the grid.
inline ConcentrationImage gaussian_phantom(const PixelGrid& grid, Point2 center, double sigma,
                                           double peak, double baseline = 0.0) {
    grid.validate();
    if (!(sigma > 0.0)) throw config_error("phantom: sigma must be positive");
    ConcentrationImage img;
    img.grid = grid;
    img.values.resize(grid.cells());
    for (int iy = 0; iy < grid.ny; ++iy)
        for (int ix = 0; ix < grid.nx; ++ix) {
            const Point2 c = grid.center(ix, iy);
            const double r2 = (c.x - center.x) * (c.x - center.x) + (c.y - center.y) * (c.y - center.y);
            img.values[static_cast<std::size_t>(iy * grid.nx + ix)] =
                baseline + (peak - baseline) * std::exp(-0.5 * r2 / (sigma * sigma));
        }
    return img;
}

}  // namespace wmstomo
