#pragma once

// Axisymmetric magnetoquasistatic solver for A_phi(r, z) on a structured r-z grid.
//
// Weak form, bilinear elements, exact axisymmetric curl (B_z = dA/dr + A/r, B_r = -dA/dz):
//     int nu [ (A_r + A/r)(v_r + v/r) + A_z v_z ] r dr dz + jw int sigma A v r dr dz
//         = sum_k s_k int_turn_k w(r) v r dr dz
// with one extra unknown s_k and one row per turn enforcing the net turn current
//     s_k int_k w dr dz - jw int_k sigma A dr dz = I_L.
// w(r) = 1/r gives the voltage-driven solid conductor (J_s = sigma u_k / (2 pi r));
// w(r) = 1 gives a uniform source density per turn.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#ifdef FLATWIRE_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include "flatwire/design.hpp"
#include "flatwire/errors.hpp"
#include "flatwire/units.hpp"

namespace flatwire::femq {

using cplx = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::ColMajor, int>;

enum class Material : unsigned char { air, core, conductor };

/// Boundary handling on the open sides. The axis r = 0 is always A = 0.
enum class Boundary { dirichlet, neumann };

/// A gap opening on the center-leg surface, kept for loss-region classification.
struct GapMark {
    double r_face;
    double z_lo;
    double z_hi;
};

class Grid {
public:
    Grid(std::vector<double> r_edges, std::vector<double> z_edges, std::vector<Material> material,
         std::vector<double> mu_r, std::vector<double> sigma, std::vector<int> turn, int turns,
         Boundary outer_r = Boundary::dirichlet, Boundary z_ends = Boundary::dirichlet)
        : r_(std::move(r_edges)), z_(std::move(z_edges)), material_(std::move(material)), mu_r_(std::move(mu_r)),
          sigma_(std::move(sigma)), turn_(std::move(turn)), turns_(turns), outer_r_(outer_r), z_ends_(z_ends) {
        check();
    }

    int nr() const { return static_cast<int>(r_.size()) - 1; }  ///< cells along r
    int nz() const { return static_cast<int>(z_.size()) - 1; }
    int cell_count() const { return nr() * nz(); }
    int node_count() const { return (nr() + 1) * (nz() + 1); }
    int cell(int i, int j) const { return i + j * nr(); }
    int node(int i, int j) const { return i + j * (nr() + 1); }

    const std::vector<double>& r_edges() const { return r_; }
    const std::vector<double>& z_edges() const { return z_; }
    Material material(int c) const { return material_[c]; }
    double mu_r(int c) const { return mu_r_[c]; }
    double sigma(int c) const { return sigma_[c]; }
    int turn(int c) const { return turn_[c]; }  ///< 0-based turn index, -1 outside conductors
    int turns() const { return turns_; }
    Boundary outer_r_boundary() const { return outer_r_; }
    Boundary z_boundary() const { return z_ends_; }

    bool is_dirichlet(int i, int j) const {
        if (i == 0) return true;
        if (i == nr() && outer_r_ == Boundary::dirichlet) return true;
        if ((j == 0 || j == nz()) && z_ends_ == Boundary::dirichlet) return true;
        return false;
    }

    std::vector<GapMark> gap_marks;

    /// Largest conductor-cell edge divided by the skin depth at omega (0 at DC).
    double max_conductor_cell_over_skin_depth(double omega) const {
        double worst = 0.0;
        for (int j = 0; j < nz(); ++j)
            for (int i = 0; i < nr(); ++i) {
                const int c = cell(i, j);
                if (material_[c] != Material::conductor || sigma_[c] <= 0) continue;
                const double delta = skin_depth(omega, sigma_[c], mu_r_[c]);
                const double h = std::max(r_[i + 1] - r_[i], z_[j + 1] - z_[j]);
                worst = std::max(worst, h / delta);
            }
        return worst;
    }

    /// Copy with every conductor cell set to conductivity `sigma`.
    Grid with_conductor_sigma(double sigma) const {
        Grid g = *this;
        for (int c = 0; c < cell_count(); ++c)
            if (g.material_[c] == Material::conductor) g.sigma_[c] = sigma;
        return g;
    }

    /// Cross-section area of each turn [m^2].
    std::vector<double> turn_areas() const {
        std::vector<double> a(turns_, 0.0);
        for (int j = 0; j < nz(); ++j)
            for (int i = 0; i < nr(); ++i)
                if (int t = turn_[cell(i, j)]; t >= 0) a[t] += (r_[i + 1] - r_[i]) * (z_[j + 1] - z_[j]);
        return a;
    }

private:
    void check() const {
        auto increasing = [](const std::vector<double>& v) {
            for (size_t i = 1; i < v.size(); ++i)
                if (!(v[i] > v[i - 1])) return false;
            return v.size() >= 2;
        };
        if (!increasing(r_) || !increasing(z_)) throw GeometryError("femq: grid coordinates must be strictly increasing");
        if (r_.front() != 0.0) throw GeometryError("femq: radial grid must start on the axis r = 0");
        const size_t n = static_cast<size_t>(cell_count());
        if (material_.size() != n || mu_r_.size() != n || sigma_.size() != n || turn_.size() != n)
            throw GeometryError("femq: per-cell arrays do not match the grid size");
        std::vector<int> seen(turns_, 0);
        for (size_t c = 0; c < n; ++c) {
            if (turn_[c] >= turns_ || turn_[c] < -1) throw GeometryError("femq: turn index out of range");
            if ((turn_[c] >= 0) != (material_[c] == Material::conductor))
                throw GeometryError("femq: every conductor cell needs exactly one turn index");
            if (turn_[c] >= 0) ++seen[turn_[c]];
            if (!(mu_r_[c] > 0) || !(sigma_[c] >= 0)) throw GeometryError("femq: invalid material constants");
        }
        for (int t = 0; t < turns_; ++t)
            if (seen[t] == 0) throw GeometryError("femq: turn " + std::to_string(t + 1) + " has no cells");
    }

    std::vector<double> r_, z_;
    std::vector<Material> material_;
    std::vector<double> mu_r_, sigma_;
    std::vector<int> turn_;
    int turns_;
    Boundary outer_r_, z_ends_;
};

// ---------------------------------------------------------------------------
// Meshing

struct MeshPolicy {
    double max_frequency = 0.0;          ///< [Hz]; sets the conductor cell size via the skin depth
    double cells_per_skin_depth = 3.0;
    double base_cell = 0.25e-3;          ///< largest cell inside the core and window [m]
    int refine = 1;                      ///< every cell is split into `refine` along each axis
    std::optional<double> padding;       ///< air around the core; default one core diameter
    double growth = 1.3;                 ///< geometric growth of padding cells
    int min_cells_per_turn = 2;          ///< along z inside one turn, before refinement
};

namespace detail {

/// Appends the interior and end points of [a, b] split into n equal cells.
inline void append_uniform(std::vector<double>& edges, double a, double b, int n) {
    for (int k = 1; k <= n; ++k) edges.push_back(a + (b - a) * k / n);
}

inline int cells_for(double length, double h) { return std::max(1, static_cast<int>(std::ceil(length / h - 1e-9))); }

/// Geometrically growing cells from `a` (size h0) toward `b`.
inline std::vector<double> graded_sizes(double length, double h0, double growth) {
    std::vector<double> sizes;
    double total = 0.0;
    double h = h0;
    while (total + h < length) {
        sizes.push_back(h);
        total += h;
        h *= growth;
    }
    if (sizes.empty()) return {length};
    const double scale = length / total;  // stretch to land exactly on b
    for (auto& s : sizes) s *= scale;
    return sizes;
}

inline void append_graded(std::vector<double>& edges, double a, double b, double h0, double growth, int refine,
                          bool grow_from_a) {
    auto sizes = graded_sizes(std::abs(b - a), h0, growth);
    if (!grow_from_a) std::reverse(sizes.begin(), sizes.end());
    const double sign = b > a ? 1.0 : -1.0;
    double x = a;
    for (double s : sizes) {
        const double step = sign * s / refine;
        for (int k = 1; k <= refine; ++k) edges.push_back(x + step * k);
        x += sign * s;
    }
    edges.back() = b;
}

inline std::vector<double> unique_sorted(std::vector<double> v, double tol) {
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (double x : v)
        if (out.empty() || x - out.back() > tol) out.push_back(x);
    return out;
}

}  // namespace detail

/// Structured grid of the axisymmetric core, gaps and the N annular turns.
inline Grid build_mesh(const InductorDesign& d, const MeshPolicy& policy = {}) {
    if (d.clearances.D_left < 0 || d.clearances.D_right < 0 || d.coil.r_w < d.core.center_leg_radius ||
        d.coil.r_w + d.coil.D_w > d.core.center_leg_radius + d.core.window_width + 1e-12)
        throw GeometryError("femq: coil does not fit between the core legs (negative clearance)");
    require_valid(d);
    if (policy.refine < 1 || !(policy.cells_per_skin_depth > 0) || !(policy.base_cell > 0) || !(policy.growth >= 1))
        throw GeometryError("femq: invalid mesh policy");

    const auto g = layout(d);
    const int refine = policy.refine;
    const double tol = 1e-9;
    const double delta = skin_depth(angular(policy.max_frequency), d.coil.sigma);
    const double h_cond = std::min(policy.base_cell, delta / policy.cells_per_skin_depth);
    const double h_base = policy.base_cell;
    const double pad = policy.padding.value_or(2.0 * g.r_shell_out);

    // r direction
    std::vector<double> r{0.0};
    auto add_r = [&](double b, double h) {
        const double a = r.back();
        if (b - a > tol) detail::append_uniform(r, a, b, detail::cells_for(b - a, h) * refine);
    };
    add_r(g.r_leg, h_base);
    add_r(g.r_coil_in, std::min(h_base, std::max(h_cond, d.clearances.D_left / 4)));
    add_r(g.r_coil_out, h_cond);
    add_r(g.r_window_out, std::min(h_base, std::max(h_cond, (g.r_window_out - g.r_coil_out) / 4)));
    add_r(g.r_shell_out, h_base);
    if (pad > 0) detail::append_graded(r, g.r_shell_out, g.r_shell_out + pad, h_base, policy.growth, refine, true);

    // z direction: window breakpoints from turn faces and gap faces
    const double pitch = d.coil.t_w + d.coil.s;
    std::vector<double> breaks{-g.z_window, g.z_window};
    for (int k = 0; k < d.coil.N; ++k) {
        const double lo = -g.z_coil + k * pitch;
        breaks.push_back(lo);
        breaks.push_back(lo + d.coil.t_w);
    }
    for (const auto& gap : d.core.gaps) {
        breaks.push_back(gap.position - gap.length / 2);
        breaks.push_back(gap.position + gap.length / 2);
    }
    breaks = detail::unique_sorted(std::move(breaks), tol);

    auto inside_turn = [&](double zc) {
        const double u = (zc + g.z_coil) / pitch;
        if (zc < -g.z_coil || zc > g.z_coil) return false;
        return u - std::floor(u) < d.coil.t_w / pitch;
    };

    std::vector<double> z;
    z.push_back(-g.z_core - pad);
    if (pad > 0) {
        z.front() = -g.z_core - pad;
        detail::append_graded(z, -g.z_core - pad, -g.z_core, h_base, policy.growth, refine, false);
    } else {
        z.front() = -g.z_core;
    }
    detail::append_uniform(z, -g.z_core, -g.z_window, detail::cells_for(d.core.yoke_thickness, h_base) * refine);
    for (size_t b = 1; b < breaks.size(); ++b) {
        const double lo = breaks[b - 1];
        const double hi = breaks[b];
        const double len = hi - lo;
        int n;
        if (inside_turn(0.5 * (lo + hi)))
            n = std::max(detail::cells_for(len, h_cond), policy.min_cells_per_turn);
        else
            n = detail::cells_for(len, std::min(h_base, std::max(h_cond, len / 2)));
        detail::append_uniform(z, lo, hi, n * refine);
    }
    detail::append_uniform(z, g.z_window, g.z_core, detail::cells_for(d.core.yoke_thickness, h_base) * refine);
    if (pad > 0) detail::append_graded(z, g.z_core, g.z_core + pad, h_base, policy.growth, refine, true);

    const int nr = static_cast<int>(r.size()) - 1;
    const int nz = static_cast<int>(z.size()) - 1;
    const size_t n = static_cast<size_t>(nr) * nz;
    std::vector<Material> mat(n, Material::air);
    std::vector<double> mu(n, 1.0), sig(n, 0.0);
    std::vector<int> turn(n, -1);

    auto in_gap = [&](double zc) {
        for (const auto& gap : d.core.gaps)
            if (std::abs(zc - gap.position) < gap.length / 2) return true;
        return false;
    };

    for (int j = 0; j < nz; ++j) {
        const double zc = 0.5 * (z[j] + z[j + 1]);
        const double az = std::abs(zc);
        for (int i = 0; i < nr; ++i) {
            const double rc = 0.5 * (r[i] + r[i + 1]);
            const size_t c = static_cast<size_t>(i) + static_cast<size_t>(j) * nr;
            bool core = false;
            if (az < g.z_window) {
                core = (rc < g.r_leg && !in_gap(zc)) || (rc > g.r_window_out && rc < g.r_shell_out);
            } else if (az < g.z_core) {
                core = rc < g.r_shell_out;
            }
            if (core) {
                mat[c] = Material::core;
                mu[c] = d.core.mu_r;
                continue;
            }
            if (rc > g.r_coil_in && rc < g.r_coil_out && az < g.z_coil && inside_turn(zc)) {
                mat[c] = Material::conductor;
                sig[c] = d.coil.sigma;
                turn[c] = std::clamp(static_cast<int>(std::floor((zc + g.z_coil) / pitch)), 0, d.coil.N - 1);
            }
        }
    }

    Grid grid(std::move(r), std::move(z), std::move(mat), std::move(mu), std::move(sig), std::move(turn), d.coil.N);
    for (const auto& gap : d.core.gaps)
        grid.gap_marks.push_back({g.r_leg, gap.position - gap.length / 2, gap.position + gap.length / 2});
    return grid;
}

// ---------------------------------------------------------------------------
// Element integration

namespace detail {

struct GaussRule {
    // 3-point Gauss-Legendre on [0, 1]
    static constexpr double x[3] = {0.1127016653792583, 0.5, 0.8872983346207417};
    static constexpr double w[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
};

/// Bilinear shape functions at (xi, eta); local order (i,j), (i+1,j), (i,j+1), (i+1,j+1).
inline void shape(double xi, double eta, double n[4], double dxi[4], double deta[4]) {
    n[0] = (1 - xi) * (1 - eta);
    n[1] = xi * (1 - eta);
    n[2] = (1 - xi) * eta;
    n[3] = xi * eta;
    dxi[0] = -(1 - eta);
    dxi[1] = (1 - eta);
    dxi[2] = -eta;
    dxi[3] = eta;
    deta[0] = -(1 - xi);
    deta[1] = -xi;
    deta[2] = (1 - xi);
    deta[3] = xi;
}

template <class F>
void for_each_gauss_point(double r0, double r1, double z0, double z1, F&& f) {
    const double hr = r1 - r0;
    const double hz = z1 - z0;
    double n[4], dxi[4], deta[4];
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            const double xi = GaussRule::x[a];
            const double eta = GaussRule::x[b];
            shape(xi, eta, n, dxi, deta);
            const double r = r0 + xi * hr;
            const double z = z0 + eta * hz;
            const double dA = GaussRule::w[a] * GaussRule::w[b] * hr * hz;
            double dr[4], dz[4];
            for (int k = 0; k < 4; ++k) {
                dr[k] = dxi[k] / hr;
                dz[k] = deta[k] / hz;
            }
            f(r, z, dA, n, dr, dz);
        }
}

}  // namespace detail

enum class SourceShape { voltage_driven, uniform };

/// Source weight w(r) of the per-turn source density J_s = s_k w(r).
inline double source_weight(SourceShape shape, double r) { return shape == SourceShape::uniform ? 1.0 : 1.0 / r; }

struct FieldProblem {
    std::shared_ptr<const Grid> grid;
    double omega = 0.0;
    cplx current = 1.0;  ///< terminal current, peak phasor [A]
    SourceShape shape = SourceShape::voltage_driven;
};

struct LinearSystem {
    SparseMatrix matrix;            ///< row-equilibrated
    Eigen::VectorXcd rhs;
    Eigen::VectorXd row_scale;      ///< applied to each row of the raw system
    std::vector<int> free_index;    ///< node -> unknown, -1 on Dirichlet nodes
    int free_nodes = 0;
    int turns = 0;
    std::vector<double> source_integral;  ///< int_k w dr dz per turn
    int dimension() const { return free_nodes + turns; }
};

inline LinearSystem assemble(const FieldProblem& p) {
    if (!p.grid) throw GeometryError("femq: problem has no grid");
    if (!(p.omega >= 0.0) || !std::isfinite(p.omega)) throw NumericalError("femq: omega must be finite and >= 0");
    if (std::abs(p.current) == 0.0) throw NumericalError("femq: terminal current must be non-zero");
    const Grid& g = *p.grid;
    const auto& re = g.r_edges();
    const auto& ze = g.z_edges();

    LinearSystem sys;
    sys.turns = g.turns();
    sys.free_index.assign(g.node_count(), -1);
    for (int j = 0; j <= g.nz(); ++j)
        for (int i = 0; i <= g.nr(); ++i)
            if (!g.is_dirichlet(i, j)) sys.free_index[g.node(i, j)] = sys.free_nodes++;

    // The source unknown of turn k is scaled by I / G_k so it is O(1).
    std::vector<double> G(g.turns(), 0.0);
    for (int j = 0; j < g.nz(); ++j)
        for (int i = 0; i < g.nr(); ++i) {
            const int t = g.turn(g.cell(i, j));
            if (t < 0) continue;
            detail::for_each_gauss_point(re[i], re[i + 1], ze[j], ze[j + 1],
                                         [&](double r, double, double dA, const double*, const double*, const double*) {
                                             G[t] += source_weight(p.shape, r) * dA;
                                         });
        }
    sys.source_integral = G;

    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(static_cast<size_t>(g.cell_count()) * 16 + static_cast<size_t>(g.turns()) * 2000);
    const cplx jw(0.0, p.omega);
    const int n_free = sys.free_nodes;

    for (int j = 0; j < g.nz(); ++j)
        for (int i = 0; i < g.nr(); ++i) {
            const int c = g.cell(i, j);
            const double nu = 1.0 / (mu0 * g.mu_r(c));
            const double sigma = g.sigma(c);
            const int t = g.turn(c);
            double k[4][4] = {};
            double m[4][4] = {};
            double b[4] = {};
            double cc[4] = {};
            detail::for_each_gauss_point(
                re[i], re[i + 1], ze[j], ze[j + 1],
                [&](double r, double, double dA, const double* n, const double* dr, const double* dz) {
                    for (int a = 0; a < 4; ++a) {
                        const double curl_a = dr[a] + n[a] / r;
                        for (int q = 0; q < 4; ++q) {
                            k[a][q] += nu * (curl_a * (dr[q] + n[q] / r) + dz[a] * dz[q]) * r * dA;
                            m[a][q] += sigma * n[a] * n[q] * r * dA;
                        }
                        if (t >= 0) {
                            b[a] += source_weight(p.shape, r) * n[a] * r * dA;
                            cc[a] += sigma * n[a] * dA;
                        }
                    }
                });
            const int nodes[4] = {g.node(i, j), g.node(i + 1, j), g.node(i, j + 1), g.node(i + 1, j + 1)};
            for (int a = 0; a < 4; ++a) {
                const int row = sys.free_index[nodes[a]];
                for (int q = 0; q < 4; ++q) {
                    const int col = sys.free_index[nodes[q]];
                    if (row >= 0 && col >= 0) trip.emplace_back(row, col, cplx(k[a][q]) + jw * m[a][q]);
                }
                if (t >= 0 && row >= 0) {
                    trip.emplace_back(row, n_free + t, -b[a] * (p.current / G[t]));
                    if (p.omega > 0 && sigma > 0) trip.emplace_back(n_free + t, row, -jw * cc[a] / p.current);
                }
            }
        }
    for (int t = 0; t < g.turns(); ++t) trip.emplace_back(n_free + t, n_free + t, cplx(1.0));

    const int dim = sys.dimension();
    SparseMatrix a(dim, dim);
    a.setFromTriplets(trip.begin(), trip.end());
    a.makeCompressed();

    sys.row_scale = Eigen::VectorXd::Zero(dim);
    for (int col = 0; col < a.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(a, col); it; ++it)
            sys.row_scale(it.row()) = std::max(sys.row_scale(it.row()), std::abs(it.value()));
    for (int r = 0; r < dim; ++r) sys.row_scale(r) = sys.row_scale(r) > 0 ? 1.0 / sys.row_scale(r) : 1.0;
    for (int col = 0; col < a.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(a, col); it; ++it) it.valueRef() *= sys.row_scale(it.row());

    sys.matrix = std::move(a);
    sys.rhs = Eigen::VectorXcd::Zero(dim);
    for (int t = 0; t < g.turns(); ++t) sys.rhs(n_free + t) = sys.row_scale(n_free + t);
    return sys;
}

struct SolveStats {
    int unknowns = 0;
    long nonzeros = 0;
    std::string method;
    double assemble_seconds = 0.0;
    double solve_seconds = 0.0;
    std::vector<double> residual_history;  ///< relative residual after each pass
};

struct FieldSolution {
    std::shared_ptr<const Grid> grid;
    double omega = 0.0;
    cplx current;
    SourceShape shape = SourceShape::voltage_driven;
    std::vector<cplx> A;               ///< A_phi at every grid node [Wb/m]
    std::vector<cplx> source;          ///< s_k: J_s = s_k w(r) in turn k
    double relative_residual = 0.0;
    std::vector<double> constraint_residual;  ///< |net turn current - I| / |I| per turn
    SolveStats stats;

    /// Per-turn voltage u_k = 2 pi s_k / sigma (voltage-driven sources only).
    cplx turn_voltage(int k, double sigma) const { return 2.0 * pi * source[k] / sigma; }
};

namespace detail {

inline double relative_residual(const SparseMatrix& a, const Eigen::VectorXcd& x, const Eigen::VectorXcd& b) {
    return (b - a * x).norm() / b.norm();
}

/// Normwise backward error |b - A x|_inf / (|A|_inf |x|_inf + |b|_inf).
inline double backward_error(const SparseMatrix& a, const Eigen::VectorXcd& x, const Eigen::VectorXcd& b) {
    Eigen::VectorXd row_sum = Eigen::VectorXd::Zero(a.rows());
    for (int col = 0; col < a.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(a, col); it; ++it) row_sum(it.row()) += std::abs(it.value());
    const double denom = row_sum.maxCoeff() * x.cwiseAbs().maxCoeff() + b.cwiseAbs().maxCoeff();
    return (b - a * x).cwiseAbs().maxCoeff() / denom;
}

}  // namespace detail

/// Direct sparse LU with iterative refinement until the relative residual is
/// below `tolerance` or stops improving; the result is accepted when the
/// normwise backward error is at working precision. BiCGSTAB/ILUT otherwise.
inline FieldSolution solve_field(const LinearSystem& sys, const FieldProblem& p, double tolerance = 1e-10) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    FieldSolution sol;
    sol.grid = p.grid;
    sol.omega = p.omega;
    sol.current = p.current;
    sol.shape = p.shape;
    sol.stats.unknowns = sys.dimension();
    sol.stats.nonzeros = sys.matrix.nonZeros();

    Eigen::VectorXcd x;
    bool direct_ok = false;
    {
#ifdef FLATWIRE_HAVE_UMFPACK
        Eigen::UmfPackLU<SparseMatrix> lu;
        sol.stats.method = "umfpack";
#else
        Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
        sol.stats.method = "sparselu";
#endif
        lu.compute(sys.matrix);
        if (lu.info() == Eigen::Success) {
            x = lu.solve(sys.rhs);
            double res = detail::relative_residual(sys.matrix, x, sys.rhs);
            sol.stats.residual_history.push_back(res);
            for (int pass = 0; pass < 4 && res > tolerance && std::isfinite(res); ++pass) {
                const Eigen::VectorXcd r = sys.rhs - sys.matrix * x;
                const Eigen::VectorXcd next = x + lu.solve(r);
                const double next_res = detail::relative_residual(sys.matrix, next, sys.rhs);
                if (!(next_res < 0.5 * res)) break;
                x = next;
                res = next_res;
                sol.stats.residual_history.push_back(res);
            }
            direct_ok = std::isfinite(res) && (res <= tolerance || detail::backward_error(sys.matrix, x, sys.rhs) <= 1e-13);
        }
    }
    if (!direct_ok) {
        Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<cplx>> it;
        it.preconditioner().setDroptol(1e-6);
        it.preconditioner().setFillfactor(20);
        it.setTolerance(tolerance);
        it.setMaxIterations(20000);
        it.compute(sys.matrix);
        if (it.info() != Eigen::Success) throw NumericalError("femq: singular system (factorization and preconditioner setup failed)");
        x = it.solve(sys.rhs);
        sol.stats.method = "bicgstab-ilut";
        const double res = detail::relative_residual(sys.matrix, x, sys.rhs);
        sol.stats.residual_history.push_back(res);
        if (!(res <= tolerance)) {
            std::string hist;
            for (double h : sol.stats.residual_history) {
                char buf[32];
                std::snprintf(buf, sizeof buf, " %.3e", h);
                hist += buf;
            }
            throw NumericalError("femq: solver did not converge; residual history:" + hist);
        }
    }
    sol.relative_residual = sol.stats.residual_history.back();

    const Grid& g = *p.grid;
    sol.A.assign(g.node_count(), cplx{});
    for (int n = 0; n < g.node_count(); ++n)
        if (int k = sys.free_index[n]; k >= 0) sol.A[n] = x(k);
    sol.source.resize(g.turns());
    for (int t = 0; t < g.turns(); ++t) sol.source[t] = x(sys.free_nodes + t) * p.current / sys.source_integral[t];

    // Net current per turn from the field, same quadrature as the assembly.
    std::vector<cplx> net(g.turns(), cplx{});
    const auto& re = g.r_edges();
    const auto& ze = g.z_edges();
    for (int j = 0; j < g.nz(); ++j)
        for (int i = 0; i < g.nr(); ++i) {
            const int c = g.cell(i, j);
            const int t = g.turn(c);
            if (t < 0) continue;
            const cplx a4[4] = {sol.A[g.node(i, j)], sol.A[g.node(i + 1, j)], sol.A[g.node(i, j + 1)],
                                sol.A[g.node(i + 1, j + 1)]};
            detail::for_each_gauss_point(re[i], re[i + 1], ze[j], ze[j + 1],
                                         [&](double r, double, double dA, const double* n, const double*, const double*) {
                                             const cplx a = n[0] * a4[0] + n[1] * a4[1] + n[2] * a4[2] + n[3] * a4[3];
                                             net[t] += (sol.source[t] * source_weight(p.shape, r) -
                                                        cplx(0.0, p.omega) * g.sigma(c) * a) * dA;
                                         });
        }
    sol.constraint_residual.resize(g.turns());
    for (int t = 0; t < g.turns(); ++t) sol.constraint_residual[t] = std::abs(net[t] - p.current) / std::abs(p.current);

    sol.stats.solve_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    return sol;
}

/// Assemble and solve in one call.
inline FieldSolution solve(const FieldProblem& p) {
    const auto t0 = std::chrono::steady_clock::now();
    LinearSystem sys = assemble(p);
    const double t_asm = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    FieldSolution sol = solve_field(sys, p);
    sol.stats.assemble_seconds = t_asm;
    return sol;
}

/// Bilinear interpolation of A inside cell (i, j) at local (xi, eta).
inline cplx interpolate(const FieldSolution& s, int i, int j, double xi, double eta) {
    const Grid& g = *s.grid;
    return (1 - xi) * (1 - eta) * s.A[g.node(i, j)] + xi * (1 - eta) * s.A[g.node(i + 1, j)] +
           (1 - xi) * eta * s.A[g.node(i, j + 1)] + xi * eta * s.A[g.node(i + 1, j + 1)];
}

}  // namespace flatwire::femq
