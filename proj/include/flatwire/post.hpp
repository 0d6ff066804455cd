#pragma once

// Post-processing of field solutions: current densities, AC resistance from
// ohmic dissipation, flux-linkage inductance, Q(jw) extraction and loss maps.
//
// Convention: currents and densities are peak phasors, so time-average power is
// P = 1/2 int |J|^2 / sigma dV with dV = 2 pi r dr dz, and Rac = 2 P / |I|^2.

#include <cmath>
#include <complex>
#include <vector>

#include "flatwire/errors.hpp"
#include "flatwire/femq.hpp"
#include "flatwire/mec.hpp"

namespace flatwire::post {

using cplx = std::complex<double>;
using femq::FieldSolution;
using femq::Grid;

/// Cell-center samples; zero outside conductors.
struct CurrentDensity {
    std::vector<cplx> source;       ///< J_s = s_k w(r)
    std::vector<cplx> eddy;         ///< -jw sigma A
    std::vector<cplx> total;        ///< J_s + J_eddy
    std::vector<cplx> circulating;  ///< total minus the turn's mean I_L / A_turn; zero net per turn
};

namespace detail {

template <class F>
void for_each_conductor_point(const FieldSolution& s, F&& f) {
    const Grid& g = *s.grid;
    const auto& re = g.r_edges();
    const auto& ze = g.z_edges();
    const cplx jw(0.0, s.omega);
    for (int j = 0; j < g.nz(); ++j)
        for (int i = 0; i < g.nr(); ++i) {
            const int c = g.cell(i, j);
            const int t = g.turn(c);
            if (t < 0) continue;
            const cplx a4[4] = {s.A[g.node(i, j)], s.A[g.node(i + 1, j)], s.A[g.node(i, j + 1)],
                                s.A[g.node(i + 1, j + 1)]};
            femq::detail::for_each_gauss_point(
                re[i], re[i + 1], ze[j], ze[j + 1],
                [&](double r, double z, double dA, const double* n, const double*, const double*) {
                    const cplx a = n[0] * a4[0] + n[1] * a4[1] + n[2] * a4[2] + n[3] * a4[3];
                    const cplx js = s.source[t] * femq::source_weight(s.shape, r);
                    const cplx je = -jw * g.sigma(c) * a;
                    f(c, t, r, z, dA, a, js, je);
                });
        }
}

}  // namespace detail

inline CurrentDensity current_density(const FieldSolution& s) {
    const Grid& g = *s.grid;
    const auto& re = g.r_edges();
    const auto& ze = g.z_edges();
    const auto areas = g.turn_areas();
    CurrentDensity out;
    const size_t n = static_cast<size_t>(g.cell_count());
    out.source.assign(n, {});
    out.eddy.assign(n, {});
    out.total.assign(n, {});
    out.circulating.assign(n, {});
    const cplx jw(0.0, s.omega);
    for (int j = 0; j < g.nz(); ++j)
        for (int i = 0; i < g.nr(); ++i) {
            const int c = g.cell(i, j);
            const int t = g.turn(c);
            if (t < 0) continue;
            const double r = 0.5 * (re[i] + re[i + 1]);
            const cplx a = femq::interpolate(s, i, j, 0.5, 0.5);
            out.source[c] = s.source[t] * femq::source_weight(s.shape, r);
            out.eddy[c] = -jw * g.sigma(c) * a;
            out.total[c] = out.source[c] + out.eddy[c];
            out.circulating[c] = out.total[c] - s.current / areas[t];
            (void)ze;
        }
    return out;
}

/// Net current carried by each turn, integrated with the assembly quadrature.
inline std::vector<cplx> turn_currents(const FieldSolution& s) {
    std::vector<cplx> net(s.grid->turns(), cplx{});
    detail::for_each_conductor_point(s, [&](int, int t, double, double, double dA, cplx, cplx js, cplx je) {
        net[t] += (js + je) * dA;
    });
    return net;
}

/// Net eddy (-jw sigma A) and circulating current per turn.
struct EddyNet {
    std::vector<cplx> eddy;
    std::vector<cplx> circulating;
};

inline EddyNet eddy_net_currents(const FieldSolution& s) {
    const auto areas = s.grid->turn_areas();
    EddyNet out{std::vector<cplx>(s.grid->turns()), std::vector<cplx>(s.grid->turns())};
    detail::for_each_conductor_point(s, [&](int, int t, double, double, double dA, cplx, cplx js, cplx je) {
        out.eddy[t] += je * dA;
        out.circulating[t] += (js + je - s.current / areas[t]) * dA;
    });
    return out;
}

/// Time-average ohmic loss [W].
inline double ohmic_loss(const FieldSolution& s) {
    double p = 0.0;
    const Grid& g = *s.grid;
    detail::for_each_conductor_point(s, [&](int c, int, double r, double, double dA, cplx, cplx js, cplx je) {
        if (g.sigma(c) > 0) p += std::norm(js + je) / g.sigma(c) * 2.0 * pi * r * dA;
    });
    return 0.5 * p;
}

inline double ac_resistance(const FieldSolution& s) {
    if (std::abs(s.current) == 0.0) throw NumericalError("post: zero terminal current");
    return 2.0 * ohmic_loss(s) / std::norm(s.current);
}

/// L = lambda / I with lambda = sum over turns of the area-averaged 2 pi r A_phi.
inline cplx inductance(const FieldSolution& s) {
    const auto areas = s.grid->turn_areas();
    std::vector<cplx> link(s.grid->turns(), cplx{});
    detail::for_each_conductor_point(s, [&](int, int t, double r, double, double dA, cplx a, cplx, cplx) {
        link[t] += 2.0 * pi * r * a * dA;
    });
    cplx lambda{};
    for (int t = 0; t < s.grid->turns(); ++t) lambda += link[t] / areas[t];
    return lambda / s.current;
}

/// Terminal voltage sum_k u_k of a voltage-driven solution, u_k = 2 pi s_k / sigma.
inline cplx terminal_voltage(const FieldSolution& s) {
    if (s.shape != femq::SourceShape::voltage_driven)
        throw NumericalError("post: terminal voltage is defined for voltage-driven turns only");
    const Grid& g = *s.grid;
    std::vector<double> sigma(g.turns(), 0.0);
    for (int c = 0; c < g.cell_count(); ++c)
        if (int t = g.turn(c); t >= 0) sigma[t] = g.sigma(c);
    cplx v{};
    for (int t = 0; t < g.turns(); ++t) {
        if (!(sigma[t] > 0)) throw NumericalError("post: terminal voltage needs a conducting turn");
        v += s.turn_voltage(t, sigma[t]);
    }
    return v;
}

/// Time-average input power 1/2 Re{V I*} at the terminals.
inline double terminal_power(const FieldSolution& s) { return 0.5 * (terminal_voltage(s) * std::conj(s.current)).real(); }

// ---------------------------------------------------------------------------
// Loss map

enum class Region { gap_adjacent, window };

struct LossMap {
    std::vector<double> density;     ///< time-average [W/m^3] per cell
    std::vector<double> cell_loss;   ///< [W] per cell
    std::vector<double> turn_loss;   ///< [W] per turn
    std::vector<Region> region;      ///< per cell (meaningful on conductor cells)
    double gap_adjacent_loss = 0.0;
    double window_loss = 0.0;
    double total = 0.0;
    CurrentDensity J;
};

/// True when the cell center lies within 2 g of a gap opening on the leg surface.
inline bool near_gap(const Grid& g, double r, double z) {
    for (const auto& m : g.gap_marks) {
        const double len = m.z_hi - m.z_lo;
        const double dz = z < m.z_lo ? m.z_lo - z : (z > m.z_hi ? z - m.z_hi : 0.0);
        if (std::hypot(r - m.r_face, dz) <= 2.0 * len) return true;
    }
    return false;
}

inline LossMap loss_map(const FieldSolution& s) {
    const Grid& g = *s.grid;
    const auto& re = g.r_edges();
    const auto& ze = g.z_edges();
    LossMap m;
    const size_t n = static_cast<size_t>(g.cell_count());
    m.density.assign(n, 0.0);
    m.cell_loss.assign(n, 0.0);
    m.region.assign(n, Region::window);
    m.turn_loss.assign(g.turns(), 0.0);
    detail::for_each_conductor_point(s, [&](int c, int, double r, double, double dA, cplx, cplx js, cplx je) {
        if (g.sigma(c) > 0) m.cell_loss[c] += 0.5 * std::norm(js + je) / g.sigma(c) * 2.0 * pi * r * dA;
    });
    for (int j = 0; j < g.nz(); ++j)
        for (int i = 0; i < g.nr(); ++i) {
            const int c = g.cell(i, j);
            const int t = g.turn(c);
            if (t < 0) continue;
            const double rc = 0.5 * (re[i] + re[i + 1]);
            const double zc = 0.5 * (ze[j] + ze[j + 1]);
            const double vol = pi * (re[i + 1] * re[i + 1] - re[i] * re[i]) * (ze[j + 1] - ze[j]);
            m.density[c] = m.cell_loss[c] / vol;
            m.turn_loss[t] += m.cell_loss[c];
            m.region[c] = near_gap(g, rc, zc) ? Region::gap_adjacent : Region::window;
            (m.region[c] == Region::gap_adjacent ? m.gap_adjacent_loss : m.window_loss) += m.cell_loss[c];
            m.total += m.cell_loss[c];
        }
    m.J = current_density(s);
    return m;
}

/// Fraction of each turn's loss dissipated in its inner radial quarter.
inline std::vector<double> inner_quarter_loss_fraction(const FieldSolution& s, const LossMap& m, double r_in, double r_out) {
    const Grid& g = *s.grid;
    const auto& re = g.r_edges();
    std::vector<double> inner(g.turns(), 0.0);
    const double r_q = r_in + 0.25 * (r_out - r_in);
    for (int j = 0; j < g.nz(); ++j)
        for (int i = 0; i < g.nr(); ++i) {
            const int c = g.cell(i, j);
            const int t = g.turn(c);
            if (t >= 0 && 0.5 * (re[i] + re[i + 1]) < r_q) inner[t] += m.cell_loss[c];
        }
    for (int t = 0; t < g.turns(); ++t) inner[t] /= m.turn_loss[t];
    return inner;
}

// ---------------------------------------------------------------------------
// Frequency response and Q extraction

/// Q(jw) = L0 / L(jw) - 1 at each tabulated frequency (must be increasing).
inline mec::QModel extract_Q(const std::vector<double>& freq, const std::vector<cplx>& L, double L0) {
    if (freq.size() != L.size()) throw NumericalError("post: frequency and inductance columns differ in length");
    std::vector<cplx> q;
    q.reserve(L.size());
    for (size_t i = 0; i < L.size(); ++i) {
        if (std::abs(L[i]) == 0.0) throw NumericalError("post: cannot extract Q from a zero inductance");
        q.push_back(freq[i] == 0.0 ? cplx{} : L0 / L[i] - 1.0);
    }
    return mec::QModel::tabulated(freq, std::move(q));
}

struct ResponsePoint {
    double frequency = 0.0;
    double Rac = 0.0;
    cplx L;
    cplx Q;
    double loss_gap_adjacent = 0.0;  ///< [W] at the response's drive current
    double loss_window = 0.0;
    std::vector<double> turn_loss;
};

struct FrequencyResponse {
    double L0 = 0.0;
    double Rdc = 0.0;  ///< Rac at w = 0 on the same mesh
    std::vector<ResponsePoint> points;
};

/// One response point from a solution; `L0` sets Q.
inline ResponsePoint response_point(const FieldSolution& s, double L0) {
    ResponsePoint p;
    p.frequency = s.omega / (2.0 * pi);
    p.Rac = ac_resistance(s);
    p.L = inductance(s);
    p.Q = s.omega == 0.0 ? cplx{} : L0 / p.L - 1.0;
    const auto m = loss_map(s);
    p.loss_gap_adjacent = m.gap_adjacent_loss;
    p.loss_window = m.window_loss;
    p.turn_loss = m.turn_loss;
    return p;
}

}  // namespace flatwire::post
