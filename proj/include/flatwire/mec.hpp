#pragma once

// Magnetic equivalent circuit of the gapped core: a reluctance ladder along the
// center leg (core pieces in series with gaps, each gap shunted by its fringing
// path), the window-leakage path across the stack, and the return path carrying
// the coil MMF. Eddy currents enter as a frequency-dependent series reluctance
// R0 Q(jw), which is coupled to the terminal equations to give Z(jw) and L(jw).

#include <algorithm>
#include <complex>
#include <functional>
#include <queue>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "flatwire/design.hpp"
#include "flatwire/errors.hpp"
#include "flatwire/units.hpp"

namespace flatwire::mec {

using cplx = std::complex<double>;

enum class ElementKind { gap, core, fringing, window_leakage, eddy };

inline constexpr std::string_view to_string(ElementKind k) {
    switch (k) {
        case ElementKind::gap: return "gap";
        case ElementKind::core: return "core";
        case ElementKind::fringing: return "fringing";
        case ElementKind::window_leakage: return "window-leakage";
        case ElementKind::eddy: return "eddy";
    }
    return "?";
}

/// Reluctance [A-turn/Wb] as a function of angular frequency.
using ReluctanceFn = std::function<cplx(double omega)>;

struct Element {
    ElementKind kind;
    int from;
    int to;
    std::string label;
    ReluctanceFn reluctance;
    /// MMF source in series with this branch is source_turns * I_L, driving flux from -> to.
    double source_turns = 0.0;
};

class ReluctanceNetwork {
public:
    int add_node() { return node_count_++; }
    int node_count() const { return node_count_; }

    int add_element(ElementKind kind, int from, int to, std::string label, ReluctanceFn r,
                    double source_turns = 0.0) {
        if (from < 0 || to < 0 || from >= node_count_ || to >= node_count_ || from == to)
            throw TopologyError("mec: element '" + label + "' has invalid endpoints");
        elements_.push_back({kind, from, to, std::move(label), std::move(r), source_turns});
        if (source_turns != 0.0) source_ = static_cast<int>(elements_.size()) - 1;
        return static_cast<int>(elements_.size()) - 1;
    }

    /// Constant real reluctance element.
    int add_constant(ElementKind kind, int from, int to, std::string label, double r, double source_turns = 0.0) {
        return add_element(kind, from, to, std::move(label), [r](double) { return cplx(r); }, source_turns);
    }

    const std::vector<Element>& elements() const { return elements_; }
    /// Index of the branch carrying the coil MMF, -1 if none.
    int source_element() const { return source_; }
    double source_turns() const { return source_ >= 0 ? elements_[source_].source_turns : 0.0; }

    bool connected() const {
        if (node_count_ == 0) return false;
        std::vector<std::vector<int>> adj(node_count_);
        for (const auto& e : elements_) {
            adj[e.from].push_back(e.to);
            adj[e.to].push_back(e.from);
        }
        std::vector<bool> seen(node_count_, false);
        std::queue<int> q;
        q.push(0);
        seen[0] = true;
        int count = 1;
        while (!q.empty()) {
            int n = q.front();
            q.pop();
            for (int m : adj[n])
                if (!seen[m]) {
                    seen[m] = true;
                    ++count;
                    q.push(m);
                }
        }
        return count == node_count_;
    }

private:
    int node_count_ = 0;
    std::vector<Element> elements_;
    int source_ = -1;
};

// ---------------------------------------------------------------------------
// Element formulas

inline double gap_reluctance(double g, double area) { return g / (mu0 * area); }

inline double core_reluctance(double length, double mu_r, double area) { return length / (mu_r * mu0 * area); }

/// Permeance of the arc-shaped fringing paths around one gap on a leg of radius r_leg.
inline double fringing_permeance(double g, double r_leg, const MecOptions& opt) {
    if (opt.fringing == FringingModel::none) return 0.0;
    const double r_f = opt.fringing_radius_factor * g;
    return opt.fringing_coefficient * mu0 * (2.0 * pi * r_leg) * std::log1p(pi * r_f / g);
}

/// Leakage path through the annulus between the center leg and the coil inner radius.
inline double window_leakage_reluctance(const InductorDesign& d) {
    const double r_leg = d.core.center_leg_radius;
    const double area = pi * (d.coil.r_w * d.coil.r_w - r_leg * r_leg);
    if (area <= 0.0) return INFINITY;
    return coil_height(d.coil) / (mu0 * area);
}

/// Ladder network for the design; node 0 is the bottom of the center leg.
inline ReluctanceNetwork build_network(const InductorDesign& d) {
    require_valid(d);
    const auto& core = d.core;
    ReluctanceNetwork net;
    const int bottom = net.add_node();

    std::vector<Gap> gaps = core.gaps;
    std::sort(gaps.begin(), gaps.end(), [](const Gap& a, const Gap& b) { return a.position < b.position; });

    int node = bottom;
    double z = -core.window_height / 2.0;
    auto add_core_piece = [&](double z_top, const std::string& label) {
        const double len = z_top - z;
        if (len > 0.0) {
            const int next = net.add_node();
            net.add_constant(ElementKind::core, node, next, label, core_reluctance(len, core.mu_r, core.A_e));
            node = next;
        }
        z = z_top;
    };

    for (size_t i = 0; i < gaps.size(); ++i) {
        const auto& gap = gaps[i];
        add_core_piece(gap.position - gap.length / 2.0, "center-leg-" + std::to_string(i));
        const int next = net.add_node();
        net.add_constant(ElementKind::gap, node, next, "gap-" + std::to_string(i), gap_reluctance(gap.length, core.A_e));
        const double pf = fringing_permeance(gap.length, core.center_leg_radius, d.mec);
        if (pf > 0.0) net.add_constant(ElementKind::fringing, node, next, "fringing-" + std::to_string(i), 1.0 / pf);
        node = next;
        z = gap.position + gap.length / 2.0;
    }
    add_core_piece(core.window_height / 2.0, "center-leg-" + std::to_string(gaps.size()));
    if (node == bottom) {
        // Degenerate: no center-leg elements at all. Keep the source branch well defined.
        const int next = net.add_node();
        net.add_constant(ElementKind::core, node, next, "center-leg", core_reluctance(core.window_height, core.mu_r, core.A_e));
        node = next;
    }
    const int top = node;

    if (d.mec.window_leakage) {
        const double r_lw = window_leakage_reluctance(d);
        if (std::isfinite(r_lw)) net.add_constant(ElementKind::window_leakage, bottom, top, "window-leakage", r_lw);
    }
    net.add_constant(ElementKind::core, top, bottom, "return-path",
                     core_reluctance(core.return_path_length, core.mu_r, core.A_e), d.coil.N);
    return net;
}

// ---------------------------------------------------------------------------
// Solution

struct FluxSolution {
    double omega = 0.0;
    cplx mmf;                           ///< source MMF N I_L
    std::vector<cplx> potentials;       ///< magnetic scalar potential per node (node 0 = 0)
    std::vector<cplx> branch_flux;      ///< per element, oriented from -> to [Wb]
    std::vector<cplx> reluctances;      ///< per element at omega
    cplx source_flux;                   ///< flux through the source branch
    cplx total_reluctance() const { return mmf / source_flux; }

    /// Largest nodal flux imbalance relative to the largest branch flux.
    double conservation_residual(const ReluctanceNetwork& net) const {
        std::vector<cplx> sum(net.node_count(), cplx{});
        double scale = 0.0;
        for (size_t i = 0; i < branch_flux.size(); ++i) {
            const auto& e = net.elements()[i];
            sum[e.from] -= branch_flux[i];
            sum[e.to] += branch_flux[i];
            scale = std::max(scale, std::abs(branch_flux[i]));
        }
        double worst = 0.0;
        for (auto s : sum) worst = std::max(worst, std::abs(s));
        return scale > 0 ? worst / scale : worst;
    }
};

/// Branch-flux analysis: unknowns are node potentials (node 0 grounded) and one
/// flux per element, so zero-valued (eddy) reluctances need no special casing.
inline FluxSolution solve_flux(const ReluctanceNetwork& net, double current, double omega = 0.0) {
    if (net.source_element() < 0) throw TopologyError("mec: network has no MMF source");
    if (!net.connected()) throw TopologyError("mec: reluctance network is not connected");

    const int n_pot = net.node_count() - 1;
    const int m = static_cast<int>(net.elements().size());
    const int dim = n_pot + m;
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(dim);

    FluxSolution sol;
    sol.omega = omega;
    sol.reluctances.resize(m);
    auto pot = [](int node) { return node - 1; };  // column of U_node, -1 for ground

    for (int i = 0; i < m; ++i) {
        const auto& e = net.elements()[i];
        const cplx r = e.reluctance(omega);
        sol.reluctances[i] = r;
        const int row_branch = n_pot + i;
        const int col_flux = n_pot + i;
        // U_from - U_to - R phi = -F
        if (pot(e.from) >= 0) a(row_branch, pot(e.from)) += 1.0;
        if (pot(e.to) >= 0) a(row_branch, pot(e.to)) -= 1.0;
        a(row_branch, col_flux) = -r;
        rhs(row_branch) = -e.source_turns * current;
        // flux leaves `from`, enters `to`
        if (pot(e.from) >= 0) a(pot(e.from), col_flux) += 1.0;
        if (pot(e.to) >= 0) a(pot(e.to), col_flux) -= 1.0;
    }

    // Rows mix incidence entries (1) with reluctances up to ~1e9; equilibrate before the rank test.
    for (int r = 0; r < dim; ++r) {
        const double s = a.row(r).cwiseAbs().maxCoeff();
        if (s > 0) {
            a.row(r) /= s;
            rhs(r) /= s;
        }
    }
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(a);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) throw TopologyError("mec: singular reluctance network");
    Eigen::VectorXcd x = lu.solve(rhs);

    sol.mmf = net.source_turns() * current;
    sol.potentials.assign(net.node_count(), cplx{});
    for (int n = 1; n < net.node_count(); ++n) sol.potentials[n] = x(pot(n));
    sol.branch_flux.resize(m);
    for (int i = 0; i < m; ++i) sol.branch_flux[i] = x(n_pot + i);
    sol.source_flux = sol.branch_flux[net.source_element()];
    return sol;
}

/// Source-seen reluctance N I / phi_source at omega.
inline cplx total_reluctance(const ReluctanceNetwork& net, double omega = 0.0) {
    return solve_flux(net, 1.0, omega).total_reluctance();
}

inline double zero_freq_reluctance(const ReluctanceNetwork& net) { return total_reluctance(net, 0.0).real(); }

/// L0 = N^2 / R0.
inline double zero_freq_inductance(const ReluctanceNetwork& net, int turns) {
    return static_cast<double>(turns) * turns / zero_freq_reluctance(net);
}

// ---------------------------------------------------------------------------
// Q(jw)

/// Tabulated Q at frequencies [Hz], linear interpolation in f, or jw tau.
class QModel {
public:
    struct Table {
        std::vector<double> freq;
        std::vector<cplx> q;
    };
    struct FirstOrder {
        double tau;
    };

    static QModel zero() { return QModel(FirstOrder{0.0}); }
    static QModel first_order(double tau) {
        if (!(tau >= 0.0)) throw NumericalError("mec: time constant tau must be >= 0");
        return QModel(FirstOrder{tau});
    }
    static QModel tabulated(std::vector<double> freq, std::vector<cplx> q) {
        if (freq.empty() || freq.size() != q.size()) throw NumericalError("mec: Q table needs matching, non-empty columns");
        for (size_t i = 1; i < freq.size(); ++i)
            if (!(freq[i] > freq[i - 1])) throw NumericalError("mec: Q table frequencies must be strictly increasing");
        if (freq.front() < 0.0) throw NumericalError("mec: Q table frequencies must be >= 0");
        for (size_t i = 0; i < q.size(); ++i) {
            if (freq[i] == 0.0 && std::abs(q[i]) > 1e-12) throw NumericalError("mec: Q(0) must be 0");
            if (q[i].real() < -1e-9) throw NumericalError("mec: Re Q must be >= 0 at tabulated points");
        }
        return QModel(Table{std::move(freq), std::move(q)});
    }

    cplx operator()(double omega) const {
        if (omega == 0.0) return {};
        if (const auto* fo = std::get_if<FirstOrder>(&form_)) return cplx(0.0, omega * fo->tau);
        const auto& t = std::get<Table>(form_);
        const double f = omega / (2.0 * pi);
        const double lo = t.freq.front();
        const double hi = t.freq.back();
        const double slack = 1e-12 * hi;
        if (f < lo - slack || f > hi + slack)
            throw RangeError("mec: Q requested at " + std::to_string(f) + " Hz, outside the tabulated range [" +
                             std::to_string(lo) + ", " + std::to_string(hi) + "] Hz");
        if (t.freq.size() == 1) return t.q.front();
        auto it = std::lower_bound(t.freq.begin(), t.freq.end(), f);
        if (it == t.freq.end()) return t.q.back();
        size_t j = static_cast<size_t>(it - t.freq.begin());
        if (t.freq[j] == f || j == 0) return t.q[j];
        const double w = (f - t.freq[j - 1]) / (t.freq[j] - t.freq[j - 1]);
        return (1.0 - w) * t.q[j - 1] + w * t.q[j];
    }

    bool is_tabulated() const { return std::holds_alternative<Table>(form_); }
    const Table* table() const { return std::get_if<Table>(&form_); }

private:
    explicit QModel(std::variant<Table, FirstOrder> form) : form_(std::move(form)) {}
    std::variant<Table, FirstOrder> form_;
};

/// R_t(jw) = R0 (1 + Q(jw)).
inline cplx apply_Q(const ReluctanceNetwork& net, const QModel& q, double omega) {
    const double r0 = zero_freq_reluctance(net);
    return r0 * (1.0 + q(omega));
}

/// Copy of the network with the eddy reluctance R0 Q(jw) in series with the source branch.
inline ReluctanceNetwork with_eddy_element(const ReluctanceNetwork& net, const QModel& q) {
    const double r0 = zero_freq_reluctance(net);
    ReluctanceNetwork out;
    for (int i = 0; i < net.node_count(); ++i) out.add_node();
    const int src = net.source_element();
    for (int i = 0; i < static_cast<int>(net.elements().size()); ++i) {
        const auto& e = net.elements()[i];
        if (i != src) {
            out.add_element(e.kind, e.from, e.to, e.label, e.reluctance, e.source_turns);
            continue;
        }
        const int mid = out.add_node();
        out.add_element(ElementKind::eddy, e.from, mid, "eddy", [r0, q](double w) { return r0 * q(w); });
        out.add_element(e.kind, mid, e.to, e.label, e.reluctance, e.source_turns);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Terminal coupling

struct TerminalPoint {
    double omega = 0.0;
    cplx Z;             ///< V_L / I_L [ohm]
    cplx L_complex;     ///< N^2 / R_t(jw) [H]
    double L_apparent;  ///< Im(Z - R_L) / w; N^2 / R0 at w = 0
    cplx Q;
};

struct TerminalImpedance {
    double R_L = 0.0;
    int turns = 0;
    double L0 = 0.0;
    std::vector<TerminalPoint> points;
};

/// Solves [[R_L, jwN], [-N, R_t]] [I_L, phi]^T = [V_L, 0]^T with V_L = 1 at each w.
inline cplx solve_coupled(double R_L, int turns, cplx r_t, double omega) {
    Eigen::Matrix2cd a;
    a << cplx(R_L), cplx(0.0, omega * turns), cplx(-static_cast<double>(turns)), r_t;
    const cplx det = a.determinant();
    if (std::abs(det) == 0.0) throw NumericalError("mec: singular terminal system (R_L = 0 at w = 0)");
    const Eigen::Vector2cd x = a.partialPivLu().solve(Eigen::Vector2cd(1.0, 0.0));
    return 1.0 / x(0);
}

/// Closed-form counterpart: Z = R_L + jw N^2 / R_t.
inline cplx impedance_direct(double R_L, int turns, cplx r_t, double omega) {
    const double n2 = static_cast<double>(turns) * turns;
    return R_L + cplx(0.0, omega) * n2 / r_t;
}

inline TerminalImpedance terminal_impedance(double R_L, int turns, const ReluctanceNetwork& net, const QModel& q,
                                            const std::vector<double>& omegas) {
    TerminalImpedance out;
    out.R_L = R_L;
    out.turns = turns;
    const double r0 = zero_freq_reluctance(net);
    out.L0 = static_cast<double>(turns) * turns / r0;
    out.points.reserve(omegas.size());
    for (double w : omegas) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw NumericalError("mec: angular frequencies must be finite and >= 0");
        TerminalPoint p;
        p.omega = w;
        p.Q = q(w);
        const cplx r_t = r0 * (1.0 + p.Q);
        p.Z = solve_coupled(R_L, turns, r_t, w);
        p.L_complex = static_cast<double>(turns) * turns / r_t;
        p.L_apparent = w > 0.0 ? (p.Z - R_L).imag() / w : out.L0;
        out.points.push_back(p);
    }
    return out;
}

}  // namespace flatwire::mec
