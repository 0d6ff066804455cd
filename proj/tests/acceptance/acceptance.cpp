// Acceptance run: one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "flatwire/dcr.hpp"
#include "flatwire/design.hpp"
#include "flatwire/femq.hpp"
#include "flatwire/mec.hpp"
#include "flatwire/post.hpp"
#include "flatwire/report.hpp"
#include "flatwire/ripple.hpp"
#include "flatwire/sweep.hpp"

using namespace flatwire;
using cplx = std::complex<double>;

namespace {

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

InductorDesign load(const std::string& name) {
    return load_design(report::read_file(std::string(FLATWIRE_CONFIG_DIR) + "/" + name));
}

std::shared_ptr<const femq::Grid> mesh(const InductorDesign& d, double f, double cells_per_delta = 3.0, int refine = 1) {
    femq::MeshPolicy p;
    p.max_frequency = f;
    p.cells_per_skin_depth = cells_per_delta;
    p.refine = refine;
    return std::make_shared<const femq::Grid>(femq::build_mesh(d, p));
}

// Shared prototype solves at 100 kHz, reused by C4 and C9.
struct PrototypeField {
    InductorDesign d;
    std::shared_ptr<const femq::Grid> grid;
    femq::FieldSolution dc, ac;
};

const PrototypeField& prototype_field() {
    static const PrototypeField pf = [] {
        PrototypeField p;
        p.d = load("pq4040_prototype.toml");
        p.grid = mesh(p.d, 100e3);
        p.dc = femq::solve({p.grid, 0.0, 1.0});
        p.ac = femq::solve({p.grid, angular(100e3), 1.0});
        return p;
    }();
    return pf;
}

void c1(Verdict& v) {
    const CoilSpec c{9.0e-3, 8.0e-3, 0.58e-3, 0.13e-3, 41, 5.8e7};
    const double planar = dcr::dcr_planar(c).resistance;
    const double average = dcr::dcr_average(c).resistance;
    v.detail << "planar " << planar * 1e3 << " mOhm, average " << average * 1e3 << " mOhm";
    v.require(rel(planar, 12.0e-3) <= 0.02, "planar within 2 % of 12.0 mOhm");
    v.require(rel(average, 12.45e-3) <= 0.02, "average within 2 % of 12.45 mOhm");
    v.require(rel(planar, 12.4e-3) <= 0.06 && rel(average, 12.4e-3) <= 0.06, "both within 6 % of 12.4 mOhm");
}

void c2(Verdict& v) {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> r_w(1e-3, 30e-3), ratio(0.01, 5.0), t_w(0.05e-3, 3e-3), s(0.0, 1e-3);
    std::uniform_int_distribution<int> turns(1, 120);
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
        CoilSpec c;
        c.r_w = r_w(rng);
        c.D_w = ratio(rng) * c.r_w;
        c.t_w = t_w(rng);
        c.s = s(rng);
        c.N = turns(rng);
        worst = std::max({worst,
                          rel(dcr::dcr_helical(c).resistance, dcr::dcr_quadrature(c, dcr::LengthModel::helical).resistance),
                          rel(dcr::dcr_planar(c).resistance, dcr::dcr_quadrature(c, dcr::LengthModel::planar).resistance),
                          rel(dcr::dcr_average(c).resistance, dcr::dcr_quadrature(c, dcr::LengthModel::average).resistance)});
    }
    v.detail << "worst relative difference over 100 coils " << worst;
    v.require(worst <= 1e-9, "closed forms match quadrature to 1e-9");
}

void c3(Verdict& v) {
    auto d = load("pq4040_prototype.toml");
    auto bare = d;
    bare.mec.fringing = FringingModel::none;
    bare.mec.window_leakage = false;
    const double L_bare = mec::zero_freq_inductance(mec::build_network(bare), d.coil.N);
    const double L_full = mec::zero_freq_inductance(mec::build_network(d), d.coil.N);
    v.detail << "gaps only " << L_bare * 1e6 << " uH, with fringing " << L_full * 1e6 << " uH";
    v.require(rel(L_bare, 84.9e-6) <= 0.01, "gaps-only L0 within 1 % of 84.9 uH");
    v.require(L_full >= 84.9e-6 && L_full <= 101e-6, "fringing L0 in [84.9, 101] uH");
    v.require(rel(L_full, 87.9e-6) <= 0.15, "fringing L0 within 15 % of 87.9 uH");
}

void c4(Verdict& v) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto& p = prototype_field();
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double rac = post::ac_resistance(p.ac);
    const double absL = std::abs(post::inductance(p.ac));
    const double cells = p.grid->max_conductor_cell_over_skin_depth(angular(100e3));
    v.detail << "Rac " << rac * 1e3 << " mOhm, |L| " << absL * 1e6 << " uH, " << p.grid->cell_count() << " cells, "
             << 1.0 / cells << " cells/delta, " << seconds << " s";
    v.require(rel(rac, 357e-3) <= 0.25, "Rac within 25 % of 357 mOhm");
    v.require(rel(absL, 87.9e-6) <= 0.15, "|L| within 15 % of 87.9 uH");
    v.require(1.0 / cells >= 3.0 - 1e-9, "at least 3 cells per skin depth");
}

/// Current density in a 2 mm conducting shell at r = 1 m and 100 kHz against the slab solution.
double slab_peak_error(double cells_per_delta) {
    const double f = 100e3, sigma = 5.8e7, r0 = 1.0, h = 1e-3, d = 2e-3;
    const double w = angular(f), delta = skin_depth(w, sigma);
    std::vector<double> r{0.0};
    const int n_air = 40;
    for (int k = 1; k <= n_air; ++k) r.push_back(r0 * k / n_air);
    const int n_cond = static_cast<int>(std::ceil(d / delta * cells_per_delta));
    for (int k = 1; k <= n_cond; ++k) r.push_back(r0 + d * k / n_cond);
    const int nr = static_cast<int>(r.size()) - 1;
    std::vector<femq::Material> mat(nr, femq::Material::air);
    std::vector<double> mu(nr, 1.0), sig(nr, 0.0);
    std::vector<int> turn(nr, -1);
    for (int i = n_air; i < nr; ++i) {
        mat[i] = femq::Material::conductor;
        sig[i] = sigma;
        turn[i] = 0;
    }
    auto g = std::make_shared<const femq::Grid>(r, std::vector<double>{0.0, h}, mat, mu, sig, turn, 1, femq::Boundary::neumann,
                                                femq::Boundary::neumann);
    const auto J = post::current_density(femq::solve({g, w, 1.0}));
    const cplx k(1.0 / delta, 1.0 / delta);
    const double K = 1.0 / h;
    const double peak = std::abs(K * k / std::tanh(k * d));
    double worst = 0;
    for (int i = n_air; i < nr; ++i) {
        const double x = 0.5 * (r[i] + r[i + 1]) - r0;
        const cplx exact = K * k * std::cosh(k * (d - x)) / std::sinh(k * d);
        worst = std::max(worst, std::abs(J.total[i] - exact) / peak);
    }
    return worst;
}

void c5(Verdict& v) {
    const double err = slab_peak_error(4.0);
    const auto& p = prototype_field();
    const double rdc = post::ac_resistance(p.dc);
    const double planar = dcr::dcr_planar(p.d.coil).resistance;
    v.detail << "slab error " << err * 100 << " % of surface density at 4 cells/delta; Rac(0) " << rdc * 1e3
             << " mOhm vs planar " << planar * 1e3 << " mOhm";
    v.require(err <= 0.02, "slab profile within 2 %");
    v.require(rel(rdc, planar) <= 0.01, "Rac(0) within 1 % of planar DCR");
}

void c6(Verdict& v) {
    const ripple::ConverterPoint p{50.0, 100e3, 82.8e-6, 0.425};
    const auto s = ripple::ac_loss_spectrum(p, ripple::RacModel::sqrt_f(p.Rac_fs, p.f_s), 25);
    const double pi4 = pi * pi * pi * pi;
    const double coefficient = s.P_ac / (2 * p.Rac_fs * p.V_o * p.V_o / (pi4 * p.L * p.L * p.f_s * p.f_s));
    const auto simple = ripple::ac_loss_simplified(p);
    const double forms = rel(simple.from_voltage, simple.from_ripple);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", coefficient);
    v.detail << "coefficient " << buf << " (" << coefficient << "), printed forms differ by " << forms;
    v.require(std::string(buf) == "1.027", "coefficient equals 1.027 to 4 significant digits");
    v.require(forms <= 4 * std::numeric_limits<double>::epsilon(), "printed forms agree to machine precision");
}

std::vector<sweep::Row> trend(const InductorDesign& base, sweep::Parameter param, std::vector<double> values) {
    sweep::SweepSpec s;
    s.parameter = param;
    s.values = std::move(values);
    s.solver.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    auto rows = sweep::run(base, s);
    for (const auto& r : rows)
        if (!r.ok) throw NumericalError("sweep point " + report::number(r.value) + " failed: " + r.error);
    return rows;
}

template <class F>
bool strictly(const std::vector<sweep::Row>& rows, F field, bool up) {
    for (size_t i = 1; i < rows.size(); ++i)
        if (up ? !(field(rows[i]) > field(rows[i - 1])) : !(field(rows[i]) < field(rows[i - 1]))) return false;
    return true;
}

template <class F>
double spread(const std::vector<sweep::Row>& rows, F field) {
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& r : rows) {
        lo = std::min(lo, field(r));
        hi = std::max(hi, field(r));
    }
    return (hi - lo) / lo;
}

void c7(Verdict& v) {
    const auto base = load("pq4040_prototype.toml");
    auto L = [](const sweep::Row& r) { return r.abs_L; };
    auto R = [](const sweep::Row& r) { return r.dcr; };
    auto P = [](const sweep::Row& r) { return r.P_ac; };
    auto A = [](const sweep::Row& r) { return r.rac; };

    const auto left = trend(base, sweep::Parameter::D_left, {1.05e-3, 1.30e-3, 1.55e-3, 1.80e-3, 2.05e-3});
    v.require(strictly(left, L, true), "D_left: |L| strictly increasing");
    v.require(strictly(left, R, true), "D_left: DCR strictly increasing");
    v.require(strictly(left, P, false), "D_left: AC loss decreasing");
    v.detail << "D_left: |L| " << left.front().abs_L * 1e6 << "->" << left.back().abs_L * 1e6 << " uH, P_ac "
             << left.front().P_ac << "->" << left.back().P_ac << " W";

    const auto right = trend(base, sweep::Parameter::D_right, {0.5e-3, 1.0e-3, 1.5e-3, 2.0e-3, 2.5e-3});
    v.require(strictly(right, R, true), "D_right: DCR strictly increasing");
    v.require(spread(right, A) <= 0.10, "D_right: Rac within 10 %");
    v.require(spread(right, L) <= 0.02, "D_right: |L| within 2 %");
    v.detail << "; D_right: Rac spread " << spread(right, A) * 100 << " %, |L| spread " << spread(right, L) * 100 << " %";

    const auto tw = trend(base, sweep::Parameter::t_w, {0.46e-3, 0.49e-3, 0.52e-3, 0.55e-3, 0.58e-3});
    v.require(strictly(tw, R, false), "t_w: DCR strictly decreasing");
    v.require(strictly(tw, L, false), "t_w: |L| decreasing");
    v.detail << "; t_w: |L| " << tw.front().abs_L * 1e6 << "->" << tw.back().abs_L * 1e6 << " uH";
}

void c8(Verdict& v) {
    const auto five = load("pq4040_prototype.toml");
    const auto one = load("pq4040_single_gap.toml");
    v.require(five.core.total_gap() == one.core.total_gap() && five.coil == one.coil, "designs differ only in gap layout");
    const double w = angular(100e3);
    const double p5 = post::ohmic_loss(femq::solve({mesh(five, 100e3), w, 1.0}));
    const double p1 = post::ohmic_loss(femq::solve({mesh(one, 100e3), w, 1.0}));
    v.detail << "loss per A^2: five 1 mm gaps " << p5 << " W, one 5 mm gap " << p1 << " W";
    v.require(p5 < p1, "distributed gap loses less");
}

void c9(Verdict& v) {
    const auto& p = prototype_field();
    double residual = 0;
    for (double c : p.ac.constraint_residual) residual = std::max(residual, c);
    for (double c : p.dc.constraint_residual) residual = std::max(residual, c);
    const double balance = rel(post::terminal_power(p.ac), post::ohmic_loss(p.ac));
    const double L0 = post::inductance(p.dc).real();
    const auto point = post::response_point(p.ac, L0);
    const double identity = std::abs(point.L * (1.0 + point.Q) - L0) / L0;

    const auto fine = femq::solve({mesh(p.d, 100e3, 3.0, 2), angular(100e3), 1.0});
    const double d_rac = rel(post::ac_resistance(fine), post::ac_resistance(p.ac));
    const double d_L = rel(std::abs(post::inductance(fine)), std::abs(post::inductance(p.ac)));
    v.detail << "net-current residual " << residual << ", energy balance " << balance << ", L(1+Q) identity " << identity
             << ", mesh doubling: Rac " << d_rac * 100 << " %, |L| " << d_L * 100 << " %";
    v.require(residual < 1e-8, "per-turn net-current residual < 1e-8");
    v.require(balance <= 0.01, "energy balance within 1 %");
    v.require(identity <= 1e-14, "L(1+Q) = L0 to machine precision");
    v.require(d_rac < 0.02 && d_L < 0.02, "mesh doubling changes Rac and |L| by < 2 %");
}

void ripple_property(Verdict& v) {
    const auto d = load("pq4040_prototype.toml");
    const std::vector<double> freqs{10e3, 30e3, 50e3, 70e3, 90e3, 110e3, 130e3, 150e3, 170e3, 190e3, 200e3};
    const auto resp = sweep::frequency_response(d, freqs);
    std::vector<double> f, r;
    for (const auto& pt : resp.points) {
        f.push_back(pt.frequency);
        r.push_back(pt.Rac);
    }
    const double L = std::abs(resp.points.front().L);
    const ripple::ConverterPoint cp{50.0, 10e3, L, r.front()};
    const double table = ripple::ac_loss_spectrum(cp, ripple::RacModel::tabulated(f, r), 19).P_ac;
    const double rule = ripple::ac_loss_spectrum(cp, ripple::RacModel::sqrt_f(cp.Rac_fs, cp.f_s), 19).P_ac;
    v.detail << "f_s 10 kHz, harmonics to 190 kHz: tabulated " << table << " W, sqrt(f) rule " << rule << " W, difference "
             << rel(rule, table) * 100 << " %";
    v.require(rel(rule, table) <= 0.15, "agreement within 15 %");
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria{
        {"C1 DCR closed forms", c1},
        {"C2 DCR quadrature equivalence", c2},
        {"C3 MEC zero-frequency inductance", c3},
        {"C4 field solver at 100 kHz", c4},
        {"C5 slab skin effect and DC resistance", c5},
        {"C6 harmonic constant", c6},
        {"C7 geometry trends", c7},
        {"C8 distributed gap", c8},
        {"C9 solver properties", c9},
        {"ripple: tabulated Rac vs sqrt(f) rule", ripple_property},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Verdict v;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            check(v);
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail << " [error: " << e.what() << "]";
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %s (%.2f s): %s\n", v.pass ? "PASS" : "FAIL", name.c_str(), s, v.detail.str().c_str());
        std::fflush(stdout);
        failed += !v.pass;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed ? 1 : 0;
}
