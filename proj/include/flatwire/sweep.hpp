#pragma once

// Frequency-response driver and the design-sensitivity sweep engine.

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "flatwire/dcr.hpp"
#include "flatwire/design.hpp"
#include "flatwire/femq.hpp"
#include "flatwire/post.hpp"
#include "flatwire/report.hpp"

namespace flatwire::sweep {

struct ResponseOptions {
    femq::MeshPolicy mesh;
    femq::SourceShape shape = femq::SourceShape::voltage_driven;
    int jobs = 1;
};

/// Field solves at every frequency on one mesh sized for the highest of them.
/// The DC solve sets L0 and Rdc; a 0 in `freqs` reuses it.
inline post::FrequencyResponse frequency_response(const InductorDesign& d, const std::vector<double>& freqs,
                                                  const ResponseOptions& opt = {}) {
    for (size_t i = 0; i < freqs.size(); ++i) {
        if (!(freqs[i] >= 0) || !std::isfinite(freqs[i])) throw NumericalError("sweep: frequencies must be finite and >= 0");
        if (i > 0 && !(freqs[i] > freqs[i - 1])) throw NumericalError("sweep: frequencies must be strictly increasing");
    }
    femq::MeshPolicy policy = opt.mesh;
    if (!freqs.empty()) policy.max_frequency = std::max(policy.max_frequency, freqs.back());
    auto grid = std::make_shared<const femq::Grid>(femq::build_mesh(d, policy));

    const auto dc = femq::solve({grid, 0.0, 1.0, opt.shape});
    post::FrequencyResponse out;
    out.L0 = post::inductance(dc).real();
    out.Rdc = post::ac_resistance(dc);

    const auto results = report::parallel_map<post::ResponsePoint>(
        static_cast<int>(freqs.size()), opt.jobs, [&](int i) {
            if (freqs[i] == 0.0) return post::response_point(dc, out.L0);
            return post::response_point(femq::solve({grid, angular(freqs[i]), 1.0, opt.shape}), out.L0);
        });
    for (const auto& r : results) {
        if (!r.value) {
            if (r.category == static_cast<int>(ErrorCategory::config)) throw GeometryError(r.error);
            throw NumericalError(r.error);
        }
        out.points.push_back(*r.value);
    }
    return out;
}

inline report::Table response_table(const post::FrequencyResponse& r) {
    report::Table t({"f[Hz]", "Rac[ohm]", "L_re[H]", "L_im[H]", "abs_L[H]", "Q_re[1]", "Q_im[1]", "P_gap_adjacent[W/A^2]",
                     "P_window[W/A^2]"});
    for (const auto& p : r.points)
        t.add_row({p.frequency, p.Rac, p.L.real(), p.L.imag(), std::abs(p.L), p.Q.real(), p.Q.imag(), p.loss_gap_adjacent,
                   p.loss_window});
    return t;
}

// ---------------------------------------------------------------------------
// Sensitivity sweeps

enum class Parameter { D_left, D_right, t_w, s, gap_count, frequency };

/// Which dimension absorbs a clearance change so the window stays consistent.
enum class Closure { none, D_w_absorbs, window_absorbs };

inline constexpr std::string_view to_string(Parameter p) {
    switch (p) {
        case Parameter::D_left: return "D_left";
        case Parameter::D_right: return "D_right";
        case Parameter::t_w: return "t_w";
        case Parameter::s: return "s";
        case Parameter::gap_count: return "gap_count";
        case Parameter::frequency: return "frequency";
    }
    return "?";
}

inline Parameter parse_parameter(std::string_view s) {
    for (auto p : {Parameter::D_left, Parameter::D_right, Parameter::t_w, Parameter::s, Parameter::gap_count, Parameter::frequency})
        if (to_string(p) == s) return p;
    throw ParseError("unknown sweep parameter '" + std::string(s) + "'", 0, "parameter");
}

inline constexpr std::string_view to_string(Closure c) {
    switch (c) {
        case Closure::none: return "none";
        case Closure::D_w_absorbs: return "D_w";
        case Closure::window_absorbs: return "window";
    }
    return "?";
}

inline Closure parse_closure(std::string_view s) {
    for (auto c : {Closure::none, Closure::D_w_absorbs, Closure::window_absorbs})
        if (to_string(c) == s) return c;
    throw ParseError("unknown closure rule '" + std::string(s) + "'", 0, "closure");
}

inline std::string_view unit(Parameter p) {
    switch (p) {
        case Parameter::gap_count: return "1";
        case Parameter::frequency: return "Hz";
        default: return "m";
    }
}

struct SweepSpec {
    Parameter parameter = Parameter::D_left;
    std::vector<double> values;
    Closure closure = Closure::D_w_absorbs;
    double frequency = 100e3;  ///< field-solve frequency [Hz]; ignored for frequency sweeps
    double I_dc = 15.0;        ///< [A]
    double I_ac = 5.0;         ///< peak [A]
    bool field = true;         ///< false: DCR columns only
    ResponseOptions solver;

    void check() const {
        std::vector<Violation> v;
        if (values.empty()) v.push_back({"values", "sweep needs at least one value"});
        bool up = true, down = true;
        for (size_t i = 1; i < values.size(); ++i) {
            up &= values[i] > values[i - 1];
            down &= values[i] < values[i - 1];
        }
        if (values.size() > 1 && !up && !down) v.push_back({"values", "must be strictly monotone"});
        if (!(frequency > 0)) v.push_back({"frequency", "must be > 0"});
        if (parameter == Parameter::gap_count)
            for (double x : values)
                if (x < 1 || x != std::floor(x)) v.push_back({"values", "gap counts must be integers >= 1"});
        if (!v.empty()) throw ValidationError(std::move(v));
    }
};

/// Design at one sweep value. Gap-count sweeps keep the total gap length and
/// spread the gaps evenly over the window height.
inline InductorDesign apply(const InductorDesign& base, const SweepSpec& spec, double value) {
    InductorDesign d = base;
    auto& cl = d.clearances;
    auto& k = d.core;
    auto clearance = [&](double& field) {
        const double delta = value - field;
        field = value;
        switch (spec.closure) {
            case Closure::D_w_absorbs: d.coil.D_w -= delta; break;
            case Closure::window_absorbs: {
                k.window_width += delta;
                const double ri = k.center_leg_radius + k.window_width;
                k.outer_leg_thickness = shell_thickness_for_area(ri, k.outer_area_target());
                break;
            }
            case Closure::none: break;
        }
        d.coil.r_w = k.center_leg_radius + cl.D_left;
    };
    switch (spec.parameter) {
        case Parameter::D_left: clearance(cl.D_left); break;
        case Parameter::D_right: clearance(cl.D_right); break;
        case Parameter::t_w: d.coil.t_w = value; break;
        case Parameter::s: d.coil.s = value; break;
        case Parameter::gap_count: {
            const int n = static_cast<int>(value);
            const double g = k.total_gap() / n;
            const double pitch = k.window_height / n;
            k.gaps.clear();
            for (int i = 0; i < n; ++i) k.gaps.push_back({(i - (n - 1) / 2.0) * pitch, g});
            break;
        }
        case Parameter::frequency: break;
    }
    return d;
}

struct Row {
    double value = 0.0;
    bool ok = false;
    std::string error;
    double D_w = 0.0;
    double dcr = 0.0;     ///< planar closed form [ohm]
    double frequency = 0.0;
    double rac = 0.0;     ///< field solution at `frequency` [ohm]
    double abs_L = 0.0;   ///< [H]
    double P_dc = 0.0;    ///< I_dc^2 DCR [W]
    double P_ac = 0.0;    ///< 1/2 Rac I_ac^2 [W]
    double P_gap_adjacent = 0.0;
    double P_window = 0.0;
};

inline Row run_point(const InductorDesign& base, const SweepSpec& spec, double value) {
    Row row;
    row.value = value;
    const InductorDesign d = apply(base, spec, value);
    require_valid(d);
    row.D_w = d.coil.D_w;
    row.dcr = dcr::dcr_planar(d.coil).resistance;
    row.P_dc = spec.I_dc * spec.I_dc * row.dcr;
    row.frequency = spec.parameter == Parameter::frequency ? value : spec.frequency;
    if (spec.field) {
        femq::MeshPolicy policy = spec.solver.mesh;
        policy.max_frequency = std::max(policy.max_frequency, row.frequency);
        auto grid = std::make_shared<const femq::Grid>(femq::build_mesh(d, policy));
        const auto sol = femq::solve({grid, angular(row.frequency), 1.0, spec.solver.shape});
        const auto m = post::loss_map(sol);
        const double i2 = spec.I_ac * spec.I_ac;  // the solve is at 1 A peak
        row.rac = post::ac_resistance(sol);
        row.abs_L = std::abs(post::inductance(sol));
        row.P_ac = 0.5 * row.rac * i2;
        row.P_gap_adjacent = m.gap_adjacent_loss * i2;
        row.P_window = m.window_loss * i2;
    }
    row.ok = true;
    return row;
}

/// Independent points on a bounded worker pool; failed points become failed rows.
inline std::vector<Row> run(const InductorDesign& base, const SweepSpec& spec) {
    spec.check();
    const auto results = report::parallel_map<Row>(static_cast<int>(spec.values.size()), spec.solver.jobs,
                                                   [&](int i) { return run_point(base, spec, spec.values[i]); });
    std::vector<Row> rows;
    for (size_t i = 0; i < results.size(); ++i) {
        if (results[i].value) {
            rows.push_back(*results[i].value);
        } else {
            Row r;
            r.value = spec.values[i];
            r.error = results[i].error;
            rows.push_back(r);
        }
    }
    return rows;
}

inline report::Table table(const SweepSpec& spec, const std::vector<Row>& rows) {
    report::Table t({std::string(to_string(spec.parameter)) + "[" + std::string(unit(spec.parameter)) + "]", "status", "D_w[m]",
                     "DCR[ohm]", "f[Hz]", "Rac[ohm]", "abs_L[H]", "P_dc[W]", "P_ac[W]", "P_gap_adjacent[W]", "P_window[W]",
                     "error"});
    for (const auto& r : rows) {
        if (!r.ok) {
            t.add_row({report::number(r.value), "failed", "", "", "", "", "", "", "", "", "", r.error});
            continue;
        }
        auto n = [](double x) { return report::number(x); };
        const bool f = spec.field;
        t.add_row({n(r.value), "ok", n(r.D_w), n(r.dcr), f ? n(r.frequency) : "", f ? n(r.rac) : "", f ? n(r.abs_L) : "",
                   n(r.P_dc), f ? n(r.P_ac) : "", f ? n(r.P_gap_adjacent) : "", f ? n(r.P_window) : "", ""});
    }
    return t;
}

}  // namespace flatwire::sweep
