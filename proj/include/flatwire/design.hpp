#pragma once

// Parametric description of a flat-wire helical inductor on a gapped,
// axisymmetric-equivalent ferrite core. All stored values are SI.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <toml.hpp>

#include "flatwire/errors.hpp"
#include "flatwire/units.hpp"

namespace flatwire {

inline constexpr double copper_conductivity = 5.8e7;  // [S/m] at 20 degC
inline constexpr double default_core_mu_r = 3000.0;

struct CoilSpec {
    double r_w = 0.0;    ///< inner coil radius [m]
    double D_w = 0.0;    ///< radial conductor depth [m]
    double t_w = 0.0;    ///< axial conductor thickness [m]
    double s = 0.0;      ///< axial turn-to-turn spacing [m]
    int N = 0;           ///< turn count
    double sigma = copper_conductivity;

    bool operator==(const CoilSpec&) const = default;
};

/// One cut in the center leg; `position` is the gap center measured from the window mid-plane.
struct Gap {
    double position = 0.0;
    double length = 0.0;

    bool operator==(const Gap&) const = default;
};

struct CoreSpec {
    double center_leg_radius = 0.0;
    double window_width = 0.0;
    double window_height = 0.0;
    double outer_leg_thickness = 0.0;  ///< radial thickness of the equivalent cylindrical shell
    double yoke_thickness = 0.0;       ///< axial thickness of the top and bottom plates
    double A_e = 0.0;                  ///< datasheet effective area per segment [m^2]
    double outer_leg_area = 0.0;       ///< datasheet outer-leg area; 0 means "same as A_e"
    double return_path_length = 0.0;   ///< yokes plus outer legs, for the reluctance network
    double mu_r = default_core_mu_r;
    std::vector<Gap> gaps;

    double total_gap() const {
        double g = 0.0;
        for (const auto& gap : gaps) g += gap.length;
        return g;
    }
    double outer_area_target() const { return outer_leg_area > 0.0 ? outer_leg_area : A_e; }

    bool operator==(const CoreSpec&) const = default;
};

struct Clearances {
    double D_left = 0.0;
    double D_right = 0.0;

    bool operator==(const Clearances&) const = default;
};

enum class FringingModel { none, arc };

/// Reluctance-network modelling choices. The fringing permeance of each gap is
/// coefficient * mu0 * (2 pi r_leg) * ln(1 + pi * r_f / g) with r_f = radius_factor * g.
struct MecOptions {
    FringingModel fringing = FringingModel::arc;
    double fringing_coefficient = 1.0 / pi;
    double fringing_radius_factor = 1.0;
    bool window_leakage = true;

    bool operator==(const MecOptions&) const = default;
};

struct InductorDesign {
    CoilSpec coil;
    CoreSpec core;
    Clearances clearances;
    std::optional<double> lead_resistance;  ///< R_L; unset means "use the computed DCR"
    MecOptions mec;

    bool operator==(const InductorDesign&) const = default;
};

struct DerivedDims {
    double h_w = 0.0;                ///< coil height N t_w + (N-1) s
    double R_av = 0.0;               ///< r_w + D_w / 2
    double radial_occupancy = 0.0;   ///< D_w / window width
    double axial_occupancy = 0.0;    ///< h_w / window height
    double copper_fill = 0.0;        ///< N t_w D_w / window area
};

inline double coil_height(const CoilSpec& c) { return c.N * c.t_w + (c.N - 1) * c.s; }

inline DerivedDims derived_dims(const InductorDesign& d) {
    DerivedDims out;
    out.h_w = coil_height(d.coil);
    out.R_av = d.coil.r_w + d.coil.D_w / 2.0;
    out.radial_occupancy = d.coil.D_w / d.core.window_width;
    out.axial_occupancy = out.h_w / d.core.window_height;
    out.copper_fill = d.coil.N * d.coil.t_w * d.coil.D_w / (d.core.window_width * d.core.window_height);
    return out;
}

/// Radii and heights of the axisymmetric equivalent geometry, origin at the window mid-plane.
struct AxisymmetricLayout {
    double r_leg;         // center-leg radius
    double r_coil_in;
    double r_coil_out;
    double r_window_out;  // inner face of the outer shell
    double r_shell_out;
    double z_window;      // window half height
    double z_core;        // outer face of the yoke
    double z_coil;        // coil half height
};

inline AxisymmetricLayout layout(const InductorDesign& d) {
    AxisymmetricLayout g{};
    g.r_leg = d.core.center_leg_radius;
    g.r_coil_in = d.coil.r_w;
    g.r_coil_out = d.coil.r_w + d.coil.D_w;
    g.r_window_out = d.core.center_leg_radius + d.core.window_width;
    g.r_shell_out = g.r_window_out + d.core.outer_leg_thickness;
    g.z_window = d.core.window_height / 2.0;
    g.z_core = g.z_window + d.core.yoke_thickness;
    g.z_coil = coil_height(d.coil) / 2.0;
    return g;
}

/// Shell thickness that gives a cylindrical outer leg of area `area` around radius `r_inner`.
inline double shell_thickness_for_area(double r_inner, double area) {
    return std::sqrt(r_inner * r_inner + area / pi) - r_inner;
}

namespace detail {
inline bool close(double a, double b, double rel, double abs_tol = 1e-9) {
    return std::abs(a - b) <= abs_tol + rel * std::max(std::abs(a), std::abs(b));
}
}  // namespace detail

/// Every violated invariant, each naming one field. Empty means valid.
inline std::vector<Violation> validate(const InductorDesign& d) {
    std::vector<Violation> v;
    auto need = [&](bool ok, const char* field, const char* msg) {
        if (!ok) v.push_back({field, msg});
    };
    const auto& c = d.coil;
    need(c.r_w > 0, "coil.r_w", "must be > 0");
    need(c.D_w > 0, "coil.D_w", "must be > 0");
    need(c.t_w > 0, "coil.t_w", "must be > 0");
    need(c.s >= 0, "coil.s", "must be >= 0");
    need(c.N >= 1, "coil.N", "must be an integer >= 1");
    need(c.sigma > 0, "coil.sigma", "must be > 0");

    const auto& k = d.core;
    need(k.center_leg_radius > 0, "core.center_leg_radius", "must be > 0");
    need(k.window_width > 0, "core.window_width", "must be > 0");
    need(k.window_height > 0, "core.window_height", "must be > 0");
    need(k.outer_leg_thickness > 0, "core.outer_leg_thickness", "must be > 0");
    need(k.yoke_thickness > 0, "core.yoke_thickness", "must be > 0");
    need(k.A_e > 0, "core.A_e", "must be > 0");
    need(k.outer_leg_area >= 0, "core.outer_leg_area", "must be >= 0");
    need(k.return_path_length >= 0, "core.return_path_length", "must be >= 0");
    need(k.mu_r > 1, "core.mu_r", "must be > 1");

    if (k.center_leg_radius > 0 && k.window_width > 0 && k.outer_leg_thickness > 0) {
        const double ri = k.center_leg_radius + k.window_width;
        const double ro = ri + k.outer_leg_thickness;
        need(detail::close(pi * (ro * ro - ri * ri), k.outer_area_target(), 0.02),
             "core.outer_leg_thickness", "shell area must match the outer-leg area within 2 %");
    }

    std::vector<Gap> gaps = k.gaps;
    std::sort(gaps.begin(), gaps.end(), [](const Gap& a, const Gap& b) { return a.position < b.position; });
    bool lengths_ok = true;
    bool inside_ok = true;
    bool overlap_ok = true;
    for (size_t i = 0; i < gaps.size(); ++i) {
        lengths_ok &= gaps[i].length > 0;
        inside_ok &= std::abs(gaps[i].position) + gaps[i].length / 2 <= k.window_height / 2 + 1e-12;
        if (i > 0)
            overlap_ok &= gaps[i - 1].position + gaps[i - 1].length / 2 <= gaps[i].position - gaps[i].length / 2;
    }
    need(lengths_ok, "core.gaps", "every gap length must be > 0");
    need(inside_ok, "core.gaps", "gaps must lie inside the window height");
    need(overlap_ok, "core.gaps", "gaps must not overlap");

    const auto& cl = d.clearances;
    need(cl.D_left >= 0, "clearances.D_left", "must be >= 0");
    need(cl.D_right >= 0, "clearances.D_right", "must be >= 0");
    if (k.window_width > 0) {
        need(detail::close(cl.D_left + c.D_w + cl.D_right, k.window_width, 1e-6, 1e-9),
             "clearances.D_right", "D_left + D_w + D_right must equal the window width");
    }
    if (c.N >= 1 && c.t_w > 0 && k.window_height > 0)
        need(coil_height(c) <= k.window_height * (1 + 1e-12), "coil.N", "coil height h_w exceeds the window height");
    need(c.r_w >= k.center_leg_radius + cl.D_left - 1e-9, "coil.r_w", "must be >= center-leg radius + D_left");

    if (d.lead_resistance) need(*d.lead_resistance > 0, "lead_resistance", "must be > 0");
    need(d.mec.fringing_coefficient > 0, "fringing.coefficient", "must be > 0");
    need(d.mec.fringing_radius_factor > 0, "fringing.radius_factor", "must be > 0");
    return v;
}

inline void require_valid(const InductorDesign& d) {
    auto v = validate(d);
    if (!v.empty()) throw ValidationError(std::move(v));
}

// ---------------------------------------------------------------------------
// Config I/O

namespace detail {

inline int line_of(const toml::node& n) { return static_cast<int>(n.source().begin.line); }

class TableReader {
public:
    TableReader(const toml::table* table, std::string section, std::vector<Violation>& missing)
        : table_(table), section_(std::move(section)), missing_(missing) {}

    bool present() const { return table_ != nullptr; }

    std::optional<double> quantity(const char* key, Dimension dim, bool required = true) {
        const toml::node* n = find(key, required);
        if (!n) return std::nullopt;
        return to_quantity(*n, dim, field(key));
    }

    std::optional<int> integer(const char* key) {
        const toml::node* n = find(key, true);
        if (!n) return std::nullopt;
        if (auto i = n->value_exact<int64_t>()) return static_cast<int>(*i);
        if (auto f = n->value_exact<double>(); f && std::floor(*f) == *f) return static_cast<int>(*f);
        throw ParseError("expected an integer", line_of(*n), field(key));
    }

    std::optional<std::string> string(const char* key) {
        const toml::node* n = find(key, false);
        if (!n) return std::nullopt;
        if (auto s = n->value_exact<std::string>()) return *s;
        throw ParseError("expected a string", line_of(*n), field(key));
    }

    std::optional<bool> boolean(const char* key) {
        const toml::node* n = find(key, false);
        if (!n) return std::nullopt;
        if (auto b = n->value_exact<bool>()) return *b;
        throw ParseError("expected true or false", line_of(*n), field(key));
    }

    const toml::array* array(const char* key, bool required) {
        const toml::node* n = find(key, required);
        if (!n) return nullptr;
        if (auto a = n->as_array()) return a;
        throw ParseError("expected an array", line_of(*n), field(key));
    }

    /// Rejects keys not consumed through this reader; catches typos.
    void reject_unknown() const {
        if (!table_) return;
        for (auto&& [k, node] : *table_) {
            const std::string key(k.str());
            if (std::find(seen_.begin(), seen_.end(), key) == seen_.end())
                throw ParseError("unknown key", line_of(node), section_ + "." + key);
        }
    }

    std::string field(std::string_view key) const { return section_ + "." + std::string(key); }

    static double to_quantity(const toml::node& n, Dimension dim, const std::string& field) {
        if (auto f = n.value<double>()) {
            if (!n.is_string()) return *f;
        }
        if (auto s = n.value_exact<std::string>()) {
            try {
                return parse_quantity(*s, dim, field);
            } catch (const ParseError& e) {
                throw ParseError(e.what(), line_of(n));
            }
        }
        throw ParseError("expected a number or a quantity string", line_of(n), field);
    }

private:
    const toml::node* find(const char* key, bool required) {
        seen_.emplace_back(key);
        const toml::node* n = table_ ? table_->get(key) : nullptr;
        if (!n && required) missing_.push_back({field(key), "missing required field"});
        return n;
    }

    const toml::table* table_;
    std::string section_;
    std::vector<Violation>& missing_;
    std::vector<std::string> seen_;
};

inline std::string fmt_double(double x) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    std::string s(buf, p);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

}  // namespace detail

/// Parses config text. Throws ParseError on malformed text or ill-typed values and
/// ValidationError listing every missing field and violated invariant.
inline InductorDesign load_design(std::string_view text) {
    toml::table root;
    try {
        root = toml::parse(text);
    } catch (const toml::parse_error& e) {
        throw ParseError(std::string(e.description()), static_cast<int>(e.source().begin.line));
    }

    for (auto&& [k, node] : root) {
        const std::string key(k.str());
        if (key != "coil" && key != "core" && key != "clearances" && key != "fringing" &&
            key != "circuit")
            throw ParseError("unknown section", detail::line_of(node), key);
        if (!node.is_table()) throw ParseError("expected a [section]", detail::line_of(node), key);
    }

    std::vector<Violation> missing;
    InductorDesign d;
    using detail::TableReader;

    TableReader coil(root["coil"].as_table(), "coil", missing);
    if (auto v = coil.integer("N")) d.coil.N = *v;
    if (auto v = coil.quantity("r_w", Dimension::length)) d.coil.r_w = *v;
    if (auto v = coil.quantity("D_w", Dimension::length)) d.coil.D_w = *v;
    if (auto v = coil.quantity("t_w", Dimension::length)) d.coil.t_w = *v;
    if (auto v = coil.quantity("s", Dimension::length)) d.coil.s = *v;
    if (auto v = coil.quantity("sigma", Dimension::none, false)) d.coil.sigma = *v;
    coil.reject_unknown();

    TableReader core(root["core"].as_table(), "core", missing);
    if (auto v = core.quantity("center_leg_radius", Dimension::length)) d.core.center_leg_radius = *v;
    if (auto v = core.quantity("window_width", Dimension::length)) d.core.window_width = *v;
    if (auto v = core.quantity("window_height", Dimension::length)) d.core.window_height = *v;
    if (auto v = core.quantity("outer_leg_thickness", Dimension::length)) d.core.outer_leg_thickness = *v;
    if (auto v = core.quantity("yoke_thickness", Dimension::length)) d.core.yoke_thickness = *v;
    if (auto v = core.quantity("A_e", Dimension::area)) d.core.A_e = *v;
    if (auto v = core.quantity("outer_leg_area", Dimension::area, false)) d.core.outer_leg_area = *v;
    if (auto v = core.quantity("return_path_length", Dimension::length)) d.core.return_path_length = *v;
    if (auto v = core.quantity("mu_r", Dimension::none, false)) d.core.mu_r = *v;
    if (const toml::array* gaps = core.array("gaps", true)) {
        for (const toml::node& item : *gaps) {
            const toml::table* t = item.as_table();
            if (!t) throw ParseError("gap entries must be {position, length} tables", detail::line_of(item), "core.gaps");
            TableReader g(t, "core.gaps", missing);
            Gap gap;
            if (auto v = g.quantity("position", Dimension::length)) gap.position = *v;
            if (auto v = g.quantity("length", Dimension::length)) gap.length = *v;
            g.reject_unknown();
            d.core.gaps.push_back(gap);
        }
    }
    core.reject_unknown();

    TableReader cl(root["clearances"].as_table(), "clearances", missing);
    if (auto v = cl.quantity("D_left", Dimension::length)) d.clearances.D_left = *v;
    if (auto v = cl.quantity("D_right", Dimension::length)) d.clearances.D_right = *v;
    cl.reject_unknown();

    TableReader fr(root["fringing"].as_table(), "fringing", missing);
    if (auto m = fr.string("model")) {
        if (*m == "arc") d.mec.fringing = FringingModel::arc;
        else if (*m == "none") d.mec.fringing = FringingModel::none;
        else throw ParseError("expected \"arc\" or \"none\"", detail::line_of(*root["fringing"]["model"].node()), "fringing.model");
    }
    if (auto v = fr.quantity("coefficient", Dimension::none, false)) d.mec.fringing_coefficient = *v;
    if (auto v = fr.quantity("radius_factor", Dimension::none, false)) d.mec.fringing_radius_factor = *v;
    if (auto b = fr.boolean("window_leakage")) d.mec.window_leakage = *b;
    fr.reject_unknown();

    TableReader circ(root["circuit"].as_table(), "circuit", missing);
    if (auto v = circ.quantity("lead_resistance", Dimension::none, false)) d.lead_resistance = *v;
    circ.reject_unknown();

    auto violations = validate(d);
    missing.insert(missing.end(), violations.begin(), violations.end());
    if (!missing.empty()) throw ValidationError(std::move(missing));
    return d;
}

/// Writes a config document (SI values, shortest round-trip formatting) that
/// load_design reads back field-for-field.
inline std::string save_design(const InductorDesign& d) {
    using detail::fmt_double;
    std::ostringstream o;
    o << "[coil]\n"
      << "N = " << d.coil.N << "\n"
      << "r_w = " << fmt_double(d.coil.r_w) << "\n"
      << "D_w = " << fmt_double(d.coil.D_w) << "\n"
      << "t_w = " << fmt_double(d.coil.t_w) << "\n"
      << "s = " << fmt_double(d.coil.s) << "\n"
      << "sigma = " << fmt_double(d.coil.sigma) << "\n\n";
    o << "[core]\n"
      << "center_leg_radius = " << fmt_double(d.core.center_leg_radius) << "\n"
      << "window_width = " << fmt_double(d.core.window_width) << "\n"
      << "window_height = " << fmt_double(d.core.window_height) << "\n"
      << "outer_leg_thickness = " << fmt_double(d.core.outer_leg_thickness) << "\n"
      << "yoke_thickness = " << fmt_double(d.core.yoke_thickness) << "\n"
      << "A_e = " << fmt_double(d.core.A_e) << "\n"
      << "outer_leg_area = " << fmt_double(d.core.outer_leg_area) << "\n"
      << "return_path_length = " << fmt_double(d.core.return_path_length) << "\n"
      << "mu_r = " << fmt_double(d.core.mu_r) << "\n"
      << "gaps = [\n";
    for (const auto& g : d.core.gaps)
        o << "  { position = " << fmt_double(g.position) << ", length = " << fmt_double(g.length) << " },\n";
    o << "]\n\n";
    o << "[clearances]\n"
      << "D_left = " << fmt_double(d.clearances.D_left) << "\n"
      << "D_right = " << fmt_double(d.clearances.D_right) << "\n\n";
    o << "[fringing]\n"
      << "model = \"" << (d.mec.fringing == FringingModel::arc ? "arc" : "none") << "\"\n"
      << "coefficient = " << fmt_double(d.mec.fringing_coefficient) << "\n"
      << "radius_factor = " << fmt_double(d.mec.fringing_radius_factor) << "\n"
      << "window_leakage = " << (d.mec.window_leakage ? "true" : "false") << "\n";
    if (d.lead_resistance) o << "\n[circuit]\nlead_resistance = " << fmt_double(*d.lead_resistance) << "\n";
    return o.str();
}

/// Annotated config schema printed by the `schema` subcommand.
inline constexpr std::string_view config_schema = R"(# flatwire inductor config (TOML)
# Lengths are SI numbers (metres) or strings with a unit suffix: "9.0 mm", "0.9 cm", "1e-3 m".
# Areas accept "mm2", "cm2", "m2". Unknown keys are rejected.

[coil]
N = 41                    # turn count, integer >= 1
r_w = "9.0 mm"            # inner coil radius
D_w = "8.0 mm"            # radial conductor depth
t_w = "0.58 mm"           # axial conductor thickness
s = "0.13 mm"             # axial spacing between turns (>= 0)
sigma = 5.8e7             # conductor conductivity [S/m], optional (copper)

[core]                    # axisymmetric equivalent of the ferrite core
center_leg_radius = "7.45 mm"  # round center pole, used as is
window_width = "11.05 mm"      # = D_left + D_w + D_right
window_height = "29.5 mm"      # must hold the coil height N t_w + (N-1) s
outer_leg_thickness = "1.655 mm" # cylindrical shell; area must match outer_leg_area within 2 %
yoke_thickness = "5.15 mm"     # axial thickness of top/bottom plates
A_e = "201 mm2"                # datasheet effective area (reluctance network)
outer_leg_area = "201 mm2"     # optional, defaults to A_e
return_path_length = "72.5 mm" # yokes + outer legs, reluctance network only
mu_r = 3000                    # optional, linear core permeability
gaps = [                       # center-leg gaps, position measured from the window mid-plane
  { position = "0 mm", length = "1 mm" },
]

[clearances]
D_left = "1.55 mm"        # coil to center leg
D_right = "1.5 mm"        # coil to outer leg

[fringing]                # optional
model = "arc"             # "arc" or "none"
coefficient = 0.3183      # permeance per unit perimeter = coefficient * mu0 * ln(1 + pi r_f / g)
radius_factor = 1.0       # r_f = radius_factor * g
window_leakage = true     # include the leg-to-coil annulus leakage path

[circuit]                 # optional
lead_resistance = 0.012   # R_L [ohm]; defaults to the planar DCR
)";

}  // namespace flatwire
