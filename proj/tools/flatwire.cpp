// flatwire: command-line front end for the inductor models.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flatwire/dcr.hpp"
#include "flatwire/design.hpp"
#include "flatwire/mec.hpp"
#include "flatwire/post.hpp"
#include "flatwire/report.hpp"
#include "flatwire/ripple.hpp"
#include "flatwire/sweep.hpp"

namespace fs = std::filesystem;
using namespace flatwire;

namespace {

struct Globals {
    std::string config;
    std::string out_dir;
    int jobs = 1;
    bool csv = false;
};

struct Loaded {
    InductorDesign design;
    std::string hash;
    std::string path;
};

Loaded load(const std::string& path) {
    if (path.empty()) throw ParseError("no config given (use --config FILE)", 0, "config");
    Loaded l;
    l.path = path;
    const std::string text = report::read_file(path);
    l.hash = report::fnv1a(text);
    l.design = load_design(text);
    return l;
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::vector<double> parse_list(const std::vector<std::string>& items, Dimension dim, const std::string& field) {
    std::vector<double> v;
    for (const auto& item : items)
        for (const auto& part : split(item)) v.push_back(parse_quantity(part, dim, field));
    return v;
}

/// "f0:f1:n" -> n log-spaced points from f0 to f1.
std::vector<double> log_range(const std::string& spec) {
    const auto a = spec.find(':');
    const auto b = spec.rfind(':');
    if (a == std::string::npos || a == b) throw ParseError("log range must be f0:f1:n", 0, "log-range");
    const double f0 = parse_quantity(spec.substr(0, a), Dimension::none, "log-range");
    const double f1 = parse_quantity(spec.substr(a + 1, b - a - 1), Dimension::none, "log-range");
    const int n = std::stoi(spec.substr(b + 1));
    if (!(f0 > 0) || !(f1 > f0) || n < 2) throw ParseError("log range needs 0 < f0 < f1 and n >= 2", 0, "log-range");
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(f0 * std::pow(f1 / f0, static_cast<double>(i) / (n - 1)));
    return v;
}

std::string fmt(const char* format, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, x);
    return buf;
}

void print_table(const report::Table& t) {
    std::vector<size_t> width(t.header().size());
    for (size_t i = 0; i < width.size(); ++i) width[i] = t.header()[i].size();
    for (const auto& r : t.rows())
        for (size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
    auto line = [&](const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i)
            std::cout << (i ? "  " : "") << cells[i] << std::string(width[i] - cells[i].size(), ' ');
        std::cout << '\n';
    };
    line(t.header());
    for (const auto& r : t.rows()) line(r);
}

class Output {
public:
    Output(const Globals& g, std::string command) : g_(g) {
        manifest_.command = std::move(command);
        dir_ = g.out_dir;
    }
    nlohmann::ordered_json& parameters() { return manifest_.parameters; }
    void config_hash(const std::string& h) { manifest_.config_hash = h; }

    void table(const std::string& name, const report::Table& t, bool show = true) {
        const auto path = fs::path(dir_) / name;
        report::write_file(path, t.str());
        manifest_.outputs.push_back(name);
        if (!show) return;
        if (g_.csv)
            std::cout << t.str();
        else
            print_table(t);
    }
    void finish() {
        manifest_.outputs.push_back("manifest.json");
        report::write_file(fs::path(dir_) / "manifest.json", manifest_.str());
        if (!g_.csv) std::cerr << "wrote " << manifest_.outputs.size() << " files to " << dir_ << "\n";
    }

private:
    const Globals& g_;
    report::Manifest manifest_;
    std::string dir_;
};

// ---------------------------------------------------------------------------

int cmd_dcr(const Globals& g, double temperature, bool use_temperature) {
    auto l = load(g.config);
    CoilSpec c = l.design.coil;
    if (use_temperature) c.sigma = dcr::copper_conductivity_at(temperature, c.sigma);
    Output out(g, "dcr");
    out.config_hash(l.hash);
    out.parameters()["config"] = l.path;
    out.parameters()["sigma"] = c.sigma;
    if (use_temperature) out.parameters()["temperature_C"] = temperature;

    report::Table t({"model", "R[ohm]", "R[mohm]", "equivalent_length[m]"});
    for (auto m : {dcr::Model::planar, dcr::Model::helical, dcr::Model::average, dcr::Model::quadrature}) {
        const auto r = dcr::dcr(c, m);
        t.add_row({std::string(dcr::to_string(m)), report::number(r.resistance), fmt("%.4f", r.resistance * 1e3),
                   report::number(r.equivalent_length)});
    }
    out.table("dcr.csv", t);
    out.finish();
    return 0;
}

int cmd_mec(const Globals& g, const std::vector<std::string>& freq_args, const std::string& q_source, double tau,
            double cells_per_delta) {
    auto l = load(g.config);
    const auto& d = l.design;
    const auto net = mec::build_network(d);
    const double r0 = mec::zero_freq_reluctance(net);
    const double R_L = d.lead_resistance.value_or(dcr::dcr_planar(d.coil).resistance);
    std::vector<double> freqs = parse_list(freq_args, Dimension::none, "freqs");
    std::sort(freqs.begin(), freqs.end());

    Output out(g, "mec");
    out.config_hash(l.hash);
    out.parameters()["config"] = l.path;
    out.parameters()["q_source"] = q_source;
    out.parameters()["R_L"] = R_L;

    report::Table el({"element", "kind", "from", "to", "reluctance[1/H]"});
    for (const auto& e : net.elements())
        el.add_row({e.label, std::string(mec::to_string(e.kind)), std::to_string(e.from), std::to_string(e.to),
                    report::number(e.reluctance(0.0).real())});
    out.table("mec_elements.csv", el, !g.csv);

    mec::QModel q = mec::QModel::zero();
    if (q_source == "tau") {
        q = mec::QModel::first_order(tau);
        out.parameters()["tau"] = tau;
    } else if (q_source == "fem") {
        if (freqs.empty()) throw ParseError("--q-source fem needs --freqs", 0, "freqs");
        sweep::ResponseOptions opt;
        opt.mesh.cells_per_skin_depth = cells_per_delta;
        opt.jobs = g.jobs;
        std::vector<double> fr = freqs;
        if (fr.front() != 0.0) fr.insert(fr.begin(), 0.0);
        const auto resp = sweep::frequency_response(d, fr, opt);
        std::vector<double> f;
        std::vector<std::complex<double>> L;
        for (const auto& p : resp.points) {
            f.push_back(p.frequency);
            L.push_back(p.L);
        }
        q = post::extract_Q(f, L, resp.L0);
        out.parameters()["cells_per_skin_depth"] = cells_per_delta;
    } else if (q_source != "none") {
        throw ParseError("--q-source must be none, tau or fem", 0, "q-source");
    }

    std::vector<double> omegas;
    for (double f : freqs) omegas.push_back(angular(f));
    const auto z = mec::terminal_impedance(R_L, d.coil.N, net, q, omegas);
    report::Table t({"f[Hz]", "Z_re[ohm]", "Z_im[ohm]", "L_re[H]", "L_im[H]", "L_apparent[H]", "Q_re[1]", "Q_im[1]"});
    for (const auto& p : z.points)
        t.add_row({p.omega / (2 * pi), p.Z.real(), p.Z.imag(), p.L_complex.real(), p.L_complex.imag(), p.L_apparent, p.Q.real(),
                   p.Q.imag()});
    if (!g.csv) {
        std::cout << "R0 = " << fmt("%.6g", r0) << " 1/H\n";
        std::cout << "L0 = " << fmt("%.4f", z.L0 * 1e6) << " uH\n";
        std::cout << "R_L = " << fmt("%.4f", R_L * 1e3) << " mohm\n";
    }
    if (!freqs.empty()) out.table("impedance.csv", t);
    out.finish();
    return 0;
}

struct SolveArgs {
    std::vector<std::string> freqs;
    std::string log_range;
    double cells_per_delta = 3.0;
    double padding = -1.0;
    int refine = 1;
    std::string shape = "voltage";
    bool dump_fields = false;
};

femq::SourceShape parse_shape(const std::string& s) {
    if (s == "voltage") return femq::SourceShape::voltage_driven;
    if (s == "uniform") return femq::SourceShape::uniform;
    throw ParseError("--shape must be voltage or uniform", 0, "shape");
}

int cmd_solve(const Globals& g, const SolveArgs& a) {
    auto l = load(g.config);
    std::vector<double> freqs = parse_list(a.freqs, Dimension::none, "freq");
    if (!a.log_range.empty())
        for (double f : log_range(a.log_range)) freqs.push_back(f);
    if (freqs.empty()) freqs = {0.0, 100e3};
    std::sort(freqs.begin(), freqs.end());
    freqs.erase(std::unique(freqs.begin(), freqs.end()), freqs.end());

    sweep::ResponseOptions opt;
    opt.mesh.cells_per_skin_depth = a.cells_per_delta;
    opt.mesh.refine = a.refine;
    if (a.padding >= 0) opt.mesh.padding = a.padding;
    opt.shape = parse_shape(a.shape);
    opt.jobs = g.jobs;

    Output out(g, "solve");
    out.config_hash(l.hash);
    out.parameters()["config"] = l.path;
    out.parameters()["frequencies"] = freqs;
    out.parameters()["cells_per_skin_depth"] = a.cells_per_delta;
    out.parameters()["refine"] = a.refine;
    out.parameters()["shape"] = a.shape;
    if (a.padding >= 0) out.parameters()["padding"] = a.padding;

    const auto resp = sweep::frequency_response(l.design, freqs, opt);
    if (!g.csv) {
        std::cout << "L0 = " << fmt("%.4f", resp.L0 * 1e6) << " uH, Rdc = " << fmt("%.4f", resp.Rdc * 1e3) << " mohm\n";
    }
    out.table("response.csv", sweep::response_table(resp));

    report::Table turns({"f[Hz]", "turn[1]", "P[W/A^2]"});
    for (const auto& p : resp.points)
        for (size_t k = 0; k < p.turn_loss.size(); ++k)
            turns.add_row({report::number(p.frequency), std::to_string(k + 1), report::number(p.turn_loss[k])});
    out.table("turn_loss.csv", turns, false);

    if (a.dump_fields) {
        femq::MeshPolicy policy = opt.mesh;
        policy.max_frequency = std::max(policy.max_frequency, freqs.back());
        auto grid = std::make_shared<const femq::Grid>(femq::build_mesh(l.design, policy));
        for (double f : freqs) {
            const auto s = femq::solve({grid, angular(f), 1.0, opt.shape});
            const auto m = post::loss_map(s);
            const auto& re = grid->r_edges();
            const auto& ze = grid->z_edges();
            report::Table t({"r[m]", "z[m]", "turn[1]", "J_re[A/m^2]", "J_im[A/m^2]", "Jeddy_re[A/m^2]", "Jeddy_im[A/m^2]",
                             "loss_density[W/m^3]", "gap_adjacent[1]"});
            for (int j = 0; j < grid->nz(); ++j)
                for (int i = 0; i < grid->nr(); ++i) {
                    const int c = grid->cell(i, j);
                    if (grid->turn(c) < 0) continue;
                    t.add_row({0.5 * (re[i] + re[i + 1]), 0.5 * (ze[j] + ze[j + 1]), static_cast<double>(grid->turn(c) + 1),
                               m.J.total[c].real(), m.J.total[c].imag(), m.J.eddy[c].real(), m.J.eddy[c].imag(), m.density[c],
                               m.region[c] == post::Region::gap_adjacent ? 1.0 : 0.0});
                }
            out.table("fields_" + report::number(f) + "Hz.csv", t, false);
        }
    }
    out.finish();
    return 0;
}

struct SweepArgs {
    std::string parameter = "D_left";
    std::vector<std::string> values;
    std::string closure;
    double frequency = 100e3;
    double I_dc = 15.0;
    double I_ac = 5.0;
    double cells_per_delta = 3.0;
    bool no_field = false;
};

int cmd_sweep(const Globals& g, const SweepArgs& a) {
    auto l = load(g.config);
    sweep::SweepSpec spec;
    spec.parameter = sweep::parse_parameter(a.parameter);
    spec.values = parse_list(a.values, spec.parameter == sweep::Parameter::frequency ? Dimension::none
                                       : spec.parameter == sweep::Parameter::gap_count ? Dimension::none
                                                                                        : Dimension::length,
                             "values");
    const bool clearance = spec.parameter == sweep::Parameter::D_left || spec.parameter == sweep::Parameter::D_right;
    spec.closure = a.closure.empty() ? (clearance ? sweep::Closure::D_w_absorbs : sweep::Closure::none) : sweep::parse_closure(a.closure);
    spec.frequency = a.frequency;
    spec.I_dc = a.I_dc;
    spec.I_ac = a.I_ac;
    spec.field = !a.no_field;
    spec.solver.mesh.cells_per_skin_depth = a.cells_per_delta;
    spec.solver.jobs = g.jobs;

    Output out(g, "sweep");
    out.config_hash(l.hash);
    out.parameters()["config"] = l.path;
    out.parameters()["parameter"] = a.parameter;
    out.parameters()["values"] = spec.values;
    out.parameters()["closure"] = std::string(sweep::to_string(spec.closure));
    out.parameters()["frequency"] = spec.frequency;
    out.parameters()["I_dc"] = spec.I_dc;
    out.parameters()["I_ac_peak"] = spec.I_ac;
    out.parameters()["cells_per_skin_depth"] = a.cells_per_delta;

    const auto rows = sweep::run(l.design, spec);
    out.table("sweep_" + a.parameter + ".csv", sweep::table(spec, rows));
    out.finish();
    for (const auto& r : rows)
        if (!r.ok) std::cerr << "point " << r.value << " failed: " << r.error << "\n";
    return 0;
}

struct RippleArgs {
    double V_o = 0.0;
    double f_s = 0.0;
    double L = 0.0;
    double Rac = 0.0;
    std::string rac_table;
    std::string from;
    int h_max = 25;
    double C_p = 0.0;
    double duty = 0.5;
    double I_dc = 0.0;
    double R_dc = 0.0;
};

/// Column `name` of a CSV written by this tool.
std::vector<double> csv_column(const std::string& text, const std::string& name, const std::string& path) {
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    const auto header = split(line);
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError(path + ": no column '" + name + "'", 1, name);
    const size_t col = static_cast<size_t>(it - header.begin());
    std::vector<double> v;
    int n = 1;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (col >= cells.size()) throw ParseError(path + ": short row", n, name);
        v.push_back(parse_quantity(cells[col], Dimension::none, name));
    }
    return v;
}

int cmd_ripple(const Globals& g, const RippleArgs& a) {
    ripple::ConverterPoint p;
    p.V_o = a.V_o;
    p.f_s = a.f_s;
    p.duty = a.duty;
    if (a.C_p > 0) p.C_p = a.C_p;

    Output out(g, "ripple");
    std::string hashed;
    std::optional<ripple::RacModel> rac;
    std::vector<double> tf, tr, tl;
    if (!a.from.empty()) {
        const std::string text = report::read_file(a.from);
        hashed += text;
        tf = csv_column(text, "f[Hz]", a.from);
        tr = csv_column(text, "Rac[ohm]", a.from);
        tl = csv_column(text, "abs_L[H]", a.from);
    }
    if (!a.rac_table.empty()) {
        const std::string text = report::read_file(a.rac_table);
        hashed += text;
        tf = csv_column(text, "f[Hz]", a.rac_table);
        tr = csv_column(text, "Rac[ohm]", a.rac_table);
    }
    p.L = a.L;
    if (!(p.L > 0) && !tl.empty()) p.L = ripple::RacModel::tabulated(tf, tl)(a.f_s);
    if (a.Rac > 0) {
        p.Rac_fs = a.Rac;
        rac = ripple::RacModel::sqrt_f(a.Rac, a.f_s);
    } else if (!tf.empty()) {
        rac = ripple::RacModel::tabulated(tf, tr);
        p.Rac_fs = (*rac)(a.f_s);
    }
    if (!rac) throw ParseError("give --rac, --rac-table or --from", 0, "rac");
    out.config_hash(report::fnv1a(hashed));
    out.parameters()["V_o"] = p.V_o;
    out.parameters()["f_s"] = p.f_s;
    out.parameters()["L"] = p.L;
    out.parameters()["Rac_fs"] = p.Rac_fs;
    out.parameters()["rac_model"] = rac->is_tabulated() ? "tabulated" : "sqrt_f";
    out.parameters()["h_max"] = a.h_max;
    if (p.C_p) out.parameters()["C_p"] = *p.C_p;

    const auto s = ripple::ac_loss_spectrum(p, *rac, a.h_max);
    report::Table t({"h[1]", "f[Hz]", "I_h[A]", "Rac[ohm]", "P_h[W]", "above_resonance[1]"});
    for (const auto& x : s.harmonics)
        t.add_row({static_cast<double>(x.h), x.frequency, x.current, x.rac, x.loss, x.above_resonance ? 1.0 : 0.0});
    out.table("spectrum.csv", t);
    const auto simp = ripple::ac_loss_simplified(p);
    if (!g.csv) {
        std::cout << "I_pp = " << fmt("%.4f", ripple::ripple_pp(p.V_o, p.L, p.f_s)) << " A (inductor voltage amplitude V_o at 50 % duty)\n";
        std::cout << "P_ac = " << fmt("%.5g", s.P_ac) << " W (spectrum, " << (rac->is_tabulated() ? "tabulated Rac" : "Rac ~ sqrt(f)")
                  << ", h <= " << a.h_max << ")\n";
        std::cout << "P_ac = " << fmt("%.5g", simp.from_voltage) << " W (1.027 closed form)\n";
        if (a.I_dc > 0 && a.R_dc > 0) std::cout << "P_dc = " << fmt("%.5g", a.I_dc * a.I_dc * a.R_dc) << " W (I_dc^2 DCR)\n";
        if (p.C_p) std::cout << "f_r = " << fmt("%.5g", ripple::resonant_frequency(p.L, *p.C_p)) << " Hz\n";
    }
    if (s.any_above_resonance()) std::cerr << "warning: harmonics at or above the first resonance; the lumped model is not valid there\n";
    out.finish();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flatwire: flat-wire inductor DCR, reluctance network, axisymmetric field solver and ripple loss"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    const char* env = std::getenv("FLATWIRE_OUT_DIR");
    g.out_dir = env && *env ? env : "flatwire_out";
    app.add_option("--config", g.config, "inductor config (TOML)");
    app.add_option("--out-dir", g.out_dir, "output directory (default $FLATWIRE_OUT_DIR or ./flatwire_out)");
    app.add_option("--jobs", g.jobs, "parallel field solves")->check(CLI::PositiveNumber);
    app.add_flag("--csv", g.csv, "print CSV to stdout instead of a table");

    auto quantity = [](CLI::App* sub, const std::string& name, double& target, const std::string& desc) {
        return sub->add_option_function<std::string>(
            name, [&target, name](const std::string& v) { target = parse_quantity(v, Dimension::none, name); }, desc);
    };

    std::string positional;
    auto add_config = [&](CLI::App* sub) { sub->add_option("config", positional, "inductor config (same as --config)"); };

    auto* schema = app.add_subcommand("schema", "print the annotated config schema");

    auto* dcr_cmd = app.add_subcommand("dcr", "DC resistance by every closed form and by quadrature");
    add_config(dcr_cmd);
    double temperature = 20.0;
    auto* temp_opt = dcr_cmd->add_option("--temperature", temperature, "copper temperature [degC]");

    auto* mec_cmd = app.add_subcommand("mec", "reluctance network, L0 and terminal impedance");
    add_config(mec_cmd);
    std::vector<std::string> mec_freqs;
    std::string q_source = "none";
    double tau = 0.0;
    double mec_cpd = 3.0;
    mec_cmd->add_option("--freqs", mec_freqs, "frequencies, comma separated (100k style suffixes)");
    mec_cmd->add_option("--q-source", q_source, "eddy term: none, tau or fem");
    quantity(mec_cmd, "--tau", tau, "first-order eddy time constant [s]");
    mec_cmd->add_option("--cells-per-skin-depth", mec_cpd, "mesh density for --q-source fem");

    auto* solve_cmd = app.add_subcommand("solve", "axisymmetric eddy-current field solve");
    add_config(solve_cmd);
    SolveArgs sa;
    solve_cmd->add_option("--freq", sa.freqs, "frequencies [Hz], repeatable or comma separated");
    solve_cmd->add_option("--log-range", sa.log_range, "f0:f1:n log-spaced frequencies");
    solve_cmd->add_option("--cells-per-skin-depth", sa.cells_per_delta, "conductor cells per skin depth");
    solve_cmd->add_option("--refine", sa.refine, "split every cell n times per axis");
    solve_cmd->add_option("--padding", sa.padding, "air padding around the core [m]");
    solve_cmd->add_option("--shape", sa.shape, "source distribution: voltage (1/r) or uniform");
    solve_cmd->add_flag("--dump-fields", sa.dump_fields, "write per-cell current and loss density");

    auto* sweep_cmd = app.add_subcommand("sweep", "design sensitivity sweep");
    add_config(sweep_cmd);
    SweepArgs sw;
    sweep_cmd->add_option("--parameter", sw.parameter, "D_left, D_right, t_w, s, gap_count or frequency");
    sweep_cmd->add_option("--values", sw.values, "sweep values, comma separated (\"1.0 mm\" style units)")->required();
    sweep_cmd->add_option("--closure", sw.closure, "what absorbs a clearance change: D_w, window or none");
    quantity(sweep_cmd, "--frequency", sw.frequency, "field-solve frequency [Hz]");
    sweep_cmd->add_option("--idc", sw.I_dc, "DC current for the DC loss column [A]");
    sweep_cmd->add_option("--iac", sw.I_ac, "peak AC current for the AC loss column [A]");
    sweep_cmd->add_option("--cells-per-skin-depth", sw.cells_per_delta, "conductor cells per skin depth");
    sweep_cmd->add_flag("--no-field", sw.no_field, "DCR columns only");

    auto* ripple_cmd = app.add_subcommand(
        "ripple", "buck ripple harmonics and AC winding loss; the inductor voltage is a square wave of amplitude V_o (50 % duty)");
    RippleArgs ra;
    quantity(ripple_cmd, "--vo", ra.V_o, "output voltage [V]")->required();
    quantity(ripple_cmd, "--fs", ra.f_s, "switching frequency [Hz]")->required();
    quantity(ripple_cmd, "--L", ra.L, "inductance [H]");
    quantity(ripple_cmd, "--rac", ra.Rac, "ESR at f_s [ohm], scaled as sqrt(f)");
    ripple_cmd->add_option("--rac-table", ra.rac_table, "CSV with f[Hz] and Rac[ohm] columns (e.g. solve's response.csv)");
    ripple_cmd->add_option("--from", ra.from, "solve response.csv supplying L and Rac");
    ripple_cmd->add_option("--h-max", ra.h_max, "highest harmonic");
    quantity(ripple_cmd, "--cp", ra.C_p, "parasitic capacitance [F]");
    ripple_cmd->add_option("--duty", ra.duty, "duty cycle; only 0.5 is supported");
    ripple_cmd->add_option("--idc", ra.I_dc, "DC current for the separate DC loss line [A]");
    ripple_cmd->add_option("--rdc", ra.R_dc, "DC resistance for the DC loss line [ohm]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ErrorCategory::config);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.category());
    }

    if (g.config.empty()) g.config = positional;
    try {
        if (schema->parsed()) {
            std::cout << config_schema;
            return 0;
        }
        if (dcr_cmd->parsed()) return cmd_dcr(g, temperature, temp_opt->count() > 0);
        if (mec_cmd->parsed()) return cmd_mec(g, mec_freqs, q_source, tau, mec_cpd);
        if (solve_cmd->parsed()) return cmd_solve(g, sa);
        if (sweep_cmd->parsed()) return cmd_sweep(g, sw);
        if (ripple_cmd->parsed()) return cmd_ripple(g, ra);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.category());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ErrorCategory::io);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ErrorCategory::numerical);
    }
    return 0;
}
