#pragma once

// Buck-converter ripple model at 50 % duty: the inductor sees a square wave of
// amplitude V_o, the current is a triangle with odd harmonics
//     I_h = 2 V_o / ((pi h)^2 L f_s),
// and the winding dissipates P_ac = 1/2 sum_h Rac(h f_s) I_h^2.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "flatwire/errors.hpp"
#include "flatwire/units.hpp"

namespace flatwire::ripple {

/// Constant of the simplified loss formula: sum of h^-3.5 over odd h up to 25, rounded.
inline constexpr double simplified_constant = 1.027;

struct ConverterPoint {
    double V_o = 0.0;     ///< output voltage [V]
    double f_s = 0.0;     ///< switching frequency [Hz]
    double L = 0.0;       ///< inductance at f_s [H]
    double Rac_fs = 0.0;  ///< winding ESR at f_s [ohm]
    double duty = 0.5;
    std::optional<double> C_p;  ///< parasitic capacitance [F]
};

inline void check(const ConverterPoint& p) {
    std::vector<Violation> v;
    if (!(p.V_o > 0)) v.push_back({"V_o", "must be > 0"});
    if (!(p.f_s > 0)) v.push_back({"f_s", "must be > 0"});
    if (!(p.L > 0)) v.push_back({"L", "must be > 0"});
    if (!(p.Rac_fs > 0)) v.push_back({"Rac_fs", "must be > 0"});
    if (p.duty != 0.5) v.push_back({"duty", "the harmonic model holds at 50 % duty only"});
    if (p.C_p && !(*p.C_p > 0)) v.push_back({"C_p", "must be > 0"});
    if (!v.empty()) throw ValidationError(std::move(v));
}

/// First resonance of L with the winding's parasitic capacitance.
inline double resonant_frequency(double L, double C_p) {
    if (!(L > 0) || !(C_p > 0)) throw ValidationError("L, C_p", "must be > 0");
    return 1.0 / (2.0 * pi * std::sqrt(L * C_p));
}

/// Peak-to-peak ripple current at 50 % duty.
inline double ripple_pp(double V_o, double L, double f_s) { return V_o / (2.0 * L * f_s); }

inline double inductance_from_ripple(double V_o, double I_pp, double f_s) {
    if (!(V_o > 0) || !(I_pp > 0) || !(f_s > 0)) throw ValidationError("V_o, I_pp, f_s", "must be > 0");
    return V_o / (2.0 * I_pp * f_s);
}

struct HarmonicCurrent {
    double amplitude = 0.0;        ///< peak [A]
    bool above_resonance = false;  ///< h f_s >= f_r: the lumped-L picture no longer holds
};

inline HarmonicCurrent harmonic_current(int h, const ConverterPoint& p) {
    check(p);
    if (h < 1) throw ValidationError("h", "harmonic index must be >= 1");
    HarmonicCurrent out;
    if (h % 2 == 0) return out;
    out.amplitude = 2.0 * p.V_o / (pi * pi * h * h * p.L * p.f_s);
    if (p.C_p) out.above_resonance = h * p.f_s >= resonant_frequency(p.L, *p.C_p);
    return out;
}

/// Winding ESR as a function of frequency.
class RacModel {
public:
    /// Rac(f) = Rac_fs sqrt(f / f_s).
    static RacModel sqrt_f(double Rac_fs, double f_s) {
        RacModel m;
        m.f_ = {f_s};
        m.r_ = {Rac_fs};
        return m;
    }
    /// Linear interpolation in f; no extrapolation.
    static RacModel tabulated(std::vector<double> freq, std::vector<double> rac) {
        if (freq.size() != rac.size() || freq.empty()) throw NumericalError("ripple: Rac table columns differ in length or are empty");
        for (size_t i = 1; i < freq.size(); ++i)
            if (!(freq[i] > freq[i - 1])) throw NumericalError("ripple: Rac table frequencies must increase");
        RacModel m;
        m.f_ = std::move(freq);
        m.r_ = std::move(rac);
        m.table_ = true;
        return m;
    }

    bool is_tabulated() const { return table_; }
    double max_frequency() const { return table_ ? f_.back() : INFINITY; }

    double operator()(double f) const {
        if (!table_) return r_[0] * std::sqrt(f / f_[0]);
        const double tol = 1e-9 * f_.back();
        if (f < f_.front() - tol || f > f_.back() + tol)
            throw RangeError("ripple: " + std::to_string(f) + " Hz lies outside the Rac table [" + std::to_string(f_.front()) +
                             ", " + std::to_string(f_.back()) + "] Hz");
        auto it = std::upper_bound(f_.begin(), f_.end(), f);
        if (it == f_.begin()) return r_.front();
        if (it == f_.end()) return r_.back();
        const size_t k = static_cast<size_t>(it - f_.begin());
        const double t = (f - f_[k - 1]) / (f_[k] - f_[k - 1]);
        return r_[k - 1] + t * (r_[k] - r_[k - 1]);
    }

private:
    std::vector<double> f_, r_;
    bool table_ = false;
};

struct Harmonic {
    int h = 0;
    double frequency = 0.0;
    double current = 0.0;  ///< peak [A]
    double rac = 0.0;
    double loss = 0.0;     ///< 1/2 Rac I_h^2 [W]
    bool above_resonance = false;
};

struct Spectrum {
    std::vector<Harmonic> harmonics;  ///< odd h only, ascending
    double P_ac = 0.0;
    bool any_above_resonance() const {
        return std::any_of(harmonics.begin(), harmonics.end(), [](const Harmonic& x) { return x.above_resonance; });
    }
};

inline Spectrum ac_loss_spectrum(const ConverterPoint& p, const RacModel& rac, int h_max) {
    check(p);
    if (h_max < 1) throw ValidationError("h_max", "must be >= 1");
    const int top = h_max % 2 ? h_max : h_max - 1;
    if (rac.is_tabulated() && top * p.f_s > rac.max_frequency() * (1 + 1e-9))
        throw RangeError("ripple: Rac table ends at " + std::to_string(rac.max_frequency()) + " Hz but harmonic " +
                         std::to_string(top) + " needs " + std::to_string(top * p.f_s) + " Hz");
    Spectrum s;
    for (int h = 1; h <= h_max; h += 2) {
        const auto ih = harmonic_current(h, p);
        Harmonic x;
        x.h = h;
        x.frequency = h * p.f_s;
        x.current = ih.amplitude;
        x.rac = rac(x.frequency);
        x.loss = 0.5 * x.rac * x.current * x.current;
        x.above_resonance = ih.above_resonance;
        s.P_ac += x.loss;
        s.harmonics.push_back(x);
    }
    return s;
}

/// sum of h^-3.5 over odd h <= h_max.
inline double harmonic_constant(int h_max) {
    double s = 0.0;
    for (int h = h_max % 2 ? h_max : h_max - 1; h >= 1; h -= 2) s += std::pow(h, -3.5);
    return s;
}

struct SimplifiedLoss {
    double from_voltage = 0.0;  ///< 1.027 * 2 Rac V_o^2 / (pi^4 L^2 f_s^2)
    double from_ripple = 0.0;   ///< 1.027 * 8 Rac I_pp^2 / pi^4
};

inline double ac_loss_simplified(double Rac_fs, double I_pp) {
    const double pi4 = pi * pi * pi * pi;
    return simplified_constant * 8.0 * Rac_fs * I_pp * I_pp / pi4;
}

inline SimplifiedLoss ac_loss_simplified(const ConverterPoint& p) {
    check(p);
    const double pi4 = pi * pi * pi * pi;
    SimplifiedLoss out;
    out.from_voltage = simplified_constant * 2.0 * p.Rac_fs * p.V_o * p.V_o / (pi4 * p.L * p.L * p.f_s * p.f_s);
    out.from_ripple = ac_loss_simplified(p.Rac_fs, ripple_pp(p.V_o, p.L, p.f_s));
    return out;
}

/// Ripple current i(t) rebuilt from the spectrum, zero mean; t in seconds.
inline double waveform(const Spectrum& s, double f_s, double t) {
    double i = 0.0;
    for (const auto& x : s.harmonics) i -= x.current * std::cos(2.0 * pi * x.h * f_s * t);
    return i;
}

}  // namespace flatwire::ripple
