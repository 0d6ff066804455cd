#pragma once

// DC resistance of a flat-wire coil: helical, planar-circular and average-radius
// closed forms, plus adaptive quadrature of the conductance integral
//     G = integral_{r_w}^{r_w + D_w} sigma t_w dr / l(r)
// used as an independent check on each closed form.

#include <cmath>
#include <string_view>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "flatwire/design.hpp"
#include "flatwire/errors.hpp"
#include "flatwire/units.hpp"

namespace flatwire::dcr {

enum class LengthModel { helical, planar, average };
enum class Model { helical, planar, average, quadrature };

struct DcrResult {
    double resistance = 0.0;  ///< [ohm]
    Model model = Model::planar;
    LengthModel length_model = LengthModel::planar;
    /// Length of a straight bar with cross-section t_w D_w and the same resistance [m].
    double equivalent_length = 0.0;
};

inline constexpr std::string_view to_string(Model m) {
    switch (m) {
        case Model::helical: return "helical";
        case Model::planar: return "planar";
        case Model::average: return "average";
        case Model::quadrature: return "quadrature";
    }
    return "?";
}

inline constexpr std::string_view to_string(LengthModel m) {
    switch (m) {
        case LengthModel::helical: return "helical";
        case LengthModel::planar: return "planar";
        case LengthModel::average: return "average";
    }
    return "?";
}

/// Copper conductivity at temperature T [degC] with a 0.393 %/K linear coefficient about 20 degC.
inline double copper_conductivity_at(double celsius, double sigma20 = copper_conductivity) {
    return sigma20 / (1.0 + 0.00393 * (celsius - 20.0));
}

namespace detail {

inline void check_coil(const CoilSpec& c) {
    if (!(c.D_w > 0)) throw GeometryError("dcr: radial depth D_w must be > 0 (zero-width conductance integral)");
    if (!(c.r_w > 0)) throw GeometryError("dcr: inner radius r_w must be > 0");
    if (!(c.t_w > 0)) throw GeometryError("dcr: thickness t_w must be > 0");
    if (c.N < 1) throw GeometryError("dcr: turn count N must be >= 1");
    if (!(c.sigma > 0)) throw GeometryError("dcr: conductivity must be > 0");
    if (c.s < 0) throw GeometryError("dcr: spacing s must be >= 0");
}

/// Helix pitch radius h_w / (2 pi N).
inline double pitch_radius(const CoilSpec& c) { return coil_height(c) / (2.0 * pi * c.N); }

inline DcrResult make(double resistance, Model m, LengthModel lm, const CoilSpec& c) {
    return {resistance, m, lm, resistance * c.sigma * c.t_w * c.D_w};
}

}  // namespace detail

/// Turn length at radius r under the given length model.
inline double turn_length(const CoilSpec& c, LengthModel model, double r) {
    const double two_pi_n = 2.0 * pi * c.N;
    switch (model) {
        case LengthModel::helical: {
            const double a = detail::pitch_radius(c);
            return two_pi_n * std::sqrt(r * r + a * a);
        }
        case LengthModel::planar: return two_pi_n * r;
        case LengthModel::average: return two_pi_n * (c.r_w + c.D_w / 2.0);
    }
    return 0.0;
}

inline DcrResult dcr_helical(const CoilSpec& c) {
    detail::check_coil(c);
    const double a = detail::pitch_radius(c);
    const double r1 = c.r_w;
    const double r2 = c.r_w + c.D_w;
    const double log_ratio = std::log((r2 + std::hypot(r2, a)) / (r1 + std::hypot(r1, a)));
    return detail::make(2.0 * pi * c.N / (c.sigma * c.t_w * log_ratio), Model::helical, LengthModel::helical, c);
}

inline DcrResult dcr_planar(const CoilSpec& c) {
    detail::check_coil(c);
    const double log_ratio = std::log1p(c.D_w / c.r_w);
    return detail::make(2.0 * pi * c.N / (c.sigma * c.t_w * log_ratio), Model::planar, LengthModel::planar, c);
}

inline DcrResult dcr_average(const CoilSpec& c) {
    detail::check_coil(c);
    const double r_av = c.r_w + c.D_w / 2.0;
    return detail::make(2.0 * pi * c.N * r_av / (c.sigma * c.t_w * c.D_w), Model::average, LengthModel::average, c);
}

/// Adaptive Gauss-Kronrod evaluation of the conductance integral (relative tolerance 1e-10).
inline DcrResult dcr_quadrature(const CoilSpec& c, LengthModel model) {
    detail::check_coil(c);
    using boost::math::quadrature::gauss_kronrod;
    // r = r_w + D_w x keeps the error estimate clear of round-off on thin conductors
    auto integrand = [&](double x) { return c.D_w * c.sigma * c.t_w / turn_length(c, model, c.r_w + c.D_w * x); };
    double error = 0.0;
    const double g = gauss_kronrod<double, 31>::integrate(integrand, 0.0, 1.0, 20, 1e-12, &error);
    if (!std::isfinite(g) || g <= 0 || error > 1e-10 * g)
        throw NumericalError("dcr: conductance quadrature did not converge (error estimate " +
                             std::to_string(error / g) + ")");
    auto res = detail::make(1.0 / g, Model::quadrature, model, c);
    return res;
}

/// Resistance by model tag; `quadrature` uses the planar length model.
inline DcrResult dcr(const CoilSpec& c, Model m) {
    switch (m) {
        case Model::helical: return dcr_helical(c);
        case Model::planar: return dcr_planar(c);
        case Model::average: return dcr_average(c);
        case Model::quadrature: return dcr_quadrature(c, LengthModel::planar);
    }
    return dcr_planar(c);
}

}  // namespace flatwire::dcr
