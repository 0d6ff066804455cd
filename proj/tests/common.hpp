#pragma once

#include <string>

#include "flatwire/design.hpp"
#include "flatwire/report.hpp"

namespace fwtest {

inline flatwire::InductorDesign load_config(const std::string& name) {
    return flatwire::load_design(flatwire::report::read_file(std::string(FLATWIRE_CONFIG_DIR) + "/" + name));
}

inline flatwire::InductorDesign prototype() { return load_config("pq4040_prototype.toml"); }

/// Six-turn coil on a small gapped core; solves in well under a second.
inline flatwire::InductorDesign small_design() {
    using namespace flatwire;
    InductorDesign d;
    d.coil = {3.5e-3, 2.5e-3, 0.5e-3, 0.2e-3, 6, copper_conductivity};
    d.core.center_leg_radius = 3.0e-3;
    d.core.window_width = 4.0e-3;
    d.core.window_height = 6.0e-3;
    d.core.A_e = pi * 3.0e-3 * 3.0e-3;
    d.core.outer_leg_thickness = shell_thickness_for_area(7.0e-3, d.core.A_e);
    d.core.yoke_thickness = 2.0e-3;
    d.core.return_path_length = 20e-3;
    d.core.gaps = {{0.0, 0.5e-3}};
    d.clearances = {0.5e-3, 1.0e-3};
    return d;
}

}  // namespace fwtest
