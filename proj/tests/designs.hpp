#pragma once

#include "fleetrel/types.hpp"

namespace testutil {

inline fleetrel::ServerDesign design(double cap, fleetrel::ChipDensity dens, int chips, double cpu_pct, double age,
                                     int cpus)
{
    fleetrel::ServerDesign d;
    d.capacity_gb = cap;
    d.density = dens;
    d.chips = chips;
    d.cpu_util_pct = cpu_pct;
    d.age_years = age;
    d.cpus = cpus;
    return d;
}

// the four server types of the published case study
inline fleetrel::ServerDesign low_end() { return design(4, fleetrel::ChipDensity::gb2, 16, 50, 1, 8); }
inline fleetrel::ServerDesign high_end() { return design(16, fleetrel::ChipDensity::gb4, 32, 25, 1, 16); }
inline fleetrel::ServerDesign high_end_low_density() { return design(4, fleetrel::ChipDensity::gb2, 16, 25, 1, 16); }
inline fleetrel::ServerDesign high_end_fewer_cpus() { return design(16, fleetrel::ChipDensity::gb4, 32, 50, 1, 8); }

} // namespace testutil
