#pragma once

#include <cmath>
#include <optional>

namespace sorterlab {

// All internal math runs in units where the emitter half linewidth Gamma/2 = 1,
// i.e. Gamma = 2 and the guided rate gamma = beta*Gamma = 2*beta. Detunings and
// rates are dimensionless multiples of Gamma/2; times are multiples of
// 1/(Gamma/2). Physical conversions happen only at the boundary (CLI, JTI axis
// labels) through this struct.
struct NormalizedUnits {
    double half_linewidth = 1.0; // Gamma/2 in internal units, fixed convention
    // Physical Gamma/2 expressed as a rate in 1/ps. Empty means "dimensionless
    // run": conversions are unavailable.
    std::optional<double> physical_half_linewidth_per_ps;

    // lifetime_ps is 1/Gamma (the paper's 1/gamma = 324 ps), so the internal
    // time unit 1/(Gamma/2) equals 2*lifetime.
    static NormalizedUnits from_lifetime_ps(double lifetime_ps) {
        NormalizedUnits u;
        u.physical_half_linewidth_per_ps = 1.0 / (2.0 * lifetime_ps);
        return u;
    }

    bool has_physical() const { return physical_half_linewidth_per_ps.has_value(); }

    // 1/(Gamma/2) in picoseconds.
    double time_unit_ps() const { return 1.0 / *physical_half_linewidth_per_ps; }

    double time_to_internal(double ps) const { return ps / time_unit_ps(); }
    double time_to_ps(double internal) const { return internal * time_unit_ps(); }

    // Angular frequency detuning <-> internal units. MHz is an ordinary
    // frequency; the natural linewidth quoted as gamma/2pi = 491 MHz matches
    // Gamma = 2pi * 491e6 rad/s.
    double detuning_MHz_to_internal(double mhz) const {
        const double rad_per_ps = 2.0 * M_PI * mhz * 1e-6;
        return rad_per_ps / *physical_half_linewidth_per_ps;
    }
    double detuning_internal_to_MHz(double internal) const {
        return internal * *physical_half_linewidth_per_ps / (2.0 * M_PI * 1e-6);
    }
};

} // namespace sorterlab
