#pragma once

#include <string>
#include <vector>

namespace sorterlab {

// DLCZ-style repeater chain over total_distance with 2^nesting_level
// elementary links. emission_probability p fixes the initial infidelity
// (F0 = 1 - p, error eps0 = 4p/3) and the fundamental rate prefactor
// R0 = 2N for N multiplexed qubits per node.
struct RepeaterConfig {
    double total_distance_km = 100.0;
    int nesting_level = 0;
    int multiplex = 100;
    double emission_probability = 0.01;
    double intrinsic_efficiency = 1.0;
    double attenuation_length_km = 22.0;
    double signal_speed_km_s = 2.0e5;
    double swap_success = 0.5; // P_S
    double swap_error = 0.0;   // eps

    double base_rate() const { return 2.0 * multiplex; }              // R0
    double base_fidelity() const { return 1.0 - emission_probability; } // F0
    double base_error() const { return 4.0 * emission_probability / 3.0; } // eps0
    void validate() const; // throws ConfigError
};

struct QkdResult {
    double link_rate = 0.0;         // R_f, per second
    double end_to_end_rate = 0.0;   // R, per second
    double accumulated_error = 0.0; // eps_n
    double fidelity = 0.0;          // F_n
    double qber = 0.0;              // Q
    double secret_fraction = 0.0;   // f (may be negative; K clamps)
    double key_rate = 0.0;          // K, per second
};

// h(Q) = -Q log2 Q - (1-Q) log2(1-Q), with 0 log 0 = 0.
// Throws ConfigError outside [0, 1].
double binary_entropy(double q);

// Six-state one-way secret fraction
// f = 1 - h(Q) - Q - (1-Q) h((1 - 3Q/2)/(1-Q)).
// Throws DomainError outside [0, 2/3).
double secret_fraction(double q);

// eps_n = 2^n eps0 + (2^n - 1) eps, the closed form of eps_{k+1} = 2 eps_k + eps.
double swap_error_accumulation(int n, double eps0, double eps);

// R_f = R0 (c 2^n / L) eta (1 - F0) with eta = eta_I exp(-L / (2^{n+1} L_att));
// R = R_f (2/3 P_S)^n.
struct RateResult {
    double link_rate = 0.0;
    double end_to_end_rate = 0.0;
};
RateResult entanglement_rate(const RepeaterConfig& cfg);

// Full chain: rates, accumulated swap error, F_n = 1 - 3 eps_n / 4,
// Q = eps_n / 2, secret fraction, and K = max(0, R * f).
// Throws DomainError when Q >= 2/3 (no key is possible there anyway).
QkdResult secret_key_rate(const RepeaterConfig& cfg);

// Named (P_S, eps) operating points for the sweep.
struct Scenario {
    std::string name;
    double swap_success = 0.5;
    double swap_error = 0.0;
};
// linear 0.5/0, state-of-the-art 0.645/0.004, ideal 0.86/0.
std::vector<Scenario> default_scenarios();

// Per (scenario, L): K maximized over nesting level n in [0, n_max], smallest
// optimal n on ties. Rows scenario-major in input order.
struct SweepRow {
    std::string scenario;
    double distance_km = 0.0;
    int n_opt = 0;
    double rate_per_s = 0.0;
    double qber = 0.0;
    double secret_frac = 0.0;
    double key_rate_per_s = 0.0;
};
std::vector<SweepRow> distance_sweep(const RepeaterConfig& base,
                                     const std::vector<double>& distances_km,
                                     const std::vector<Scenario>& scenarios,
                                     int n_max = 8);

} // namespace sorterlab
