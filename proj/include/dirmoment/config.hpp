#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dirmoment/kernels.hpp"
#include "dirmoment/shifts.hpp"

namespace dirmoment {

struct EulerTruncation {
    std::int64_t P = 10000;     // prime cutoff
    int M = 60;                 // local-series cutoff
    double delta0 = 0.4;        // exponent margin for the tail surrogate
    double series_budget = 1e-10;  // largest admissible per-prime series tail (relative)
    double eps = 0.05;          // regime margin for the K / G convergence conditions
    void validate() const;
};

struct GridSettings {
    double sigma = 0.05;   // Re s1 = Re s2
    double h = 0.0125;     // s-grid step
    double T_s = 600;      // s-grid half-length
    double T_u = 400;      // cap on the u-grid half-length (trimmed where the inner integral is negligible)
    int u_stride = 2;      // u-grid step in units of h
    int circle_points = 16;
    double circle_radius = 0;  // 0: sigma / 4
    void validate() const;
};

struct MomentConfig {
    double Q = 100;
    double eta = 1.2;
    ShiftSet A, B;
    std::int64_t h = 1, k = 1;
    double C = 0;  // split parameter; 0 selects Q^{1 - eta/2}
    const Window* V = &window_V();
    const Window* W = &window_W();
    EulerTruncation trunc;
    GridSettings grid;
    int threads = 1;

    double X() const;
    double split_C() const;
    void validate() const;
};

// Alternating-sign real shifts with |alpha_nu| = 2^nu C0 / log Q, |beta_nu| = 2^{|A|+nu} C0 / log Q.
void default_shifts(std::size_t nA, std::size_t nB, double Q, ShiftSet& A, ShiftSet& B, double C0 = 0.05);

// Reference configuration: eta = 1.2, h = k = 1, default shifts of the given sizes.
MomentConfig default_config(double Q, std::size_t nA = 1, std::size_t nB = 1);

// Sweep description read from a flat key-value YAML file.
struct RunConfig {
    std::vector<double> Q_list{100, 200, 400};
    std::size_t nA = 1, nB = 1;
    bool explicit_shifts = false;
    MomentConfig base;
};

// Throws PreconditionError naming the offending key.
RunConfig parse_run_config(const std::string& yaml_text);
RunConfig load_run_config(const std::string& path);

}  // namespace dirmoment
