#pragma once

#include <span>
#include <string>
#include <vector>

namespace fastsvd {

/// Per-time-step error curves for a predicted trajectory.
struct ErrorReport {
    std::vector<double> times;
    std::vector<double> eps_rel;
    std::vector<double> eps_nrms;
};

/// Elementwise |u - u_approx|.
std::vector<double> eps_abs(std::span<const double> u, std::span<const double> u_approx);

/// Sum of per-node magnitudes of the error over the sum for the reference
/// field, evaluated at a single time step.
double eps_rel(std::span<const double> u, std::span<const double> u_approx);

/// RMS of the error divided by the reference field's range.
double eps_nrms(std::span<const double> u, std::span<const double> u_approx);

/// ||u - u_approx||_2 / ||u||_2.
double eps_l2(std::span<const double> u, std::span<const double> u_approx);

/// CSV with columns t, eps_rel, eps_nrms.
void write_error_report_csv(const std::string& path, const ErrorReport& report);

}  // namespace fastsvd
