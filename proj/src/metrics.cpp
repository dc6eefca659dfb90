#include "fastsvd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace fastsvd {

namespace {
void require_same_length(std::span<const double> a, std::span<const double> b,
                         const char* what) {
    if (a.size() != b.size() || a.empty()) {
        throw std::invalid_argument(std::string(what) + ": length mismatch");
    }
}
}  // namespace

std::vector<double> eps_abs(std::span<const double> u, std::span<const double> u_approx) {
    require_same_length(u, u_approx, "eps_abs");
    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::fabs(u[i] - u_approx[i]);
    return out;
}

double eps_rel(std::span<const double> u, std::span<const double> u_approx) {
    require_same_length(u, u_approx, "eps_rel");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        num += std::fabs(u[i] - u_approx[i]);
        den += std::fabs(u[i]);
    }
    if (den == 0.0) throw std::invalid_argument("eps_rel: reference field is identically zero");
    return num / den;
}

double eps_nrms(std::span<const double> u, std::span<const double> u_approx) {
    require_same_length(u, u_approx, "eps_nrms");
    double sq = 0.0;
    double lo = u[0], hi = u[0];
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u[i] - u_approx[i];
        sq += d * d;
        lo = std::min(lo, u[i]);
        hi = std::max(hi, u[i]);
    }
    if (hi == lo) throw std::invalid_argument("eps_nrms: reference field has zero range");
    return std::sqrt(sq / static_cast<double>(u.size())) / (hi - lo);
}

double eps_l2(std::span<const double> u, std::span<const double> u_approx) {
    require_same_length(u, u_approx, "eps_l2");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u[i] - u_approx[i];
        num += d * d;
        den += u[i] * u[i];
    }
    if (den == 0.0) throw std::invalid_argument("eps_l2: reference vector is identically zero");
    return std::sqrt(num / den);
}

void write_error_report_csv(const std::string& path, const ErrorReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_error_report_csv: cannot open " + path);
    out << "t,eps_rel,eps_nrms\n";
    out.precision(17);
    for (std::size_t i = 0; i < report.times.size(); ++i) {
        out << report.times[i] << ',' << report.eps_rel[i] << ',' << report.eps_nrms[i] << '\n';
    }
}

}  // namespace fastsvd
