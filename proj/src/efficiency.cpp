#include "qfund/efficiency.hpp"

#include "qfund/errors.hpp"
#include "qfund/text.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace qf {

namespace {

void check_k(double k) {
    if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("k must be positive and finite");
}

std::vector<double> shares_of(std::span<const double> amounts) {
    double s = 0.0;
    for (double c : amounts) {
        if (!(c > 0.0)) throw DomainError("lambda_p requires positive contributions");
        s += std::sqrt(c);
    }
    if (amounts.empty()) throw DomainError("lambda_p requires at least one contributor");
    std::vector<double> alphas;
    alphas.reserve(amounts.size());
    for (double c : amounts) alphas.push_back(std::sqrt(c) / s);
    return alphas;
}

} // namespace

double lambda_p(std::span<const double> amounts, double k) {
    check_k(k);
    const auto alphas = shares_of(amounts);
    // (1/(k a) + 1 - 1/k)^{-1} rewritten as k a / (1 + (k - 1) a).
    double sum = 0.0;
    for (double a : alphas) sum += k * a / (1.0 + (k - 1.0) * a);
    return sum;
}

double lambda_p(const ProjectLedger& ledger, double k) {
    const auto amounts = ledger.aggregated_amounts();
    return lambda_p(amounts, k);
}

double lambda_lower_bound(const ProjectLedger& ledger, double k) {
    check_k(k);
    const auto alphas = shares_of(ledger.aggregated_amounts());
    const double n = static_cast<double>(alphas.size());
    double inv_sum = 0.0;
    for (double a : alphas) inv_sum += 1.0 / a;
    return n * n / (inv_sum / k + n * (1.0 - 1.0 / k));
}

LambdaReport lambda_report(const ProjectLedger& ledger, double k) {
    return LambdaReport{ledger.project_id(), ledger.category(), lambda_p(ledger, k),
                        lambda_lower_bound(ledger, k),          ledger.contributor_count(), k};
}

std::vector<SweepPoint> k_sweep(std::span<const RatioProfile> profiles, std::span<const double> k_grid) {
    if (k_grid.empty()) throw DomainError("k_sweep: empty k grid");
    std::vector<SweepPoint> out;
    out.reserve(profiles.size() * k_grid.size());
    for (const auto& profile : profiles)
        for (double k : k_grid) out.push_back({profile.label, k, lambda_p(profile.amounts, k)});
    return out;
}

std::vector<RatioProfile> default_ratio_profiles() {
    return {{"1:1", {1.0, 1.0}}, {"1:2", {1.0, 2.0}}, {"1:15", {1.0, 15.0}}};
}

std::vector<RatioProfile> parse_ratio_profiles(const std::string& text) {
    std::vector<RatioProfile> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto token = text::trim(std::string_view(text).substr(
            start, comma == std::string::npos ? std::string::npos : comma - start));
        if (token.empty()) throw DomainError("empty ratio profile in '" + text + "'");

        RatioProfile profile;
        profile.label = std::string(token);
        std::size_t pos = 0;
        while (pos <= token.size()) {
            const auto colon = token.find(':', pos);
            double value = 0.0;
            if (!text::parse_double(token.substr(pos, colon == std::string_view::npos ? std::string_view::npos
                                                                                       : colon - pos),
                                    value) ||
                !(value > 0.0))
                throw DomainError("bad ratio profile '" + profile.label + "'");
            profile.amounts.push_back(value);
            if (colon == std::string_view::npos) break;
            pos = colon + 1;
        }
        out.push_back(std::move(profile));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t steps) {
    if (steps == 0) throw DomainError("grid needs at least one step");
    std::vector<double> grid;
    grid.reserve(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i)
        grid.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps));
    return grid;
}

DispersionStats dispersion(std::span<const LambdaReport> reports, const std::string& category) {
    std::vector<double> values;
    for (const auto& r : reports)
        if (r.category == category) values.push_back(r.lambda_p);
    if (values.empty()) throw DomainError("dispersion: no projects in category '" + category + "'");

    DispersionStats d;
    d.category = category;
    d.project_count = values.size();
    const double n = static_cast<double>(values.size());
    for (double v : values) d.mean += v;
    d.mean /= n;
    double ss = 0.0;
    for (double v : values) ss += (v - d.mean) * (v - d.mean);
    d.stdev = std::sqrt(ss / n);
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    d.min = *lo;
    d.max = *hi;
    return d;
}

void write_sweep_csv(std::ostream& os, std::span<const SweepPoint> points) {
    os << "profile_label,k,lambda_p\n";
    for (const auto& p : points)
        os << text::csv_field(p.label) << ',' << text::format_double(p.k) << ','
           << text::format_double(p.lambda_p) << '\n';
}

} // namespace qf
