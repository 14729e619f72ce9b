#include "survbal/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace survbal {

double KMEstimate::at(double t) const {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return 1.0;
    return survival[static_cast<size_t>(it - times.begin()) - 1];
}

KMEstimate kaplan_meier(const VectorXd& y, const VectorXi& delta) {
    const int n = static_cast<int>(y.size());
    if (n == 0) throw ValidationError("kaplan_meier: empty sample");
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return y[a] < y[b]; });

    KMEstimate km;
    // Exact integer products keep each survival value a correctly rounded
    // rational while they fit; afterwards fall back to running double products.
    unsigned long long num = 1, den = 1;
    bool exact = true;
    double surv = 1.0;
    const unsigned long long cap = 1ULL << 62;

    int i = 0;
    int at_risk = n;
    while (i < n) {
        double t = y[order[i]];
        int d_events = 0, m_total = 0;
        while (i < n && y[order[i]] == t) {
            d_events += delta[order[i]];
            ++m_total;
            ++i;
        }
        if (d_events > 0) {
            if (exact) {
                unsigned long long fn = static_cast<unsigned long long>(at_risk - d_events);
                unsigned long long fd = static_cast<unsigned long long>(at_risk);
                unsigned long long g1 = std::gcd(fn, fd);
                fn /= g1;
                fd /= g1;
                unsigned long long g2 = std::gcd(num, fd);
                unsigned long long g3 = std::gcd(fn, den);
                unsigned long long nn = num / g2, dd = den / g3;
                fn /= g3;
                fd /= g2;
                if (fn != 0 && (nn > cap / std::max(1ULL, fn) || dd > cap / fd)) {
                    exact = false;
                    surv = static_cast<double>(num) / static_cast<double>(den);
                    surv *= static_cast<double>(at_risk - d_events) / static_cast<double>(at_risk);
                } else {
                    num = nn * fn;
                    den = dd * fd;
                    surv = static_cast<double>(num) / static_cast<double>(den);
                }
            } else {
                surv *= static_cast<double>(at_risk - d_events) / static_cast<double>(at_risk);
            }
            km.times.push_back(t);
            km.survival.push_back(surv);
            km.n_risk.push_back(at_risk);
            km.n_event.push_back(d_events);
        }
        at_risk -= m_total;
    }
    return km;
}

TimeGrid grid_equidistant(double max_time, int m) {
    if (m < 2) throw ValidationError("grid needs at least two bins");
    if (!(max_time > 0.0) || !std::isfinite(max_time))
        throw ValidationError("grid max_time must be positive and finite");
    std::vector<double> cuts(m + 1);
    for (int j = 0; j <= m; ++j) cuts[j] = j * max_time / m;
    return validate_grid(std::move(cuts));
}

TimeGrid grid_km_quantile(const KMEstimate& km, int m, double max_time) {
    if (m < 2) throw ValidationError("quantile grid needs at least two bins");
    int last = -1;
    for (size_t j = 0; j < km.times.size(); ++j)
        if (km.times[j] <= max_time) last = static_cast<int>(j);
    if (last < 0) throw ValidationError("quantile grid: no event times within max_time");

    const double eta_m = km.survival[last];
    std::vector<double> cuts{0.0};
    for (int i = 1; i <= m; ++i) {
        double eta = 1.0 - i * (1.0 - eta_m) / m;
        int j = 0;
        while (j < last && km.survival[j] > eta) ++j;
        // survival[j] can stay above eta only by rounding at i == m; clamp to last.
        double cut = km.times[j];
        if (cuts.back() != cut) cuts.push_back(cut);
    }
    if (cuts.size() < 3)
        throw ValidationError("quantile grid collapsed to fewer than two bins");
    return validate_grid(std::move(cuts));
}

int interval_index(const TimeGrid& grid, double y) {
    if (!(y >= 0.0)) throw ValidationError("interval_index: time must be nonnegative");
    const auto& c = grid.cuts;
    auto it = std::lower_bound(c.begin() + 1, c.end(), y);
    if (it == c.end()) return grid.m() + 1;
    return static_cast<int>(it - c.begin());
}

double quantile(VectorXd values, double q) {
    if (values.size() == 0) throw ValidationError("quantile of empty vector");
    if (!(q > 0.0) || q > 1.0) throw ValidationError("quantile level must be in (0,1]");
    std::sort(values.data(), values.data() + values.size());
    int idx = static_cast<int>(std::ceil(q * values.size())) - 1;
    idx = std::clamp(idx, 0, static_cast<int>(values.size()) - 1);
    return values[idx];
}

}  // namespace survbal
