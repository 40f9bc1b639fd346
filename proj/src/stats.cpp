#include "geoclean/stats.hpp"

#include <boost/math/distributions/fisher_f.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace geoclean::stats {

double median(std::vector<double> xs) {
    if (xs.empty()) throw std::invalid_argument("median of empty vector");
    const size_t n = xs.size();
    const size_t mid = n / 2;
    std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
    double hi = xs[mid];
    if (n % 2 == 1) return hi;
    double lo = *std::max_element(xs.begin(), xs.begin() + mid);
    return (lo + hi) / 2.0;
}

double mad(const std::vector<double>& xs) {
    double m = median(xs);
    std::vector<double> dev;
    dev.reserve(xs.size());
    for (double x : xs) dev.push_back(std::fabs(x - m));
    return median(std::move(dev));
}

ModifiedZResult modified_zscores(const std::vector<double>& xs) {
    ModifiedZResult r;
    r.median = median(xs);
    std::vector<double> dev;
    dev.reserve(xs.size());
    for (double x : xs) dev.push_back(std::fabs(x - r.median));
    r.mad = median(std::move(dev));
    r.scores.resize(xs.size(), 0.0);
    if (r.mad == 0.0) {
        r.degenerate = true;
        return r;
    }
    for (size_t i = 0; i < xs.size(); ++i) r.scores[i] = 0.6745 * (xs[i] - r.median) / r.mad;
    return r;
}

double mean(const std::vector<double>& xs) {
    if (xs.empty()) throw std::invalid_argument("mean of empty vector");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("pearson needs two equal-length vectors of size >= 2");
    const double mx = mean(xs);
    const double my = mean(ys);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw std::invalid_argument("pearson undefined for zero-variance input");
    return sxy / std::sqrt(sxx * syy);
}

AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw std::invalid_argument("anova needs at least two groups");
    size_t n_total = 0;
    for (const auto& g : groups) {
        if (g.size() < 2) throw std::invalid_argument("anova needs at least two observations per group");
        n_total += g.size();
    }

    AnovaResult r;
    r.df_between = groups.size() - 1;
    r.df_within = n_total - groups.size();

    double grand_sum = 0.0;
    for (const auto& g : groups) {
        double gs = 0.0;
        for (double v : g) gs += v;
        r.group_means.push_back(gs / static_cast<double>(g.size()));
        grand_sum += gs;
    }
    const double grand_mean = grand_sum / static_cast<double>(n_total);

    double ssb = 0.0, ssw = 0.0;
    bool means_equal = true;
    for (size_t gi = 0; gi < groups.size(); ++gi) {
        const double gm = r.group_means[gi];
        if (gm != r.group_means[0]) means_equal = false;
        ssb += static_cast<double>(groups[gi].size()) * (gm - grand_mean) * (gm - grand_mean);
        for (double v : groups[gi]) ssw += (v - gm) * (v - gm);
    }

    if (ssw == 0.0) {
        r.degenerate = true;
        if (means_equal) {
            // Every observation identical: no variance anywhere.
            r.f = 0.0;
            r.p = 1.0;
        } else {
            // Perfect separation: groups differ but have no internal spread.
            r.f = std::numeric_limits<double>::infinity();
            r.p = 0.0;
        }
        return r;
    }

    const double msb = ssb / static_cast<double>(r.df_between);
    const double msw = ssw / static_cast<double>(r.df_within);
    r.f = msb / msw;

    boost::math::fisher_f_distribution<double> dist(static_cast<double>(r.df_between),
                                                    static_cast<double>(r.df_within));
    r.p = boost::math::cdf(boost::math::complement(dist, r.f));
    return r;
}

}  // namespace geoclean::stats
