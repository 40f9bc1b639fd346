#pragma once

// Small numerical toolkit: robust location/scale estimates, the modified
// z-score used for outlier detection, Pearson correlation, and a one-way
// fixed-effects ANOVA.

#include <cstddef>
#include <string>
#include <vector>

namespace geoclean::stats {

// Median of a copy of xs (average of the two middle order statistics for
// even sizes). Empty input is a programming error.
double median(std::vector<double> xs);

// Median absolute deviation from the median, unscaled.
double mad(const std::vector<double>& xs);

struct ModifiedZResult {
    std::vector<double> scores;
    double median = 0.0;
    double mad = 0.0;
    // True when the MAD is zero, in which case every score is defined as
    // zero and callers should treat the batch as degenerate.
    bool degenerate = false;
};

// Modified z-scores: 0.6745 * (x - median) / MAD.
ModifiedZResult modified_zscores(const std::vector<double>& xs);

double mean(const std::vector<double>& xs);

// Sample Pearson correlation. Zero variance on either side raises
// std::invalid_argument (the correlation is undefined there).
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

struct AnovaResult {
    double f = 0.0;
    double p = 1.0;
    size_t df_between = 0;
    size_t df_within = 0;
    std::vector<double> group_means;
    // Set when the computation hit a degenerate case: all values equal
    // (F defined as 0, p as 1) or zero within-group variance with unequal
    // means (F infinite, p 0).
    bool degenerate = false;
};

// One-way fixed-effects analysis of variance over two or more groups,
// each with at least two observations.
AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups);

}  // namespace geoclean::stats
