#pragma once

#include <string>
#include <vector>

#include "core/raster.hpp"

namespace bseg {

struct MetricsReport {
    double dice = 0.0;
    double jaccard = 0.0;
    double precision = 0.0;
    double sensitivity = 0.0;
    double mean_distance = 0.0;  // directed, predicted -> truth boundary
    double assd = 0.0;           // symmetric average surface distance
};

struct OverlapMetrics {
    double dice = 0.0;
    double jaccard = 0.0;
    double precision = 0.0;
    double sensitivity = 0.0;
};

struct WilcoxonResult {
    size_t n_effective = 0;  // pairs with nonzero difference
    double statistic = 0.0;  // W = min(positive rank sum, negative rank sum)
    double p_two_sided = 1.0;
    bool degenerate = false;  // all differences zero
};

OverlapMetrics overlap_metrics(const BinaryMask& pred, const BinaryMask& truth);

// MD is the directed mean boundary distance pred -> truth; ASSD averages the
// two directed means. Exhaustive minima over the boundary pixel sets.
struct BoundaryDistanceResult {
    double mean_distance = 0.0;
    double assd = 0.0;
};
BoundaryDistanceResult boundary_distances(const BinaryMask& pred, const BinaryMask& truth);

MetricsReport evaluate_pair(const BinaryMask& pred, const BinaryMask& truth);

// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences
// are dropped; ties get average ranks. Exact p by sign enumeration for
// n <= 12, normal approximation with continuity correction above.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b);

// Per-image reports plus a mean+-std summary row, as CSV with header
// name,dice,jaccard,precision,sensitivity,md,assd.
struct BatchReport {
    std::vector<std::string> names;
    std::vector<MetricsReport> reports;
    std::string csv;  // data rows + summary row
};
BatchReport batch_report(const std::string& pred_dir, const std::string& truth_dir, int jobs = 1);

}  // namespace bseg
