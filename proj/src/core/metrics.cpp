#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <thread>

#include "core/distance_map.hpp"
#include "core/errors.hpp"

namespace bseg {

OverlapMetrics overlap_metrics(const BinaryMask& pred, const BinaryMask& truth) {
    if (pred.width != truth.width || pred.height != truth.height)
        throw DataError("overlap_metrics: dimension mismatch");
    size_t np = 0, ng = 0, inter = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const bool p = pred.data[i], g = truth.data[i];
        np += p;
        ng += g;
        inter += p && g;
    }
    if (ng == 0) throw DataError("overlap_metrics: empty ground-truth mask");
    OverlapMetrics m;
    const size_t uni = np + ng - inter;
    m.dice = np + ng ? 2.0 * inter / static_cast<double>(np + ng) : 0.0;
    m.jaccard = uni ? inter / static_cast<double>(uni) : 0.0;
    m.precision = np ? inter / static_cast<double>(np) : 0.0;
    m.sensitivity = inter / static_cast<double>(ng);
    return m;
}

namespace {

double mean_min_distance(const std::vector<Pixel>& from, const Contour& to) {
    double acc = 0.0;
    for (const Pixel& p : from) acc += min_boundary_distance(p, to);
    return acc / static_cast<double>(from.size());
}

}  // namespace

BoundaryDistanceResult boundary_distances(const BinaryMask& pred, const BinaryMask& truth) {
    if (pred.width != truth.width || pred.height != truth.height)
        throw DataError("boundary_distances: dimension mismatch");
    const Contour pb = boundary_of_mask(pred);
    const Contour gb = boundary_of_mask(truth);
    BoundaryDistanceResult r;
    r.mean_distance = mean_min_distance(pb.points, gb);
    const double back = mean_min_distance(gb.points, pb);
    r.assd = (r.mean_distance + back) / 2.0;
    return r;
}

MetricsReport evaluate_pair(const BinaryMask& pred, const BinaryMask& truth) {
    MetricsReport rep;
    const OverlapMetrics om = overlap_metrics(pred, truth);
    rep.dice = om.dice;
    rep.jaccard = om.jaccard;
    rep.precision = om.precision;
    rep.sensitivity = om.sensitivity;
    if (pred.count() > 0) {
        const BoundaryDistanceResult bd = boundary_distances(pred, truth);
        rep.mean_distance = bd.mean_distance;
        rep.assd = bd.assd;
    } else {
        // empty prediction: surface distances are undefined, report the
        // worst case for the image diagonal
        rep.mean_distance = std::hypot(pred.width, pred.height);
        rep.assd = rep.mean_distance;
    }
    return rep;
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DataError("wilcoxon: sample lengths differ");
    if (a.empty()) throw DataError("wilcoxon: empty samples");

    std::vector<double> diff;
    diff.reserve(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (d != 0.0) diff.push_back(d);
    }
    WilcoxonResult res;
    res.n_effective = diff.size();
    if (diff.empty()) {
        res.degenerate = true;
        res.p_two_sided = 1.0;
        return res;
    }

    const size_t n = diff.size();
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::sort(idx.begin(), idx.end(),
              [&](size_t i, size_t j) { return std::abs(diff[i]) < std::abs(diff[j]); });

    // average ranks for ties on |diff|
    std::vector<double> rank(n, 0.0);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && std::abs(diff[idx[j + 1]]) == std::abs(diff[idx[i]])) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (size_t k = i; k <= j; ++k) rank[idx[k]] = avg;
        i = j + 1;
    }

    double w_pos = 0.0, w_neg = 0.0;
    for (size_t k = 0; k < n; ++k) (diff[k] > 0.0 ? w_pos : w_neg) += rank[k];
    res.statistic = std::min(w_pos, w_neg);

    if (n <= 12) {
        // exact: enumerate every sign assignment of the ranks
        const double total = w_pos + w_neg;
        size_t hits = 0;
        const size_t limit = size_t{1} << n;
        for (size_t bits = 0; bits < limit; ++bits) {
            double pos = 0.0;
            for (size_t k = 0; k < n; ++k)
                if (bits & (size_t{1} << k)) pos += rank[k];
            if (std::min(pos, total - pos) <= res.statistic + 1e-12) ++hits;
        }
        res.p_two_sided = static_cast<double>(hits) / static_cast<double>(limit);
    } else {
        // normal approximation with tie correction and continuity correction
        const double nn = static_cast<double>(n);
        const double mean = nn * (nn + 1.0) / 4.0;
        double tie_term = 0.0;
        i = 0;
        while (i < n) {
            size_t j = i;
            while (j + 1 < n && std::abs(diff[idx[j + 1]]) == std::abs(diff[idx[i]])) ++j;
            const double t = static_cast<double>(j - i + 1);
            tie_term += t * t * t - t;
            i = j + 1;
        }
        const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
        const double z = (res.statistic - mean + 0.5) / std::sqrt(var);
        res.p_two_sided = std::min(1.0, std::erfc(-z / std::sqrt(2.0)));
    }
    res.p_two_sided = std::clamp(res.p_two_sided, 1e-300, 1.0);
    return res;
}

namespace {

std::string format_report_row(const std::string& name, const MetricsReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f", name.c_str(), r.dice,
                  r.jaccard, r.precision, r.sensitivity, r.mean_distance, r.assd);
    return buf;
}

std::string mean_std(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var = v.size() > 1 ? var / (n - 1.0) : 0.0;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f±%.4f", mean, std::sqrt(var));
    return buf;
}

}  // namespace

BatchReport batch_report(const std::string& pred_dir, const std::string& truth_dir, int jobs) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(pred_dir)) throw DataError(pred_dir + ": not a directory");
    if (!fs::is_directory(truth_dir)) throw DataError(truth_dir + ": not a directory");

    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(pred_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".pgm")
            names.push_back(entry.path().filename().string());
    std::sort(names.begin(), names.end());
    if (names.empty()) throw DataError(pred_dir + ": no .pgm masks found");
    for (const std::string& name : names)
        if (!fs::exists(fs::path(truth_dir) / name))
            throw DataError("missing ground-truth counterpart for " + name);

    BatchReport out;
    out.names = names;
    out.reports.resize(names.size());

    auto work = [&](size_t begin, size_t end) {
        for (size_t k = begin; k < end; ++k) {
            const BinaryMask pred = load_mask_pgm((fs::path(pred_dir) / names[k]).string());
            const BinaryMask truth = load_mask_pgm((fs::path(truth_dir) / names[k]).string());
            out.reports[k] = evaluate_pair(pred, truth);
        }
    };
    if (jobs <= 1) {
        work(0, names.size());
    } else {
        const size_t nt = std::min<size_t>(static_cast<size_t>(jobs), names.size());
        std::vector<std::thread> pool;
        const size_t chunk = (names.size() + nt - 1) / nt;
        for (size_t t = 0; t < nt; ++t)
            pool.emplace_back(work, t * chunk, std::min(names.size(), (t + 1) * chunk));
        for (std::thread& th : pool) th.join();
    }

    std::string csv = "name,dice,jaccard,precision,sensitivity,md,assd\n";
    std::vector<double> cols[6];
    for (size_t k = 0; k < names.size(); ++k) {
        const MetricsReport& r = out.reports[k];
        csv += format_report_row(names[k], r) + "\n";
        cols[0].push_back(r.dice);
        cols[1].push_back(r.jaccard);
        cols[2].push_back(r.precision);
        cols[3].push_back(r.sensitivity);
        cols[4].push_back(r.mean_distance);
        cols[5].push_back(r.assd);
    }
    csv += "summary";
    for (auto& c : cols) csv += "," + mean_std(c);
    csv += "\n";
    out.csv = csv;
    return out;
}

}  // namespace bseg
