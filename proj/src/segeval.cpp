#include "xmorph/segeval.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "xmorph/error.hpp"

namespace xmorph {

MaskConfusion mask_confusion(const BinaryMask& pred, const BinaryMask& gt) {
    if (!pred.same_shape(gt)) throw PreconditionError("mask_confusion: dimension mismatch");
    MaskConfusion c;
    for (std::size_t i = 0; i < pred.bits.size(); ++i) {
        const bool p = pred.bits[i] != 0, g = gt.bits[i] != 0;
        if (p && g)
            ++c.tp;
        else if (p && !g)
            ++c.fp;
        else if (!p && g)
            ++c.fn;
        else
            ++c.tn;
    }
    return c;
}

MaskMetrics mask_metrics(const BinaryMask& pred, const BinaryMask& gt) {
    const MaskConfusion c = mask_confusion(pred, gt);
    MaskMetrics m;
    if (c.tp + c.fp + c.fn == 0) {
        // empty ground truth and empty prediction: perfect agreement
        m.dice = m.iou = m.precision = m.recall = m.f1 = 1.0;
        return m;
    }
    auto ratio = [](long long num, long long den) {
        return den > 0 ? static_cast<double>(num) / den : 0.0;
    };
    m.dice = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn);
    m.iou = ratio(c.tp, c.tp + c.fp + c.fn);
    m.precision = ratio(c.tp, c.tp + c.fp);
    m.recall = ratio(c.tp, c.tp + c.fn);
    m.f1 = (m.precision + m.recall) > 0
               ? 2 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

namespace {

MetricStat stat_of(const std::vector<double>& v) {
    MetricStat s;
    for (double x : v) s.mean += x;
    s.mean /= v.size();
    double var = 0;
    for (double x : v) var += (x - s.mean) * (x - s.mean);
    s.stdev = std::sqrt(var / v.size());
    return s;
}

} // namespace

std::vector<SegReportRow> aggregate_report(
    const std::vector<std::pair<std::string, MaskMetrics>>& samples) {
    if (samples.empty()) throw PreconditionError("aggregate_report: no samples");

    std::vector<std::string> order;
    std::map<std::string, std::vector<MaskMetrics>> groups;
    for (const auto& [cls, metrics] : samples) {
        if (!groups.count(cls)) order.push_back(cls);
        groups[cls].push_back(metrics);
    }
    order.push_back("overall");
    groups["overall"].reserve(samples.size());
    for (const auto& [cls, metrics] : samples) groups["overall"].push_back(metrics);

    std::vector<SegReportRow> rows;
    for (const auto& cls : order) {
        const auto& ms = groups[cls];
        SegReportRow row;
        row.cls = cls;
        row.n = static_cast<int>(ms.size());
        auto collect = [&](auto member) {
            std::vector<double> v;
            v.reserve(ms.size());
            for (const auto& m : ms) v.push_back(m.*member);
            return stat_of(v);
        };
        row.dice = collect(&MaskMetrics::dice);
        row.iou = collect(&MaskMetrics::iou);
        row.precision = collect(&MaskMetrics::precision);
        row.recall = collect(&MaskMetrics::recall);
        row.f1 = collect(&MaskMetrics::f1);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string seg_report_csv(const std::vector<SegReportRow>& rows) {
    std::ostringstream out;
    out << "class,dice,iou,precision,recall,f1\n";
    char buf[64];
    auto cell = [&](const MetricStat& s) {
        std::snprintf(buf, sizeof buf, "%.4f±%.4f", s.mean, s.stdev);
        out << "," << buf;
    };
    for (const auto& r : rows) {
        out << r.cls;
        cell(r.dice);
        cell(r.iou);
        cell(r.precision);
        cell(r.recall);
        cell(r.f1);
        out << "\n";
    }
    return out.str();
}

} // namespace xmorph
