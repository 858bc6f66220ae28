#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "xmorph/image.hpp"

namespace xmorph {

struct MaskConfusion {
    long long tp = 0, fp = 0, fn = 0, tn = 0;
};

MaskConfusion mask_confusion(const BinaryMask& pred, const BinaryMask& gt);

struct MaskMetrics {
    double dice = 0, iou = 0, precision = 0, recall = 0, f1 = 0;
};

/// Empty gt + empty pred scores 1.0 on every metric; any other zero
/// denominator scores 0.
MaskMetrics mask_metrics(const BinaryMask& pred, const BinaryMask& gt);

struct MetricStat {
    double mean = 0;
    double stdev = 0; // population
};

struct SegReportRow {
    std::string cls;
    int n = 0;
    MetricStat dice, iou, precision, recall, f1;
};

/// Per-class rows in first-appearance order plus a trailing "overall" row.
std::vector<SegReportRow> aggregate_report(
    const std::vector<std::pair<std::string, MaskMetrics>>& samples);

/// CSV with header class,dice,iou,precision,recall,f1 and "m±s" cells.
std::string seg_report_csv(const std::vector<SegReportRow>& rows);

} // namespace xmorph
