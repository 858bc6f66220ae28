#include "xmorph/fusion.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "xmorph/error.hpp"

namespace xmorph {

StandardizationStats zscore_fit(const std::vector<std::vector<double>>& rows) {
    if (rows.size() < 2) throw PreconditionError("zscore_fit: need >= 2 rows");
    const std::size_t d = rows[0].size();
    for (const auto& r : rows)
        if (r.size() != d) throw PreconditionError("zscore_fit: ragged rows");

    StandardizationStats s;
    s.mean.assign(d, 0.0);
    s.stdev.assign(d, 0.0);
    s.zero_variance.assign(d, false);
    for (const auto& r : rows)
        for (std::size_t c = 0; c < d; ++c) s.mean[c] += r[c];
    for (auto& m : s.mean) m /= rows.size();
    for (const auto& r : rows)
        for (std::size_t c = 0; c < d; ++c) {
            const double dv = r[c] - s.mean[c];
            s.stdev[c] += dv * dv;
        }
    for (std::size_t c = 0; c < d; ++c) {
        s.stdev[c] = std::sqrt(s.stdev[c] / rows.size());
        if (s.stdev[c] <= 0) {
            s.zero_variance[c] = true;
            s.stdev[c] = 0;
        }
    }
    return s;
}

std::vector<double> zscore_apply(const StandardizationStats& stats,
                                 std::span<const double> row) {
    if (row.size() != stats.dim()) throw PreconditionError("zscore_apply: dimension mismatch");
    std::vector<double> out(row.size());
    for (std::size_t c = 0; c < row.size(); ++c)
        out[c] = stats.zero_variance[c] ? 0.0 : (row[c] - stats.mean[c]) / stats.stdev[c];
    return out;
}

PcaModel pca_fit(const std::vector<std::vector<double>>& rows, double variance_target) {
    if (rows.size() < 2) throw PreconditionError("pca_fit: need >= 2 rows");
    if (variance_target <= 0 || variance_target > 1)
        throw PreconditionError("pca_fit: variance target in (0, 1]");
    const std::size_t n = rows.size(), d = rows[0].size();
    for (const auto& r : rows)
        if (r.size() != d) throw PreconditionError("pca_fit: ragged rows");

    PcaModel model;
    model.input_dim = d;
    model.mean.assign(d, 0.0);
    for (const auto& r : rows)
        for (std::size_t c = 0; c < d; ++c) model.mean[c] += r[c];
    for (auto& m : model.mean) m /= static_cast<double>(n);

    Eigen::MatrixXd centered(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < d; ++c) centered(i, c) = rows[i][c] - model.mean[c];

    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success)
        throw PreconditionError("pca_fit: eigendecomposition failed");

    // ascending eigenvalues from Eigen; walk them in descending order
    const auto& evals = solver.eigenvalues();
    const auto& evecs = solver.eigenvectors();
    double total = 0;
    for (Eigen::Index i = 0; i < evals.size(); ++i) total += std::max(evals(i), 0.0);
    if (total <= 0) throw PreconditionError("pca_fit: rank-0 data");

    double cum = 0;
    for (Eigen::Index r = evals.size() - 1; r >= 0; --r) {
        const double ev = std::max(evals(r), 0.0);
        if (ev <= total * 1e-12) break; // rank exhausted
        Eigen::VectorXd comp = evecs.col(r);
        // deterministic sign: the largest-|loading| entry is positive
        Eigen::Index arg = 0;
        comp.cwiseAbs().maxCoeff(&arg);
        if (comp(arg) < 0) comp = -comp;
        for (Eigen::Index c = 0; c < comp.size(); ++c) model.components.push_back(comp(c));
        model.explained_variance_ratio.push_back(ev / total);
        ++model.k;
        cum += ev;
        if (cum / total >= variance_target) break;
    }
    return model;
}

std::vector<double> pca_apply(const PcaModel& model, std::span<const double> row) {
    if (row.size() != model.input_dim)
        throw PreconditionError("pca_apply: dimension mismatch");
    std::vector<double> out(model.k, 0.0);
    for (std::size_t r = 0; r < model.k; ++r) {
        double dot = 0;
        const double* comp = model.components.data() + r * model.input_dim;
        for (std::size_t c = 0; c < model.input_dim; ++c)
            dot += comp[c] * (row[c] - model.mean[c]);
        out[r] = dot;
    }
    return out;
}

std::vector<double> tsf_medians(std::span<const FeatureRecord> records) {
    std::vector<double> medians(kTsfCount, 0.0);
    std::vector<double> col;
    for (int f = 0; f < kTsfCount; ++f) {
        col.clear();
        for (const auto& r : records)
            if (r.present[f]) col.push_back(r.values[f]);
        if (col.empty()) continue;
        std::sort(col.begin(), col.end());
        const std::size_t n = col.size();
        medians[f] = n % 2 ? col[n / 2] : 0.5 * (col[n / 2 - 1] + col[n / 2]);
    }
    return medians;
}

std::vector<double> fuse_tsf(const FeatureRecord& record, std::span<const double> medians,
                             const StandardizationStats& tsf_stats) {
    if (medians.size() != kTsfCount || tsf_stats.dim() != kTsfCount)
        throw PreconditionError("fuse_tsf: unfitted stats");
    std::vector<double> raw(kTsfCount);
    for (int f = 0; f < kTsfCount; ++f)
        raw[f] = record.present[f] ? record.values[f] : medians[f];
    return zscore_apply(tsf_stats, raw);
}

FusionPipeline FusionPipeline::fit(std::span<const FeatureRecord> records,
                                   const std::vector<std::vector<double>>* deep_rows,
                                   double variance_target, std::span<const int> row_ids) {
    if (records.size() < 2) throw PreconditionError("FusionPipeline: need >= 2 records");
    if (deep_rows && deep_rows->size() != records.size())
        throw PreconditionError("FusionPipeline: deep row count mismatch");

    FusionPipeline p;
    p.fitted_row_ids.assign(row_ids.begin(), row_ids.end());
    p.medians = tsf_medians(records);

    std::vector<std::vector<double>> tsf_rows;
    tsf_rows.reserve(records.size());
    for (const auto& r : records) {
        std::vector<double> row(kTsfCount);
        for (int f = 0; f < kTsfCount; ++f)
            row[f] = r.present[f] ? r.values[f] : p.medians[f];
        tsf_rows.push_back(std::move(row));
    }
    p.tsf_stats = zscore_fit(tsf_rows);

    if (deep_rows) {
        p.has_deep = true;
        p.deep_stats = zscore_fit(*deep_rows);
        std::vector<std::vector<double>> z;
        z.reserve(deep_rows->size());
        for (const auto& r : *deep_rows) z.push_back(zscore_apply(p.deep_stats, r));
        p.pca = pca_fit(z, variance_target);
    }
    return p;
}

std::vector<double> FusionPipeline::apply(const FeatureRecord& record,
                                          std::span<const double> deep_row) const {
    std::vector<double> out;
    if (has_deep) {
        if (deep_row.size() != deep_stats.dim())
            throw PreconditionError("FusionPipeline::apply: deep row dimension mismatch");
        const auto z = zscore_apply(deep_stats, deep_row);
        out = pca_apply(pca, z);
    }
    const auto tsf = fuse_tsf(record, medians, tsf_stats);
    out.insert(out.end(), tsf.begin(), tsf.end());
    return out;
}

std::vector<double> FusionPipeline::display_values(const FeatureRecord& record,
                                                   std::span<const double> deep_row) const {
    std::vector<double> out;
    if (has_deep) {
        if (deep_row.size() != deep_stats.dim())
            throw PreconditionError("display_values: deep row dimension mismatch");
        const auto z = zscore_apply(deep_stats, deep_row);
        out = pca_apply(pca, z);
    }
    for (int f = 0; f < kTsfCount; ++f)
        out.push_back(record.present[f] ? record.values[f] : medians[f]);
    return out;
}

std::vector<std::string> FusionPipeline::column_names() const {
    std::vector<std::string> names;
    if (has_deep)
        for (std::size_t i = 0; i < pca.k; ++i) names.push_back("pca_" + std::to_string(i));
    for (const auto& n : tsf_column_names()) names.push_back(n);
    return names;
}

std::size_t FusionPipeline::output_dim() const {
    return (has_deep ? pca.k : 0) + kTsfCount;
}

} // namespace xmorph
