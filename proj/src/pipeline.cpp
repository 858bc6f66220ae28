#include "xmorph/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "xmorph/clinical.hpp"
#include "xmorph/contour.hpp"
#include "xmorph/dynamics.hpp"
#include "xmorph/error.hpp"
#include "xmorph/iwbn.hpp"
#include "xmorph/morphology.hpp"

namespace xmorph {

FeatureRecord extract_features(const SampleInput& sample, const RunConfig& cfg) {
    if (sample.image.width != sample.mask.width ||
        sample.image.height != sample.mask.height)
        throw PreconditionError(sample.sample_id + ": image/mask dimension mismatch");

    const BinaryMask component = largest_component8(sample.mask);
    const Contour traced = extract_largest_contour(sample.mask);
    const Contour contour = resample_closed(traced, cfg.boundary_points);
    const RadialSignal signal = to_radial_signal(contour, mask_centroid(component));

    FeatureRecord rec;
    rec.sample_id = sample.sample_id;

    const GeometricFeatures geo = geometric_features(signal, component);
    rec.set(kIrregularity, geo.irregularity);
    rec.set(kRoughness, geo.roughness);
    rec.set(kArea, geo.area);
    rec.set(kMeanRadius, geo.mean_radius);

    const IwbnProfile iwbn =
        compute_iwbn(signal, cfg.iwbn_lambda, cfg.entropy_window, cfg.entropy_bins);
    rec.set(kMeanLocalEntropy, iwbn.indices.mean_local_entropy);
    rec.set(kWeightRange, iwbn.indices.weight_range);
    rec.set(kEnhancementFactor, iwbn.indices.enhancement_factor);
    rec.set(kIwIrregularity, population_std(iwbn.weighted));
    {
        double rough = 0;
        const auto& s = iwbn.weighted;
        for (std::size_t i = 0; i < s.size(); ++i)
            rough += std::abs(s[(i + 1) % s.size()] - s[i]);
        rec.set(kIwRoughness, rough);
    }

    const std::vector<double>& series =
        cfg.entropy_on_weighted ? iwbn.weighted : signal.values;
    rec.set(kFractalDimension, box_counting_fd(contour));
    rec.set(kApproxEntropy, approximate_entropy(series, cfg.entropy_m, cfg.entropy_r));
    rec.set(kSampleEntropy, sample_entropy(series, cfg.entropy_m, cfg.entropy_r));
    rec.set(kPermEntropy, permutation_entropy(series, cfg.permen_order, cfg.permen_delay));
    rec.set(kLyapunov, largest_lyapunov(series, cfg.lyapunov));

    const BrainRegion brain = estimate_brain_region(sample.image, component);
    rec.set(kRei, ring_enhancement_index(sample.image, component, cfg.rei_epsilon,
                                         cfg.rei_core_frac));
    const SkullDistance sd = skull_distance(component, brain, cfg.contact_threshold_px);
    rec.set(kDSkull, sd.d_skull);
    rec.set(kContactRatio, sd.contact_ratio);
    if (const auto mls = midline_shift(component, brain, sample.orientation))
        rec.set(kMls, *mls);

    return rec;
}

std::vector<FeatureRecord> extract_batch(const std::vector<SampleManifest>& manifest,
                                         const std::filesystem::path& base_dir,
                                         const RunConfig& cfg,
                                         std::vector<ExtractFailure>* failures) {
    const int n = static_cast<int>(manifest.size());
    std::vector<FeatureRecord> slots(n);
    std::vector<std::uint8_t> ok(n, 0);
    std::vector<std::string> errors(n);

    auto resolve = [&](const std::string& p) {
        const std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : base_dir / fp;
    };

#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        try {
            SampleInput input;
            input.sample_id = manifest[i].sample_id;
            input.image = load_pgm(resolve(manifest[i].image_path));
            input.mask = load_mask(resolve(manifest[i].mask_path));
            input.orientation = manifest[i].orientation;
            slots[i] = extract_features(input, cfg);
            ok[i] = 1;
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    }

    std::vector<FeatureRecord> records;
    records.reserve(n);
    for (int i = 0; i < n; ++i) {
        if (ok[i]) {
            records.push_back(std::move(slots[i]));
        } else if (failures) {
            failures->push_back({manifest[i].sample_id, errors[i]});
        }
    }
    std::sort(records.begin(), records.end(),
              [](const FeatureRecord& a, const FeatureRecord& b) {
                  return a.sample_id < b.sample_id;
              });
    return records;
}

} // namespace xmorph
