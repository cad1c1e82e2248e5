#include "eba/enhance.hpp"
#include "eba/error.hpp"
#include "eba/parallel.hpp"
#include "eba/random.hpp"


namespace eba::enhance {

namespace {

namespace fs = std::filesystem;

img::ImageBuf quantized(const img::ImageBuf& image) {
    img::ImageBuf q(image.height(), image.width());
    auto src = image.data();
    auto dst = q.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = img::quantize_u8(src[i]) / 255.0;
    return q;
}

void fail(RunRecord& r, const std::string& what) {
    r.status = RecordStatus::Failed;
    r.error = what;
    r.metrics.reset();
    r.uncertainty.reset();
    r.flagged = false;
    r.output_path.clear();
}

}  // namespace

RunResult run_pipeline(const img::DatasetManifest& manifest, embed::EmbeddingProvider& provider, Enhancer& enhancer,
                       const PipelineOptions& opts) {
    if (manifest.empty()) throw Error(ErrorKind::EmptyInput, "manifest has no entries");
    if (opts.threshold.has_value() == opts.target_skip.has_value())
        throw Error(ErrorKind::InvalidParams, "set exactly one of threshold and target skip rate");
    opts.params.validate();
    if (opts.uncertainty) opts.stochastic.validate();

    const std::size_t n = manifest.size();
    RunResult result;
    result.records.resize(n);
    std::vector<std::optional<img::ImageBuf>> inputs(n);
    std::vector<std::string> provider_errors(n);

    std::optional<embed::PromptSet> prompts;
    try {
        prompts = embed::make_prompt_set(provider, opts.prompt_prefix);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::ProviderUnavailable) throw;
        if (opts.on_provider_error == ProviderErrorPolicy::Abort) throw;
        result.gating_disabled = true;
        result.provider_error = e.what();
    }

    parallel_for(n, opts.workers, [&](std::size_t i) {
        const auto& entry = manifest.entries[i];
        RunRecord& r = result.records[i];
        r.id = entry.id;
        r.dataset = entry.dataset_label;
        try {
            inputs[i] = img::load_image(entry.input_path);
        } catch (const Error& e) {
            fail(r, e.what());
            return;
        }
        if (!prompts) return;
        try {
            const auto e = provider.embed_image(entry.id, entry.input_path);
            r.clarity = embed::clarity_score(embed::similarity_profile(e, *prompts));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::ProviderUnavailable) throw;
            provider_errors[i] = e.what();
        }
    });

    for (const auto& msg : provider_errors) {
        if (msg.empty()) continue;
        if (opts.on_provider_error == ProviderErrorPolicy::Abort) throw Error(ErrorKind::ProviderUnavailable, msg);
        result.gating_disabled = true;
        if (result.provider_error.empty()) result.provider_error = msg;
        break;
    }
    if (result.gating_disabled) {
        for (auto& r : result.records) r.clarity.reset();
        result.threshold = opts.threshold.value_or(1.0);
    } else if (opts.threshold) {
        result.threshold = *opts.threshold;
    } else {
        std::vector<double> scores;
        for (const auto& r : result.records)
            if (r.clarity) scores.push_back(*r.clarity);
        result.threshold = calibrate_threshold(scores, *opts.target_skip);
    }

    const bool writing = !opts.out_dir.empty();
    if (writing) {
        for (const char* sub : {"enhanced", "skipped", "uncertainty"}) fs::create_directories(opts.out_dir / sub);
    }

    parallel_for(n, opts.workers, [&](std::size_t i) {
        RunRecord& r = result.records[i];
        if (r.status == RecordStatus::Failed) return;
        const auto& entry = manifest.entries[i];
        const img::ImageBuf& input = *inputs[i];
        const auto full_units = static_cast<std::int64_t>(opts.params.d_max) * input.height() * input.width();
        r.decision = result.gating_disabled ? Decision::Enhance : gate(*r.clarity, result.threshold).decision;
        try {
            std::optional<img::ImageBuf> gt;
            if (entry.gt_path) gt = img::load_image_any_size(*entry.gt_path);

            if (r.decision == Decision::Skip) {
                r.cost = {0, full_units};
                r.savings = 1.0;
                r.output_path = "skipped/" + entry.id + entry.input_path.extension().string();
                if (writing)
                    fs::copy_file(entry.input_path, opts.out_dir / r.output_path, fs::copy_options::overwrite_existing);
                if (gt) r.metrics = metrics::evaluate_pair(input, *gt);
                return;
            }

            const auto planned = adaptive::plan(input, opts.params);
            r.cost = planned.cost;
            r.savings = adaptive::savings_fraction(planned.cost);
            const img::ImageBuf out = quantized(enhancer.enhance(entry.id, input, planned.plan, std::nullopt));
            r.output_path = "enhanced/" + entry.id + ".png";
            if (writing) img::save_image(out, opts.out_dir / r.output_path);
            if (gt) r.metrics = metrics::evaluate_pair(out, *gt);

            if (opts.uncertainty && enhancer.stochastic()) {
                auto cfg = opts.stochastic;
                cfg.seed = rng::keyed(opts.seed, "uncertainty", entry.id);
                const auto vr = uncertainty::mc_variance(entry.id, input, planned.plan, enhancer, cfg,
                                                         opts.review_threshold);
                r.uncertainty = vr.scalar;
                r.flagged = vr.flagged;
                if (writing) {
                    uncertainty::write_ebav(vr.variance_map, opts.out_dir / "uncertainty" / (entry.id + ".ebav"));
                    img::save_plane_png16(vr.variance_map, uncertainty::kVariancePngScale,
                                          opts.out_dir / "uncertainty" / (entry.id + ".png"));
                }
            }
        } catch (const Error& e) {
            fail(r, e.what());
        } catch (const fs::filesystem_error& e) {
            fail(r, std::string("IoError: ") + e.what());
        }
    });
    return result;
}

}  // namespace eba::enhance
