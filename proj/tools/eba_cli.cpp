// eba: command-line front end (embed, audit, run, eval, ablation).

#include "eba/adaptive.hpp"
#include "eba/biasaudit.hpp"
#include "eba/embed.hpp"
#include "eba/enhance.hpp"
#include "eba/error.hpp"
#include "eba/imgcore.hpp"
#include "eba/metrics.hpp"
#include "eba/parallel.hpp"
#include "eba/report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitPartial = 3;

struct Global {
    std::uint64_t seed = 42;
    unsigned workers = eba::default_workers();
    std::string config;
};

std::unique_ptr<eba::embed::EmbeddingProvider> make_provider(const std::string& which, std::uint64_t seed,
                                                             std::size_t dim) {
    if (which == "test") return std::make_unique<eba::embed::TestProvider>(seed, dim);
    if (which == "remote" || which.starts_with("remote:")) {
        eba::embed::RemoteOptions opts;
        if (which.size() > 7) {
            opts.base_url = which.substr(7);
        } else if (const char* env = std::getenv("EBAAI_PROVIDER_URL"); env && *env) {
            opts.base_url = env;
        }
        return std::make_unique<eba::embed::RemoteProvider>(opts);
    }
    throw eba::Error(eba::ErrorKind::InvalidParams, "unknown provider '" + which + "' (test | remote[:URL])");
}

// ---------------------------------------------------------------------------

struct EmbedArgs {
    std::string manifest;
    std::string provider = "test";
    std::size_t dim = eba::embed::kDefaultDim;
    std::string out;
};

int cmd_embed(const EmbedArgs& a, const Global& g) {
    const auto manifest = eba::img::load_manifest(a.manifest);
    auto provider = make_provider(a.provider, g.seed, a.dim);

    std::vector<eba::embed::Embedding> images(manifest.size());
    eba::parallel_for(manifest.size(), g.workers, [&](std::size_t i) {
        const auto& e = manifest.entries[i];
        if (!fs::is_regular_file(e.input_path))
            throw eba::Error(eba::ErrorKind::FileNotFound, e.input_path.string());
        images[i] = provider->embed_image(e.id, e.input_path);
    });

    eba::embed::EmbeddingStore store;
    for (std::size_t i = 0; i < manifest.size(); ++i) store.add(manifest.entries[i].id, images[i]);
    for (const auto& prompt : eba::embed::prompt_strings())
        store.add(std::string(eba::embed::kTextIdPrefix) + prompt, provider->embed_text(prompt));
    eba::embed::write_embeddings_file(store, a.out);
    std::cout << "wrote " << manifest.size() << " image and " << eba::embed::kConditionCount
              << " prompt embeddings (dim " << store.dim() << ") to " << a.out << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct AuditArgs {
    std::string manifest;
    std::string embeddings;
    int clusters = 8;
    bool tsne = true;
    double perplexity = 30.0;
    int iterations = 1000;
    std::string out;
};

int cmd_audit(const AuditArgs& a, const Global& g) {
    const auto manifest = eba::img::load_manifest(a.manifest);
    eba::embed::FileProvider store(eba::embed::load_embeddings_file(a.embeddings));
    const auto prompts = eba::embed::make_prompt_set(store);

    std::vector<eba::embed::Embedding> embeddings;
    std::map<std::string, eba::embed::SimilarityProfile> profiles;
    std::vector<std::string> ids;
    std::vector<std::string> datasets;
    for (const auto& e : manifest.entries) {
        embeddings.push_back(store.embed_image(e.id, e.input_path));
        profiles[e.id] = eba::embed::similarity_profile(embeddings.back(), prompts);
        ids.push_back(e.id);
        datasets.push_back(e.dataset_label);
    }
    const auto points = eba::bias::points_of(embeddings);

    eba::bias::KMeansOptions km;
    km.k = a.clusters;
    km.seed = g.seed;
    km.workers = g.workers;
    const auto clustering = eba::bias::kmeans(points, km);

    eba::bias::BiasReport report;
    report.k = a.clusters;
    report.seed = g.seed;
    report.entropy_nats = eba::bias::dataset_entropy(clustering.assignment, a.clusters);
    report.normalized_entropy = eba::bias::normalized_entropy(clustering.assignment, a.clusters);
    report.cluster_counts = eba::bias::cluster_counts(clustering.assignment, a.clusters);
    report.prompt_means = eba::bias::prompt_bias_table(profiles, manifest);
    report.ids = ids;
    report.labels = clustering.assignment.labels;
    report.weights = eba::bias::reweight(clustering.assignment);

    ordered_json config = {{"command", "audit"},
                           {"manifest", a.manifest},
                           {"embeddings", a.embeddings},
                           {"seed", g.seed},
                           {"clusters", a.clusters},
                           {"kmeans_max_iter", km.max_iter},
                           {"kmeans_tol", km.tol},
                           {"kmeans_iterations_run", clustering.model.iterations_run},
                           {"prompt_prefix", std::string(eba::embed::kDefaultPromptPrefix)},
                           {"prompt_score_aggregate", "mean"},
                           {"tsne", a.tsne}};

    fs::create_directories(a.out);
    const fs::path out(a.out);
    if (a.tsne) {
        const double n = static_cast<double>(points.size());
        double perplexity = a.perplexity;
        if (perplexity >= (n - 1.0) / 3.0) {
            perplexity = (n - 1.0) / 3.0 - 1.0;
            std::cerr << "warning: perplexity " << a.perplexity << " is too large for " << points.size()
                      << " points; using " << perplexity << '\n';
        }
        if (points.size() < 4 || perplexity <= 0.0) {
            std::cerr << "warning: too few points for t-SNE; skipping the layout\n";
            config["tsne"] = false;
        } else {
            eba::bias::TsneOptions topts;
            topts.perplexity = perplexity;
            topts.iterations = a.iterations;
            topts.seed = g.seed;
            topts.workers = g.workers;
            const auto layout = eba::bias::tsne(points, topts);
            config["tsne_perplexity"] = perplexity;
            config["tsne_iterations"] = a.iterations;
            config["tsne_final_kl"] = layout.final_kl;
            eba::report::write_text(out / "tsne.csv", eba::report::tsne_csv(layout, ids, datasets));
            eba::report::plot_tsne_svg(layout, datasets, out / "tsne.svg");
        }
    }
    eba::report::write_text(out / "bias_report.json", eba::report::bias_report_json(report, config));
    eba::report::write_text(out / "prompt_table.md", eba::bias::render_prompt_table(report.prompt_means));

    char buf[128];
    std::snprintf(buf, sizeof buf, "entropy=%.6f nats normalized=%.6f clusters=%d images=%zu\n", report.entropy_nats,
                  report.normalized_entropy, a.clusters, points.size());
    std::cout << buf;
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct RunArgs {
    std::string manifest;
    std::string embeddings;
    std::string provider;
    std::size_t dim = eba::embed::kDefaultDim;
    std::optional<double> threshold;
    std::optional<double> target_skip;
    eba::adaptive::AdaptiveParams params;
    eba::enhance::BaselineConfig baseline;
    std::string enhancer = "baseline";
    bool uncertainty = true;
    eba::uncertainty::StochasticConfig stochastic;
    double review_threshold = eba::uncertainty::kDefaultReviewThreshold;
    std::string on_provider_error = "abort";
    std::string out;
};

ordered_json params_json(const eba::adaptive::AdaptiveParams& p) {
    return {{"window", p.window}, {"epsilon", p.epsilon}, {"alpha", p.alpha}, {"beta", p.beta},
            {"d_max", p.d_max},   {"tile", p.tile},       {"overlap", p.overlap}};
}

int cmd_run(const RunArgs& a, const Global& g) {
    const auto manifest = eba::img::load_manifest(a.manifest);

    std::unique_ptr<eba::embed::EmbeddingProvider> provider;
    if (!a.embeddings.empty())
        provider = std::make_unique<eba::embed::FileProvider>(eba::embed::load_embeddings_file(a.embeddings));
    else
        provider = make_provider(a.provider, g.seed, a.dim);

    std::unique_ptr<eba::enhance::Enhancer> enhancer;
    if (a.enhancer == "baseline")
        enhancer = std::make_unique<eba::enhance::BaselineEnhancer>(a.baseline);
    else if (a.enhancer.starts_with("external:"))
        enhancer = std::make_unique<eba::enhance::ExternalEnhancer>(a.enhancer.substr(9));
    else
        throw eba::Error(eba::ErrorKind::InvalidParams, "unknown enhancer '" + a.enhancer + "'");

    eba::enhance::PipelineOptions opts;
    opts.threshold = a.threshold;
    opts.target_skip = a.target_skip;
    opts.params = a.params;
    opts.workers = g.workers;
    opts.seed = g.seed;
    opts.uncertainty = a.uncertainty;
    opts.stochastic = a.stochastic;
    opts.review_threshold = a.review_threshold;
    if (a.on_provider_error == "skip-gating")
        opts.on_provider_error = eba::enhance::ProviderErrorPolicy::SkipGating;
    else if (a.on_provider_error != "abort")
        throw eba::Error(eba::ErrorKind::InvalidParams, "--on-provider-error must be abort or skip-gating");
    opts.out_dir = a.out;

    fs::create_directories(a.out);
    auto result = eba::enhance::run_pipeline(manifest, *provider, *enhancer, opts);

    ordered_json config = {
        {"command", "run"},
        {"manifest", a.manifest},
        {"provider", !a.embeddings.empty() ? "file:" + a.embeddings : provider->name()},
        {"seed", g.seed},
        {"threshold", result.threshold},
        {"threshold_source", a.threshold ? "fixed" : "target_skip"},
        {"target_skip", a.target_skip ? ordered_json(*a.target_skip) : ordered_json(nullptr)},
        {"logit_scale", eba::embed::kLogitScale},
        {"prompt_prefix", opts.prompt_prefix},
        {"adaptive", params_json(a.params)},
        {"enhancer", enhancer->name()},
        {"baseline",
         {{"base_strength", a.baseline.base_strength},
          {"saturation_boost", a.baseline.saturation_boost},
          {"percentile_clip", a.baseline.percentile_clip}}},
        {"uncertainty",
         {{"enabled", a.uncertainty && enhancer->stochastic()},
          {"passes", a.stochastic.passes},
          {"gain_jitter_sigma", a.stochastic.gain_jitter_sigma},
          {"pass_drop_prob", a.stochastic.pass_drop_prob},
          {"review_threshold", a.review_threshold},
          {"variance_png_scale", eba::uncertainty::kVariancePngScale}}},
        {"on_provider_error", a.on_provider_error},
        {"gating_disabled", result.gating_disabled},
        {"provider_error", result.provider_error}};

    const auto report = eba::report::make_run_report(std::move(config), result.records);
    eba::report::write_run_report(report, fs::path(a.out) / "run.json");
    eba::report::write_csv(report.records, fs::path(a.out) / "run.csv");

    const auto& agg = report.aggregates;
    if (!agg.means.empty()) {
        std::string md;
        for (const auto& m : agg.means) {
            md += "## " + m.dataset + "\n\n";
            md += eba::report::render_metric_table({{enhancer->name(), m.means}}) + "\n";
        }
        eba::report::write_text(fs::path(a.out) / "metrics.md", md);
    }

    for (const auto& r : report.records)
        if (r.status == eba::enhance::RecordStatus::Failed) std::cerr << "failed: " << r.id << ": " << r.error << '\n';
    if (result.gating_disabled) std::cerr << "warning: gating disabled: " << result.provider_error << '\n';

    std::string mean_psnr = "n/a";
    double psnr_sum = 0.0;
    std::size_t measured = 0;
    for (const auto& r : report.records) {
        if (r.status != eba::enhance::RecordStatus::Ok || !r.metrics) continue;
        psnr_sum += r.metrics->psnr_db;
        ++measured;
    }
    if (measured > 0) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", psnr_sum / static_cast<double>(measured));
        mean_psnr = buf;
    }
    std::cout << "skipped=" << agg.skipped << '/' << agg.n_ok
              << " savings=" << eba::adaptive::format_percent(agg.skip_fraction) << " mean_psnr=" << mean_psnr
              << " tile_savings=" << eba::adaptive::format_percent(agg.tile_unit_savings) << '\n';

    return agg.n_failed * 10 > agg.n ? kExitPartial : kExitOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
    std::string pairs;
    std::string results;
    std::string out;
};

int cmd_eval(const EvalArgs& a, const Global& g) {
    const auto manifest = eba::img::load_manifest(a.pairs);
    const fs::path root(a.results);
    if (!fs::is_directory(root)) throw eba::Error(eba::ErrorKind::FileNotFound, "results directory " + a.results);

    std::vector<std::pair<std::string, fs::path>> models;
    for (const auto& d : fs::directory_iterator(root))
        if (d.is_directory()) models.emplace_back(d.path().filename().string(), d.path());
    if (models.empty()) models.emplace_back(root.filename().string(), root);
    std::sort(models.begin(), models.end());

    std::vector<std::string> datasets;
    for (const auto& e : manifest.entries) {
        if (!e.gt_path) {
            std::cerr << "warning: " << e.id << " has no ground truth; not evaluated\n";
            continue;
        }
        if (std::find(datasets.begin(), datasets.end(), e.dataset_label) == datasets.end())
            datasets.push_back(e.dataset_label);
    }

    bool partial = false;
    ordered_json doc;
    doc["schema_version"] = eba::report::kSchemaVersion;
    doc["metric_version"] = std::string(eba::metrics::kMetricVersion);
    doc["config"] = {{"command", "eval"}, {"pairs", a.pairs}, {"results", a.results}};
    doc["models"] = ordered_json::array();
    std::map<std::string, std::vector<std::pair<std::string, eba::metrics::MetricSet>>> tables;

    for (const auto& [name, dir] : models) {
        std::vector<std::optional<eba::metrics::MetricSet>> sets(manifest.size());
        std::vector<std::string> errors(manifest.size());
        eba::parallel_for(manifest.size(), g.workers, [&](std::size_t i) {
            const auto& e = manifest.entries[i];
            if (!e.gt_path) return;
            try {
                const auto result = eba::enhance::external_enhance(dir, e.id);
                sets[i] = eba::metrics::evaluate_pair(result, eba::img::load_image_any_size(*e.gt_path));
            } catch (const eba::Error& err) {
                errors[i] = err.what();
            }
        });

        auto images = ordered_json::array();
        auto failures = ordered_json::array();
        for (std::size_t i = 0; i < manifest.size(); ++i) {
            const auto& e = manifest.entries[i];
            if (!errors[i].empty()) {
                std::cerr << name << ": " << e.id << ": " << errors[i] << '\n';
                failures.push_back({{"id", e.id}, {"error", errors[i]}});
                partial = true;
            }
            if (!sets[i]) continue;
            images.push_back({{"id", e.id},
                              {"dataset", e.dataset_label},
                              {"ssim", sets[i]->ssim},
                              {"psnr_db", sets[i]->psnr_db},
                              {"uiqm", sets[i]->uiqm},
                              {"uciqe", sets[i]->uciqe},
                              {"fsim", sets[i]->fsim}});
        }
        auto means = ordered_json::array();
        for (const auto& ds : datasets) {
            std::vector<eba::metrics::MetricSet> group;
            for (std::size_t i = 0; i < manifest.size(); ++i)
                if (sets[i] && manifest.entries[i].dataset_label == ds) group.push_back(*sets[i]);
            if (group.empty()) continue;
            const auto m = eba::metrics::dataset_means(group);
            tables[ds].emplace_back(name, m);
            means.push_back({{"dataset", ds},
                             {"count", group.size()},
                             {"ssim", m.ssim},
                             {"psnr_db", m.psnr_db},
                             {"uiqm", m.uiqm},
                             {"uciqe", m.uciqe},
                             {"fsim", m.fsim}});
        }
        doc["models"].push_back(
            ordered_json{{"model", name}, {"images", images}, {"failures", failures}, {"means", means}});
    }

    fs::create_directories(a.out);
    std::string md;
    for (const auto& ds : datasets) {
        if (!tables.contains(ds)) continue;
        md += "## " + ds + "\n\n" + eba::report::render_metric_table(tables[ds]) + "\n";
    }
    eba::report::write_text(fs::path(a.out) / "metrics.md", md);
    eba::report::write_text(fs::path(a.out) / "eval.json", doc.dump(2) + "\n");
    std::cout << md;
    return partial ? kExitPartial : kExitOk;
}

// ---------------------------------------------------------------------------

struct AblationArgs {
    std::string gated;
    std::string full;
    std::string out;
    std::optional<double> reported_drop;
};

int cmd_ablation(const AblationArgs& a, const Global&) {
    const auto gated = eba::report::read_run_report(a.gated);
    const auto full = eba::report::read_run_report(a.full);
    const auto table = eba::report::render_ablation(eba::report::ablation_table(gated, full), a.reported_drop);
    eba::report::write_text(a.out, table);
    std::cout << table;
    return kExitOk;
}

// ---------------------------------------------------------------------------

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// Flat key=value lines become --key=value arguments placed right after the
// subcommand, so explicit flags (parsed later, last one wins) override them.
std::vector<std::string> config_args(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw eba::Error(eba::ErrorKind::FileNotFound, "config " + path.string());
    std::vector<std::string> args;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == '[') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw eba::Error(eba::ErrorKind::ParseError, path.string() + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front())
            value = value.substr(1, value.size() - 2);
        std::replace(key.begin(), key.end(), '_', '-');
        args.push_back("--" + key + "=" + value);
    }
    return args;
}

std::vector<std::string> with_config(std::vector<std::string> args, const std::vector<std::string>& subcommands) {
    std::optional<std::string> config;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) config = args[i + 1];
        if (args[i].starts_with("--config=")) config = args[i].substr(9);
    }
    if (!config) return args;
    const auto extra = config_args(*config);
    auto at = std::find_if(args.begin(), args.end(), [&](const std::string& a) {
        return std::find(subcommands.begin(), subcommands.end(), a) != subcommands.end();
    });
    if (at == args.end()) throw eba::Error(eba::ErrorKind::InvalidParams, "--config needs a subcommand");
    args.insert(at + 1, extra.begin(), extra.end());
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Clarity-gated adaptive underwater image enhancement"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    Global g;
    app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
    app.add_option("--workers", g.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--config", g.config, "key=value file; explicit flags override it");

    EmbedArgs ea;
    auto* embed = app.add_subcommand("embed", "Embed manifest images and the condition prompts into an EBAE file");
    embed->add_option("--manifest", ea.manifest)->required();
    embed->add_option("--provider", ea.provider, "test | remote[:URL]")->capture_default_str();
    embed->add_option("--dim", ea.dim, "Dimension for the test provider")->capture_default_str();
    embed->add_option("--out", ea.out)->required();

    AuditArgs aa;
    auto* audit = app.add_subcommand("audit", "Cluster entropy, reweighting, prompt table and t-SNE");
    audit->add_option("--manifest", aa.manifest)->required();
    audit->add_option("--embeddings", aa.embeddings)->required();
    audit->add_option("--clusters", aa.clusters)->check(CLI::PositiveNumber)->capture_default_str();
    audit->add_flag("--tsne,!--no-tsne", aa.tsne, "Compute the t-SNE layout");
    audit->add_option("--perplexity", aa.perplexity)->capture_default_str();
    audit->add_option("--tsne-iterations", aa.iterations)->check(CLI::PositiveNumber)->capture_default_str();
    audit->add_option("--out", aa.out)->required();

    RunArgs ra;
    double threshold = 0.0;
    double target_skip = 0.0;
    auto* run = app.add_subcommand("run", "Gated, depth-adaptive enhancement of a manifest");
    run->add_option("--manifest", ra.manifest)->required();
    auto* emb_opt = run->add_option("--embeddings", ra.embeddings, "EBAE file");
    auto* prov_opt = run->add_option("--provider", ra.provider, "test | remote[:URL]");
    emb_opt->excludes(prov_opt);
    run->add_option("--dim", ra.dim, "Dimension for the test provider")->capture_default_str();
    auto* thr_opt = run->add_option("--threshold", threshold, "Clarity threshold");
    auto* tgt_opt = run->add_option("--target-skip", target_skip, "Calibrate the threshold to this skip rate")
                        ->check(CLI::Range(0.0, 1.0));
    thr_opt->excludes(tgt_opt);
    run->add_option("--alpha", ra.params.alpha)->capture_default_str();
    run->add_option("--beta", ra.params.beta)->capture_default_str();
    run->add_option("--dmax", ra.params.d_max)->capture_default_str();
    run->add_option("--window", ra.params.window)->capture_default_str();
    run->add_option("--epsilon", ra.params.epsilon)->capture_default_str();
    run->add_option("--tile", ra.params.tile)->capture_default_str();
    run->add_option("--overlap", ra.params.overlap)->capture_default_str();
    run->add_option("--base-strength", ra.baseline.base_strength)->capture_default_str();
    run->add_option("--saturation-boost", ra.baseline.saturation_boost)->capture_default_str();
    run->add_option("--percentile-clip", ra.baseline.percentile_clip)->capture_default_str();
    run->add_option("--enhancer", ra.enhancer, "baseline | external:DIR")->capture_default_str();
    run->add_flag("--uncertainty,!--no-uncertainty", ra.uncertainty, "MC variance for enhanced images");
    run->add_option("--passes", ra.stochastic.passes)->capture_default_str();
    run->add_option("--gain-jitter", ra.stochastic.gain_jitter_sigma)->capture_default_str();
    run->add_option("--pass-drop", ra.stochastic.pass_drop_prob)->capture_default_str();
    run->add_option("--review-threshold", ra.review_threshold)->capture_default_str();
    run->add_option("--on-provider-error", ra.on_provider_error, "abort | skip-gating")
        ->check(CLI::IsMember({"abort", "skip-gating"}))
        ->capture_default_str();
    run->add_option("--out", ra.out)->required();

    EvalArgs va;
    auto* eval = app.add_subcommand("eval", "Metrics of pre-computed results against ground truth");
    eval->add_option("--pairs", va.pairs, "Manifest with gt paths")->required();
    eval->add_option("--results", va.results, "Directory of per-model result directories")->required();
    eval->add_option("--out", va.out)->required();

    AblationArgs ba;
    double reported = 0.0;
    auto* ablation = app.add_subcommand("ablation", "Compare a gated run with an ungated one");
    ablation->add_option("--gated", ba.gated)->required();
    ablation->add_option("--full", ba.full)->required();
    ablation->add_option("--out", ba.out)->required();
    auto* rep_opt = ablation->add_option("--reported-drop", reported, "Published PSNR drop (%) shown beside ours");

    for (auto* sub : {embed, audit, run, eval, ablation}) sub->fallthrough();

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = with_config(std::move(args), {"embed", "audit", "run", "eval", "ablation"});
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    } catch (const eba::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }

    try {
        if (embed->parsed()) return cmd_embed(ea, g);
        if (audit->parsed()) return cmd_audit(aa, g);
        if (run->parsed()) {
            if (ra.embeddings.empty() && ra.provider.empty()) {
                std::cerr << "error: run needs --embeddings or --provider\n";
                return kExitInput;
            }
            if (thr_opt->count() > 0) ra.threshold = threshold;
            if (tgt_opt->count() > 0) ra.target_skip = target_skip;
            if (!ra.threshold && !ra.target_skip) {
                std::cerr << "error: run needs --threshold or --target-skip\n";
                return kExitInput;
            }
            return cmd_run(ra, g);
        }
        if (eval->parsed()) return cmd_eval(va, g);
        if (ablation->parsed()) {
            if (rep_opt->count() > 0) ba.reported_drop = reported;
            return cmd_ablation(ba, g);
        }
    } catch (const eba::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return kExitInput;
}
