#include "eba/error.hpp"
#include "eba/report.hpp"
#include "fixtures.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>

using namespace eba;
using namespace eba::report;
using enhance::Decision;
using enhance::RecordStatus;
using enhance::RunRecord;

namespace {

RunRecord rec(std::string id, std::string ds, Decision d, double psnr, double ssim, std::int64_t units = 0) {
    RunRecord r;
    r.id = std::move(id);
    r.dataset = std::move(ds);
    r.decision = d;
    r.clarity = d == Decision::Skip ? 0.9 : 0.1;
    r.cost = {d == Decision::Skip ? 0 : units, 400};
    r.savings = 1.0 - static_cast<double>(r.cost.units) / 400.0;
    r.output_path = (d == Decision::Skip ? "skipped/" : "enhanced/") + r.id + ".png";
    r.metrics = metrics::MetricSet{ssim, psnr, 2.5, 0.55, 0.9};
    if (d == Decision::Enhance) r.uncertainty = 2e-4;
    return r;
}

std::vector<RunRecord> sample_records() {
    std::vector<RunRecord> v{rec("a", "LSUI400", Decision::Skip, 30.0, 0.9),
                             rec("b", "LSUI400", Decision::Enhance, 25.0, 0.8, 100),
                             rec("c", "UIEB100", Decision::Enhance, 20.0, 0.7, 300)};
    RunRecord bad;
    bad.id = "d";
    bad.dataset = "UIEB100";
    bad.status = RecordStatus::Failed;
    bad.error = "DecodeError: d.png";
    v.push_back(bad);
    return v;
}

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::FileNotFound;
}

bias::TsneLayout small_layout() {
    bias::TsneLayout l;
    l.coords = {{-1.0, 0.5}, {2.0, 1.0}, {0.25, -3.0}, {1.5, 2.0}};
    return l;
}

}  // namespace

TEST_CASE("aggregates count skips over successful records") {
    const auto recs = sample_records();
    const auto a = compute_aggregates(recs);
    CHECK(a.n == 4);
    CHECK(a.n_ok == 3);
    CHECK(a.n_failed == 1);
    CHECK(a.skipped == 1);
    CHECK(a.enhanced == 2);
    CHECK(a.skip_fraction == 1.0 / 3.0);
    CHECK(a.tile_units == 400);
    CHECK(a.tile_full_units == 1200);
    REQUIRE(a.means.size() == 2);
    CHECK(a.means[0].dataset == "LSUI400");
    CHECK(a.means[0].count == 2);
    CHECK(a.means[0].means.psnr_db == 27.5);
    REQUIRE(a.enhanced_means.size() == 2);
    CHECK(a.enhanced_means[0].means.psnr_db == 25.0);
}

TEST_CASE("run report JSON round trips byte for byte") {
    nlohmann::ordered_json cfg{{"seed", 42}, {"threshold", 0.25}};
    const auto report = make_run_report(cfg, sample_records());
    const auto text = run_report_json(report);
    const auto back = parse_run_report(text);
    CHECK(run_report_json(back) == text);
    CHECK(back.aggregates == report.aggregates);
    CHECK(back.records[1].metrics == report.records[1].metrics);
    CHECK(back.records[3].error == "DecodeError: d.png");

    const auto doc = nlohmann::json::parse(text);
    CHECK(doc["schema_version"] == 1);
    CHECK(doc["records"][0]["decision"] == "skip");
    CHECK(doc["records"][3]["metrics"].is_null());
    CHECK(doc["aggregates"]["skipped"] == 1);

    fx::TempDir dir;
    write_run_report(report, dir / "run.json");
    CHECK(fx::read_file(dir / "run.json") == text);
    CHECK(read_run_report(dir / "run.json").records.size() == 4);
}

TEST_CASE("tampered aggregates are rejected") {
    const auto text = run_report_json(make_run_report({}, sample_records()));
    auto doc = nlohmann::ordered_json::parse(text);
    doc["aggregates"]["skipped"] = 2;
    CHECK(kind_of([&] { parse_run_report(doc.dump()); }) == ErrorKind::InconsistentReport);

    doc = nlohmann::ordered_json::parse(text);
    doc["records"][1]["metrics"]["psnr_db"] = 26.0;
    CHECK(kind_of([&] { parse_run_report(doc.dump()); }) == ErrorKind::InconsistentReport);

    doc = nlohmann::ordered_json::parse(text);
    doc["schema_version"] = 2;
    CHECK(kind_of([&] { parse_run_report(doc.dump()); }) == ErrorKind::ParseError);
    CHECK(kind_of([&] { parse_run_report("{"); }) == ErrorKind::ParseError);
}

TEST_CASE("non-finite values are refused") {
    auto recs = sample_records();
    recs[1].metrics->uiqm = NAN;
    CHECK(kind_of([&] { run_report_json(make_run_report({}, recs)); }) == ErrorKind::SerializationError);
    fx::TempDir dir;
    CHECK(kind_of([&] { write_csv(recs, dir / "run.csv"); }) == ErrorKind::SerializationError);
    CHECK_FALSE(std::filesystem::exists(dir / "run.csv"));
}

TEST_CASE("csv has one line per record") {
    const auto recs = sample_records();
    const auto csv = run_csv(recs);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    CHECK(csv.find("id,decision,clarity,depth_units,savings,psnr,ssim,uiqm,uciqe,fsim,uncertainty,flagged\n") == 0);
    CHECK(csv.find("a,skip,0.900000,0,1.000000,30.000000,0.900000,") != std::string::npos);
    CHECK(csv.find("d,error,,0,0.000000,,,,,,,false\n") != std::string::npos);
    CHECK(fixed6(1.0 / 3.0) == "0.333333");
}

TEST_CASE("metric table format") {
    const auto md = render_metric_table({{"WaterNet", {0.8434, 21.7443, 2.9, 0.6, 0.88}}});
    CHECK(md == "| Model | SSIM | PSNR | UIQM | UCIQE | FSIM |\n|---|---|---|---|---|---|\n"
                "| WaterNet | 0.843 | 21.744 | 2.900 | 0.600 | 0.880 |\n");
}

TEST_CASE("ablation row renders like the published one") {
    // 400 records: the full run enhances all, the gated run skips 75.
    std::vector<RunRecord> full, gated;
    for (int i = 0; i < 400; ++i) {
        const std::string id = "i" + std::to_string(i);
        full.push_back(rec(id, "LSUI400", Decision::Enhance, 27.20, 0.879, 100));
        gated.push_back(rec(id, "LSUI400", i < 75 ? Decision::Skip : Decision::Enhance, 26.40, 0.869, 100));
    }
    const auto rows = ablation_table(make_run_report({}, gated), make_run_report({}, full));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].count == 400);
    CHECK(rows[0].savings_gated == 75.0 / 400.0);
    CHECK(rows[0].savings_full == 0.0);
    const auto md = render_ablation(rows, 3.89);
    CHECK(md.find("| LSUI400 | 27.20 | 0.879 | 0% | 26.40 | 0.869 | 18.75% | 2.94% | 3.89% |") != std::string::npos);
    CHECK(render_ablation(rows).find("PSNR drop (reported)") == std::string::npos);
}

TEST_CASE("identical runs give zero drop and mismatched runs are refused") {
    const auto r = make_run_report({}, sample_records());
    const auto rows = ablation_table(r, r);
    REQUIRE(rows.size() == 2);
    CHECK(*rows[0].psnr_drop_pct == 0.0);
    CHECK(rows[0].savings_gated == rows[0].savings_full);
    CHECK(rows[1].count == 1);

    auto other = sample_records();
    other[2].id = "zz";
    CHECK(kind_of([&] { ablation_table(r, make_run_report({}, other)); }) == ErrorKind::ManifestMismatch);
    other.pop_back();
    CHECK(kind_of([&] { ablation_table(r, make_run_report({}, other)); }) == ErrorKind::ManifestMismatch);
}

TEST_CASE("dataset colors") {
    CHECK(dataset_color("LSUI400", 0) == "red");
    CHECK(dataset_color("UIEB100", 5) == "blue");
    CHECK(dataset_color("Ocean_ex", 1) == "green");
    CHECK(dataset_color("Mine", 0) == "orange");
    CHECK(dataset_color("Mine", 9) == "purple");
}

TEST_CASE("t-SNE SVG matches the golden rendering") {
    const std::vector<std::string> labels{"LSUI400", "UIEB100", "Ocean_ex", "Custom<1>"};
    const auto svg = render_tsne_svg(small_layout(), labels);
    CHECK(svg.find("fill=\"red\"") != std::string::npos);
    CHECK(svg.find("fill=\"orange\"") != std::string::npos);
    CHECK(svg.find("Custom&lt;1&gt;") != std::string::npos);

    const std::filesystem::path golden = std::filesystem::path(EBA_GOLDEN_DIR) / "tsne_small.svg";
    if (std::getenv("EBA_UPDATE_GOLDEN")) fx::write_file(golden, svg);
    CHECK(svg == fx::read_file(golden));

    CHECK(kind_of([] { render_tsne_svg(bias::TsneLayout{}, {}); }) == ErrorKind::EmptyInput);
    CHECK(kind_of([&] { render_tsne_svg(small_layout(), {"a"}); }) == ErrorKind::LengthMismatch);
}

TEST_CASE("bias report and t-SNE CSV") {
    bias::BiasReport br;
    br.k = 2;
    br.seed = 42;
    br.entropy_nats = std::log(2.0);
    br.normalized_entropy = 1.0;
    br.cluster_counts = {1, 1};
    br.ids = {"a", "b"};
    br.labels = {0, 1};
    br.weights.w = {1.0, 1.0};
    const auto doc = nlohmann::json::parse(bias_report_json(br, {{"k", 2}}));
    CHECK(doc["k"] == 2);
    CHECK(doc["images"][1]["cluster"] == 1);
    br.weights.w.pop_back();
    CHECK(kind_of([&] { bias_report_json(br, {}); }) == ErrorKind::LengthMismatch);

    bias::TsneLayout l;
    l.coords = {{1.0, -2.0}};
    CHECK(tsne_csv(l, {"x"}, {"D"}) == "id,x,y,dataset\nx,1.000000,-2.000000,D\n");
}

TEST_CASE("write_text is atomic and read_text reports missing files") {
    fx::TempDir dir;
    write_text(dir / "a.txt", "hello");
    CHECK(read_text(dir / "a.txt") == "hello");
    CHECK_FALSE(std::filesystem::exists(dir / "a.txt.tmp"));
    CHECK(kind_of([&] { read_text(dir / "missing"); }) == ErrorKind::FileNotFound);
    CHECK(kind_of([&] { write_text(dir / "no" / "dir" / "x", "x"); }) == ErrorKind::IoError);
}
