#include <algorithm>
#include <set>
#include <sstream>

#include "doctest.h"
#include "malurl/pipeline.hpp"
#include "support/synthetic.hpp"
#include "support/toy.hpp"

using namespace malurl;
using malurl::testing::ScratchDir;

namespace {

std::string model_text(const PipelineModel& m) {
    std::ostringstream out;
    m.save(out);
    return out.str();
}

std::vector<UrlRecord> unique_corpus(std::array<std::size_t, kNumClasses> per_class, std::uint64_t seed) {
    auto recs = malurl::testing::synthetic_corpus(per_class, seed);
    return dedup(std::move(recs)).records;
}

}  // namespace

TEST_CASE("toy corpus trains, reports and reloads") {
    ScratchDir dir("toy");
    const auto recs = malurl::testing::synthetic_corpus({10, 10, 10, 10}, 1);
    malurl::testing::write_corpus(recs, dir / "toy.csv");
    std::vector<std::string> log;
    const auto out = train_pipeline(dir / "toy.csv", malurl::testing::toy_config(),
                                    [&](std::string_view line) { log.emplace_back(line); });
    REQUIRE(out.reports.size() == 3);
    CHECK(out.reports[0].split == "train");
    CHECK(out.reports[1].split == "validation");
    CHECK(out.reports[2].split == "test");
    CHECK(out.loaded_rows == 40);
    CHECK(out.cleaned.size() + out.dropped_duplicates == 40);
    CHECK(std::any_of(log.begin(), log.end(), [](const auto& l) { return l == "stage tabu"; }));

    out.model.save(dir / "model.txt");
    const auto loaded = PipelineModel::load(dir / "model.txt");
    CHECK(model_text(loaded) == model_text(out.model));

    const auto p = predict_url(loaded, "http://phishingsite.com/login");
    CHECK((p.class_name == "benign" || p.class_name == "malicious"));
    CHECK(p.scores.size() == 2);
    CHECK_THROWS_AS(predict_url(loaded, ""), Error);
    CHECK_THROWS_AS(predict_url(loaded, "   "), Error);

    write_training_reports(out, dir / "reports");
    for (auto name : {"report.csv", "confusion.csv", "report.txt", "tabu_trace.csv", "som_qe.csv", "gd_loss.csv",
                      "cleaned.csv", "train.csv", "validation.csv", "test.csv", "split_summary.txt", "summary.txt"})
        CHECK(std::filesystem::exists(dir / "reports" / name));
}

TEST_CASE("multiclass predictions use the four class names") {
    auto cfg = malurl::testing::toy_config();
    cfg.mode = ClassificationMode::multiclass;
    const auto out = train_pipeline(unique_corpus({10, 10, 10, 10}, 2), cfg);
    CHECK(out.model.rbfn.num_classes() == 4);
    CHECK(out.reports[0].report.mode == MetricsMode::macro);
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        const auto url = malurl::testing::synthetic_url(rng, static_cast<int>(rng.index(4)));
        const auto p = predict_url(out.model, url);
        CHECK(std::find(kClassNames.begin(), kClassNames.end(), p.class_name) != kClassNames.end());
    }
}

TEST_CASE("confidently fitted training urls predict their label") {
    auto cfg = malurl::testing::toy_config();
    cfg.mode = ClassificationMode::multiclass;
    cfg.rbf_centers = 1000;  // capped at the distinct training points
    cfg.gd.epochs = 2000;
    cfg.gd.learning_rate = 0.2;
    const auto out = train_pipeline(unique_corpus({10, 10, 10, 10}, 4), cfg);
    std::size_t confident = 0;
    for (const auto& r : out.split.train) {
        const LabeledSet one{{out.model.reduce(r.url)}, {r.class_label}};
        // A misclassified sample has squared error at least 0.5 summed over
        // the outputs, so anything below that must be predicted correctly.
        if (mse_loss(out.model.rbfn, one) * 4 < 0.5) {
            ++confident;
            CHECK(predict_url(out.model, r.url).class_name == r.class_name);
        }
    }
    CHECK(confident >= 5);
}

TEST_CASE("fixed seed gives identical models and reports") {
    const auto recs = malurl::testing::synthetic_corpus({15, 10, 10, 10}, 5);
    const auto cfg = malurl::testing::toy_config();
    const auto a = train_pipeline(recs, cfg), b = train_pipeline(recs, cfg);
    CHECK(model_text(a.model) == model_text(b.model));
    CHECK(report_csv(a.reports) == report_csv(b.reports));
    CHECK(confusion_csv(a.reports) == confusion_csv(b.reports));

    auto other = cfg;
    other.seed = 43;
    CHECK(model_text(train_pipeline(recs, other).model) != model_text(a.model));
}

TEST_CASE("tabu never worsens validation mse") {
    for (std::uint64_t seed : {6, 7, 8}) {
        auto cfg = malurl::testing::toy_config();
        cfg.seed = seed;
        const auto out = train_pipeline(unique_corpus({12, 12, 12, 12}, seed), cfg);
        CHECK(out.validation_mse_after_tabu <= out.validation_mse_before_tabu);
        CHECK(out.tabu.best_objective == out.validation_mse_after_tabu);
    }
}

TEST_CASE("fitted stages only see the training split") {
    const auto recs = unique_corpus({20, 12, 12, 12}, 9);
    const auto cfg = malurl::testing::toy_config();
    const auto base = train_pipeline(recs, cfg);

    std::vector<RawFeatures> raw;
    for (const auto& r : base.split.train) raw.push_back(extract_lexical(r.url));
    CHECK(base.model.normalizer == fit_normalizer(raw));

    // Replace held-out URLs in place with much longer ones; the split
    // assignment depends only on positions and classes, so it is unchanged.
    std::set<std::string> test_urls, validation_urls;
    for (const auto& r : base.split.test) test_urls.insert(r.url);
    for (const auto& r : base.split.validation) validation_urls.insert(r.url);

    auto swap_held_out = [&](const std::set<std::string>& which) {
        auto changed = recs;
        int n = 0;
        for (auto& r : changed)
            if (which.count(r.url)) r.url = "http://198.51.100." + std::to_string(n++) + "/" + std::string(200, 'z') + "?a=1&b=2";
        return changed;
    };

    const auto test_swapped = train_pipeline(swap_held_out(test_urls), cfg);
    CHECK(model_text(test_swapped.model) == model_text(base.model));

    const auto val_swapped = train_pipeline(swap_held_out(validation_urls), cfg);
    CHECK(val_swapped.model.normalizer == base.model.normalizer);
    CHECK(val_swapped.model.som.grid == base.model.som.grid);
    CHECK(val_swapped.kmeans_wcss == base.kmeans_wcss);
    CHECK(val_swapped.gd_loss == base.gd_loss);
}

TEST_CASE("save and load preserve predictions on 1000 urls") {
    const auto out = train_pipeline(unique_corpus({10, 10, 10, 10}, 11), malurl::testing::toy_config());
    std::stringstream buf;
    out.model.save(buf);
    const auto loaded = PipelineModel::load(buf);
    Rng rng(12);
    for (int i = 0; i < 1000; ++i) {
        std::string url = malurl::testing::synthetic_url(rng, static_cast<int>(rng.index(4)));
        if (i % 5 == 0) url += "/" + malurl::testing::random_token(rng, rng.index(300), "ab-./?=%");
        const auto before = predict_url(out.model, url), after = predict_url(loaded, url);
        CHECK(before.label == after.label);
        CHECK(before.scores == after.scores);
    }
}

TEST_CASE("model files are validated on load") {
    const auto out = train_pipeline(unique_corpus({10, 10, 10, 10}, 13), malurl::testing::toy_config());
    const auto text = model_text(out.model);

    auto expect_model_error = [](const std::string& body, std::string_view needle) {
        std::istringstream in(body);
        try {
            PipelineModel::load(in);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::model);
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    auto v2 = text;
    v2.replace(0, std::string("malurl-model 1").size(), "malurl-model 2");
    expect_model_error(v2, "unsupported model format version 2");
    expect_model_error("hello\n", "not a malurl model");
    expect_model_error(text.substr(0, text.size() / 2), "");
    auto mode = text;
    mode.replace(mode.find("features.mode = concat"), 22, "features.mode = bmu   ");
    expect_model_error(mode, "feature mode");
    auto classes = text;
    classes.replace(classes.find("classification.mode = binary"), 28, "classification.mode = multiclass");
    expect_model_error(classes, "class count");
    CHECK_THROWS_AS(PipelineModel::load(std::filesystem::path("/nonexistent/model")), Error);
}

TEST_CASE("stage errors name the stage") {
    auto cfg = malurl::testing::toy_config();
    try {
        train_pipeline(std::vector<UrlRecord>{}, cfg);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("stage 'split'") != std::string::npos);
    }
    try {
        train_pipeline(std::filesystem::path("/nonexistent/data.csv"), cfg);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("stage 'load'") != std::string::npos);
        CHECK(e.kind() == ErrorKind::data);
    }
}

TEST_CASE("evaluation in binary mode collapses malicious classes") {
    const auto out = train_pipeline(unique_corpus({10, 10, 10, 10}, 14), malurl::testing::toy_config());
    const auto rep = evaluate(out.model, out.cleaned, "all");
    CHECK(rep.confusion.total() == out.cleaned.size());
    const auto counts = class_counts(out.cleaned);
    CHECK(rep.confusion.tp + rep.confusion.fn == counts[1] + counts[2] + counts[3]);
    CHECK(rep.confusion.tn + rep.confusion.fp == counts[0]);
    CHECK(rep.report.mode == MetricsMode::binary);
}
