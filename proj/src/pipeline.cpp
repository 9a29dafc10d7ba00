#include "malurl/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "serialize.hpp"

namespace malurl {

namespace {

template <class Fn>
auto stage(std::string_view name, const Logger& log, Fn&& fn) {
    if (log) log(std::string("stage ") + std::string(name));
    try {
        return fn();
    } catch (const Error& e) {
        fail(e.kind(), "stage '" + std::string(name) + "': " + e.what());
    }
}

LabeledSet labeled(const PipelineModel& model, const std::vector<UrlRecord>& records) {
    LabeledSet set;
    set.inputs.reserve(records.size());
    set.labels.reserve(records.size());
    for (const auto& r : records) {
        set.inputs.push_back(model.reduce(r.url));
        set.labels.push_back(model.target_label(r.class_label));
    }
    return set;
}

std::size_t distinct_count(std::vector<Vector> points) {
    std::sort(points.begin(), points.end());
    return static_cast<std::size_t>(std::unique(points.begin(), points.end()) - points.begin());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) fail(ErrorKind::data, "cannot write '" + path.string() + "'");
}

std::string series_csv(std::string_view header, const std::vector<double>& values) {
    std::string out = "index," + std::string(header) + "\n";
    for (std::size_t i = 0; i < values.size(); ++i) out += std::to_string(i) + "," + format_exact(values[i]) + "\n";
    return out;
}

}  // namespace

std::vector<std::string> PipelineModel::class_names() const {
    if (config.mode == ClassificationMode::binary) return {"benign", "malicious"};
    return {kClassNames.begin(), kClassNames.end()};
}

int PipelineModel::target_label(int class_label) const {
    if (config.mode == ClassificationMode::binary) return class_label == 0 ? 0 : 1;
    return class_label;
}

Vector PipelineModel::reduce(std::string_view url) const {
    const Vector scaled = normalizer.apply(extract_lexical(url));
    return extract_features(som, scaled, config.feature_mode);
}

Prediction predict_url(const PipelineModel& model, std::string_view url) {
    if (trim(url).empty()) fail(ErrorKind::invalid_argument, "empty URL");
    Prediction p;
    p.scores = forward(model.rbfn, model.reduce(url));
    p.label = argmax(p.scores);
    p.class_name = model.class_names()[static_cast<std::size_t>(p.label)];
    return p;
}

NamedReport evaluate(const PipelineModel& model, const std::vector<UrlRecord>& records,
                     std::string split_name) {
    require(!records.empty(), "evaluate: no records in split '" + split_name + "'");
    std::vector<int> predictions, truths;
    predictions.reserve(records.size());
    truths.reserve(records.size());
    for (const auto& r : records) {
        predictions.push_back(predict(model.rbfn, model.reduce(r.url)));
        truths.push_back(model.target_label(r.class_label));
    }
    NamedReport out;
    out.split = std::move(split_name);
    if (model.config.mode == ClassificationMode::binary) {
        out.confusion = confusion(predictions, truths, PositiveSet("0010"), 2);
        out.report = compute_metrics(out.confusion, MetricsMode::binary);
    } else {
        out.confusion = confusion(predictions, truths, malicious_classes(), kNumClasses);
        out.report = compute_metrics(out.confusion, MetricsMode::macro);
    }
    return out;
}

TrainOutcome train_pipeline(const std::filesystem::path& data_path, const PipelineConfig& config,
                            const Logger& log) {
    config.validate();
    auto loaded = stage("load", log, [&] { return load_csv(data_path, config.columns); });
    const std::size_t missing = loaded.dropped_missing;
    auto outcome = train_pipeline(std::move(loaded.records), config, log);
    outcome.loaded_rows += missing;
    outcome.dropped_missing = missing;
    return outcome;
}

TrainOutcome train_pipeline(std::vector<UrlRecord> records, const PipelineConfig& config,
                            const Logger& log) {
    config.validate();
    TrainOutcome out;
    out.loaded_rows = records.size();

    auto deduped = stage("dedup", log, [&] { return dedup(std::move(records)); });
    out.dropped_duplicates = deduped.dropped;
    out.label_conflicts = deduped.label_conflicts;
    out.cleaned = std::move(deduped.records);
    if (log)
        log("  " + std::to_string(out.cleaned.size()) + " unique URLs, " +
            std::to_string(out.dropped_duplicates) + " duplicates dropped (" +
            std::to_string(out.label_conflicts) + " with conflicting labels)");

    out.split = stage("split", log,
                      [&] { return stratified_split(out.cleaned, config.split, config.split_seed()); });

    PipelineModel& model = out.model;
    model.config = config;
    model.config.som.seed = config.som_seed();
    model.config.gd.seed = config.rbfn_seed();
    model.config.tabu.seed = config.tabu_seed();

    model.normalizer = stage("normalize", log, [&] {
        std::vector<RawFeatures> raw;
        raw.reserve(out.split.train.size());
        for (const auto& r : out.split.train) raw.push_back(extract_lexical(r.url));
        return fit_normalizer(raw);
    });

    model.som = stage("som-rmo", log, [&] {
        std::vector<Vector> scaled;
        scaled.reserve(out.split.train.size());
        for (const auto& r : out.split.train) scaled.push_back(model.normalizer.apply(extract_lexical(r.url)));
        return train_som_rmo(scaled, model.config.som, model.config.rmo);
    });
    out.som_qe = model.som.qe_history;
    out.rmo_accepted = model.som.rmo_accepted;
    out.rmo_proposals = model.som.rmo_proposals;
    if (log)
        log("  " + std::to_string(model.som.epochs_run) + " epochs, quantization error " +
            format_exact(out.som_qe.front()) + " -> " + format_exact(out.som_qe.back()));

    const LabeledSet train = stage("features", log, [&] { return labeled(model, out.split.train); });
    const LabeledSet validation = stage("features", log, [&] { return labeled(model, out.split.validation); });

    stage("rbfn", log, [&] {
        const std::size_t distinct = distinct_count(train.inputs);
        const std::size_t centers = std::min(config.rbf_centers, distinct);
        if (centers < config.rbf_centers && log)
            log("  capping centers at " + std::to_string(centers) + " distinct training points");
        auto clusters = kmeans(train.inputs, centers, model.config.gd.seed);
        out.kmeans_wcss = clusters.wcss_history;
        const auto widths = init_widths(clusters.centers);
        std::vector<RbfCenter> rbf(centers);
        for (std::size_t i = 0; i < centers; ++i) rbf[i] = {std::move(clusters.centers[i]), widths[i]};
        model.rbfn = RbfnModel(std::move(rbf), model.class_names().size());
        out.gd_loss = train_gd(model.rbfn, train, model.config.gd).loss_history;
        return 0;
    });
    if (log) log("  training loss " + format_exact(out.gd_loss.front()) + " -> " + format_exact(out.gd_loss.back()));

    stage("tabu", log, [&] {
        RbfnModel scratch = model.rbfn;
        const Objective objective = [&](std::span<const double> params) {
            scratch.set_parameters(params);
            return mse_loss(scratch, validation);
        };
        out.tabu = tabu_search(model.rbfn.parameters(), objective, model.config.tabu, model.rbfn.parameter_floor());
        out.validation_mse_before_tabu = out.tabu.initial_objective;
        out.validation_mse_after_tabu = out.tabu.best_objective;
        model.rbfn.set_parameters(out.tabu.best);
        return 0;
    });
    if (log)
        log("  validation mse " + format_exact(out.validation_mse_before_tabu) + " -> " +
            format_exact(out.validation_mse_after_tabu) + " after " + std::to_string(out.tabu.trace.size()) +
            " iterations");

    stage("evaluate", log, [&] {
        out.reports.push_back(evaluate(model, out.split.train, "train"));
        out.reports.push_back(evaluate(model, out.split.validation, "validation"));
        out.reports.push_back(evaluate(model, out.split.test, "test"));
        return 0;
    });
    return out;
}

void PipelineModel::save(std::ostream& out) const {
    out << "malurl-model " << kModelFormatVersion << '\n';
    out << "config_begin\n" << config_text(config) << "config_end\n";
    normalizer.save(out);
    som.save(out);
    rbfn.save(out);
    out << "end\n";
}

void PipelineModel::save(const std::filesystem::path& path) const {
    std::ostringstream buf;
    save(buf);
    write_text(path, buf.str());
}

PipelineModel PipelineModel::load(std::istream& in) {
    detail::LineReader reader(in);
    const auto head = reader.next();
    if (head.front() != "malurl-model" || head.size() != 2) fail(ErrorKind::model, "not a malurl model file");
    if (head[1] != std::to_string(kModelFormatVersion))
        fail(ErrorKind::model, "unsupported model format version " + head[1] + " (this build reads version " +
                                   std::to_string(kModelFormatVersion) + ")");
    reader.expect("config_begin", 0);
    std::string config_lines, line;
    bool closed = false;
    while (std::getline(in, line)) {
        if (trim(line) == "config_end") {
            closed = true;
            break;
        }
        config_lines += line + "\n";
    }
    if (!closed) fail(ErrorKind::model, "model file: unterminated config section");

    PipelineModel model;
    try {
        model.config = parse_config(config_lines);
    } catch (const Error& e) {
        fail(ErrorKind::model, std::string("model file config: ") + e.what());
    }
    model.normalizer = Normalizer::load(in);
    model.som = SomModel::load(in);
    model.rbfn = RbfnModel::load(in);
    reader.expect("end", 0);

    if (model.som.grid.dim() != kNumLexicalFeatures)
        fail(ErrorKind::model, "model file: map dimension does not match the lexical features");
    if (model.rbfn.input_dim() != model.som.output_dim(model.config.feature_mode))
        fail(ErrorKind::model, "model file: network input does not match the feature mode");
    if (model.rbfn.num_classes() != model.class_names().size())
        fail(ErrorKind::model, "model file: class count does not match the classification mode");
    return model;
}

PipelineModel PipelineModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::model, "cannot open model file '" + path.string() + "'");
    return load(in);
}

void write_training_reports(const TrainOutcome& outcome, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_text(dir / "report.csv", report_csv(outcome.reports));
    write_text(dir / "confusion.csv", confusion_csv(outcome.reports));
    write_text(dir / "report.txt", report_table(outcome.reports));
    {
        std::ostringstream trace;
        write_tabu_trace(outcome.tabu, trace);
        write_text(dir / "tabu_trace.csv", trace.str());
    }
    write_text(dir / "som_qe.csv", series_csv("quantization_error", outcome.som_qe));
    write_text(dir / "gd_loss.csv", series_csv("training_mse", outcome.gd_loss));
    write_labeled_csv(outcome.cleaned, dir / "cleaned.csv");
    write_split_manifests(outcome.split, dir);

    std::ostringstream s;
    s << "rows loaded " << outcome.loaded_rows << "\n"
      << "rows dropped (missing values) " << outcome.dropped_missing << "\n"
      << "rows dropped (duplicate url) " << outcome.dropped_duplicates << "\n"
      << "duplicates with conflicting labels " << outcome.label_conflicts << "\n"
      << "classification mode " << to_string(outcome.model.config.mode) << "\n"
      << "feature mode " << to_string(outcome.model.config.feature_mode) << "\n"
      << "som epochs " << outcome.model.som.epochs_run << "\n"
      << "rmo moves accepted " << outcome.rmo_accepted << " of " << outcome.rmo_proposals << "\n"
      << "rbf centers " << outcome.model.rbfn.num_centers() << "\n"
      << "validation mse before tabu " << format_exact(outcome.validation_mse_before_tabu) << "\n"
      << "validation mse after tabu " << format_exact(outcome.validation_mse_after_tabu) << "\n"
      << "tabu iterations " << outcome.tabu.trace.size() << " (escapes " << outcome.tabu.escapes << ")\n";
    write_text(dir / "summary.txt", s.str());
}

void write_evaluation_reports(const NamedReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const std::vector<NamedReport> one{report};
    write_text(dir / "report.csv", report_csv(one));
    write_text(dir / "confusion.csv", confusion_csv(one));
    write_text(dir / "report.txt", report_table(one));
}

}  // namespace malurl
