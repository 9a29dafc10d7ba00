#include "malurl/malurl.h"

#include <cstring>
#include <exception>
#include <string>

#include "malurl/pipeline.hpp"

struct malurl_model {
    malurl::PipelineModel model;
    std::vector<std::string> class_names;
};

namespace {

thread_local std::string last_error;

malurl_status status_for(malurl::ErrorKind kind) {
    switch (kind) {
        case malurl::ErrorKind::config: return MALURL_ERR_USAGE;
        case malurl::ErrorKind::data: return MALURL_ERR_DATA;
        case malurl::ErrorKind::model: return MALURL_ERR_MODEL;
        case malurl::ErrorKind::invalid_argument: return MALURL_ERR_INVALID_INPUT;
    }
    return MALURL_ERR_INTERNAL;
}

template <class Fn>
malurl_status guarded(Fn&& fn) {
    last_error.clear();
    try {
        fn();
        return MALURL_OK;
    } catch (const malurl::Error& e) {
        last_error = e.what();
        return status_for(e.kind());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
    } catch (const std::exception& e) {
        last_error = e.what();
    } catch (...) {
        last_error = "unknown error";
    }
    return MALURL_ERR_INTERNAL;
}

malurl_status missing(const char* what) {
    last_error = std::string("missing argument: ") + what;
    return MALURL_ERR_USAGE;
}

malurl_model* wrap(malurl::PipelineModel model) {
    auto* handle = new malurl_model{std::move(model), {}};
    handle->class_names = handle->model.class_names();
    return handle;
}

}  // namespace

extern "C" {

const char* malurl_version(void) { return "1.0.0"; }

const char* malurl_last_error(void) { return last_error.c_str(); }

const char* malurl_config_reference(void) {
    static const std::string reference = malurl::config_reference();
    return reference.c_str();
}

malurl_status malurl_config_check(const char* config_path) {
    return guarded([&] { malurl::load_config(config_path ? config_path : ""); });
}

malurl_status malurl_featurize(const char* data_csv, const char* out_csv) {
    if (!data_csv) return missing("data_csv");
    if (!out_csv) return missing("out_csv");
    return guarded([&] {
        auto loaded = malurl::load_csv(data_csv);
        auto cleaned = malurl::dedup(std::move(loaded.records));
        malurl::write_feature_csv(cleaned.records, out_csv);
    });
}

malurl_status malurl_train(const char* data_csv, const char* config_path, const char* report_dir,
                           malurl_log_fn log, void* user, malurl_model** out) {
    if (!data_csv) return missing("data_csv");
    if (!out) return missing("out");
    *out = nullptr;
    return guarded([&] {
        const auto config = malurl::load_config(config_path ? config_path : "");
        malurl::Logger logger;
        if (log) logger = [log, user](std::string_view line) { log(std::string(line).c_str(), user); };
        auto outcome = malurl::train_pipeline(data_csv, config, logger);
        if (report_dir) malurl::write_training_reports(outcome, report_dir);
        *out = wrap(std::move(outcome.model));
    });
}

malurl_status malurl_model_load(const char* path, malurl_model** out) {
    if (!path) return missing("path");
    if (!out) return missing("out");
    *out = nullptr;
    return guarded([&] { *out = wrap(malurl::PipelineModel::load(std::filesystem::path(path))); });
}

malurl_status malurl_model_save(const malurl_model* model, const char* path) {
    if (!model) return missing("model");
    if (!path) return missing("path");
    return guarded([&] { model->model.save(std::filesystem::path(path)); });
}

void malurl_model_free(malurl_model* model) { delete model; }

size_t malurl_model_num_classes(const malurl_model* model) {
    return model ? model->class_names.size() : 0;
}

const char* malurl_model_class_name(const malurl_model* model, size_t label) {
    if (!model || label >= model->class_names.size()) return nullptr;
    return model->class_names[label].c_str();
}

malurl_status malurl_predict(const malurl_model* model, const char* url, malurl_prediction* out) {
    if (!model) return missing("model");
    if (!url) return missing("url");
    if (!out) return missing("out");
    return guarded([&] {
        const auto p = malurl::predict_url(model->model, url);
        out->label = p.label;
        std::memset(out->class_name, 0, sizeof out->class_name);
        std::strncpy(out->class_name, p.class_name.c_str(), sizeof out->class_name - 1);
        out->num_scores = p.scores.size();
        for (std::size_t k = 0; k < p.scores.size() && k < MALURL_MAX_CLASSES; ++k) out->scores[k] = p.scores[k];
    });
}

malurl_status malurl_evaluate(const malurl_model* model, const char* data_csv, const char* report_dir,
                              double* accuracy) {
    if (!model) return missing("model");
    if (!data_csv) return missing("data_csv");
    return guarded([&] {
        const auto& cfg = model->model.config;
        auto loaded = malurl::load_csv(data_csv, cfg.columns);
        const auto report = malurl::evaluate(model->model, loaded.records, "evaluation");
        if (report_dir) malurl::write_evaluation_reports(report, report_dir);
        if (accuracy) *accuracy = report.report.accuracy;
    });
}

}  // extern "C"
