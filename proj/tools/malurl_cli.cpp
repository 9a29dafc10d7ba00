// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "malurl/malurl.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct ModelDeleter {
    void operator()(malurl_model* m) const { malurl_model_free(m); }
};
using ModelPtr = std::unique_ptr<malurl_model, ModelDeleter>;

int report(malurl_status status, const char* context) {
    if (status == MALURL_OK) return kExitOk;
    std::cerr << "malurl " << context << ": " << malurl_last_error() << '\n';
    return status == MALURL_ERR_USAGE ? kExitUsage : kExitData;
}

void log_line(const char* line, void*) { std::cerr << line << '\n'; }

ModelPtr load_model(const std::string& path, int& exit_code) {
    malurl_model* raw = nullptr;
    exit_code = report(malurl_model_load(path.c_str(), &raw), "load model");
    return ModelPtr(raw);
}

std::string format_score(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Malicious URL detection: lexical features, SOM-RMO map, RBF network refined by tabu search"};
    app.require_subcommand(1);
    const std::string keys = std::string("Config keys (key = value, one per line):\n") + malurl_config_reference();
    app.footer(keys);

    std::string data, out, config, model_path, model_out, report_dir, url;

    auto* featurize = app.add_subcommand("featurize", "Write the lexical feature CSV for a labeled dataset");
    featurize->add_option("--data", data, "Input CSV with url and type columns")->required();
    featurize->add_option("--out", out, "Output feature CSV")->required();

    auto* train = app.add_subcommand("train", "Train a model and write reports");
    train->add_option("--data", data, "Training CSV with url and type columns")->required();
    train->add_option("--config", config, "Config file of key = value lines (omitted keys use defaults)");
    train->add_option("--model-out", model_out, "Where to write the model file")->required();
    train->add_option("--report-out", report_dir, "Directory for reports and split manifests");
    train->footer(keys);

    auto* evaluate = app.add_subcommand("evaluate", "Score a labeled CSV with a trained model");
    evaluate->add_option("--model", model_path, "Model file")->required();
    evaluate->add_option("--data", data, "Labeled CSV")->required();
    evaluate->add_option("--report-out", report_dir, "Directory for report files");

    auto* predict = app.add_subcommand("predict", "Classify one URL");
    predict->add_option("--model", model_path, "Model file")->required();
    predict->add_option("--url", url, "URL to classify")->required();

    auto* serve = app.add_subcommand("serve", "Read URLs from stdin, write url<TAB>class<TAB>score lines");
    serve->add_option("--model", model_path, "Model file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (featurize->parsed()) return report(malurl_featurize(data.c_str(), out.c_str()), "featurize");

    if (train->parsed()) {
        malurl_model* raw = nullptr;
        const int code = report(malurl_train(data.c_str(), config.empty() ? nullptr : config.c_str(),
                                             report_dir.empty() ? nullptr : report_dir.c_str(), log_line,
                                             nullptr, &raw),
                                "train");
        ModelPtr model(raw);
        if (code != kExitOk) return code;
        return report(malurl_model_save(model.get(), model_out.c_str()), "save model");
    }

    int code = kExitOk;
    auto model = load_model(model_path, code);
    if (code != kExitOk) return code;

    if (evaluate->parsed()) {
        double accuracy = 0.0;
        code = report(malurl_evaluate(model.get(), data.c_str(), report_dir.empty() ? nullptr : report_dir.c_str(),
                                      &accuracy),
                      "evaluate");
        if (code == kExitOk) std::cout << "accuracy\t" << format_score(accuracy) << '\n';
        return code;
    }

    if (predict->parsed()) {
        malurl_prediction p{};
        code = report(malurl_predict(model.get(), url.c_str(), &p), "predict");
        if (code != kExitOk) return code;
        std::cout << p.class_name << '\n';
        for (std::size_t k = 0; k < p.num_scores; ++k)
            std::cout << malurl_model_class_name(model.get(), k) << '\t' << format_score(p.scores[k]) << '\n';
        return kExitOk;
    }

    // serve: one output line per input line, flushed immediately.
    std::string line;
    while (std::getline(std::cin, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        malurl_prediction p{};
        if (malurl_predict(model.get(), line.c_str(), &p) == MALURL_OK) {
            std::cout << line << '\t' << p.class_name << '\t' << format_score(p.scores[p.label]) << std::endl;
        } else {
            std::cerr << "malurl serve: " << malurl_last_error() << '\n';
            std::cout << line << "\terror\tnan" << std::endl;
        }
    }
    return kExitOk;
}
