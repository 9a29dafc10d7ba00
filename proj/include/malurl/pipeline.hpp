#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "malurl/config.hpp"
#include "malurl/dataset.hpp"
#include "malurl/features.hpp"
#include "malurl/metrics.hpp"
#include "malurl/rbfn.hpp"
#include "malurl/som_rmo.hpp"
#include "malurl/tabu.hpp"

namespace malurl {

inline constexpr int kModelFormatVersion = 1;

using Logger = std::function<void(std::string_view)>;

struct PipelineModel {
    Normalizer normalizer;
    SomModel som;
    RbfnModel rbfn;
    PipelineConfig config;

    /// Output label -> name: benign/malicious in binary mode, the four
    /// dataset classes otherwise.
    std::vector<std::string> class_names() const;

    /// Maps a dataset label (0..3) onto this model's output labels.
    int target_label(int class_label) const;

    /// Scheme strip, lexical features, clamped scaling, map features.
    Vector reduce(std::string_view url) const;

    void save(std::ostream& out) const;
    void save(const std::filesystem::path& path) const;
    static PipelineModel load(std::istream& in);
    static PipelineModel load(const std::filesystem::path& path);
};

struct Prediction {
    int label = 0;
    std::string class_name;
    Vector scores;
};

Prediction predict_url(const PipelineModel& model, std::string_view url);

/// Scores every record and returns metrics in the model's mode (binary
/// counts or 4-class macro averages).
NamedReport evaluate(const PipelineModel& model, const std::vector<UrlRecord>& records,
                     std::string split_name);

struct TrainOutcome {
    PipelineModel model;
    std::vector<NamedReport> reports;  // train, validation, test
    DatasetSplit split;
    std::vector<UrlRecord> cleaned;

    std::size_t loaded_rows = 0;
    std::size_t dropped_missing = 0;
    std::size_t dropped_duplicates = 0;
    std::size_t label_conflicts = 0;

    std::vector<double> som_qe;
    std::size_t rmo_accepted = 0;
    std::size_t rmo_proposals = 0;
    std::vector<double> kmeans_wcss;
    std::vector<double> gd_loss;
    double validation_mse_before_tabu = 0.0;
    double validation_mse_after_tabu = 0.0;
    TabuResult tabu;
};

/// load_csv -> dedup -> split -> normalizer (train) -> SOM-RMO (train) ->
/// map features -> k-means, widths, gradient descent (train) -> tabu on
/// validation MSE -> metrics on all three splits.
TrainOutcome train_pipeline(const std::filesystem::path& data_path, const PipelineConfig& config,
                            const Logger& log = {});

/// Same as above starting from already loaded records (dedup onward).
TrainOutcome train_pipeline(std::vector<UrlRecord> records, const PipelineConfig& config,
                            const Logger& log = {});

/// report.csv, confusion.csv, report.txt, tabu_trace.csv, som_qe.csv,
/// gd_loss.csv, cleaned.csv, split manifests and summary.txt.
void write_training_reports(const TrainOutcome& outcome, const std::filesystem::path& dir);

void write_evaluation_reports(const NamedReport& report, const std::filesystem::path& dir);

}  // namespace malurl
