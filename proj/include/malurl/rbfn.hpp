#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "malurl/common.hpp"

namespace malurl {

struct RbfCenter {
    Vector mu;
    double sigma = 1.0;
};

inline constexpr double kMinWidth = 1e-3;

struct GdConfig {
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::size_t epochs = 500;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const GdConfig&) const = default;
};

/// Inputs with integer class labels in [0, num_classes).
struct LabeledSet {
    std::vector<Vector> inputs;
    std::vector<int> labels;

    std::size_t size() const { return inputs.size(); }
};

/// Gaussian hidden layer followed by one linear output (plus bias) per class.
class RbfnModel {
public:
    RbfnModel() = default;
    RbfnModel(std::vector<RbfCenter> centers, std::size_t num_classes);

    std::size_t num_centers() const { return centers_.size(); }
    std::size_t num_classes() const { return num_classes_; }
    std::size_t input_dim() const { return centers_.empty() ? 0 : centers_.front().mu.size(); }

    const std::vector<RbfCenter>& centers() const { return centers_; }
    std::vector<RbfCenter>& centers() { return centers_; }

    double weight(std::size_t center, std::size_t cls) const { return weights_[center * num_classes_ + cls]; }
    double& weight(std::size_t center, std::size_t cls) { return weights_[center * num_classes_ + cls]; }
    const Vector& weights() const { return weights_; }
    Vector& weights() { return weights_; }
    const Vector& bias() const { return bias_; }
    Vector& bias() { return bias_; }

    /// Flattened [mu_0 .. mu_N-1, sigma_0 .. sigma_N-1, weights (row-major), bias].
    Vector parameters() const;
    void set_parameters(std::span<const double> params);
    /// Per-parameter lower bounds: kMinWidth on widths, -inf elsewhere.
    Vector parameter_floor() const;

    void save(std::ostream& out) const;
    static RbfnModel load(std::istream& in);

    bool operator==(const RbfnModel& other) const;

private:
    std::vector<RbfCenter> centers_;
    std::size_t num_classes_ = 0;
    Vector weights_;  // num_centers x num_classes
    Vector bias_;
};

struct KMeansResult {
    std::vector<Vector> centers;
    std::vector<double> wcss_history;  // within-cluster sum of squares after each assignment step
    std::size_t iterations = 0;
};

/// Lloyd's algorithm from k seeded-random distinct data points. Stops when
/// assignments repeat or after `max_iterations`. An empty cluster is reseeded
/// with the point farthest from its own center.
KMeansResult kmeans(std::span<const Vector> data, std::size_t k, std::uint64_t seed,
                    std::size_t max_iterations = 300);

/// Mean distance to the two nearest other centers, floored at kMinWidth.
/// A lone center gets width 1.
std::vector<double> init_widths(std::span<const Vector> centers);

double rbf_activation(std::span<const double> x, const RbfCenter& center);

/// Hidden-layer outputs for every center.
Vector activations(const RbfnModel& model, std::span<const double> x);

/// Class scores bias_k + sum_i w_ik * phi_i(x).
Vector forward(const RbfnModel& model, std::span<const double> x);

/// Index of the largest score; ties go to the lowest index.
int argmax(std::span<const double> scores);

int predict(const RbfnModel& model, std::span<const double> x);

/// Mean over samples and classes of (score - one_hot_target)^2.
double mse_loss(const RbfnModel& model, const LabeledSet& batch);

struct OutputGradient {
    Vector weights;
    Vector bias;
};

/// d(mse_loss)/d(weights, bias) with centers and widths held fixed.
OutputGradient mse_gradient(const RbfnModel& model, const LabeledSet& batch);

struct GdResult {
    std::vector<double> loss_history;  // training loss after each epoch
};

/// Mini-batch gradient descent with classical momentum on output weights and
/// biases. Centers and widths are left untouched.
GdResult train_gd(RbfnModel& model, const LabeledSet& train, const GdConfig& config);

/// K-means centers, nearest-neighbour widths and zero output layer.
RbfnModel initialize_rbfn(std::span<const Vector> data, std::size_t num_centers,
                          std::size_t num_classes, std::uint64_t seed);

}  // namespace malurl
