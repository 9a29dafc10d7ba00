#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "malurl/common.hpp"

namespace malurl {

struct SomConfig {
    std::size_t rows = 10;
    std::size_t cols = 10;
    double initial_alpha = 0.5;
    double initial_radius = 5.0;
    std::size_t iterations = 1000;  // epoch budget T
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const SomConfig&) const = default;
};

/// Coefficients of the particle velocity rule used to refine node weights.
struct RmoConfig {
    double inertia = 0.7;
    double cognitive = 1.5;
    double social = 1.5;
    double velocity_clamp = 0.25;

    void validate() const;
    bool operator==(const RmoConfig&) const = default;
};

struct NodeIndex {
    std::size_t row = 0;
    std::size_t col = 0;
    bool operator==(const NodeIndex&) const = default;
};

class SomGrid {
public:
    SomGrid() = default;
    SomGrid(std::size_t rows, std::size_t cols, std::size_t dim);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return rows_ * cols_; }

    std::span<double> node(std::size_t flat) { return {weights_.data() + flat * dim_, dim_}; }
    std::span<const double> node(std::size_t flat) const {
        return {weights_.data() + flat * dim_, dim_};
    }
    std::span<const double> node(NodeIndex n) const { return node(flat_index(n)); }

    std::size_t flat_index(NodeIndex n) const { return n.row * cols_ + n.col; }
    NodeIndex grid_index(std::size_t flat) const { return {flat / cols_, flat % cols_}; }

    const std::vector<double>& weights() const { return weights_; }
    std::vector<double>& weights() { return weights_; }

    bool operator==(const SomGrid&) const = default;

private:
    std::size_t rows_ = 0, cols_ = 0, dim_ = 0;
    std::vector<double> weights_;  // row-major nodes, each `dim_` wide
};

struct Bmu {
    NodeIndex node;
    std::size_t flat = 0;
    double squared_distance = 0.0;
};

/// Uniform [0,1) weights from the config seed.
SomGrid init_grid(const SomConfig& config, std::size_t dim);

/// Nearest node by squared Euclidean distance; ties go to the lowest
/// row-major index.
Bmu find_bmu(const SomGrid& grid, std::span<const double> x);

/// Gaussian neighbourhood exp(-d^2 / (2 sigma^2)) over grid coordinates.
double neighborhood(NodeIndex bmu, NodeIndex node, double sigma);

/// w <- w + alpha * h(bmu, node) * (x - w) for every node.
void som_update(SomGrid& grid, std::span<const double> x, NodeIndex bmu, double alpha, double sigma);

/// initial * exp(-t / T).
double decay(double initial, std::size_t t, std::size_t total);

struct RmoParticle {
    Vector position;
    Vector velocity;
    Vector personal_best;
    double personal_best_fitness = 0.0;
};

/// Source of uniform [0,1] draws for the cognitive and social factors.
using UniformSource = std::function<double()>;

/// One velocity/position update for every particle:
///   v <- clamp(inertia*v + c1*r1*(pbest - p) + c2*r2*(gbest - p)),  p <- clamp01(p + v)
/// with r1, r2 drawn per component.
void rmo_step(std::vector<RmoParticle>& particles, std::span<const double> global_best,
              const RmoConfig& config, const UniformSource& uniform);

/// Mean squared distance from `position` to the inputs; 0 when there are none.
double particle_fitness(std::span<const double> position, std::span<const Vector> inputs);

enum class FeatureMode { bmu, concat };

struct SomModel {
    SomGrid grid;
    SomConfig som_config;
    RmoConfig rmo_config;
    double qe_ref = 0.0;  // 95th percentile of training BMU distances
    std::size_t epochs_run = 0;
    bool trained = false;

    // Training diagnostics; not serialized.
    std::vector<double> qe_history;  // index 0 is the untrained grid
    std::size_t rmo_proposals = 0;
    std::size_t rmo_accepted = 0;

    std::size_t output_dim(FeatureMode mode) const;

    void save(std::ostream& out) const;
    static SomModel load(std::istream& in);
};

/// Mean Euclidean distance from each input to its BMU.
double quantization_error(const SomGrid& grid, std::span<const Vector> data);

/// Alternates a full SOM epoch with one particle pass over the nodes. A node
/// adopts its particle's position only when that strictly lowers the mean
/// squared distance to the inputs it currently wins. Stops at the epoch
/// budget or after 10 epochs improving quantization error by less than 1e-6.
SomModel train_som_rmo(std::span<const Vector> data, const SomConfig& som_config,
                       const RmoConfig& rmo_config);

/// bmu mode: (row/(rows-1), col/(cols-1), min(1, qe/qe_ref)).
/// concat mode: x followed by the three bmu values.
Vector extract_features(const SomModel& model, std::span<const double> x, FeatureMode mode);

}  // namespace malurl
