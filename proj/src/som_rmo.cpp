#include "malurl/som_rmo.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include "serialize.hpp"

namespace malurl {

namespace {

constexpr double kConvergenceTolerance = 1e-6;
constexpr std::size_t kConvergencePatience = 10;
constexpr std::uint64_t kRmoStreamSalt = 0x5DEECE66DULL;

// h(bmu, node) indexed by |row delta| * cols + |col delta|; constant within an epoch.
std::vector<double> neighborhood_kernel(const SomGrid& grid, double sigma) {
    std::vector<double> kernel(grid.rows() * grid.cols());
    const double denom = 2.0 * sigma * sigma;
    for (std::size_t dr = 0; dr < grid.rows(); ++dr)
        for (std::size_t dc = 0; dc < grid.cols(); ++dc) {
            const double d2 = static_cast<double>(dr * dr + dc * dc);
            kernel[dr * grid.cols() + dc] = std::exp(-d2 / denom);
        }
    return kernel;
}

void apply_update(SomGrid& grid, std::span<const double> x, NodeIndex bmu, double alpha,
                  const std::vector<double>& kernel) {
    if (alpha == 0.0) return;
    for (std::size_t r = 0; r < grid.rows(); ++r) {
        const std::size_t dr = r > bmu.row ? r - bmu.row : bmu.row - r;
        for (std::size_t c = 0; c < grid.cols(); ++c) {
            const std::size_t dc = c > bmu.col ? c - bmu.col : bmu.col - c;
            const double rate = alpha * kernel[dr * grid.cols() + dc];
            if (rate == 0.0) continue;
            auto w = grid.node(grid.flat_index({r, c}));
            if (rate == 1.0) {
                std::copy(x.begin(), x.end(), w.begin());
                continue;
            }
            for (std::size_t k = 0; k < w.size(); ++k) w[k] += rate * (x[k] - w[k]);
        }
    }
}

void check_dim(const SomGrid& grid, std::span<const double> x) {
    require(x.size() == grid.dim(), "input dimension " + std::to_string(x.size()) +
                                        " does not match grid dimension " +
                                        std::to_string(grid.dim()));
}

double fitness_of(std::span<const double> position, std::span<const Vector> data,
                  const std::vector<std::size_t>& members) {
    if (members.empty()) return 0.0;
    double sum = 0.0;
    for (auto i : members) sum += squared_distance(position, data[i]);
    return sum / static_cast<double>(members.size());
}

}  // namespace

void SomConfig::validate() const {
    if (rows == 0 || cols == 0 || rows * cols < 2)
        fail(ErrorKind::config, "som grid must have at least 2 nodes");
    if (!(initial_alpha > 0.0 && initial_alpha <= 1.0))
        fail(ErrorKind::config, "som learning rate must lie in (0, 1]");
    if (!(initial_radius > 0.0 && std::isfinite(initial_radius)))
        fail(ErrorKind::config, "som radius must be > 0");
    if (iterations < 1) fail(ErrorKind::config, "som iterations must be >= 1");
}

void RmoConfig::validate() const {
    if (!(inertia >= 0.0 && cognitive >= 0.0 && social >= 0.0))
        fail(ErrorKind::config, "rmo coefficients must be >= 0");
    if (!(velocity_clamp > 0.0)) fail(ErrorKind::config, "rmo velocity clamp must be > 0");
}

SomGrid::SomGrid(std::size_t rows, std::size_t cols, std::size_t dim)
    : rows_(rows), cols_(cols), dim_(dim), weights_(rows * cols * dim, 0.0) {}

SomGrid init_grid(const SomConfig& config, std::size_t dim) {
    require(dim >= 1, "init_grid: feature dimension must be >= 1");
    config.validate();
    SomGrid grid(config.rows, config.cols, dim);
    Rng rng(config.seed);
    for (double& w : grid.weights()) w = rng.uniform01();
    return grid;
}

Bmu find_bmu(const SomGrid& grid, std::span<const double> x) {
    check_dim(grid, x);
    Bmu best;
    best.squared_distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double d = squared_distance(grid.node(i), x);
        if (d < best.squared_distance) {
            best.squared_distance = d;
            best.flat = i;
        }
    }
    best.node = grid.grid_index(best.flat);
    return best;
}

double neighborhood(NodeIndex bmu, NodeIndex node, double sigma) {
    require(sigma > 0.0, "neighborhood: sigma must be > 0");
    const double dr = static_cast<double>(bmu.row) - static_cast<double>(node.row);
    const double dc = static_cast<double>(bmu.col) - static_cast<double>(node.col);
    return std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
}

void som_update(SomGrid& grid, std::span<const double> x, NodeIndex bmu, double alpha,
                double sigma) {
    check_dim(grid, x);
    require(alpha >= 0.0 && alpha <= 1.0, "som_update: alpha must lie in [0, 1]");
    require(sigma > 0.0, "som_update: sigma must be > 0");
    require(bmu.row < grid.rows() && bmu.col < grid.cols(), "som_update: bmu outside grid");
    apply_update(grid, x, bmu, alpha, neighborhood_kernel(grid, sigma));
}

double decay(double initial, std::size_t t, std::size_t total) {
    require(total > 0, "decay: schedule length must be > 0");
    return initial * std::exp(-static_cast<double>(t) / static_cast<double>(total));
}

void rmo_step(std::vector<RmoParticle>& particles, std::span<const double> global_best,
              const RmoConfig& config, const UniformSource& uniform) {
    const double clamp = config.velocity_clamp;
    for (auto& p : particles) {
        require(p.position.size() == global_best.size() && p.velocity.size() == global_best.size() &&
                    p.personal_best.size() == global_best.size(),
                "rmo_step: particle dimension mismatch");
        for (std::size_t k = 0; k < p.position.size(); ++k) {
            const double r1 = uniform();
            const double r2 = uniform();
            double v = config.inertia * p.velocity[k] +
                       config.cognitive * r1 * (p.personal_best[k] - p.position[k]) +
                       config.social * r2 * (global_best[k] - p.position[k]);
            v = std::clamp(v, -clamp, clamp);
            p.velocity[k] = v;
            p.position[k] = std::clamp(p.position[k] + v, 0.0, 1.0);
        }
    }
}

double particle_fitness(std::span<const double> position, std::span<const Vector> inputs) {
    if (inputs.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& x : inputs) {
        require(x.size() == position.size(), "particle_fitness: dimension mismatch");
        sum += squared_distance(position, x);
    }
    return sum / static_cast<double>(inputs.size());
}

double quantization_error(const SomGrid& grid, std::span<const Vector> data) {
    if (data.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& x : data) sum += std::sqrt(find_bmu(grid, x).squared_distance);
    return sum / static_cast<double>(data.size());
}

std::size_t SomModel::output_dim(FeatureMode mode) const {
    return mode == FeatureMode::bmu ? 3 : grid.dim() + 3;
}

SomModel train_som_rmo(std::span<const Vector> data, const SomConfig& som_config,
                       const RmoConfig& rmo_config) {
    require(!data.empty(), "train_som_rmo: empty training data");
    som_config.validate();
    rmo_config.validate();
    const std::size_t dim = data.front().size();
    for (const auto& x : data) require(x.size() == dim, "train_som_rmo: inconsistent input dimension");

    SomModel model;
    model.som_config = som_config;
    model.rmo_config = rmo_config;
    model.grid = init_grid(som_config, dim);
    SomGrid& grid = model.grid;
    const std::size_t nodes = grid.size();

    Rng order_rng(som_config.seed);
    order_rng.next();  // decorrelate from the weight initialisation stream
    Rng rmo_rng(som_config.seed ^ kRmoStreamSalt);
    const UniformSource uniform = [&rmo_rng] { return rmo_rng.uniform01(); };

    std::vector<RmoParticle> particles(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        auto w = grid.node(i);
        particles[i].position.assign(w.begin(), w.end());
        particles[i].personal_best = particles[i].position;
        particles[i].velocity.resize(dim);
        for (double& v : particles[i].velocity)
            v = rmo_rng.uniform(-rmo_config.velocity_clamp, rmo_config.velocity_clamp);
    }

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::vector<std::size_t>> members(nodes);
    std::vector<double> node_fitness(nodes);

    double previous_qe = quantization_error(grid, data);
    model.qe_history.push_back(previous_qe);
    std::size_t stalled = 0;

    for (std::size_t epoch = 0; epoch < som_config.iterations; ++epoch) {
        const double alpha = decay(som_config.initial_alpha, epoch, som_config.iterations);
        const double sigma = decay(som_config.initial_radius, epoch, som_config.iterations);
        const auto kernel = neighborhood_kernel(grid, sigma);

        order_rng.shuffle(order);
        for (auto i : order) apply_update(grid, data[i], find_bmu(grid, data[i]).node, alpha, kernel);

        for (auto& m : members) m.clear();
        for (std::size_t i = 0; i < data.size(); ++i) members[find_bmu(grid, data[i]).flat].push_back(i);

        std::size_t leader = nodes;
        for (std::size_t n = 0; n < nodes; ++n) {
            auto& p = particles[n];
            node_fitness[n] = fitness_of(grid.node(n), data, members[n]);
            p.personal_best_fitness = fitness_of(p.personal_best, data, members[n]);
            if (node_fitness[n] <= p.personal_best_fitness) {
                auto w = grid.node(n);
                p.personal_best.assign(w.begin(), w.end());
                p.personal_best_fitness = node_fitness[n];
            }
            if (!members[n].empty() &&
                (leader == nodes || p.personal_best_fitness < particles[leader].personal_best_fitness))
                leader = n;
        }
        const Vector global_best = particles[leader].personal_best;
        rmo_step(particles, global_best, rmo_config, uniform);

        for (std::size_t n = 0; n < nodes; ++n) {
            if (members[n].empty()) continue;
            auto& p = particles[n];
            const double f = fitness_of(p.position, data, members[n]);
            ++model.rmo_proposals;
            if (f < p.personal_best_fitness) {
                p.personal_best = p.position;
                p.personal_best_fitness = f;
            }
            if (f < node_fitness[n]) {
                std::copy(p.position.begin(), p.position.end(), grid.node(n).begin());
                node_fitness[n] = f;
                ++model.rmo_accepted;
            }
        }

        const double qe = quantization_error(grid, data);
        model.qe_history.push_back(qe);
        model.epochs_run = epoch + 1;
        stalled = (previous_qe - qe < kConvergenceTolerance) ? stalled + 1 : 0;
        previous_qe = qe;
        if (stalled >= kConvergencePatience) break;
    }

    std::vector<double> distances;
    distances.reserve(data.size());
    for (const auto& x : data) distances.push_back(std::sqrt(find_bmu(grid, x).squared_distance));
    std::sort(distances.begin(), distances.end());
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(distances.size())));
    model.qe_ref = distances[std::max<std::size_t>(rank, 1) - 1];
    model.trained = true;
    return model;
}

Vector extract_features(const SomModel& model, std::span<const double> x, FeatureMode mode) {
    if (!model.trained) fail(ErrorKind::invalid_argument, "extract_features: model is not trained");
    const Bmu bmu = find_bmu(model.grid, x);
    const auto& grid = model.grid;
    const double row = grid.rows() > 1 ? static_cast<double>(bmu.node.row) / static_cast<double>(grid.rows() - 1) : 0.0;
    const double col = grid.cols() > 1 ? static_cast<double>(bmu.node.col) / static_cast<double>(grid.cols() - 1) : 0.0;
    const double qe = std::sqrt(bmu.squared_distance);
    double qe_component = 0.0;
    if (model.qe_ref > 0.0) qe_component = std::min(1.0, qe / model.qe_ref);
    else if (qe > 0.0) qe_component = 1.0;

    Vector out;
    out.reserve(model.output_dim(mode));
    if (mode == FeatureMode::concat) out.assign(x.begin(), x.end());
    out.push_back(row);
    out.push_back(col);
    out.push_back(qe_component);
    return out;
}

void SomModel::save(std::ostream& out) const {
    out << "som 1\n";
    out << "grid " << grid.rows() << ' ' << grid.cols() << ' ' << grid.dim() << '\n';
    out << "som_config " << format_exact(som_config.initial_alpha) << ' '
        << format_exact(som_config.initial_radius) << ' ' << som_config.iterations << ' '
        << som_config.seed << '\n';
    out << "rmo_config " << format_exact(rmo_config.inertia) << ' '
        << format_exact(rmo_config.cognitive) << ' ' << format_exact(rmo_config.social) << ' '
        << format_exact(rmo_config.velocity_clamp) << '\n';
    out << "qe_ref " << format_exact(qe_ref) << '\n';
    out << "epochs " << epochs_run << '\n';
    for (std::size_t n = 0; n < grid.size(); ++n) {
        out << 'w';
        for (double w : grid.node(n)) out << ' ' << format_exact(w);
        out << '\n';
    }
}

SomModel SomModel::load(std::istream& in) {
    detail::LineReader reader(in);
    if (reader.expect("som", 1)[0] != "1") fail(ErrorKind::model, "unsupported som section version");
    const auto dims = reader.expect("grid", 3);
    const auto rows = static_cast<std::size_t>(detail::to_integer(dims[0]));
    const auto cols = static_cast<std::size_t>(detail::to_integer(dims[1]));
    const auto dim = static_cast<std::size_t>(detail::to_integer(dims[2]));
    if (rows == 0 || cols == 0 || dim == 0 || rows * cols * dim > (1u << 28))
        fail(ErrorKind::model, "som section: invalid grid dimensions");

    SomModel model;
    const auto sc = reader.expect("som_config", 4);
    model.som_config.rows = rows;
    model.som_config.cols = cols;
    model.som_config.initial_alpha = detail::to_double(sc[0]);
    model.som_config.initial_radius = detail::to_double(sc[1]);
    model.som_config.iterations = static_cast<std::size_t>(detail::to_integer(sc[2]));
    model.som_config.seed = detail::to_unsigned(sc[3]);
    const auto rc = reader.expect("rmo_config", 4);
    model.rmo_config = {detail::to_double(rc[0]), detail::to_double(rc[1]), detail::to_double(rc[2]),
                        detail::to_double(rc[3])};
    model.qe_ref = detail::to_double(reader.expect("qe_ref", 1)[0]);
    model.epochs_run = static_cast<std::size_t>(detail::to_integer(reader.expect("epochs", 1)[0]));
    model.grid = SomGrid(rows, cols, dim);
    for (std::size_t n = 0; n < rows * cols; ++n) {
        const auto values = reader.expect("w", dim);
        auto w = model.grid.node(n);
        for (std::size_t k = 0; k < dim; ++k) w[k] = detail::to_double(values[k]);
    }
    model.trained = true;
    return model;
}

}  // namespace malurl
