#include "malurl/rbfn.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include "serialize.hpp"

namespace malurl {

void GdConfig::validate() const {
    if (!(learning_rate > 0.0)) fail(ErrorKind::config, "rbfn learning rate must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) fail(ErrorKind::config, "rbfn momentum must lie in [0, 1)");
    if (epochs < 1) fail(ErrorKind::config, "rbfn epochs must be >= 1");
    if (batch_size < 1) fail(ErrorKind::config, "rbfn batch size must be >= 1");
}

RbfnModel::RbfnModel(std::vector<RbfCenter> centers, std::size_t num_classes)
    : centers_(std::move(centers)),
      num_classes_(num_classes),
      weights_(centers_.size() * num_classes, 0.0),
      bias_(num_classes, 0.0) {
    require(!centers_.empty(), "rbfn needs at least one center");
    require(num_classes >= 1, "rbfn needs at least one class");
    for (const auto& c : centers_) {
        require(c.mu.size() == centers_.front().mu.size(), "rbfn centers differ in dimension");
        require(c.sigma > 0.0 && std::isfinite(c.sigma), "rbfn widths must be positive and finite");
    }
}

Vector RbfnModel::parameters() const {
    Vector out;
    out.reserve(centers_.size() * (input_dim() + 1) + weights_.size() + bias_.size());
    for (const auto& c : centers_) out.insert(out.end(), c.mu.begin(), c.mu.end());
    for (const auto& c : centers_) out.push_back(c.sigma);
    out.insert(out.end(), weights_.begin(), weights_.end());
    out.insert(out.end(), bias_.begin(), bias_.end());
    return out;
}

void RbfnModel::set_parameters(std::span<const double> params) {
    const std::size_t dim = input_dim();
    const std::size_t expected = centers_.size() * (dim + 1) + weights_.size() + bias_.size();
    require(params.size() == expected, "set_parameters: wrong parameter count");
    std::size_t at = 0;
    for (auto& c : centers_)
        for (std::size_t k = 0; k < dim; ++k) c.mu[k] = params[at++];
    for (auto& c : centers_) c.sigma = std::max(params[at++], kMinWidth);
    for (double& w : weights_) w = params[at++];
    for (double& b : bias_) b = params[at++];
}

Vector RbfnModel::parameter_floor() const {
    Vector floor(centers_.size() * (input_dim() + 1) + weights_.size() + bias_.size(),
                 -std::numeric_limits<double>::infinity());
    const std::size_t first_width = centers_.size() * input_dim();
    std::fill_n(floor.begin() + static_cast<std::ptrdiff_t>(first_width), centers_.size(), kMinWidth);
    return floor;
}

bool RbfnModel::operator==(const RbfnModel& other) const {
    if (num_classes_ != other.num_classes_ || centers_.size() != other.centers_.size()) return false;
    for (std::size_t i = 0; i < centers_.size(); ++i)
        if (centers_[i].mu != other.centers_[i].mu || centers_[i].sigma != other.centers_[i].sigma)
            return false;
    return weights_ == other.weights_ && bias_ == other.bias_;
}

void RbfnModel::save(std::ostream& out) const {
    out << "rbfn 1\n";
    out << "shape " << num_centers() << ' ' << input_dim() << ' ' << num_classes_ << '\n';
    for (const auto& c : centers_) {
        out << "c " << format_exact(c.sigma);
        for (double m : c.mu) out << ' ' << format_exact(m);
        out << '\n';
    }
    for (std::size_t i = 0; i < num_centers(); ++i) {
        out << 'w';
        for (std::size_t k = 0; k < num_classes_; ++k) out << ' ' << format_exact(weight(i, k));
        out << '\n';
    }
    out << "bias";
    for (double b : bias_) out << ' ' << format_exact(b);
    out << '\n';
}

RbfnModel RbfnModel::load(std::istream& in) {
    detail::LineReader reader(in);
    if (reader.expect("rbfn", 1)[0] != "1") fail(ErrorKind::model, "unsupported rbfn section version");
    const auto shape = reader.expect("shape", 3);
    const auto n = static_cast<std::size_t>(detail::to_integer(shape[0]));
    const auto dim = static_cast<std::size_t>(detail::to_integer(shape[1]));
    const auto classes = static_cast<std::size_t>(detail::to_integer(shape[2]));
    if (n == 0 || dim == 0 || classes == 0 || n * (dim + classes) > (1u << 28))
        fail(ErrorKind::model, "rbfn section: invalid shape");

    std::vector<RbfCenter> centers(n);
    for (auto& c : centers) {
        const auto values = reader.expect("c", dim + 1);
        c.sigma = detail::to_double(values[0]);
        if (!(c.sigma > 0.0 && std::isfinite(c.sigma))) fail(ErrorKind::model, "rbfn section: bad width");
        c.mu.resize(dim);
        for (std::size_t k = 0; k < dim; ++k) c.mu[k] = detail::to_double(values[k + 1]);
    }
    RbfnModel model(std::move(centers), classes);
    for (std::size_t i = 0; i < n; ++i) {
        const auto values = reader.expect("w", classes);
        for (std::size_t k = 0; k < classes; ++k) model.weight(i, k) = detail::to_double(values[k]);
    }
    const auto bias = reader.expect("bias", classes);
    for (std::size_t k = 0; k < classes; ++k) model.bias()[k] = detail::to_double(bias[k]);
    return model;
}

// K-means ------------------------------------------------------------------

namespace {

std::size_t nearest(std::span<const Vector> centers, std::span<const double> x, double& d2) {
    std::size_t best = 0;
    d2 = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < centers.size(); ++j) {
        const double d = squared_distance(centers[j], x);
        if (d < d2) {
            d2 = d;
            best = j;
        }
    }
    return best;
}

}  // namespace

KMeansResult kmeans(std::span<const Vector> data, std::size_t k, std::uint64_t seed,
                    std::size_t max_iterations) {
    require(k >= 1, "kmeans: k must be >= 1");
    require(!data.empty(), "kmeans: empty data");
    const std::size_t dim = data.front().size();
    for (const auto& x : data) require(x.size() == dim, "kmeans: inconsistent dimension");

    std::vector<Vector> distinct(data.begin(), data.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (k > distinct.size())
        fail(ErrorKind::invalid_argument, "kmeans: k = " + std::to_string(k) + " exceeds " +
                                              std::to_string(distinct.size()) + " distinct points");

    Rng rng(seed);
    rng.shuffle(distinct);
    KMeansResult result;
    result.centers.assign(distinct.begin(), distinct.begin() + static_cast<std::ptrdiff_t>(k));

    std::vector<std::size_t> assignment(data.size(), k);
    std::vector<double> dist(data.size());
    std::vector<std::size_t> counts(k);
    for (std::size_t it = 0; it < std::max<std::size_t>(max_iterations, 1); ++it) {
        bool changed = false;
        double wcss = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            const std::size_t j = nearest(result.centers, data[i], dist[i]);
            if (j != assignment[i]) changed = true;
            assignment[i] = j;
            wcss += dist[i];
        }
        result.wcss_history.push_back(wcss);
        result.iterations = it + 1;
        if (!changed) break;

        for (auto& c : result.centers) std::fill(c.begin(), c.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < data.size(); ++i) {
            auto& c = result.centers[assignment[i]];
            for (std::size_t d = 0; d < dim; ++d) c[d] += data[i][d];
            ++counts[assignment[i]];
        }
        for (std::size_t j = 0; j < k; ++j) {
            if (counts[j] == 0) continue;
            for (double& v : result.centers[j]) v /= static_cast<double>(counts[j]);
        }
        for (std::size_t j = 0; j < k; ++j) {
            if (counts[j] != 0) continue;
            const auto far = static_cast<std::size_t>(
                std::max_element(dist.begin(), dist.end()) - dist.begin());
            result.centers[j] = data[far];
            dist[far] = 0.0;
        }
    }
    return result;
}

std::vector<double> init_widths(std::span<const Vector> centers) {
    if (centers.size() < 2) return std::vector<double>(centers.size(), 1.0);
    std::vector<double> widths(centers.size());
    std::vector<double> d;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        d.clear();
        for (std::size_t j = 0; j < centers.size(); ++j)
            if (j != i) d.push_back(std::sqrt(squared_distance(centers[i], centers[j])));
        const std::size_t m = std::min<std::size_t>(2, d.size());
        std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(m), d.end());
        const double mean = std::accumulate(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(m), 0.0) /
                            static_cast<double>(m);
        widths[i] = std::max(mean, kMinWidth);
    }
    return widths;
}

// Network --------------------------------------------------------------------

double rbf_activation(std::span<const double> x, const RbfCenter& center) {
    require(x.size() == center.mu.size(), "rbf_activation: dimension mismatch");
    require(center.sigma > 0.0, "rbf_activation: width must be > 0");
    return std::exp(-squared_distance(x, center.mu) / (2.0 * center.sigma * center.sigma));
}

Vector activations(const RbfnModel& model, std::span<const double> x) {
    require(x.size() == model.input_dim(), "rbfn: input dimension " + std::to_string(x.size()) +
                                               " does not match " + std::to_string(model.input_dim()));
    Vector phi(model.num_centers());
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = rbf_activation(x, model.centers()[i]);
    return phi;
}

namespace {

void scores_from(const RbfnModel& model, std::span<const double> phi, std::span<double> scores) {
    const std::size_t classes = model.num_classes();
    std::copy(model.bias().begin(), model.bias().end(), scores.begin());
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double a = phi[i];
        const double* w = model.weights().data() + i * classes;
        for (std::size_t k = 0; k < classes; ++k) scores[k] += w[k] * a;
    }
}

void check_batch(const RbfnModel& model, const LabeledSet& batch) {
    require(batch.inputs.size() == batch.labels.size(), "labeled set: inputs and labels differ in length");
    for (int label : batch.labels)
        require(label >= 0 && static_cast<std::size_t>(label) < model.num_classes(),
                "labeled set: label outside the model's classes");
}

// Accumulates d(loss)/d(weights, bias) of the batch rows `rows` given
// precomputed activations; returns the batch loss.
double accumulate_gradient(const RbfnModel& model, const std::vector<Vector>& phi,
                           const std::vector<int>& labels, std::span<const std::size_t> rows,
                           OutputGradient& grad) {
    const std::size_t classes = model.num_classes();
    const double scale = 1.0 / static_cast<double>(rows.size() * classes);
    std::fill(grad.weights.begin(), grad.weights.end(), 0.0);
    std::fill(grad.bias.begin(), grad.bias.end(), 0.0);
    Vector scores(classes);
    double loss = 0.0;
    for (auto r : rows) {
        scores_from(model, phi[r], scores);
        for (std::size_t k = 0; k < classes; ++k) {
            const double target = static_cast<std::size_t>(labels[r]) == k ? 1.0 : 0.0;
            const double residual = scores[k] - target;
            loss += residual * residual;
            scores[k] = 2.0 * scale * residual;  // reuse as d(loss)/d(score)
            grad.bias[k] += scores[k];
        }
        for (std::size_t i = 0; i < phi[r].size(); ++i) {
            const double a = phi[r][i];
            double* g = grad.weights.data() + i * classes;
            for (std::size_t k = 0; k < classes; ++k) g[k] += scores[k] * a;
        }
    }
    return loss * scale;
}

}  // namespace

Vector forward(const RbfnModel& model, std::span<const double> x) {
    const Vector phi = activations(model, x);
    Vector scores(model.num_classes());
    scores_from(model, phi, scores);
    return scores;
}

int argmax(std::span<const double> scores) {
    require(!scores.empty(), "argmax: no scores");
    std::size_t best = 0;
    for (std::size_t k = 1; k < scores.size(); ++k)
        if (scores[k] > scores[best]) best = k;
    return static_cast<int>(best);
}

int predict(const RbfnModel& model, std::span<const double> x) { return argmax(forward(model, x)); }

double mse_loss(const RbfnModel& model, const LabeledSet& batch) {
    require(batch.size() > 0, "mse_loss: empty batch");
    check_batch(model, batch);
    const std::size_t classes = model.num_classes();
    Vector phi(model.num_centers());
    Vector scores(classes);
    double sum = 0.0;
    for (std::size_t n = 0; n < batch.size(); ++n) {
        require(batch.inputs[n].size() == model.input_dim(), "mse_loss: dimension mismatch");
        for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = rbf_activation(batch.inputs[n], model.centers()[i]);
        scores_from(model, phi, scores);
        for (std::size_t k = 0; k < classes; ++k) {
            const double target = static_cast<std::size_t>(batch.labels[n]) == k ? 1.0 : 0.0;
            sum += (scores[k] - target) * (scores[k] - target);
        }
    }
    return sum / static_cast<double>(batch.size() * classes);
}

OutputGradient mse_gradient(const RbfnModel& model, const LabeledSet& batch) {
    require(batch.size() > 0, "mse_gradient: empty batch");
    check_batch(model, batch);
    std::vector<Vector> phi;
    phi.reserve(batch.size());
    for (const auto& x : batch.inputs) phi.push_back(activations(model, x));
    std::vector<std::size_t> rows(batch.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    OutputGradient grad{Vector(model.weights().size()), Vector(model.num_classes())};
    accumulate_gradient(model, phi, batch.labels, rows, grad);
    return grad;
}

GdResult train_gd(RbfnModel& model, const LabeledSet& train, const GdConfig& config) {
    config.validate();
    require(train.size() > 0, "train_gd: empty training set");
    check_batch(model, train);

    // Centers and widths stay fixed, so the hidden layer is evaluated once.
    std::vector<Vector> phi;
    phi.reserve(train.size());
    for (const auto& x : train.inputs) phi.push_back(activations(model, x));

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::size_t> all = order;

    Rng rng(config.seed);
    OutputGradient grad{Vector(model.weights().size()), Vector(model.num_classes())};
    Vector velocity_w(model.weights().size(), 0.0);
    Vector velocity_b(model.num_classes(), 0.0);
    OutputGradient scratch = grad;

    GdResult result;
    result.loss_history.reserve(config.epochs);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t len = std::min(config.batch_size, order.size() - start);
            accumulate_gradient(model, phi, train.labels, std::span(order).subspan(start, len), grad);
            for (std::size_t p = 0; p < velocity_w.size(); ++p) {
                velocity_w[p] = config.momentum * velocity_w[p] - config.learning_rate * grad.weights[p];
                model.weights()[p] += velocity_w[p];
            }
            for (std::size_t k = 0; k < velocity_b.size(); ++k) {
                velocity_b[k] = config.momentum * velocity_b[k] - config.learning_rate * grad.bias[k];
                model.bias()[k] += velocity_b[k];
            }
        }
        result.loss_history.push_back(accumulate_gradient(model, phi, train.labels, all, scratch));
    }
    return result;
}

RbfnModel initialize_rbfn(std::span<const Vector> data, std::size_t num_centers,
                          std::size_t num_classes, std::uint64_t seed) {
    auto clusters = kmeans(data, num_centers, seed);
    const auto widths = init_widths(clusters.centers);
    std::vector<RbfCenter> centers(num_centers);
    for (std::size_t i = 0; i < num_centers; ++i) centers[i] = {std::move(clusters.centers[i]), widths[i]};
    return RbfnModel(std::move(centers), num_classes);
}

}  // namespace malurl
