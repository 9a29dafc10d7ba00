#include "malurl/tabu.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <ostream>

namespace malurl {

void TabuConfig::validate() const {
    if (list_size < 1) fail(ErrorKind::config, "tabu list size must be >= 1");
    if (iterations < 1) fail(ErrorKind::config, "tabu iterations must be >= 1");
    if (stop_after_non_improving < 1) fail(ErrorKind::config, "tabu stop-after-non-improving must be >= 1");
    if (neighbors_per_iteration < 1) fail(ErrorKind::config, "tabu neighbors per iteration must be >= 1");
    if (!(mutation_rate > 0.0 && mutation_rate <= 1.0))
        fail(ErrorKind::config, "tabu mutation rate must lie in (0, 1]");
    if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0))
        fail(ErrorKind::config, "tabu crossover rate must lie in [0, 1]");
    if (!(initial_temperature > 0.0 && std::isfinite(initial_temperature)))
        fail(ErrorKind::config, "tabu initial temperature must be > 0");
    if (!(cooling_factor > 0.0 && cooling_factor < 1.0))
        fail(ErrorKind::config, "tabu cooling factor must lie in (0, 1)");
}

Fingerprint fingerprint(std::span<const double> solution) {
    std::uint64_t hash = 14695981039346656037ULL;  // FNV-1a
    for (double x : solution) {
        const double q = std::round(x * 1000.0);
        std::uint64_t bits;
        if (std::isfinite(q) && std::abs(q) < 9.0e18)
            bits = static_cast<std::uint64_t>(static_cast<std::int64_t>(q));
        else
            bits = std::bit_cast<std::uint64_t>(q);
        for (int byte = 0; byte < 8; ++byte) {
            hash ^= (bits >> (8 * byte)) & 0xFFu;
            hash *= 1099511628211ULL;
        }
    }
    return hash;
}

void TabuList::push(Fingerprint fp) {
    entries_.push_back(fp);
    while (entries_.size() > capacity_) entries_.pop_front();
}

bool TabuList::contains(Fingerprint fp) const {
    return std::find(entries_.begin(), entries_.end(), fp) != entries_.end();
}

std::vector<Vector> neighbors(std::span<const double> current, std::span<const double> best,
                              double scale, const TabuConfig& config, Rng& rng,
                              std::span<const double> floor) {
    require(scale > 0.0, "neighbors: scale must be > 0");
    require(best.size() == current.size(), "neighbors: best and current differ in dimension");
    require(floor.empty() || floor.size() == current.size(), "neighbors: floor has wrong dimension");
    const std::size_t n = current.size();
    std::vector<Vector> out;
    out.reserve(config.neighbors_per_iteration);
    for (std::size_t c = 0; c < config.neighbors_per_iteration; ++c) {
        Vector candidate(current.begin(), current.end());
        for (double& x : candidate)
            if (rng.uniform01() < config.mutation_rate) x += scale * rng.normal();
        if (n > 0 && rng.uniform01() < config.crossover_rate) {
            const std::size_t start = rng.index(n);
            const std::size_t len = 1 + rng.index(n - start);
            std::copy_n(best.begin() + static_cast<std::ptrdiff_t>(start), len,
                        candidate.begin() + static_cast<std::ptrdiff_t>(start));
        }
        for (std::size_t i = 0; i < floor.size(); ++i) candidate[i] = std::max(candidate[i], floor[i]);
        out.push_back(std::move(candidate));
    }
    return out;
}

namespace {

double evaluate(const Objective& objective, std::span<const double> x, std::size_t iteration) {
    const double value = objective(x);
    if (!std::isfinite(value))
        fail(ErrorKind::data, "tabu search: non-finite objective at iteration " + std::to_string(iteration));
    return value;
}

}  // namespace

TabuResult tabu_search(std::span<const double> initial, const Objective& objective,
                       const TabuConfig& config, std::span<const double> floor) {
    config.validate();
    Rng rng(config.seed);
    TabuList tabu(config.list_size);

    Vector current(initial.begin(), initial.end());
    double current_objective = evaluate(objective, current, 0);

    TabuResult result;
    result.best = current;
    result.initial_objective = current_objective;
    result.best_objective = current_objective;

    std::size_t non_improving = 0;
    for (std::size_t it = 1; it <= config.iterations; ++it) {
        const double scale = config.initial_scale() * std::pow(config.cooling_factor, static_cast<double>(it - 1));
        auto candidates = neighbors(current, result.best, scale, config, rng, floor);

        std::vector<double> values(candidates.size());
        for (std::size_t c = 0; c < candidates.size(); ++c) values[c] = evaluate(objective, candidates[c], it);

        constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
        std::size_t chosen = none;
        std::size_t least_bad = 0;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            if (values[c] < values[least_bad]) least_bad = c;
            const bool admissible = !tabu.contains(fingerprint(candidates[c])) ||
                                    (config.aspiration_enabled && aspiration(values[c], result.best_objective));
            if (admissible && (chosen == none || values[c] < values[chosen])) chosen = c;
        }
        const bool escaped = chosen == none;
        if (escaped) {
            chosen = least_bad;
            ++result.escapes;
        }

        tabu.push(fingerprint(current));
        current = std::move(candidates[chosen]);
        current_objective = values[chosen];

        if (current_objective < result.best_objective) {
            result.best = current;
            result.best_objective = current_objective;
            non_improving = 0;
        } else {
            ++non_improving;
        }
        result.trace.push_back({it, current_objective, result.best_objective, scale, tabu.size(), escaped});
        if (non_improving >= config.stop_after_non_improving) {
            result.stop = TabuStop::non_improving;
            break;
        }
    }
    result.final_tabu_list.assign(tabu.entries().begin(), tabu.entries().end());
    return result;
}

void write_tabu_trace(const TabuResult& result, std::ostream& out) {
    out << "iteration,selected_objective,best_objective,scale,tabu_size\n";
    for (const auto& e : result.trace)
        out << e.iteration << ',' << format_exact(e.selected_objective) << ','
            << format_exact(e.best_objective) << ',' << format_exact(e.scale) << ',' << e.tabu_size << '\n';
}

}  // namespace malurl
