#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "malurl/common.hpp"

namespace malurl {

struct TabuConfig {
    std::size_t list_size = 50;
    std::size_t iterations = 100;
    bool aspiration_enabled = true;
    std::size_t stop_after_non_improving = 10;
    std::size_t neighbors_per_iteration = 20;
    double mutation_rate = 0.1;   // per-component perturbation probability
    double crossover_rate = 0.7;  // probability of a block swap with the best-known solution
    double initial_temperature = 100.0;
    double cooling_factor = 0.95;  // exponential decay of the perturbation scale
    std::uint64_t seed = 0;

    /// Standard deviation of the first iteration's perturbations.
    double initial_scale() const { return initial_temperature / 1000.0; }

    void validate() const;
    bool operator==(const TabuConfig&) const = default;
};

using Fingerprint = std::uint64_t;

/// Hash of the vector with every component rounded to 3 decimals.
Fingerprint fingerprint(std::span<const double> solution);

/// Bounded FIFO of solution fingerprints.
class TabuList {
public:
    explicit TabuList(std::size_t capacity) : capacity_(capacity) {}

    void push(Fingerprint fp);
    bool contains(Fingerprint fp) const;
    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    const std::deque<Fingerprint>& entries() const { return entries_; }

private:
    std::size_t capacity_;
    std::deque<Fingerprint> entries_;
};

/// Candidate moves around `current`: each component is perturbed with
/// probability mutation_rate by N(0, scale^2) noise, then with probability
/// crossover_rate a random contiguous block is copied from `best`. Components
/// with a lower bound in `floor` (empty = unbounded) are clamped up to it.
std::vector<Vector> neighbors(std::span<const double> current, std::span<const double> best,
                              double scale, const TabuConfig& config, Rng& rng,
                              std::span<const double> floor = {});

/// Tabu status is overridden only by a strict improvement on the best known.
inline bool aspiration(double candidate_objective, double best_objective) {
    return candidate_objective < best_objective;
}

struct TabuTraceEntry {
    std::size_t iteration = 0;
    double selected_objective = 0.0;
    double best_objective = 0.0;
    double scale = 0.0;
    std::size_t tabu_size = 0;
    bool escaped = false;  // every candidate was tabu and none aspirated
};

enum class TabuStop { iteration_budget, non_improving };

struct TabuResult {
    Vector best;
    double initial_objective = 0.0;
    double best_objective = 0.0;
    std::vector<TabuTraceEntry> trace;
    std::size_t escapes = 0;
    TabuStop stop = TabuStop::iteration_budget;
    std::vector<Fingerprint> final_tabu_list;
};

using Objective = std::function<double(std::span<const double>)>;

/// Minimizes `objective` starting from `initial`, which stays a candidate for
/// the best-known solution. Throws when the objective returns a non-finite
/// value.
TabuResult tabu_search(std::span<const double> initial, const Objective& objective,
                       const TabuConfig& config, std::span<const double> floor = {});

/// One line per iteration: iteration, selected, best, scale, tabu occupancy.
void write_tabu_trace(const TabuResult& result, std::ostream& out);

}  // namespace malurl
