#include <algorithm>
#include <numeric>

#include "packwise/error.hpp"
#include "packwise/packing.hpp"
#include "packwise/random.hpp"

namespace packwise {

void GaParams::validate() const {
    if (population < 4) throw InvalidArgument("GA population must be at least 4");
    if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) throw InvalidArgument("crossover rate must be in [0, 1]");
    if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) throw InvalidArgument("mutation rate must be in [0, 1]");
    if (elitism >= population) throw InvalidArgument("elitism must be smaller than the population");
    if (tournament == 0) throw InvalidArgument("tournament size must be positive");
    if (penalty_weight && !(*penalty_weight > 0.0)) throw InvalidArgument("penalty weight must be positive");
}

void evaluate_population(const std::vector<Genome>& population, const DemandVector& demand, const VmCatalog& vms,
                         double period_hours, double penalty_weight, std::vector<double>& fitness,
                         std::vector<Evaluation>& evals, Exec exec) {
    fitness.resize(population.size());
    evals.resize(population.size());
    const auto n = static_cast<std::ptrdiff_t>(population.size());
    auto one = [&](std::ptrdiff_t i) {
        evals[i] = evaluate(population[i], demand, vms, period_hours);
        fitness[i] = evals[i].cost + penalty_weight * evals[i].violation;
    };
    if (exec == Exec::serial) {
        for (std::ptrdiff_t i = 0; i < n; ++i) one(i);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) one(i);
}

namespace {

int random_type(Rng& rng, const VmCatalog& vms) { return static_cast<int>(rng.uniform_index(vms.size())); }

Genome random_genome(std::size_t slots, std::size_t services, const VmCatalog& vms, Rng& rng, bool single_host) {
    Genome g(slots, services);
    if (single_host) {
        for (std::size_t s = 0; s < services; ++s) {
            const std::size_t m = rng.uniform_index(slots);
            g.bit(m, s) = 1;
            if (g.types[m] == Genome::kOff) g.types[m] = random_type(rng, vms);
        }
        return g;
    }
    for (std::size_t m = 0; m < slots; ++m) {
        if (rng.bernoulli(0.5)) g.types[m] = random_type(rng, vms);
        for (std::size_t s = 0; s < services; ++s) g.bit(m, s) = rng.bernoulli(0.5) ? 1 : 0;
    }
    return g;
}

std::size_t tournament_pick(const std::vector<double>& fitness, std::size_t size, Rng& rng) {
    std::size_t best = rng.uniform_index(fitness.size());
    for (std::size_t i = 1; i < size; ++i) {
        const std::size_t c = rng.uniform_index(fitness.size());
        if (fitness[c] < fitness[best] || (fitness[c] == fitness[best] && c < best)) best = c;
    }
    return best;
}

Genome crossover(const Genome& a, const Genome& b, Rng& rng) {
    Genome child = a;
    for (std::size_t m = 0; m < a.slots; ++m) {
        if (!rng.bernoulli(0.5)) continue;
        child.types[m] = b.types[m];
        std::copy_n(b.bits.begin() + m * b.services, b.services, child.bits.begin() + m * child.services);
    }
    return child;
}

void mutate(Genome& g, const VmCatalog& vms, double rate, Rng& rng) {
    for (std::size_t m = 0; m < g.slots; ++m) {
        if (rng.bernoulli(rate)) {
            g.types[m] = g.types[m] == Genome::kOff ? random_type(rng, vms) : Genome::kOff;
        } else if (g.types[m] != Genome::kOff && vms.size() > 1 && rng.bernoulli(rate)) {
            const auto shift = 1 + rng.uniform_index(vms.size() - 1);
            g.types[m] = static_cast<int>((static_cast<std::size_t>(g.types[m]) + shift) % vms.size());
        }
        for (std::size_t s = 0; s < g.services; ++s)
            if (rng.bernoulli(rate)) g.bit(m, s) ^= 1;
    }
}

}  // namespace

GaResult ga_pack_detailed(const DemandVector& demand, const VmCatalog& vms, const GaParams& params,
                          double period_hours, Exec exec) {
    params.validate();
    validate_vm_catalog(vms, demand.dimensions());
    GaResult result;
    if (demand.is_zero()) return result;

    const std::size_t services = demand.services();
    std::vector<PackingSolution> seeds;
    if (params.seed_greedy) {
        seeds.push_back(first_fit_pack(demand, vms, period_hours));
        seeds.push_back(best_fit_pack(demand, vms, period_hours));
    }
    std::size_t slots = params.max_instances.value_or(0);
    if (!params.max_instances) {
        slots = default_max_instances(demand, vms);
        for (const auto& s : seeds)
            if (s.feasible) slots = std::max(slots, s.instances.size());
    }
    if (slots == 0) throw InvalidArgument("GA needs at least one instance slot for nonzero demand");
    double max_cost = 0.0;
    for (const auto& vm : vms) max_cost = std::max(max_cost, vm.hourly_cost);
    const double lambda = params.penalty_weight.value_or(1e4 * max_cost);
    result.max_instances = slots;
    result.penalty_weight = lambda;

    Rng rng(params.seed);
    std::vector<Genome> population;
    population.reserve(params.population);
    for (const auto& s : seeds)
        if (s.feasible && s.instances.size() <= slots && population.size() < params.population)
            population.push_back(encode(s, slots, services));
    while (population.size() < params.population)
        population.push_back(random_genome(slots, services, vms, rng, population.size() % 2 == 0));

    std::vector<double> fitness;
    std::vector<Evaluation> evals;
    evaluate_population(population, demand, vms, period_hours, lambda, fitness, evals, exec);

    // best feasible by cost, and the least-violating individual as a fallback
    std::optional<std::pair<Genome, Evaluation>> best_feasible;
    std::pair<Genome, Evaluation> least_violating{population[0], evals[0]};
    auto track = [&]() {
        for (std::size_t i = 0; i < population.size(); ++i) {
            const auto& e = evals[i];
            if (e.violation == 0.0) {
                if (!best_feasible || e.cost < best_feasible->second.cost) best_feasible.emplace(population[i], e);
            } else if (!best_feasible && e.violation < least_violating.second.violation) {
                least_violating = {population[i], e};
            }
        }
    };
    track();
    result.best_fitness.push_back(*std::min_element(fitness.begin(), fitness.end()));

    std::vector<std::size_t> order(population.size());
    for (std::size_t gen = 0; gen < params.generations; ++gen) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fitness[a] < fitness[b]; });

        std::vector<Genome> next;
        next.reserve(params.population);
        for (std::size_t e = 0; e < params.elitism; ++e) next.push_back(population[order[e]]);
        while (next.size() < params.population) {
            const auto& a = population[tournament_pick(fitness, params.tournament, rng)];
            const auto& b = population[tournament_pick(fitness, params.tournament, rng)];
            Genome child = rng.bernoulli(params.crossover_rate) ? crossover(a, b, rng) : a;
            mutate(child, vms, params.mutation_rate, rng);
            next.push_back(std::move(child));
        }
        population = std::move(next);
        evaluate_population(population, demand, vms, period_hours, lambda, fitness, evals, exec);
        track();
        result.best_fitness.push_back(*std::min_element(fitness.begin(), fitness.end()));
    }

    const auto& [genome, eval] = best_feasible ? *best_feasible : least_violating;
    result.solution = decode(genome, vms, period_hours, eval);
    return result;
}

PackingSolution ga_pack(const DemandVector& demand, const VmCatalog& vms, const GaParams& params, double period_hours,
                        Exec exec) {
    return ga_pack_detailed(demand, vms, params, period_hours, exec).solution;
}

}  // namespace packwise
