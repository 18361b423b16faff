#include "qrc/de.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qrc/rng.hpp"

namespace qrc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int resolve_population(int n, int m_eff, const DEConfig& config) {
  const int size =
      config.population_size > 0 ? config.population_size : 30 * n * m_eff;
  if (size < 4) throw std::invalid_argument("population must have >= 4 members");
  return size;
}

double population_spread(const std::vector<Candidate>& population) {
  Mat centroid = Mat::Zero(population.front().coupling.strengths.rows(),
                           population.front().coupling.strengths.cols());
  for (const auto& member : population) centroid += member.coupling.strengths;
  centroid /= static_cast<double>(population.size());
  double sum = 0.0;
  for (const auto& member : population)
    sum += (member.coupling.strengths - centroid).squaredNorm();
  return std::sqrt(sum / static_cast<double>(population.size()));
}

}  // namespace

std::vector<Candidate> init_population(int n, int m_eff,
                                       const FeasibleFn& feasible,
                                       const DEConfig& config, Rng& rng) {
  if (n < 1 || m_eff < 1) throw std::invalid_argument("invalid problem size");
  const int size = resolve_population(n, m_eff, config);
  std::vector<Candidate> population;
  population.reserve(size);
  for (int i = 0; i < size; ++i) {
    Mat strengths(n, m_eff);
    bool ok = false;
    for (int attempt = 0; attempt <= config.init_budget; ++attempt) {
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < m_eff; ++c)
          strengths(r, c) = rng.uniform(config.init_lo, config.init_hi);
      if (feasible(CouplingVector{strengths})) {
        ok = true;
        break;
      }
    }
    if (!ok)
      throw std::runtime_error("no feasible candidate within the init budget");
    population.push_back(Candidate{CouplingVector{std::move(strengths)}, kInf});
  }
  return population;
}

void evolve_generation(std::vector<Candidate>& population, const CostFn& cost,
                       const FeasibleFn& feasible, const DEConfig& config,
                       Rng& rng) {
  const int size = static_cast<int>(population.size());
  if (size < 4) throw std::invalid_argument("population must have >= 4 members");
  const auto rows = population.front().coupling.strengths.rows();
  const auto cols = population.front().coupling.strengths.cols();
  const int dim = static_cast<int>(rows * cols);

  std::vector<Mat> trials;
  trials.reserve(size);
  for (int j = 0; j < size; ++j) {
    int u = rng.uniform_int(size);
    while (u == j) u = rng.uniform_int(size);
    int v = rng.uniform_int(size);
    while (v == j || v == u) v = rng.uniform_int(size);
    int w = rng.uniform_int(size);
    while (w == j || w == u || w == v) w = rng.uniform_int(size);
    const Mat mutant =
        population[w].coupling.strengths +
        config.scaling_factor * (population[u].coupling.strengths -
                                 population[v].coupling.strengths);
    Mat trial = population[j].coupling.strengths;
    const int forced = rng.uniform_int(dim);
    for (int e = 0; e < dim; ++e) {
      const bool keep_own =
          e != forced && rng.uniform() < config.cross_probability;
      if (!keep_own) trial(e / cols, e % cols) = mutant(e / cols, e % cols);
    }
    trials.push_back(trial.cwiseMax(0.0));
  }

  for (int j = 0; j < size; ++j) {
    const CouplingVector candidate{trials[j]};
    const double fitness = feasible(candidate) ? cost(candidate) : kInf;
    if (fitness < population[j].fitness)
      population[j] = Candidate{candidate, fitness};
  }
}

OptimizeResult optimize(const CostFn& cost, const FeasibleFn& feasible, int n,
                        int m_eff, const DEConfig& config, Rng& rng,
                        const GenerationLog& log) {
  return optimize_population(init_population(n, m_eff, feasible, config, rng),
                             cost, feasible, config, rng, log);
}

OptimizeResult optimize_population(std::vector<Candidate> population,
                                   const CostFn& cost,
                                   const FeasibleFn& feasible,
                                   const DEConfig& config, Rng& rng,
                                   const GenerationLog& log) {
  if (population.size() < 4)
    throw std::invalid_argument("population must have >= 4 members");
  for (auto& member : population)
    if (!std::isfinite(member.fitness)) member.fitness = cost(member.coupling);

  auto best_of = [&]() {
    int best = 0;
    for (int j = 1; j < static_cast<int>(population.size()); ++j)
      if (population[j].fitness < population[best].fitness) best = j;
    return population[best];
  };

  int stalled = 0;
  int generation = 0;
  bool converged = false;
  std::vector<Candidate> previous;
  while (generation < config.max_generations) {
    previous = population;
    evolve_generation(population, cost, feasible, config, rng);
    ++generation;
    if (log) log(generation, best_of().fitness, population_spread(population));
    // Convergence is judged member-wise across the whole population: the run
    // keeps going as long as any member still accepts a meaningfully
    // different trial, even if the incumbent best went quiet generations ago.
    double max_df = 0.0;
    double max_dx = 0.0;
    for (int j = 0; j < static_cast<int>(population.size()); ++j) {
      const double df = previous[j].fitness - population[j].fitness;
      if (std::isfinite(df)) max_df = std::max(max_df, df);
      max_dx = std::max(max_dx, (population[j].coupling.strengths -
                                 previous[j].coupling.strengths)
                                    .norm());
    }
    if (max_df < config.f_tolerance && max_dx < config.x_tolerance)
      ++stalled;
    else
      stalled = 0;
    if (stalled >= config.stall_generations) {
      converged = true;
      break;
    }
  }
  const Candidate best = best_of();
  if (!std::isfinite(best.fitness))
    throw std::runtime_error("optimizer never found a finite-cost candidate");
  return OptimizeResult{std::move(best), generation, converged};
}

}  // namespace qrc
