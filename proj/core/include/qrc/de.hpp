#pragma once

#include <functional>
#include <vector>

#include "qrc/network.hpp"

namespace qrc {

class Rng;

struct DEConfig {
  double scaling_factor = 0.05;
  double cross_probability = 0.4;  // chance to keep the incumbent element
  int population_size = 0;         // 0 -> 30 * N * M_eff
  int max_generations = 300;
  double f_tolerance = 1e-6;
  double x_tolerance = 1e-4;
  int stall_generations = 12;  // consecutive stalled generations before stop
  double init_lo = 0.0;
  double init_hi = 0.2;
  int init_budget = 1000;  // resamples per initial point
};

struct Candidate {
  CouplingVector coupling;
  double fitness = 0.0;
};

using CostFn = std::function<double(const CouplingVector&)>;
using FeasibleFn = std::function<bool(const CouplingVector&)>;
using GenerationLog = std::function<void(int, double, double)>;

struct OptimizeResult {
  Candidate best;
  int generations = 0;
  bool converged = false;
};

/// Population of feasible candidates with entries uniform in
/// [init_lo, init_hi], resampled until feasible. Fitness left unset.
std::vector<Candidate> init_population(int n, int m_eff,
                                       const FeasibleFn& feasible,
                                       const DEConfig& config, Rng& rng);

/// One generation of mutation x_w + s (x_u - x_v), per-element crossover
/// that keeps the incumbent element with the cross probability (one
/// designated index always coming from the mutant), clamping to
/// non-negative entries, and replace-iff-strictly-better selection. All
/// random draws happen before any evaluation, so the outcome does not
/// depend on evaluation order.
void evolve_generation(std::vector<Candidate>& population, const CostFn& cost,
                       const FeasibleFn& feasible, const DEConfig& config,
                       Rng& rng);

/// Full optimization loop: stops once no member of the population improves
/// by f_tolerance or moves by x_tolerance for stall_generations in a row, or
/// at max_generations.
OptimizeResult optimize(const CostFn& cost, const FeasibleFn& feasible, int n,
                        int m_eff, const DEConfig& config, Rng& rng,
                        const GenerationLog& log = nullptr);

/// Same loop over a caller-supplied population; members whose fitness is not
/// finite are evaluated first. Lets the starting points satisfy a stricter
/// predicate than the one used during evolution.
OptimizeResult optimize_population(std::vector<Candidate> population,
                                   const CostFn& cost,
                                   const FeasibleFn& feasible,
                                   const DEConfig& config, Rng& rng,
                                   const GenerationLog& log = nullptr);

}  // namespace qrc
