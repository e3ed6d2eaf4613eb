//! Pilot-assignment solvers: random, exhaustive, genetic, and the k-means
//! island variants (sequential and parallel).
//!
//! All three genetic solvers run the same generation loop. The plain GA
//! evolves one island holding the whole population. The clustered variants
//! re-partition the population into `C` islands by k-means over fitness every
//! `R` generations and evolve each island on its own; the merged islands form
//! the next population. Island `c` of generation `g` always draws from the
//! substream `(seed, g, c)`, which makes the parallel solver produce exactly
//! the sequential result for any worker count.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::{
    pmx_crossover, random_assignment, roulette_select, search_space_size, swap_mutate, FitnessMode, GaConfig,
    PilotAssignment,
};
use crate::error::{Error, Result};
use crate::kmeans::partition_population;
use crate::metrics::SeModel;
use crate::rng::{SeedTree, Stream};
use crate::topology::FadingTensor;

pub const DEFAULT_EXPA_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Rpa,
    Expa,
    Ga,
    SkGa,
    PkGa,
}

impl SolverKind {
    pub const ALL: [SolverKind; 5] = [Self::Rpa, Self::Expa, Self::Ga, Self::SkGa, Self::PkGa];

    pub fn name(self) -> &'static str {
        match self {
            Self::Rpa => "rpa",
            Self::Expa => "expa",
            Self::Ga => "ga",
            Self::SkGa => "skga",
            Self::PkGa => "pkga",
        }
    }

    pub fn is_genetic(self) -> bool {
        matches!(self, Self::Ga | Self::SkGa | Self::PkGa)
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown solver {s:?} (rpa|expa|ga|skga|pkga)")))
    }
}

/// Outcome of one solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub solver_name: String,
    pub seed: u64,
    pub fitness_mode: FitnessMode,
    pub best: PilotAssignment,
    /// Best fitness found; equals `history.last()`.
    pub best_objective: f64,
    /// Best fitness in the population after each generation (index 0 is the
    /// initial population).
    pub history: Vec<f64>,
    /// Cumulative fitness evaluations at each history entry.
    pub evaluation_trace: Vec<u64>,
    pub evaluations: u64,
    /// Seconds.
    pub wall_time: f64,
}

impl SolveResult {
    /// Evaluations spent until the running best first came within `fraction`
    /// (relative) of the final best.
    pub fn evaluations_to_within(&self, fraction: f64) -> u64 {
        let target = self.best_objective - fraction * self.best_objective.abs();
        self.history
            .iter()
            .zip(&self.evaluation_trace)
            .find(|(h, _)| **h >= target)
            .map_or(self.evaluations, |(_, e)| *e)
    }

    /// Everything except the wall time and solver name, for determinism checks.
    pub fn same_outcome(&self, other: &SolveResult) -> bool {
        self.seed == other.seed
            && self.fitness_mode == other.fitness_mode
            && self.best == other.best
            && self.best_objective.to_bits() == other.best_objective.to_bits()
            && self.history.len() == other.history.len()
            && self.history.iter().zip(&other.history).all(|(a, b)| a.to_bits() == b.to_bits())
            && self.evaluation_trace == other.evaluation_trace
            && self.evaluations == other.evaluations
    }

    /// Rows `generation,best_objective`.
    pub fn write_history_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "generation,best_objective")?;
        for (g, h) in self.history.iter().enumerate() {
            writeln!(out, "{g},{h}")?;
        }
        Ok(())
    }
}

/// A single random canonical assignment.
pub fn solve_rpa(beta: &FadingTensor, seed: u64) -> SolveResult {
    let start = Instant::now();
    let mut rng = SeedTree::new(seed).stream(Stream::Random, &[]);
    let best = random_assignment(beta.cells(), beta.users(), &mut rng);
    let value = SeModel::default().objective_unchecked(beta, &best);
    SolveResult {
        solver_name: SolverKind::Rpa.name().into(),
        seed,
        fitness_mode: FitnessMode::SumSe,
        best,
        best_objective: value,
        history: vec![value],
        evaluation_trace: vec![1],
        evaluations: 1,
        wall_time: start.elapsed().as_secs_f64(),
    }
}

/// Advances `perm` to the next permutation in lexicographic order; false
/// after the last one.
fn next_permutation(perm: &mut [usize]) -> bool {
    let Some(i) = perm.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = perm.iter().rposition(|&x| x > perm[i]).expect("pivot has a successor");
    perm.swap(i, j);
    perm[i + 1..].reverse();
    true
}

/// Exhaustive search over all `(K!)^(L-1)` canonical assignments. Ties go to
/// the lexicographically smallest assignment.
pub fn solve_expa(beta: &FadingTensor, limit: u64) -> Result<SolveResult> {
    let (l, k) = (beta.cells(), beta.users());
    let space = search_space_size(l, k);
    if space > BigUint::from(limit) {
        return Err(Error::Infeasible {
            space: space.to_string(),
            limit,
        });
    }
    let start = Instant::now();
    let mut perms = Vec::new();
    let mut p: Vec<usize> = (0..k).collect();
    loop {
        perms.push(p.clone());
        if !next_permutation(&mut p) {
            break;
        }
    }
    let model = SeModel::default();
    let mut current = PilotAssignment::identity(l, k);
    // odometer over rows 1..L, last row fastest
    let mut digits = vec![0usize; l];
    let mut best = current.clone();
    let mut best_value = f64::NEG_INFINITY;
    let mut evaluations = 0u64;
    loop {
        let value = model.objective_unchecked(beta, &current);
        evaluations += 1;
        if value > best_value {
            best_value = value;
            best = current.clone();
        }
        let mut row = l;
        loop {
            if row <= 1 {
                return Ok(SolveResult {
                    solver_name: SolverKind::Expa.name().into(),
                    seed: 0,
                    fitness_mode: FitnessMode::SumSe,
                    best,
                    best_objective: best_value,
                    history: vec![best_value],
                    evaluation_trace: vec![evaluations],
                    evaluations,
                    wall_time: start.elapsed().as_secs_f64(),
                });
            }
            row -= 1;
            digits[row] += 1;
            if digits[row] < perms.len() {
                current.row_mut(row).copy_from_slice(&perms[digits[row]]);
                break;
            }
            digits[row] = 0;
            current.row_mut(row).copy_from_slice(&perms[0]);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Islands {
    /// One island holding the whole population.
    Single,
    /// k-means islands; `workers = None` evolves them in order on the calling
    /// thread.
    Clustered { workers: Option<usize> },
}

struct Engine<'a> {
    beta: &'a FadingTensor,
    config: &'a GaConfig,
    model: SeModel,
    seeds: SeedTree,
    islands: Islands,
}

struct IslandOutcome {
    members: Vec<PilotAssignment>,
    fitness: Vec<f64>,
}

impl Engine<'_> {
    fn fitness(&self, a: &PilotAssignment) -> f64 {
        self.model.fitness(self.config.fitness_mode, self.beta, a)
    }

    fn parallel(&self) -> bool {
        matches!(self.islands, Islands::Clustered { workers: Some(_) })
    }

    fn evaluate(&self, individuals: &[PilotAssignment]) -> Vec<f64> {
        if self.parallel() {
            individuals.par_iter().map(|a| self.fitness(a)).collect()
        } else {
            individuals.iter().map(|a| self.fitness(a)).collect()
        }
    }

    /// Elites of the island are copied unchanged (in member order); the rest
    /// of its slots are filled with roulette-selected, crossed, and mutated
    /// offspring of island members. All individuals are then evaluated.
    fn evolve_island(
        &self,
        generation: usize,
        island: usize,
        members: &[usize],
        population: &[PilotAssignment],
        fitness: &[f64],
        elite: &[bool],
    ) -> Result<IslandOutcome> {
        let mut rng = self.seeds.stream(Stream::Island, &[generation as u64, island as u64]);
        let mut next: Vec<PilotAssignment> = members
            .iter()
            .filter(|&&i| elite[i])
            .map(|&i| population[i].clone())
            .collect();
        let slots = members.len() - next.len();
        if slots > 0 {
            let local_fitness: Vec<f64> = members.iter().map(|&i| fitness[i]).collect();
            let parents = roulette_select(&local_fitness, 2 * slots.div_ceil(2), &mut rng)?;
            for pair in parents.chunks(2) {
                let (a, b) = (&population[members[pair[0]]], &population[members[pair[1]]]);
                let (mut c1, mut c2) = pmx_crossover(a, b, self.config.crossover_prob, &mut rng)?;
                swap_mutate(&mut c1, self.config.mutation_prob, &mut rng);
                swap_mutate(&mut c2, self.config.mutation_prob, &mut rng);
                next.push(c1);
                if next.len() < members.len() {
                    next.push(c2);
                }
            }
        }
        let fitness = self.evaluate(&next);
        Ok(IslandOutcome { members: next, fitness })
    }

    fn run(&self, name: SolverKind, injected: &[PilotAssignment]) -> Result<SolveResult> {
        self.config.validate()?;
        for a in injected {
            a.check_shape(self.beta.cells(), self.beta.users())?;
        }
        let start = Instant::now();
        let n = self.config.population_size;
        let mut init_rng = self.seeds.stream(Stream::Init, &[]);
        let mut population: Vec<PilotAssignment> = (0..n)
            .map(|_| random_assignment(self.beta.cells(), self.beta.users(), &mut init_rng))
            .collect();
        for (slot, a) in population.iter_mut().zip(injected) {
            *slot = a.canonicalize();
        }
        let mut fitness = self.evaluate(&population);
        let mut evaluations = n as u64;

        let argmax = |f: &[f64]| {
            f.iter()
                .enumerate()
                .fold(0, |best, (i, &v)| if v > f[best] { i } else { best })
        };
        let mut best_idx = argmax(&fitness);
        let mut best = population[best_idx].clone();
        let mut best_value = fitness[best_idx];
        let mut history = vec![best_value];
        let mut evaluation_trace = vec![evaluations];

        let pool = match self.islands {
            Islands::Clustered { workers: Some(p) } => Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(p.min(self.config.cluster_count).max(1))
                    .build()
                    .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?,
            ),
            _ => None,
        };

        let mut islands: Vec<Vec<usize>> = vec![(0..n).collect()];
        for generation in 1..=self.config.generations {
            if let Islands::Clustered { .. } = self.islands {
                if (generation - 1) % self.config.recluster_period == 0 {
                    let mut rng = self.seeds.stream(Stream::Cluster, &[generation as u64]);
                    islands = partition_population(&fitness, self.config.cluster_count, &mut rng)?;
                }
            }

            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]).then(a.cmp(&b)));
            let mut elite = vec![false; n];
            order[..self.config.elite_count].iter().for_each(|&i| elite[i] = true);

            let step = |(c, members): (usize, &Vec<usize>)| {
                self.evolve_island(generation, c, members, &population, &fitness, &elite)
            };
            let outcomes: Vec<IslandOutcome> = match &pool {
                Some(pool) => pool.install(|| islands.par_iter().enumerate().map(step).collect::<Result<_>>())?,
                None => islands.iter().enumerate().map(step).collect::<Result<_>>()?,
            };

            // Merge: islands become contiguous slices of the new population.
            population.clear();
            fitness.clear();
            islands.clear();
            for outcome in outcomes {
                let start = population.len();
                islands.push((start..start + outcome.members.len()).collect());
                population.extend(outcome.members);
                fitness.extend(outcome.fitness);
            }
            evaluations += n as u64;

            best_idx = argmax(&fitness);
            if fitness[best_idx] > best_value {
                best_value = fitness[best_idx];
                best = population[best_idx].clone();
            }
            history.push(fitness[best_idx]);
            evaluation_trace.push(evaluations);
        }

        Ok(SolveResult {
            solver_name: name.name().into(),
            seed: self.seeds.root(),
            fitness_mode: self.config.fitness_mode,
            best,
            best_objective: best_value,
            history,
            evaluation_trace,
            evaluations,
            wall_time: start.elapsed().as_secs_f64(),
        })
    }
}

fn engine<'a>(beta: &'a FadingTensor, config: &'a GaConfig, islands: Islands) -> Engine<'a> {
    Engine {
        beta,
        config,
        model: SeModel::default(),
        seeds: SeedTree::new(config.seed),
        islands,
    }
}

/// Plain elitist GA: roulette selection, PMX crossover, swap mutation, run
/// for exactly `T` generations.
pub fn solve_ga(beta: &FadingTensor, config: &GaConfig) -> Result<SolveResult> {
    engine(beta, config, Islands::Single).run(SolverKind::Ga, &[])
}

/// [`solve_ga`] with the first individuals of the initial population replaced
/// by `initial` (canonicalized).
pub fn solve_ga_from(beta: &FadingTensor, config: &GaConfig, initial: &[PilotAssignment]) -> Result<SolveResult> {
    engine(beta, config, Islands::Single).run(SolverKind::Ga, initial)
}

/// Sequential k-means island GA.
pub fn solve_sk_ga(beta: &FadingTensor, config: &GaConfig) -> Result<SolveResult> {
    engine(beta, config, Islands::Clustered { workers: None }).run(SolverKind::SkGa, &[])
}

/// Parallel k-means island GA on up to `min(C, parallelism)` worker threads.
/// Returns the same assignment and history as [`solve_sk_ga`] for every
/// `parallelism`.
pub fn solve_pk_ga(beta: &FadingTensor, config: &GaConfig, parallelism: usize) -> Result<SolveResult> {
    if parallelism == 0 {
        return Err(Error::InvalidConfig("parallelism must be at least 1".into()));
    }
    engine(beta, config, Islands::Clustered { workers: Some(parallelism) }).run(SolverKind::PkGa, &[])
}

/// Solver choice plus everything it needs besides the tensor and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSpec {
    pub solver: SolverKind,
    #[serde(default)]
    pub config: GaConfig,
    #[serde(default = "one")]
    pub parallelism: usize,
    #[serde(default = "default_expa_limit")]
    pub expa_limit: u64,
}

fn one() -> usize {
    1
}

fn default_expa_limit() -> u64 {
    DEFAULT_EXPA_LIMIT
}

impl SolverSpec {
    pub fn new(solver: SolverKind) -> Self {
        Self {
            solver,
            config: GaConfig::default(),
            parallelism: 1,
            expa_limit: DEFAULT_EXPA_LIMIT,
        }
    }

    /// Runs the solver with `seed` replacing the configured seed.
    pub fn solve(&self, beta: &FadingTensor, seed: u64) -> Result<SolveResult> {
        let config = GaConfig {
            seed,
            ..self.config.clone()
        };
        match self.solver {
            SolverKind::Rpa => Ok(solve_rpa(beta, seed)),
            SolverKind::Expa => solve_expa(beta, self.expa_limit).map(|r| SolveResult { seed, ..r }),
            SolverKind::Ga => solve_ga(beta, &config),
            SolverKind::SkGa => solve_sk_ga(beta, &config),
            SolverKind::PkGa => solve_pk_ga(beta, &config, self.parallelism),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::objective;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_tensor(l: usize, k: usize, seed: u64) -> FadingTensor {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        FadingTensor::from_fn(l, k, |i, j, _| if i == j { r.random_range(0.2..1.0) } else { r.random_range(0.001..0.3) })
            .unwrap()
    }

    /// Independent optimum: recursive enumeration of every row permutation
    /// (including row 0) through Heap's algorithm.
    fn brute_force_optimum(beta: &FadingTensor) -> f64 {
        fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if k <= 1 {
                out.push(a.clone());
                return;
            }
            for i in 0..k - 1 {
                heap(k - 1, a, out);
                if k % 2 == 1 { a.swap(0, k - 1) } else { a.swap(i, k - 1) }
            }
            heap(k - 1, a, out);
        }
        let mut perms = Vec::new();
        heap(beta.users(), &mut (0..beta.users()).collect(), &mut perms);
        let mut best = f64::NEG_INFINITY;
        let mut rows = vec![0usize; beta.cells()];
        loop {
            let a = PilotAssignment::from_rows(rows.iter().map(|&r| perms[r].clone()).collect()).unwrap();
            best = best.max(objective(beta, &a).unwrap());
            let mut i = 0;
            while i < rows.len() {
                rows[i] += 1;
                if rows[i] < perms.len() {
                    break;
                }
                rows[i] = 0;
                i += 1;
            }
            if i == rows.len() {
                return best;
            }
        }
    }

    fn small_config(seed: u64) -> GaConfig {
        GaConfig {
            population_size: 30,
            generations: 30,
            seed,
            ..GaConfig::default()
        }
    }

    #[test]
    fn parse_solver_names() {
        for k in SolverKind::ALL {
            assert_eq!(k.name().parse::<SolverKind>().unwrap(), k);
        }
        assert!("tabu".parse::<SolverKind>().is_err());
    }

    #[test]
    fn permutations_in_order() {
        let mut p = vec![0, 1, 2];
        let mut all = vec![p.clone()];
        while next_permutation(&mut p) {
            all.push(p.clone());
        }
        assert_eq!(all, vec![vec![0, 1, 2], vec![0, 2, 1], vec![1, 0, 2], vec![1, 2, 0], vec![2, 0, 1], vec![2, 1, 0]]);
    }

    #[test]
    fn rpa_single_cell_and_determinism() {
        let t = random_tensor(1, 4, 1);
        let r = solve_rpa(&t, 3);
        assert_eq!(r.best, PilotAssignment::identity(1, 4));
        assert_eq!(r.best_objective, 4.0 * 30.0);
        let t = random_tensor(3, 4, 2);
        assert!(solve_rpa(&t, 9).same_outcome(&solve_rpa(&t, 9)));
    }

    #[test]
    fn rpa_mean_below_optimum() {
        let t = random_tensor(2, 3, 3);
        let opt = brute_force_optimum(&t);
        let mean = (0..100).map(|s| solve_rpa(&t, s).best_objective).sum::<f64>() / 100.0;
        assert!(mean <= opt);
    }

    #[test]
    fn expa_counts() {
        assert_eq!(solve_expa(&random_tensor(2, 2, 4), 10).unwrap().evaluations, 2);
        assert_eq!(solve_expa(&random_tensor(3, 3, 5), 100).unwrap().evaluations, 36);
        assert_eq!(solve_expa(&random_tensor(1, 5, 5), 100).unwrap().evaluations, 1);
        assert!(matches!(solve_expa(&random_tensor(3, 3, 5), 35), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn expa_on_crafted_tensor() {
        let vals = [[[1.0, 0.8], [0.5, 0.1]], [[0.3, 0.2], [1.0, 1.0]]];
        let t = FadingTensor::from_fn(2, 2, |i, j, k| vals[i][j][k]).unwrap();
        let identity = objective(&t, &PilotAssignment::identity(2, 2)).unwrap();
        let swapped_assignment = PilotAssignment::from_rows(vec![vec![0, 1], vec![1, 0]]).unwrap();
        let swapped = objective(&t, &swapped_assignment).unwrap();
        let r = solve_expa(&t, 100).unwrap();
        assert_eq!(r.best_objective, identity.max(swapped));
        // user 0 of cell 0 (strongest own gain) pairs with the user of cell 1
        // that it hears weakest (0.1)
        assert_eq!(r.best, swapped_assignment);
    }

    #[test]
    fn expa_tie_break_is_lexicographic() {
        let t = FadingTensor::from_vec(2, 3, vec![0.5; 12]).unwrap();
        let r = solve_expa(&t, 100).unwrap();
        assert_eq!(r.best, PilotAssignment::identity(2, 3));
    }

    #[test]
    fn expa_matches_independent_enumeration() {
        for seed in 0..5 {
            let t = random_tensor(3, 3, 100 + seed);
            let r = solve_expa(&t, 1000).unwrap();
            assert!((r.best_objective - brute_force_optimum(&t)).abs() < 1e-12);
        }
    }

    #[test]
    fn ga_zero_generations_is_best_initial() {
        let t = random_tensor(4, 5, 6);
        let c = GaConfig { generations: 0, ..small_config(1) };
        let r = solve_ga(&t, &c).unwrap();
        assert_eq!(r.history.len(), 1);
        assert_eq!(r.evaluations, 30);
        let mut rng = SeedTree::new(1).stream(Stream::Init, &[]);
        let best_initial = (0..30)
            .map(|_| objective(&t, &random_assignment(4, 5, &mut rng)).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(r.best_objective, best_initial);
    }

    #[test]
    fn ga_finds_small_optimum() {
        let t = random_tensor(2, 3, 7);
        let opt = brute_force_optimum(&t);
        let hits = (0..10)
            .filter(|&s| (solve_ga(&t, &small_config(s)).unwrap().best_objective - opt).abs() <= 1e-9 * opt)
            .count();
        assert!(hits >= 9, "{hits}");
    }

    #[test]
    fn sk_ga_finds_small_optimum() {
        let t = random_tensor(2, 3, 8);
        let opt = brute_force_optimum(&t);
        let hits = (0..10)
            .filter(|&s| (solve_sk_ga(&t, &small_config(s)).unwrap().best_objective - opt).abs() <= 1e-9 * opt)
            .count();
        assert!(hits >= 9, "{hits}");
    }

    #[test]
    fn histories_are_monotone_and_accounted() {
        let t = random_tensor(5, 6, 9);
        for s in 0..5 {
            let c = GaConfig { population_size: 40, generations: 15, ..small_config(s) };
            for r in [solve_ga(&t, &c).unwrap(), solve_sk_ga(&t, &c).unwrap(), solve_pk_ga(&t, &c, 3).unwrap()] {
                assert!(r.history.windows(2).all(|w| w[1] >= w[0]), "{}", r.solver_name);
                assert_eq!(r.evaluations, 40 * 16);
                assert_eq!(r.best_objective, *r.history.last().unwrap());
                assert!(r.best.is_canonical());
                assert_eq!(objective(&t, &r.best).unwrap(), r.best_objective);
            }
        }
    }

    #[test]
    fn single_island_equals_plain_ga() {
        let t = random_tensor(4, 6, 10);
        let c = GaConfig { cluster_count: 1, ..small_config(11) };
        assert!(solve_sk_ga(&t, &c).unwrap().same_outcome(&solve_ga(&t, &c).unwrap()));
    }

    #[test]
    fn parallel_matches_sequential() {
        let t = random_tensor(6, 8, 12);
        let c = GaConfig { population_size: 60, generations: 12, ..small_config(13) };
        let sk = solve_sk_ga(&t, &c).unwrap();
        for p in [1, 2, 5, 8] {
            assert!(solve_pk_ga(&t, &c, p).unwrap().same_outcome(&sk), "P={p}");
        }
        assert!(solve_pk_ga(&t, &c, 0).is_err());
    }

    #[test]
    fn ga_dominates_injected_rpa() {
        let t = random_tensor(4, 5, 14);
        for s in 0..10 {
            let rpa = solve_rpa(&t, s);
            let ga = solve_ga_from(&t, &small_config(s), std::slice::from_ref(&rpa.best)).unwrap();
            assert!(ga.best_objective >= rpa.best_objective);
        }
    }

    #[test]
    fn interference_mode_minimizes_interference() {
        let t = random_tensor(4, 5, 15);
        let c = GaConfig { fitness_mode: FitnessMode::Interference, ..small_config(16) };
        let r = solve_sk_ga(&t, &c).unwrap();
        let i = crate::metrics::copilot_interference(&t, &r.best).unwrap();
        assert_eq!(r.best_objective, -i);
        let random = crate::metrics::copilot_interference(&t, &solve_rpa(&t, 16).best).unwrap();
        assert!(i <= random);
    }

    #[test]
    fn too_many_clusters_rejected() {
        let t = random_tensor(2, 3, 17);
        let c = GaConfig { population_size: 4, cluster_count: 5, elite_count: 1, ..small_config(0) };
        assert!(solve_sk_ga(&t, &c).is_err());
    }

    #[test]
    fn evaluations_to_target() {
        let r = SolveResult {
            solver_name: "ga".into(),
            seed: 0,
            fitness_mode: FitnessMode::SumSe,
            best: PilotAssignment::identity(1, 1),
            best_objective: 100.0,
            history: vec![90.0, 98.5, 99.2, 100.0],
            evaluation_trace: vec![10, 20, 30, 40],
            evaluations: 40,
            wall_time: 0.0,
        };
        assert_eq!(r.evaluations_to_within(0.01), 30);
        assert_eq!(r.evaluations_to_within(0.02), 20);
        assert_eq!(r.evaluations_to_within(0.0), 40);
        let mut buf = Vec::new();
        r.write_history_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("generation,best_objective\n0,90\n1,98.5\n"));
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<SolveResult>(&json).unwrap(), r);
    }
}
