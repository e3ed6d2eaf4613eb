//! Pilot-assignment chromosomes and permutation-preserving genetic operators.

use std::fmt;
use std::io::{BufRead, Write};

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `L x K` matrix; `pilot_of(j, u)` is the pilot index used by user `u` of
/// cell `j`. Every row is a permutation of `0..K`.
///
/// The canonical form has row 0 equal to the identity. Solvers and operators
/// only produce canonical assignments; arbitrary valid assignments can still
/// be built with [`PilotAssignment::from_rows`] and brought to canonical
/// form with [`PilotAssignment::canonicalize`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<usize>>", try_from = "Vec<Vec<usize>>")]
pub struct PilotAssignment {
    cells: usize,
    pilots: usize,
    genes: Vec<usize>,
}

fn is_permutation(row: &[usize]) -> bool {
    let mut seen = vec![false; row.len()];
    row.iter().all(|&p| p < seen.len() && !std::mem::replace(&mut seen[p], true))
}

impl PilotAssignment {
    pub fn identity(cells: usize, pilots: usize) -> Self {
        Self {
            cells,
            pilots,
            genes: (0..cells).flat_map(|_| 0..pilots).collect(),
        }
    }

    pub fn from_rows(rows: Vec<Vec<usize>>) -> Result<Self> {
        let cells = rows.len();
        let pilots = rows.first().map_or(0, Vec::len);
        if cells == 0 || pilots == 0 {
            return Err(Error::ShapeMismatch {
                expected: "at least one non-empty row".into(),
                actual: format!("{cells} rows of {pilots}"),
            });
        }
        let mut genes = Vec::with_capacity(cells * pilots);
        for (j, row) in rows.into_iter().enumerate() {
            if row.len() != pilots || !is_permutation(&row) {
                return Err(Error::NotAPermutation { row: j, pilots });
            }
            genes.extend(row);
        }
        Ok(Self { cells, pilots, genes })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn pilots(&self) -> usize {
        self.pilots
    }

    #[inline]
    pub fn row(&self, cell: usize) -> &[usize] {
        &self.genes[cell * self.pilots..(cell + 1) * self.pilots]
    }

    pub(crate) fn row_mut(&mut self, cell: usize) -> &mut [usize] {
        &mut self.genes[cell * self.pilots..(cell + 1) * self.pilots]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[usize]> {
        self.genes.chunks(self.pilots)
    }

    pub fn to_rows(&self) -> Vec<Vec<usize>> {
        self.rows().map(<[usize]>::to_vec).collect()
    }

    #[inline]
    pub fn pilot_of(&self, cell: usize, user: usize) -> usize {
        self.genes[cell * self.pilots + user]
    }

    /// Pilot-major view: entry `p` of row `j` is the user of cell `j` holding
    /// pilot `p`.
    pub fn users_by_pilot(&self) -> Vec<usize> {
        let mut inv = vec![0; self.genes.len()];
        for j in 0..self.cells {
            for (u, &p) in self.row(j).iter().enumerate() {
                inv[j * self.pilots + p] = u;
            }
        }
        inv
    }

    pub fn user_with_pilot(&self, cell: usize, pilot: usize) -> Option<usize> {
        self.row(cell).iter().position(|&p| p == pilot)
    }

    pub fn check_shape(&self, cells: usize, pilots: usize) -> Result<()> {
        if self.cells != cells || self.pilots != pilots {
            return Err(Error::ShapeMismatch {
                expected: format!("{cells}x{pilots} assignment"),
                actual: format!("{}x{}", self.cells, self.pilots),
            });
        }
        Ok(())
    }

    pub fn is_valid(&self) -> bool {
        self.genes.len() == self.cells * self.pilots && self.rows().all(is_permutation)
    }

    pub fn is_canonical(&self) -> bool {
        self.row(0).iter().enumerate().all(|(u, &p)| u == p)
    }

    /// Applies the pilot relabeling `p -> relabel[p]` to every row.
    pub fn relabeled(&self, relabel: &[usize]) -> Self {
        assert_eq!(relabel.len(), self.pilots);
        Self {
            genes: self.genes.iter().map(|&p| relabel[p]).collect(),
            ..self.clone()
        }
    }

    /// The unique relabeling of this assignment whose row 0 is the identity.
    pub fn canonicalize(&self) -> Self {
        let mut relabel = vec![0; self.pilots];
        for (u, &p) in self.row(0).iter().enumerate() {
            relabel[p] = u;
        }
        self.relabeled(&relabel)
    }

    /// One row per cell, comma-separated pilot indices.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(usize::to_string).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut rows = Vec::new();
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|f| f.trim().parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse(format!("{line:?}: {e}")))?;
            rows.push(row);
        }
        Self::from_rows(rows)
    }
}

impl fmt::Display for PilotAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(usize::to_string).collect();
            writeln!(f, "{}", line.join(","))?;
        }
        Ok(())
    }
}

impl From<PilotAssignment> for Vec<Vec<usize>> {
    fn from(a: PilotAssignment) -> Self {
        a.to_rows()
    }
}

impl TryFrom<Vec<Vec<usize>>> for PilotAssignment {
    type Error = Error;

    fn try_from(rows: Vec<Vec<usize>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

/// Which quantity the genetic solvers maximize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FitnessMode {
    /// Asymptotic sum spectral efficiency.
    #[default]
    #[serde(rename = "sumse")]
    SumSe,
    /// Negated co-pilot cluster interference.
    #[serde(rename = "interference")]
    Interference,
}

/// Evolutionary hyperparameters. Defaults follow the reference setup:
/// N = 120, T = 20, p_c = 0.9, p_m = 0.02, C = 5, re-clustering every 3
/// generations, and two elites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub elite_count: usize,
    pub cluster_count: usize,
    pub recluster_period: usize,
    pub fitness_mode: FitnessMode,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 120,
            generations: 20,
            crossover_prob: 0.9,
            mutation_prob: 0.02,
            elite_count: 2,
            cluster_count: 5,
            recluster_period: 3,
            fitness_mode: FitnessMode::SumSe,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let n = self.population_size;
        if !(0.0..=1.0).contains(&self.crossover_prob) {
            return bad(format!("crossover_prob {} outside [0, 1]", self.crossover_prob));
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return bad(format!("mutation_prob {} outside [0, 1]", self.mutation_prob));
        }
        if self.elite_count < 1 || self.elite_count >= n {
            return bad(format!(
                "elite_count {} must satisfy 1 <= E < N = {n}",
                self.elite_count
            ));
        }
        if self.cluster_count < 1 || self.cluster_count > n {
            return bad(format!(
                "cluster_count {} must satisfy 1 <= C <= N = {n}",
                self.cluster_count
            ));
        }
        if self.recluster_period < 1 {
            return bad("recluster_period must be at least 1".into());
        }
        Ok(())
    }
}

/// Row 0 identity, rows `1..L` independent uniform permutations.
pub fn random_assignment<R: Rng + ?Sized>(cells: usize, pilots: usize, rng: &mut R) -> PilotAssignment {
    let mut a = PilotAssignment::identity(cells, pilots);
    for j in 1..cells {
        a.row_mut(j).shuffle(rng);
    }
    a
}

/// `(K!)^(L-1)`, the number of canonical assignments.
pub fn search_space_size(cells: usize, pilots: usize) -> BigUint {
    let factorial = (1..=pilots as u64).fold(BigUint::from(1u32), |acc, v| acc * v);
    let exp = u32::try_from(cells.saturating_sub(1)).expect("cell count fits in u32");
    factorial.pow(exp)
}

/// Partially-mapped crossover of one row pair. Child 1 keeps `p1[lo..hi]` and
/// takes the remaining genes from `p2`, resolving duplicates through the
/// segment mapping; child 2 is the mirror image.
pub fn pmx_row(p1: &[usize], p2: &[usize], lo: usize, hi: usize) -> (Vec<usize>, Vec<usize>) {
    (pmx_child(p1, p2, lo, hi), pmx_child(p2, p1, lo, hi))
}

fn pmx_child(keep: &[usize], other: &[usize], lo: usize, hi: usize) -> Vec<usize> {
    let n = keep.len();
    // position of each value inside the kept segment, if any
    let mut seg_pos = vec![usize::MAX; n];
    for (pos, &v) in keep.iter().enumerate().take(hi).skip(lo) {
        seg_pos[v] = pos;
    }
    let mut child = other.to_vec();
    child[lo..hi].copy_from_slice(&keep[lo..hi]);
    for pos in (0..lo).chain(hi..n) {
        let mut v = other[pos];
        while seg_pos[v] != usize::MAX {
            v = other[seg_pos[v]];
        }
        child[pos] = v;
    }
    child
}

/// PMX on every non-canonical row: each row pair is crossed independently
/// with probability `p_c`, using a fresh non-empty segment `[lo, hi)`.
pub fn pmx_crossover<R: Rng + ?Sized>(
    a: &PilotAssignment,
    b: &PilotAssignment,
    p_c: f64,
    rng: &mut R,
) -> Result<(PilotAssignment, PilotAssignment)> {
    b.check_shape(a.cells, a.pilots)?;
    let (mut c1, mut c2) = (a.clone(), b.clone());
    let k = a.pilots;
    for j in 1..a.cells {
        if !rng.random_bool(p_c) {
            continue;
        }
        let lo = rng.random_range(0..k);
        let hi = rng.random_range(lo + 1..=k);
        let (r1, r2) = pmx_row(a.row(j), b.row(j), lo, hi);
        c1.row_mut(j).copy_from_slice(&r1);
        c2.row_mut(j).copy_from_slice(&r2);
    }
    Ok((c1, c2))
}

/// In-place swap mutation of rows `1..L`; returns the number of swaps.
pub fn swap_mutate<R: Rng + ?Sized>(x: &mut PilotAssignment, p_m: f64, rng: &mut R) -> usize {
    let k = x.pilots;
    if k < 2 || p_m <= 0.0 {
        return 0;
    }
    let mut swaps = 0;
    for j in 1..x.cells {
        let row = x.row_mut(j);
        for g in 0..k {
            if rng.random_bool(p_m) {
                // uniform over the other k - 1 positions
                let mut other = rng.random_range(0..k - 1);
                if other >= g {
                    other += 1;
                }
                row.swap(g, other);
                swaps += 1;
            }
        }
    }
    swaps
}

pub fn swap_mutation<R: Rng + ?Sized>(x: &PilotAssignment, p_m: f64, rng: &mut R) -> PilotAssignment {
    let mut y = x.clone();
    swap_mutate(&mut y, p_m, rng);
    y
}

/// Fitness-proportionate sampling of `count` indices, with replacement.
///
/// Weights are `fitness - min + delta` with `delta = 1e-9 * (max - min)`, so
/// the worst individual keeps a tiny non-zero chance. Equal fitness gives a
/// uniform wheel.
pub fn roulette_select<R: Rng + ?Sized>(fitness: &[f64], count: usize, rng: &mut R) -> Result<Vec<usize>> {
    if fitness.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    if let Some(&bad) = fitness.iter().find(|f| !f.is_finite()) {
        return Err(Error::NonFiniteFitness(bad));
    }
    let (min, max) = fitness
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &f| (lo.min(f), hi.max(f)));
    let range = max - min;
    if range <= 0.0 {
        return Ok((0..count).map(|_| rng.random_range(0..fitness.len())).collect());
    }
    let delta = 1e-9 * range;
    let mut total = 0.0;
    let cumulative: Vec<f64> = fitness
        .iter()
        .map(|f| {
            total += f - min + delta;
            total
        })
        .collect();
    let last = fitness.len() - 1;
    Ok((0..count)
        .map(|_| {
            let u = rng.random::<f64>() * total;
            cumulative.partition_point(|&c| c <= u).min(last)
        })
        .collect())
}
