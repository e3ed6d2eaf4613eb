//! Quality measures for pilot assignments.
//!
//! Users are addressed by `(cell, pilot)`: under an assignment, the user of
//! cell `i` holding pilot `p` is contaminated by the users of every other cell
//! holding the same pilot. As the antenna count grows the uplink SINR of that
//! user tends to
//!
//! ```text
//! beta[i][i][u]^2 / sum_{j != i} beta[i][j][v_j]^2
//! ```
//!
//! where `u` and `v_j` are the co-pilot users. Spectral efficiency is
//! `log2(1 + SINR)` and the solvers maximize its sum over all users.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::{FitnessMode, PilotAssignment};
use crate::error::{Error, Result};
use crate::topology::{small_scale_fading, FadingTensor};

/// SE reported for a user with no co-pilot interferers (single cell).
pub const DEFAULT_SE_CAP: f64 = 30.0;

fn check_indices(beta: &FadingTensor, assignment: &PilotAssignment, cell: usize, pilot: usize) -> Result<()> {
    assignment.check_shape(beta.cells(), beta.users())?;
    if cell >= beta.cells() {
        return Err(Error::IndexOutOfRange {
            what: "cell",
            index: cell,
            limit: beta.cells(),
        });
    }
    if pilot >= beta.users() {
        return Err(Error::IndexOutOfRange {
            what: "pilot",
            index: pilot,
            limit: beta.users(),
        });
    }
    Ok(())
}

/// Own and interference powers for `(cell, pilot)` given the pilot-major
/// inverse of the assignment.
#[inline]
fn powers(beta: &FadingTensor, by_pilot: &[usize], cell: usize, pilot: usize) -> (f64, f64) {
    let (l, k) = (beta.cells(), beta.users());
    let own = beta.get(cell, cell, by_pilot[cell * k + pilot]);
    let mut interference = 0.0;
    for j in (0..l).filter(|&j| j != cell) {
        let b = beta.get(cell, j, by_pilot[j * k + pilot]);
        interference += b * b;
    }
    (own * own, interference)
}

#[inline]
fn ratio(signal: f64, interference: f64) -> f64 {
    if interference == 0.0 {
        f64::INFINITY
    } else {
        signal / interference
    }
}

/// Large-antenna SINR of the user of `cell` on `pilot`; `f64::INFINITY` when
/// nobody else shares the pilot.
pub fn asymptotic_sinr(beta: &FadingTensor, assignment: &PilotAssignment, cell: usize, pilot: usize) -> Result<f64> {
    check_indices(beta, assignment, cell, pilot)?;
    let (s, i) = powers(beta, &assignment.users_by_pilot(), cell, pilot);
    Ok(ratio(s, i))
}

/// Spectral-efficiency model. The only knob is the value substituted for
/// `log2(1 + inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeModel {
    pub se_cap: f64,
}

impl Default for SeModel {
    fn default() -> Self {
        Self {
            se_cap: DEFAULT_SE_CAP,
        }
    }
}

impl SeModel {
    pub fn se_from_sinr(&self, sinr: f64) -> f64 {
        if sinr.is_infinite() {
            self.se_cap
        } else {
            (1.0 + sinr).log2()
        }
    }

    pub fn user_se(&self, beta: &FadingTensor, assignment: &PilotAssignment, cell: usize, pilot: usize) -> Result<f64> {
        asymptotic_sinr(beta, assignment, cell, pilot).map(|s| self.se_from_sinr(s))
    }

    pub fn sum_se(&self, beta: &FadingTensor, assignment: &PilotAssignment) -> Result<SeReport> {
        assignment.check_shape(beta.cells(), beta.users())?;
        let by_pilot = assignment.users_by_pilot();
        let k = beta.users();
        let mut entries = Vec::with_capacity(beta.cells() * k);
        let mut total = 0.0;
        for cell in 0..beta.cells() {
            for pilot in 0..k {
                let (s, i) = powers(beta, &by_pilot, cell, pilot);
                let se = self.se_from_sinr(ratio(s, i));
                total += se;
                entries.push(UserSe {
                    cell,
                    pilot,
                    user: by_pilot[cell * k + pilot],
                    se,
                });
            }
        }
        Ok(SeReport {
            cells: beta.cells(),
            users: k,
            entries,
            sum_se: total,
        })
    }

    /// Sum SE; the quantity every solver maximizes in the default mode.
    /// Accumulates in the same order as [`SeModel::sum_se`], so the two agree
    /// bit for bit.
    pub fn objective(&self, beta: &FadingTensor, assignment: &PilotAssignment) -> Result<f64> {
        assignment.check_shape(beta.cells(), beta.users())?;
        Ok(self.objective_unchecked(beta, assignment))
    }

    pub(crate) fn objective_unchecked(&self, beta: &FadingTensor, assignment: &PilotAssignment) -> f64 {
        let by_pilot = assignment.users_by_pilot();
        let mut total = 0.0;
        for cell in 0..beta.cells() {
            for pilot in 0..beta.users() {
                let (s, i) = powers(beta, &by_pilot, cell, pilot);
                total += self.se_from_sinr(ratio(s, i));
            }
        }
        total
    }

    /// Value maximized by the genetic solvers for the given mode.
    pub fn fitness(&self, mode: FitnessMode, beta: &FadingTensor, assignment: &PilotAssignment) -> f64 {
        match mode {
            FitnessMode::SumSe => self.objective_unchecked(beta, assignment),
            FitnessMode::Interference => -copilot_interference_unchecked(beta, assignment),
        }
    }
}

pub fn user_se(beta: &FadingTensor, assignment: &PilotAssignment, cell: usize, pilot: usize) -> Result<f64> {
    SeModel::default().user_se(beta, assignment, cell, pilot)
}

pub fn sum_se(beta: &FadingTensor, assignment: &PilotAssignment) -> Result<SeReport> {
    SeModel::default().sum_se(beta, assignment)
}

pub fn objective(beta: &FadingTensor, assignment: &PilotAssignment) -> Result<f64> {
    SeModel::default().objective(beta, assignment)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserSe {
    pub cell: usize,
    pub pilot: usize,
    pub user: usize,
    pub se: f64,
}

/// Per-user spectral efficiency (bits/s/Hz) and the total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeReport {
    pub cells: usize,
    pub users: usize,
    /// One entry per `(cell, pilot)`, cell-major.
    pub entries: Vec<UserSe>,
    pub sum_se: f64,
}

impl SeReport {
    /// `L x K` matrix indexed `[cell][user]`.
    pub fn per_user_se(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.users]; self.cells];
        for e in &self.entries {
            m[e.cell][e.user] = e.se;
        }
        m
    }

    /// Rows `cell,pilot,user,se`, then a `sum,,,<total>` footer.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "cell,pilot,user,se")?;
        for e in &self.entries {
            writeln!(out, "{},{},{},{}", e.cell, e.pilot, e.user, e.se)?;
        }
        writeln!(out, "sum,,,{}", self.sum_se)?;
        Ok(())
    }
}

/// Monte-Carlo estimate of the finite-antenna uplink SINR,
///
/// ```text
/// |h_s^H h_s|^2 / (sum_l |h_l^H h_l|^2 + noise * M^2)
/// ```
///
/// averaged over `trials` fresh draws of `h = g * sqrt(beta)`. The `M^2`
/// normalization of the noise term makes the estimate converge to
/// [`asymptotic_sinr`] as `M` grows.
#[allow(clippy::too_many_arguments)]
pub fn finite_m_sinr<R: Rng + ?Sized>(
    beta: &FadingTensor,
    assignment: &PilotAssignment,
    cell: usize,
    pilot: usize,
    antennas: usize,
    noise_power: f64,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    check_indices(beta, assignment, cell, pilot)?;
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    if antennas == 0 {
        return Err(Error::InvalidScenario("M must be at least 1".into()));
    }
    let by_pilot = assignment.users_by_pilot();
    let k = beta.users();
    let own = beta.get(cell, cell, by_pilot[cell * k + pilot]);
    let interferers: Vec<f64> = (0..beta.cells())
        .filter(|&j| j != cell)
        .map(|j| beta.get(cell, j, by_pilot[j * k + pilot]))
        .collect();
    let noise = noise_power * (antennas as f64).powi(2);
    if interferers.is_empty() && noise == 0.0 {
        return Ok(f64::INFINITY);
    }
    let mut acc = 0.0;
    for _ in 0..trials {
        let s = small_scale_fading(antennas, rng).scaled(own).norm_sqr();
        let i: f64 = interferers
            .iter()
            .map(|&b| small_scale_fading(antennas, rng).scaled(b).norm_sqr().powi(2))
            .sum();
        acc += s * s / (i + noise);
    }
    Ok(acc / trials as f64)
}

/// Users grouped into clusters; cluster ids are `0..C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserClustering {
    cluster_count: usize,
    /// `labels[cell][user]`
    labels: Vec<Vec<usize>>,
}

impl UserClustering {
    pub fn new(labels: Vec<Vec<usize>>, cluster_count: usize) -> Result<Self> {
        for (j, row) in labels.iter().enumerate() {
            if let Some(&c) = row.iter().find(|&&c| c >= cluster_count) {
                return Err(Error::IndexOutOfRange {
                    what: "cluster id",
                    index: c,
                    limit: cluster_count,
                });
            }
            if row.len() != labels[0].len() {
                return Err(Error::ShapeMismatch {
                    expected: format!("{} users in cell {j}", labels[0].len()),
                    actual: row.len().to_string(),
                });
            }
        }
        Ok(Self {
            cluster_count,
            labels,
        })
    }

    pub fn cluster_count(&self) -> usize {
        self.cluster_count
    }

    pub fn label(&self, cell: usize, user: usize) -> usize {
        self.labels[cell][user]
    }

    /// `(cell, user)` members of each cluster.
    pub fn members(&self) -> Vec<Vec<(usize, usize)>> {
        let mut m = vec![Vec::new(); self.cluster_count];
        for (j, row) in self.labels.iter().enumerate() {
            for (u, &c) in row.iter().enumerate() {
                m[c].push((j, u));
            }
        }
        m
    }
}

/// Pairwise cross-to-own interference between user clusters.
///
/// For every unordered pair `c < c'` with serving base stations `i` and `j`,
/// adds the ratio of the mean gain of `c'` to the mean gain of `c` at BS `i`,
/// plus the ratio of the mean gain of `c` to the mean gain of `c'` at BS `j`.
pub fn cluster_interference(beta: &FadingTensor, clustering: &UserClustering, serving: &[usize]) -> Result<f64> {
    let members = clustering.members();
    if serving.len() != members.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} serving base stations", members.len()),
            actual: serving.len().to_string(),
        });
    }
    if let Some(&bs) = serving.iter().find(|&&bs| bs >= beta.cells()) {
        return Err(Error::IndexOutOfRange {
            what: "serving BS",
            index: bs,
            limit: beta.cells(),
        });
    }
    if clustering.labels.len() != beta.cells()
        || clustering.labels.iter().any(|r| r.len() != beta.users())
    {
        return Err(Error::ShapeMismatch {
            expected: format!("{}x{} labels", beta.cells(), beta.users()),
            actual: format!("{} rows", clustering.labels.len()),
        });
    }
    if let Some(c) = members.iter().position(Vec::is_empty) {
        return Err(Error::EmptyCluster(c));
    }
    let mean_at = |bs: usize, c: usize| -> f64 {
        members[c].iter().map(|&(j, u)| beta.get(bs, j, u)).sum::<f64>() / members[c].len() as f64
    };
    let mut total = 0.0;
    for c in 0..members.len() {
        let i = serving[c];
        let own_c = mean_at(i, c);
        if own_c == 0.0 {
            return Err(Error::ZeroOwnSignal(c));
        }
        for (c2, &j) in serving.iter().enumerate().skip(c + 1) {
            let own_c2 = mean_at(j, c2);
            if own_c2 == 0.0 {
                return Err(Error::ZeroOwnSignal(c2));
            }
            total += (mean_at(i, c2) / own_c).abs() + (mean_at(j, c) / own_c2).abs();
        }
    }
    Ok(total)
}

/// Cluster interference summed over pilots, where the clusters for pilot `p`
/// are the `L` users sharing it, each served by its own cell's BS.
pub fn copilot_interference(beta: &FadingTensor, assignment: &PilotAssignment) -> Result<f64> {
    assignment.check_shape(beta.cells(), beta.users())?;
    Ok(copilot_interference_unchecked(beta, assignment))
}

fn copilot_interference_unchecked(beta: &FadingTensor, assignment: &PilotAssignment) -> f64 {
    let (l, k) = (beta.cells(), beta.users());
    let by_pilot = assignment.users_by_pilot();
    let mut total = 0.0;
    for p in 0..k {
        for a in 0..l {
            let ua = by_pilot[a * k + p];
            let own_a = beta.get(a, a, ua);
            for b in a + 1..l {
                let ub = by_pilot[b * k + p];
                total += beta.get(a, b, ub) / own_a + beta.get(b, a, ua) / beta.get(b, b, ub);
            }
        }
    }
    total
}
