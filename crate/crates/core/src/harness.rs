//! Experiment runner and CSV exports.
//!
//! An [`ExperimentSpec`] names a base scenario, a list of solvers, a list of
//! seeds and an optional `K x M` sweep. Each `(sweep point, seed)` pair gets
//! its own scenario realization (the seed drives both the scenario and the
//! solvers), and every solver runs on it once.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solvers::{SolveResult, SolverSpec};
use crate::topology::Scenario;

/// Relative distance to the final best used for the convergence proxy.
pub const CONVERGENCE_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    #[serde(rename = "K", default)]
    pub users: Vec<usize>,
    #[serde(rename = "M", default)]
    pub antennas: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    pub solvers: Vec<SolverSpec>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub outputs: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.solvers.is_empty() {
            return Err(Error::InvalidConfig("experiment needs at least one solver".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("experiment needs at least one seed".into()));
        }
        for s in self.scenarios(0) {
            s.validate()?;
        }
        for s in &self.solvers {
            if s.solver.is_genetic() {
                s.config.validate()?;
            }
            if s.parallelism == 0 {
                return Err(Error::InvalidConfig("parallelism must be at least 1".into()));
            }
        }
        Ok(())
    }

    /// `(K, M)` grid points, `K` outermost. Missing axes use the scenario's
    /// own value.
    pub fn sweep_points(&self) -> Vec<(usize, usize)> {
        let sweep = self.sweep.clone().unwrap_or_default();
        let ks = if sweep.users.is_empty() { vec![self.scenario.users] } else { sweep.users };
        let ms = if sweep.antennas.is_empty() { vec![self.scenario.antennas] } else { sweep.antennas };
        ks.iter().flat_map(|&k| ms.iter().map(move |&m| (k, m))).collect()
    }

    fn scenarios(&self, seed: u64) -> Vec<Scenario> {
        self.sweep_points()
            .into_iter()
            .map(|(k, m)| Scenario {
                users: k,
                antennas: m,
                tau_p: self.scenario.tau_p.max(k),
                seed,
                ..self.scenario.clone()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    /// Exhaustive search over a space larger than its limit.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub solver_name: String,
    pub seed: u64,
    #[serde(rename = "L")]
    pub cells: usize,
    #[serde(rename = "K")]
    pub users: usize,
    #[serde(rename = "M")]
    pub antennas: usize,
    #[serde(rename = "C")]
    pub clusters: usize,
    #[serde(rename = "N")]
    pub population: usize,
    #[serde(rename = "T")]
    pub generations: usize,
    pub status: RunStatus,
    pub best_objective: Option<f64>,
    pub wall_time: f64,
    pub evaluations: u64,
    /// Evaluations until within [`CONVERGENCE_FRACTION`] of the final best.
    pub convergence_evaluations: u64,
}

impl RunRecord {
    fn new(scenario: &Scenario, spec: &SolverSpec, seed: u64) -> Self {
        let (c, n, t) = if spec.solver.is_genetic() {
            (spec.config.cluster_count, spec.config.population_size, spec.config.generations)
        } else {
            (0, 0, 0)
        };
        Self {
            solver_name: spec.solver.name().into(),
            seed,
            cells: scenario.cells,
            users: scenario.users,
            antennas: scenario.antennas,
            clusters: c,
            population: n,
            generations: t,
            status: RunStatus::Skipped,
            best_objective: None,
            wall_time: 0.0,
            evaluations: 0,
            convergence_evaluations: 0,
        }
    }

    fn with_result(self, r: &SolveResult) -> Self {
        Self {
            status: RunStatus::Ok,
            best_objective: Some(r.best_objective),
            wall_time: r.wall_time,
            evaluations: r.evaluations,
            convergence_evaluations: r.evaluations_to_within(CONVERGENCE_FRACTION),
            ..self
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == RunStatus::Ok
    }

    /// Equality ignoring the wall time.
    pub fn same_outcome(&self, other: &RunRecord) -> bool {
        Self { wall_time: 0.0, ..self.clone() } == Self { wall_time: 0.0, ..other.clone() }
    }
}

fn run_point(spec: &ExperimentSpec, scenario: &Scenario) -> Result<Vec<RunRecord>> {
    let beta = scenario.realize()?.beta;
    spec.solvers
        .iter()
        .map(|s| {
            let record = RunRecord::new(scenario, s, scenario.seed);
            match s.solve(&beta, scenario.seed) {
                Ok(r) => Ok(record.with_result(&r)),
                Err(Error::Infeasible { .. }) => Ok(record),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Runs every solver at every sweep point and seed, sequentially.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<RunRecord>> {
    run_experiment_with(spec, false)
}

/// Like [`run_experiment`]; with `parallel` the `(sweep point, seed)` pairs
/// run concurrently. Records come back in the same order either way.
pub fn run_experiment_with(spec: &ExperimentSpec, parallel: bool) -> Result<Vec<RunRecord>> {
    spec.validate()?;
    let jobs: Vec<Scenario> = spec.scenarios(0).into_iter().flat_map(|s| {
        spec.seeds.iter().map(move |&seed| Scenario { seed, ..s.clone() })
    }).collect();
    let chunks: Vec<Vec<RunRecord>> = if parallel {
        jobs.par_iter().map(|s| run_point(spec, s)).collect::<Result<_>>()?
    } else {
        jobs.iter().map(|s| run_point(spec, s)).collect::<Result<_>>()?
    };
    Ok(chunks.concat())
}

pub fn write_records_csv<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<RunRecord>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(Error::from)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub solver: String,
    pub value: f64,
    pub cdf: f64,
}

/// Solver names in order of first appearance.
fn solver_order(records: &[RunRecord]) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for r in records {
        if !names.contains(&r.solver_name) {
            names.push(r.solver_name.clone());
        }
    }
    names
}

/// Empirical CDF of best objectives per solver: sorted values with levels
/// `i / n`. Skipped records are ignored.
pub fn export_cdf(records: &[RunRecord]) -> Result<Vec<CdfPoint>> {
    let mut points = Vec::new();
    for solver in solver_order(records) {
        let mut values: Vec<f64> = records
            .iter()
            .filter(|r| r.solver_name == solver)
            .filter_map(|r| r.best_objective)
            .collect();
        if values.len() < 2 {
            return Err(Error::InsufficientSamples {
                solver,
                samples: values.len(),
            });
        }
        values.sort_by(f64::total_cmp);
        let n = values.len() as f64;
        points.extend(values.into_iter().enumerate().map(|(i, value)| CdfPoint {
            solver: solver.clone(),
            value,
            cdf: (i + 1) as f64 / n,
        }));
    }
    Ok(points)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub solver: String,
    #[serde(rename = "M")]
    pub antennas: usize,
    #[serde(rename = "K")]
    pub users: usize,
    pub median_wall_time: f64,
    pub median_evaluations: f64,
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    match n {
        0 => f64::NAN,
        _ if n % 2 == 1 => values[n / 2],
        _ => 0.5 * (values[n / 2 - 1] + values[n / 2]),
    }
}

/// Median wall time and evaluations per `(solver, M, K)` over seeds. Points
/// where a solver was skipped produce no row.
pub fn export_scaling(records: &[RunRecord]) -> Vec<ScalingRow> {
    let order = solver_order(records);
    let mut groups: BTreeMap<(usize, usize, usize), Vec<&RunRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.is_ok()) {
        let s = order.iter().position(|n| *n == r.solver_name).expect("solver listed");
        groups.entry((s, r.antennas, r.users)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((s, m, k), rs)| ScalingRow {
            solver: order[s].clone(),
            antennas: m,
            users: k,
            median_wall_time: median(&mut rs.iter().map(|r| r.wall_time).collect::<Vec<_>>()),
            median_evaluations: median(&mut rs.iter().map(|r| r.evaluations as f64).collect::<Vec<_>>()),
        })
        .collect()
}

pub fn write_csv_rows<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv_rows<T: serde::de::DeserializeOwned, R: Read>(input: R) -> Result<Vec<T>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(Error::from)
}

/// Records with at least two successful runs per solver, so a CDF exists.
pub fn cdf_eligible(records: &[RunRecord]) -> Vec<RunRecord> {
    let names = solver_order(records);
    let keep: Vec<&String> = names
        .iter()
        .filter(|n| records.iter().filter(|r| &r.solver_name == *n && r.is_ok()).count() >= 2)
        .collect();
    records
        .iter()
        .filter(|r| r.is_ok() && keep.contains(&&r.solver_name))
        .cloned()
        .collect()
}

/// Writes `records.csv`, `cdf.csv` and `scaling.csv` into `dir`. Solvers with
/// fewer than two successful runs are left out of the CDF.
pub fn write_outputs(dir: &Path, records: &[RunRecord]) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_records_csv(records, fs::File::create(dir.join("records.csv"))?)?;
    write_csv_rows(&export_cdf(&cdf_eligible(records))?, fs::File::create(dir.join("cdf.csv"))?)?;
    write_csv_rows(&export_scaling(records), fs::File::create(dir.join("scaling.csv"))?)?;
    Ok(())
}

/// Decimal rendering with `digits` significant digits.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::SolverKind;
    use crate::GaConfig;

    fn record(solver: &str, value: f64) -> RunRecord {
        RunRecord {
            solver_name: solver.into(),
            seed: 0,
            cells: 2,
            users: 3,
            antennas: 64,
            clusters: 0,
            population: 0,
            generations: 0,
            status: RunStatus::Ok,
            best_objective: Some(value),
            wall_time: 0.5,
            evaluations: 1,
            convergence_evaluations: 1,
        }
    }

    fn small_spec(solvers: Vec<SolverSpec>, seeds: Vec<u64>) -> ExperimentSpec {
        ExperimentSpec {
            scenario: Scenario::new(3, 4, 64, 0),
            solvers,
            seeds,
            sweep: None,
            outputs: None,
        }
    }

    fn quick_ga(kind: SolverKind) -> SolverSpec {
        SolverSpec {
            config: GaConfig { population_size: 20, generations: 5, ..GaConfig::default() },
            ..SolverSpec::new(kind)
        }
    }

    #[test]
    fn two_sample_cdf() {
        let pts = export_cdf(&[record("rpa", 2.0), record("rpa", 1.0)]).unwrap();
        assert_eq!(
            pts.iter().map(|p| (p.value, p.cdf)).collect::<Vec<_>>(),
            vec![(1.0, 0.5), (2.0, 1.0)]
        );
        assert!(matches!(export_cdf(&[record("ga", 1.0)]), Err(Error::InsufficientSamples { .. })));
    }

    #[test]
    fn one_record_per_run() {
        let spec = small_spec(vec![SolverSpec::new(SolverKind::Rpa)], vec![5]);
        let records = run_experiment(&spec).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!((records[0].cells, records[0].users, records[0].seed), (3, 4, 5));
    }

    #[test]
    fn deterministic_and_parallel_safe() {
        let spec = ExperimentSpec {
            sweep: Some(Sweep { users: vec![2, 3], antennas: vec![32, 64] }),
            ..small_spec(
                vec![SolverSpec::new(SolverKind::Rpa), quick_ga(SolverKind::SkGa), SolverSpec::new(SolverKind::Expa)],
                vec![1, 2],
            )
        };
        let a = run_experiment(&spec).unwrap();
        let b = run_experiment(&spec).unwrap();
        let c = run_experiment_with(&spec, true).unwrap();
        assert_eq!(a.len(), 4 * 2 * 3);
        for ((x, y), z) in a.iter().zip(&b).zip(&c) {
            assert!(x.same_outcome(y) && x.same_outcome(z));
        }
    }

    #[test]
    fn infeasible_expa_is_skipped() {
        let spec = small_spec(
            vec![SolverSpec { expa_limit: 100, ..SolverSpec::new(SolverKind::Expa) }, SolverSpec::new(SolverKind::Rpa)],
            vec![1, 2],
        );
        let records = run_experiment(&spec).unwrap();
        // (4!)^2 = 576 > 100
        assert!(records.iter().filter(|r| r.solver_name == "expa").all(|r| r.status == RunStatus::Skipped));
        let rows = export_scaling(&records);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].solver, "rpa");
    }

    #[test]
    fn scaling_medians() {
        let mut rs = vec![record("ga", 1.0), record("ga", 2.0), record("ga", 3.0)];
        rs[0].wall_time = 3.0;
        rs[1].wall_time = 1.0;
        rs[2].wall_time = 2.0;
        rs[2].evaluations = 9;
        let rows = export_scaling(&rs);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].median_wall_time, 2.0);
        assert_eq!(rows[0].median_evaluations, 1.0);
        assert_eq!(median(&mut [4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn records_round_trip() {
        let spec = small_spec(
            vec![SolverSpec::new(SolverKind::Rpa), quick_ga(SolverKind::Ga), SolverSpec { expa_limit: 1, ..SolverSpec::new(SolverKind::Expa) }],
            vec![3, 4],
        );
        let records = run_experiment(&spec).unwrap();
        let mut buf = Vec::new();
        write_records_csv(&records, &mut buf).unwrap();
        assert_eq!(read_records_csv(&buf[..]).unwrap(), records);

        let cdf = export_cdf(&cdf_eligible(&records)).unwrap();
        let mut buf = Vec::new();
        write_csv_rows(&cdf, &mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("solver,value,cdf\n"));
        assert_eq!(read_csv_rows::<CdfPoint, _>(&buf[..]).unwrap(), cdf);
    }

    #[test]
    fn spec_json_and_validation() {
        let text = r#"{
            "scenario": {"L": 2, "K": 3, "M": 64},
            "solvers": [{"solver": "expa"}, {"solver": "pkga", "parallelism": 2,
                         "config": {"population_size": 10, "generations": 2, "cluster_count": 2}}],
            "seeds": [1, 2],
            "sweep": {"K": [2, 3]},
            "outputs": "results"
        }"#;
        let spec = ExperimentSpec::from_json(text).unwrap();
        assert_eq!(spec.sweep_points(), vec![(2, 64), (3, 64)]);
        assert_eq!(spec.solvers[1].config.crossover_prob, 0.9);
        assert!(ExperimentSpec::from_json(r#"{"scenario": {}, "solvers": [], "seeds": [1]}"#).is_err());
        assert!(ExperimentSpec::from_json(r#"{"scenario": {}, "solvers": [{"solver": "rpa"}], "seeds": []}"#).is_err());
        assert!(ExperimentSpec::from_json(r#"{"scenario": {"K": 0}, "solvers": [{"solver": "rpa"}], "seeds": [1]}"#).is_err());
    }

    #[test]
    fn significant_digits() {
        assert_eq!(format_significant(16.789_012_345_678_9, 12), "16.7890123457");
        assert_eq!(format_significant(0.001_234_567_890_123_4, 12), "0.00123456789012");
        assert_eq!(format_significant(0.0, 12), "0");
    }
}
