//! Cell geometry, user drops, and the fading quantities of the multi-cell
//! uplink model.
//!
//! Conventions: base station `i` sits at the center of cell `i`. The large-scale
//! coefficient `beta[i][j][k]` is the gain between BS `i` and user `k` of cell
//! `j`, computed as `z / d^alpha` with `z` log-normal shadowing drawn in the dB
//! domain.

use std::f64::consts::FRAC_1_SQRT_2;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{SeedTree, Stream};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Static system description. Serializes to JSON with the field names
/// `L, K, M, cell_radius, alpha, shadow_sigma_db, min_dist, noise_power,
/// tau_p, tau_c, seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Scenario {
    /// Cell count `L`.
    #[serde(rename = "L")]
    pub cells: usize,
    /// Users per cell `K`; also the number of orthogonal pilots.
    #[serde(rename = "K")]
    pub users: usize,
    /// BS antennas `M`.
    #[serde(rename = "M")]
    pub antennas: usize,
    /// Hexagon circumradius in meters.
    pub cell_radius: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    /// Log-normal shadowing standard deviation in dB.
    pub shadow_sigma_db: f64,
    /// Minimum user to serving-BS distance in meters.
    pub min_dist: f64,
    /// Normalized receiver noise power.
    pub noise_power: f64,
    /// Pilot length in symbols. Metadata only.
    pub tau_p: usize,
    /// Coherence interval in symbols. Metadata only.
    pub tau_c: usize,
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            cells: 16,
            users: 20,
            antennas: 128,
            cell_radius: 500.0,
            alpha: 3.8,
            shadow_sigma_db: 8.0,
            min_dist: 35.0,
            noise_power: 1.0,
            tau_p: 20,
            tau_c: 200,
            seed: 0,
        }
    }
}

impl Scenario {
    /// Default propagation constants with the given dimensions. `tau_p`
    /// follows `K`.
    pub fn new(cells: usize, users: usize, antennas: usize, seed: u64) -> Self {
        Self {
            cells,
            users,
            antennas,
            tau_p: users,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if self.cells < 1 {
            return bad("L must be at least 1".into());
        }
        if self.users < 1 {
            return bad("K must be at least 1".into());
        }
        if self.antennas < 1 {
            return bad("M must be at least 1".into());
        }
        if !(self.cell_radius.is_finite() && self.cell_radius > 0.0) {
            return bad(format!("cell_radius {} must be positive", self.cell_radius));
        }
        if !(self.min_dist > 0.0 && self.min_dist < self.cell_radius) {
            return bad(format!(
                "min_dist {} must lie in (0, cell_radius {})",
                self.min_dist, self.cell_radius
            ));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return bad(format!("alpha {} must be positive", self.alpha));
        }
        if !(self.shadow_sigma_db.is_finite() && self.shadow_sigma_db >= 0.0) {
            return bad(format!(
                "shadow_sigma_db {} must be non-negative",
                self.shadow_sigma_db
            ));
        }
        if !(self.noise_power.is_finite() && self.noise_power >= 0.0) {
            return bad(format!("noise_power {} must be non-negative", self.noise_power));
        }
        Ok(())
    }

    /// Builds the grid, drops users and draws shadowing, each from its own
    /// substream of `seed`.
    pub fn realize(&self) -> Result<Realization> {
        self.validate()?;
        let seeds = SeedTree::new(self.seed);
        let grid = build_hex_grid(self.cells, self.cell_radius);
        let drop = drop_users(self, &grid, &mut seeds.stream(Stream::Drop, &[]))?;
        let beta = large_scale_fading(self, &grid, &drop, &mut seeds.stream(Stream::Shadowing, &[]))?;
        Ok(Realization { grid, drop, beta })
    }
}

/// One sampled instance of a scenario.
#[derive(Debug, Clone)]
pub struct Realization {
    pub grid: CellGrid,
    pub drop: UserDrop,
    pub beta: FadingTensor,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HexLayout {
    /// Center cell plus `rings` complete rings; used when `L = 3n(n+1)+1`.
    Rings { rings: usize },
    /// Rows of `columns` cells, odd rows shifted by half a cell, no wraparound.
    Rows { columns: usize, rows: usize },
}

/// Pointy-top hexagonal cells with circumradius `cell_radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGrid {
    pub centers: Vec<Point>,
    pub layout: HexLayout,
    pub cell_radius: f64,
}

impl CellGrid {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn inradius(&self) -> f64 {
        self.cell_radius * SQRT_3 / 2.0
    }

    /// Whether `p` lies inside (or on the border of) cell `cell`.
    pub fn contains(&self, cell: usize, p: &Point) -> bool {
        hex_contains(&self.centers[cell], self.cell_radius, p)
    }
}

fn hex_contains(center: &Point, radius: f64, p: &Point) -> bool {
    let dx = (p.x - center.x).abs();
    let dy = (p.y - center.y).abs();
    let eps = 1e-9 * radius;
    dx <= radius * SQRT_3 / 2.0 + eps && dy <= radius - dx / SQRT_3 + eps
}

fn centered_hex_rings(count: usize) -> Option<usize> {
    (0..).map(|n| (n, 3 * n * (n + 1) + 1)).find(|&(_, c)| c >= count).and_then(
        |(n, c)| if c == count { Some(n) } else { None },
    )
}

fn axial_to_point(q: i64, r: i64, radius: f64) -> Point {
    Point::new(
        radius * SQRT_3 * (q as f64 + r as f64 / 2.0),
        radius * 1.5 * r as f64,
    )
}

/// Lays out `cells` hexagon centers. Centered hexagonal counts (1, 7, 19, ...)
/// get concentric rings around the origin; any other count is filled row by
/// row into a near-square patch starting at the origin (4x4 for 16 cells).
pub fn build_hex_grid(cells: usize, cell_radius: f64) -> CellGrid {
    const DIRS: [(i64, i64); 6] = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)];
    if let Some(rings) = centered_hex_rings(cells) {
        let mut centers = vec![Point::ORIGIN];
        for ring in 1..=rings as i64 {
            // Walk the ring starting from the hex `ring` steps in direction 4.
            let (mut q, mut r) = (DIRS[4].0 * ring, DIRS[4].1 * ring);
            for dir in DIRS {
                for _ in 0..ring {
                    centers.push(axial_to_point(q, r, cell_radius));
                    q += dir.0;
                    r += dir.1;
                }
            }
        }
        return CellGrid {
            centers,
            layout: HexLayout::Rings { rings },
            cell_radius,
        };
    }
    let columns = (cells as f64).sqrt().ceil() as usize;
    let rows = cells.div_ceil(columns);
    let centers = (0..cells)
        .map(|n| {
            let (row, col) = (n / columns, n % columns);
            let shift = if row % 2 == 1 { 0.5 } else { 0.0 };
            Point::new(
                cell_radius * SQRT_3 * (col as f64 + shift),
                cell_radius * 1.5 * row as f64,
            )
        })
        .collect();
    CellGrid {
        centers,
        layout: HexLayout::Rows { columns, rows },
        cell_radius,
    }
}

/// User positions; `position(j, k)` is user `k` of cell `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct UserDrop {
    cells: usize,
    users: usize,
    positions: Vec<Point>,
}

impl UserDrop {
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn position(&self, cell: usize, user: usize) -> Point {
        self.positions[cell * self.users + user]
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }
}

/// Uniform point in the hexagon, at least `min_dist` from its center.
pub fn sample_in_hex<R: Rng + ?Sized>(center: &Point, radius: f64, min_dist: f64, rng: &mut R) -> Point {
    let half_width = radius * SQRT_3 / 2.0;
    loop {
        let p = Point::new(
            center.x + rng.random_range(-half_width..=half_width),
            center.y + rng.random_range(-radius..=radius),
        );
        if hex_contains(center, radius, &p) && p.distance(center) >= min_dist {
            return p;
        }
    }
}

/// Drops `K` users uniformly in each cell by rejection sampling.
pub fn drop_users<R: Rng + ?Sized>(scenario: &Scenario, grid: &CellGrid, rng: &mut R) -> Result<UserDrop> {
    scenario.validate()?;
    if grid.len() != scenario.cells {
        return Err(Error::ShapeMismatch {
            expected: format!("{} cells", scenario.cells),
            actual: format!("{} grid centers", grid.len()),
        });
    }
    if scenario.min_dist >= grid.inradius() {
        return Err(Error::PlacementImpossible {
            min_dist: scenario.min_dist,
            inradius: grid.inradius(),
        });
    }
    let mut positions = Vec::with_capacity(scenario.cells * scenario.users);
    for center in &grid.centers {
        for _ in 0..scenario.users {
            positions.push(sample_in_hex(center, grid.cell_radius, scenario.min_dist, rng));
        }
    }
    Ok(UserDrop {
        cells: scenario.cells,
        users: scenario.users,
        positions,
    })
}

/// `z / d^alpha` with `z = 10^(shadow_db / 10)`.
pub fn beta_coefficient(distance: f64, alpha: f64, shadow_db: f64) -> f64 {
    distance.powf(-alpha) * 10f64.powf(shadow_db / 10.0)
}

/// Draws a shadowing realization in dB.
pub fn shadowing_db<R: Rng + ?Sized>(sigma_db: f64, rng: &mut R) -> f64 {
    let x: f64 = rng.sample(StandardNormal);
    sigma_db * x
}

pub fn large_scale_fading<R: Rng + ?Sized>(
    scenario: &Scenario,
    grid: &CellGrid,
    drop: &UserDrop,
    rng: &mut R,
) -> Result<FadingTensor> {
    let (l, k) = (scenario.cells, scenario.users);
    if grid.len() != l || drop.cells != l || drop.users != k {
        return Err(Error::ShapeMismatch {
            expected: format!("L={l}, K={k}"),
            actual: format!(
                "grid {} cells, drop {}x{}",
                grid.len(),
                drop.cells,
                drop.users
            ),
        });
    }
    let mut data = Vec::with_capacity(l * l * k);
    for bs in &grid.centers {
        for cell in 0..l {
            for user in 0..k {
                let d = bs.distance(&drop.position(cell, user));
                let shadow = shadowing_db(scenario.shadow_sigma_db, rng);
                data.push(beta_coefficient(d, scenario.alpha, shadow));
            }
        }
    }
    FadingTensor::from_vec(l, k, data)
}

/// Large-scale coefficients, laid out `[bs][cell][user]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingTensor {
    cells: usize,
    users: usize,
    data: Vec<f64>,
}

impl FadingTensor {
    /// Checks shape and that every entry is finite and strictly positive.
    pub fn from_vec(cells: usize, users: usize, data: Vec<f64>) -> Result<Self> {
        if cells == 0 || users == 0 || data.len() != cells * cells * users {
            return Err(Error::ShapeMismatch {
                expected: format!("{cells}x{cells}x{users} = {} entries", cells * cells * users),
                actual: format!("{} entries", data.len()),
            });
        }
        if let Some(bad) = data.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
            return Err(Error::InvalidScenario(format!(
                "fading coefficient {bad} is not finite and positive"
            )));
        }
        Ok(Self { cells, users, data })
    }

    /// Builds a tensor from `f(bs, cell, user)`.
    pub fn from_fn(cells: usize, users: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(cells * cells * users);
        for i in 0..cells {
            for j in 0..cells {
                for k in 0..users {
                    data.push(f(i, j, k));
                }
            }
        }
        Self::from_vec(cells, users, data)
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn users(&self) -> usize {
        self.users
    }

    #[inline]
    pub fn get(&self, bs: usize, cell: usize, user: usize) -> f64 {
        self.data[(bs * self.cells + cell) * self.users + user]
    }

    /// Coefficients from BS `bs` to every user of `cell`.
    #[inline]
    pub fn row(&self, bs: usize, cell: usize) -> &[f64] {
        let start = (bs * self.cells + cell) * self.users;
        &self.data[start..start + self.users]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn scaled(&self, gamma: f64) -> Result<Self> {
        Self::from_vec(self.cells, self.users, self.data.iter().map(|b| b * gamma).collect())
    }

    /// Header line `L,K`, then one `i,j,k,beta` row per entry.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{},{}", self.cells, self.users)?;
        for i in 0..self.cells {
            for j in 0..self.cells {
                for k in 0..self.users {
                    writeln!(out, "{i},{j},{k},{}", self.get(i, j, k))?;
                }
            }
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("missing L,K header".into()))??;
        let dims = parse_fields(&header, 2)?;
        let (l, k) = (dims[0], dims[1]);
        let mut data = vec![f64::NAN; l * l * k];
        let mut seen = 0usize;
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(Error::Parse(format!("expected i,j,k,beta, got {line:?}")));
            }
            let idx = parse_fields(&fields[..3].join(","), 3)?;
            let (i, j, u) = (idx[0], idx[1], idx[2]);
            if i >= l || j >= l || u >= k {
                return Err(Error::Parse(format!("index ({i},{j},{u}) outside {l}x{l}x{k}")));
            }
            let beta: f64 = fields[3]
                .parse()
                .map_err(|e| Error::Parse(format!("beta {:?}: {e}", fields[3])))?;
            data[(i * l + j) * k + u] = beta;
            seen += 1;
        }
        if seen != l * l * k {
            return Err(Error::Parse(format!("expected {} rows, got {seen}", l * l * k)));
        }
        Self::from_vec(l, k, data)
    }
}

fn parse_fields(line: &str, n: usize) -> Result<Vec<usize>> {
    let v: Vec<usize> = line
        .split(',')
        .map(|f| f.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse(format!("{line:?}: {e}")))?;
    if v.len() != n {
        return Err(Error::Parse(format!("expected {n} fields in {line:?}")));
    }
    Ok(v)
}

/// `h = g * sqrt(beta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector {
    pub entries: Vec<Complex64>,
}

impl ChannelVector {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `h^H h`.
    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn scaled(mut self, beta: f64) -> Self {
        let s = beta.sqrt();
        self.entries.iter_mut().for_each(|c| *c *= s);
        self
    }
}

/// `M` i.i.d. CN(0, 1) entries: real and imaginary parts each N(0, 1/2).
pub fn small_scale_fading<R: Rng + ?Sized>(antennas: usize, rng: &mut R) -> ChannelVector {
    let entries = (0..antennas)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
        })
        .collect();
    ChannelVector { entries }
}
