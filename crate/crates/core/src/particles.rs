//! Brownian walkers frozen by inward-moving fronts.
//!
//! Each component `(c, d)` starts with a left front at `c` and a right front
//! at `d`. Walkers take Gaussian steps of variance `dt`; a walker that reaches
//! a front freezes there and the front moves inward by the per-walker mass
//! `m = k / n`, so the frozen region always has density exactly 1. Walkers
//! never leave `[c, d]`, which realizes a stopping time before the exit time
//! of the domain. The frozen widths `p̂, q̂` estimate the two blocks of the
//! maximal target.
//!
//! Every walker owns a random stream derived from `(seed, component, index)`,
//! so a run is a pure function of its inputs no matter how components are
//! scheduled.

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maximal::{BlockPair, MaximalSolution};
use crate::measure1d::{l1_distance, OpenSet1D, StepMeasure, DEFAULT_TOL};

/// Base time step on a unit-length component.
pub const DEFAULT_UNIT_DT: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Total number of walkers, split across components by mass.
    pub n_particles: usize,
    /// Time step; defaults to `1e-4 · (d − c)²` per component.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_true")]
    pub parallel: bool,
    /// Histogram bins per component.
    #[serde(default = "default_bins")]
    pub bins: usize,
    /// Also freeze walkers whose Brownian bridge between two grid times
    /// crosses a front. Removes the O(√dt) bias of checking only at grid
    /// times.
    #[serde(default = "default_true")]
    pub bridge_correction: bool,
}

fn default_t_max() -> f64 {
    10.0
}

fn default_true() -> bool {
    true
}

fn default_bins() -> usize {
    200
}

impl SimConfig {
    pub fn new(n_particles: usize, seed: u64) -> Self {
        SimConfig {
            n_particles,
            dt: None,
            seed,
            t_max: default_t_max(),
            parallel: true,
            bins: default_bins(),
            bridge_correction: true,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_particles == 0 {
            return Err(Error::Parameter("n_particles must be at least 1".into()));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::Parameter(format!("dt = {dt} must be positive")));
            }
        }
        if !(self.t_max > 0.0) {
            return Err(Error::Parameter(format!("t_max = {} must be positive", self.t_max)));
        }
        if self.bins == 0 {
            return Err(Error::Parameter("bins must be at least 1".into()));
        }
        Ok(())
    }
}

/// Equal-width bins over one component with a density per bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub density: Vec<f64>,
}

impl Histogram {
    fn empty(lo: f64, hi: f64, bins: usize) -> Self {
        Histogram {
            lo,
            hi,
            density: vec![0.0; bins],
        }
    }

    fn width(&self) -> f64 {
        (self.hi - self.lo) / self.density.len() as f64
    }

    pub fn edges(&self) -> Vec<f64> {
        let w = self.width();
        (0..=self.density.len())
            .map(|i| if i == self.density.len() { self.hi } else { self.lo + w * i as f64 })
            .collect()
    }

    /// Spreads unit density over `[a, b]`.
    fn deposit(&mut self, a: f64, b: f64) {
        let w = self.width();
        let n = self.density.len();
        let first = (((a - self.lo) / w).floor().max(0.0) as usize).min(n - 1);
        let last = (((b - self.lo) / w).ceil().max(0.0) as usize).min(n);
        for i in first..last {
            let bin_lo = self.lo + w * i as f64;
            let overlap = (b.min(bin_lo + w) - a.max(bin_lo)).max(0.0);
            self.density[i] += overlap / w;
        }
    }

    pub fn to_measure(&self) -> Result<StepMeasure> {
        StepMeasure::new(self.edges(), self.density.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentRun {
    pub interval: [f64; 2],
    pub n_particles: usize,
    pub particle_mass: f64,
    pub dt: f64,
    pub left_frozen: usize,
    pub right_frozen: usize,
    pub unfrozen: usize,
    /// Frozen width at the left end, `ℓ_final − c`.
    pub p_hat: f64,
    /// Frozen width at the right end, `d − ρ_final`.
    pub q_hat: f64,
    pub mean_freeze_time: f64,
    pub mean_freeze_position: f64,
    pub freeze_position_std: f64,
    pub histogram: Histogram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub components: Vec<ComponentRun>,
    /// Union of the frozen regions, density 1.
    pub frozen: StepMeasure,
    pub all_frozen: bool,
}

/// Mixes a seed with stream tags into an independent 64-bit seed.
fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut acc: u64 = rng.random();
    for &t in tags {
        let mut r = SplitMix64::seed_from_u64(acc ^ t.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        acc = r.random();
    }
    acc
}

struct Walker {
    x: f64,
    rng: SplitMix64,
}

/// Front positions, derived from frozen counts so they never drift.
struct Fronts {
    c: f64,
    d: f64,
    m: f64,
    left: usize,
    right: usize,
}

impl Fronts {
    fn positions(&self) -> (f64, f64) {
        (
            self.c + self.left as f64 * self.m,
            self.d - self.right as f64 * self.m,
        )
    }
}

#[derive(Default)]
struct FreezeStats {
    time_sum: f64,
    pos_sum: f64,
    pos_sq: f64,
}

impl FreezeStats {
    fn record(&mut self, t: f64, at: f64) {
        self.time_sum += t;
        self.pos_sum += at;
        self.pos_sq += at * at;
    }

    /// `(mean position, position std, mean time)` over `count` freezes.
    fn summary(&self, count: usize) -> (f64, f64, f64) {
        if count == 0 {
            return (0.0, 0.0, 0.0);
        }
        let f = count as f64;
        let mean = self.pos_sum / f;
        let var = (self.pos_sq / f - mean * mean).max(0.0);
        (mean, var.sqrt(), self.time_sum / f)
    }
}

/// Log-probability below which a bridge crossing is ignored.
const BRIDGE_CUTOFF: f64 = -40.0;

const INIT_STREAM: u64 = 0;
const WALK_STREAM: u64 = 1;

/// `n` i.i.d. draws from `μ / mass(μ)` by inverse transform.
pub fn sample_initial(mu: &StepMeasure, n: usize, seed: u64) -> Result<Vec<f64>> {
    let k = mu.mass();
    if !(k > 0.0) {
        return Err(Error::Sampling("cannot sample from a zero-mass measure".into()));
    }
    (0..n)
        .map(|i| {
            let mut rng = SplitMix64::seed_from_u64(derive_seed(seed, &[i as u64, INIT_STREAM]));
            let u: f64 = rng.random();
            mu.quantile(u * k)
        })
        .collect()
}

/// Splits `total` walkers across components proportionally to mass; every
/// component with mass gets at least one.
fn allocate(masses: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = masses.iter().sum();
    masses
        .iter()
        .map(|&k| {
            if k <= 0.0 {
                0
            } else {
                ((total as f64 * k / sum).round() as usize).max(1)
            }
        })
        .collect()
}

fn run_component(
    mu: &StepMeasure,
    (c, d): (f64, f64),
    n: usize,
    cfg: &SimConfig,
    seed: u64,
) -> Result<ComponentRun> {
    let len = d - c;
    let dt = cfg.dt.unwrap_or(DEFAULT_UNIT_DT * len * len);
    let mut histogram = Histogram::empty(c, d, cfg.bins);
    let k = mu.mass();
    if n == 0 || k <= 0.0 {
        return Ok(ComponentRun {
            interval: [c, d],
            n_particles: 0,
            particle_mass: 0.0,
            dt,
            left_frozen: 0,
            right_frozen: 0,
            unfrozen: 0,
            p_hat: 0.0,
            q_hat: 0.0,
            mean_freeze_time: 0.0,
            mean_freeze_position: 0.0,
            freeze_position_std: 0.0,
            histogram,
        });
    }
    let m = k / n as f64;
    let positions = sample_initial(mu, n, seed)?;
    let mut walkers: Vec<Walker> = positions
        .into_iter()
        .enumerate()
        .map(|(i, x)| Walker {
            x,
            rng: SplitMix64::seed_from_u64(derive_seed(seed, &[i as u64, WALK_STREAM])),
        })
        .collect();
    let mut fronts = Fronts {
        c,
        d,
        m,
        left: 0,
        right: 0,
    };
    let mut stats = FreezeStats::default();
    let sqrt_dt = dt.sqrt();
    let bridge_scale = -2.0 / dt;
    let max_steps = (cfg.t_max / dt).ceil() as u64;
    let mut step: u64 = 0;

    while !walkers.is_empty() && step < max_steps {
        step += 1;
        let t = step as f64 * dt;
        let (mut lf, mut rf) = fronts.positions();
        let mut kept = 0;
        for read in 0..walkers.len() {
            let w = &mut walkers[read];
            let x = w.x;
            let z: f64 = w.rng.sample(StandardNormal);
            let y = x + sqrt_dt * z;
            // A front that swept over a walker catches it too.
            let mut hit_left = x <= lf || y <= lf;
            let mut hit_right = x >= rf || y >= rf;
            if cfg.bridge_correction && !hit_left && !hit_right {
                // Crossing probability of the Brownian bridge from x to y.
                let to_left = bridge_scale * (x - lf) * (y - lf);
                let to_right = bridge_scale * (rf - x) * (rf - y);
                if to_left > BRIDGE_CUTOFF || to_right > BRIDGE_CUTOFF {
                    let u: f64 = w.rng.random();
                    let p_left = to_left.exp();
                    if u < p_left {
                        hit_left = true;
                    } else if u < p_left + to_right.exp() {
                        hit_right = true;
                    }
                }
            }
            let freeze_left = match (hit_left, hit_right) {
                (false, false) => {
                    assert!(y > c && y < d, "walker left the component at {y}");
                    w.x = y;
                    walkers.swap(kept, read);
                    kept += 1;
                    continue;
                }
                (true, false) => true,
                (false, true) => false,
                (true, true) => y < 0.5 * (lf + rf),
            };
            let at = if freeze_left {
                histogram.deposit(lf, lf + m);
                fronts.left += 1;
                lf
            } else {
                histogram.deposit(rf - m, rf);
                fronts.right += 1;
                rf
            };
            (lf, rf) = fronts.positions();
            assert!(lf <= rf + 1e-12 * len, "fronts crossed: {lf} > {rf}");
            stats.record(t, at);
        }
        walkers.truncate(kept);
    }

    let (left, right) = (fronts.left, fronts.right);
    let unfrozen = walkers.len();
    let frozen = left + right;
    let p_hat = left as f64 * k / n as f64;
    let q_hat = if unfrozen == 0 {
        k - p_hat
    } else {
        right as f64 * k / n as f64
    };
    let (mean_pos, std_pos, mean_time) = stats.summary(frozen);
    Ok(ComponentRun {
        interval: [c, d],
        n_particles: n,
        particle_mass: m,
        dt,
        left_frozen: left,
        right_frozen: right,
        unfrozen,
        p_hat,
        q_hat,
        mean_freeze_time: mean_time,
        mean_freeze_position: mean_pos,
        freeze_position_std: std_pos,
        histogram,
    })
}

/// Runs the front-freezing system on every component of `open_set`.
pub fn run(mu: &StepMeasure, open_set: &OpenSet1D, cfg: &SimConfig) -> Result<RunReport> {
    cfg.validate()?;
    let max_density = mu.max_density();
    if max_density > 1.0 + DEFAULT_TOL {
        return Err(Error::Admissibility { max_density });
    }
    let parts = mu.restrict(open_set, DEFAULT_TOL)?;
    let masses: Vec<f64> = parts.iter().map(StepMeasure::mass).collect();
    let counts = allocate(&masses, cfg.n_particles);
    let jobs: Vec<(usize, &StepMeasure)> = parts.iter().enumerate().collect();
    let work = |&(i, part): &(usize, &StepMeasure)| {
        let seed = derive_seed(cfg.seed, &[i as u64]);
        run_component(part, open_set.components()[i], counts[i], cfg, seed)
    };
    let components: Vec<ComponentRun> = if cfg.parallel {
        jobs.par_iter().map(work).collect::<Result<_>>()?
    } else {
        jobs.iter().map(work).collect::<Result<_>>()?
    };
    let mut cells = Vec::new();
    for comp in &components {
        let [c, d] = comp.interval;
        if comp.p_hat > 0.0 {
            cells.push((c, c + comp.p_hat));
        }
        if comp.q_hat > 0.0 {
            cells.push((d - comp.q_hat, d));
        }
    }
    Ok(RunReport {
        all_frozen: components.iter().all(|c| c.unfrozen == 0),
        frozen: StepMeasure::from_blocks(&cells)?,
        components,
    })
}

impl RunReport {
    /// The report an ideal simulation would produce for `solution`.
    pub fn from_solution(solution: &MaximalSolution, n_particles: usize, bins: usize) -> Self {
        let components: Vec<ComponentRun> = solution
            .blocks
            .iter()
            .zip(&solution.provenance)
            .map(|(b, mom)| {
                let mut histogram = Histogram::empty(b.c, b.d, bins);
                histogram.deposit(b.c, b.e);
                histogram.deposit(b.f, b.d);
                ComponentRun {
                    interval: [b.c, b.d],
                    n_particles,
                    particle_mass: mom.k / n_particles as f64,
                    dt: 0.0,
                    left_frozen: 0,
                    right_frozen: 0,
                    unfrozen: 0,
                    p_hat: b.left_width(),
                    q_hat: b.right_width(),
                    mean_freeze_time: 0.0,
                    mean_freeze_position: 0.0,
                    freeze_position_std: 0.0,
                    histogram,
                }
            })
            .collect();
        RunReport {
            components,
            frozen: solution.measure.clone(),
            all_frozen: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormulaComparison {
    pub interval: [f64; 2],
    pub p: f64,
    pub q: f64,
    pub p_hat: f64,
    pub q_hat: f64,
    pub p_error: f64,
    pub q_error: f64,
    /// L¹ distance between the frozen histogram and `χ_A` binned the same way.
    pub histogram_l1: f64,
    /// Binomial standard error of `p̂`: `√(p q / n)`.
    pub std_error: f64,
}

pub fn compare_to_formula(
    report: &RunReport,
    solution: &MaximalSolution,
) -> Result<Vec<FormulaComparison>> {
    if report.components.len() != solution.blocks.len() {
        return Err(Error::validation(
            None,
            format!(
                "report has {} components, solution has {}",
                report.components.len(),
                solution.blocks.len()
            ),
        ));
    }
    report
        .components
        .iter()
        .zip(&solution.blocks)
        .enumerate()
        .map(|(i, (run, pair))| {
            let [c, d] = run.interval;
            if (c - pair.c).abs() > DEFAULT_TOL || (d - pair.d).abs() > DEFAULT_TOL {
                return Err(Error::validation(i, "component intervals do not match"));
            }
            compare_component(run, pair)
        })
        .collect()
}

fn compare_component(run: &ComponentRun, pair: &BlockPair) -> Result<FormulaComparison> {
    let bins = run.histogram.density.len();
    let mut reference = Histogram::empty(pair.c, pair.d, bins);
    reference.deposit(pair.c, pair.e);
    reference.deposit(pair.f, pair.d);
    let histogram_l1 = l1_distance(&run.histogram.to_measure()?, &reference.to_measure()?);
    let (p, q) = (pair.left_width(), pair.right_width());
    let n = run.n_particles.max(1) as f64;
    Ok(FormulaComparison {
        interval: run.interval,
        p,
        q,
        p_hat: run.p_hat,
        q_hat: run.q_hat,
        p_error: (run.p_hat - p).abs(),
        q_error: (run.q_hat - q).abs(),
        histogram_l1,
        std_error: (p * q / n).sqrt(),
    })
}
