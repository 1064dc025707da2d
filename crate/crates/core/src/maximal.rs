//! The maximal admissible target `ν* = χ_A`.
//!
//! On each component `(c, d)` of the domain, `A ∩ (c, d)` is two blocks
//! `(c, e) ∪ (f, d)` glued to the endpoints, sized so that `ν*` has the same
//! mass `k` and first moment `β` as the initial measure there. Matching both
//! gives the left width
//!
//! ```text
//! p = (k (d - k/2) - β) / ((d - c) - k),   e = c + p,   f = d - (k - p).
//! ```
//!
//! Every solution is certified with the potential verifier before it is
//! returned.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure1d::{OpenSet1D, StepMeasure};
use crate::potential1d::{
    self, dominates, order_leq_sh_open, OrderCertificate, RootSet,
};

/// Two unit-density blocks `(c, e) ∪ (f, d)` inside the component `(c, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockPair {
    pub c: f64,
    pub e: f64,
    pub f: f64,
    pub d: f64,
}

impl BlockPair {
    pub fn left_width(&self) -> f64 {
        self.e - self.c
    }

    pub fn right_width(&self) -> f64 {
        self.d - self.f
    }

    pub fn mass(&self) -> f64 {
        self.left_width() + self.right_width()
    }

    pub fn first_moment(&self) -> f64 {
        (self.e * self.e - self.c * self.c + self.d * self.d - self.f * self.f) / 2.0
    }

    pub fn to_measure(&self) -> Result<StepMeasure> {
        let mut blocks = Vec::with_capacity(2);
        if self.e > self.c {
            blocks.push((self.c, self.e));
        }
        if self.d > self.f {
            blocks.push((self.f, self.d));
        }
        StepMeasure::from_blocks(&blocks)
    }
}

/// Mass and first moment of one component of the initial measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentMoments {
    pub k: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalSolution {
    pub blocks: Vec<BlockPair>,
    pub measure: StepMeasure,
    pub provenance: Vec<ComponentMoments>,
    pub certificate: Option<OrderCertificate>,
}

/// Slack allowed when a computed `(k, β)` sits on the edge of its window.
const WINDOW_SLACK: f64 = 1e-9;

/// Solves one component `(c, d)` for mass `k` and moment `beta`.
pub fn solve_component(c: f64, d: f64, k: f64, beta: f64) -> Result<BlockPair> {
    if !(c < d) || !c.is_finite() || !d.is_finite() {
        return Err(Error::Infeasible(format!("({c}, {d}) is not a bounded interval")));
    }
    let len = d - c;
    let slack = WINDOW_SLACK * len.max(1.0);
    if !(k >= -slack) {
        return Err(Error::Infeasible(format!("mass {k} is negative")));
    }
    if k > len + slack {
        return Err(Error::Infeasible(format!(
            "mass {k} exceeds the interval length {len}"
        )));
    }
    let k = k.clamp(0.0, len);
    let lo = k * c + k * k / 2.0;
    let hi = k * d - k * k / 2.0;
    let moment_slack = slack * (1.0 + c.abs().max(d.abs()));
    if beta < lo - moment_slack {
        return Err(Error::Infeasible(format!(
            "first moment {beta} below the lower bound kc + k^2/2 = {lo}"
        )));
    }
    if beta > hi + moment_slack {
        return Err(Error::Infeasible(format!(
            "first moment {beta} above the upper bound kd - k^2/2 = {hi}"
        )));
    }
    if k == 0.0 {
        return Ok(BlockPair { c, e: c, f: d, d });
    }
    if len - k <= slack {
        let mid = 0.5 * (c + d);
        return Ok(BlockPair { c, e: mid, f: mid, d });
    }
    let p = ((k * (d - k / 2.0) - beta) / (len - k)).clamp(0.0, k);
    Ok(BlockPair {
        c,
        e: c + p,
        f: d - (k - p),
        d,
    })
}

/// Maximal element of the admissible set for `μ` on `open_set`.
pub fn solve(mu: &StepMeasure, open_set: &OpenSet1D, tol: f64) -> Result<MaximalSolution> {
    let max_density = mu.max_density();
    if max_density > 1.0 + tol {
        return Err(Error::Admissibility { max_density });
    }
    let parts = mu.restrict(open_set, tol)?;
    let mut blocks = Vec::with_capacity(parts.len());
    let mut provenance = Vec::with_capacity(parts.len());
    for (&(c, d), part) in open_set.components().iter().zip(&parts) {
        let moments = ComponentMoments {
            k: part.mass(),
            beta: part.first_moment(),
        };
        blocks.push(solve_component(c, d, moments.k, moments.beta)?);
        provenance.push(moments);
    }
    let measure = blocks_measure(&blocks)?;
    let certificate = order_leq_sh_open(mu, &measure, open_set, tol)?;
    if !certificate.ordered {
        return Err(Error::Verification {
            reason: "two-block target is not above the initial measure in subharmonic order"
                .to_string(),
            certificate: Some(Box::new(certificate)),
        });
    }
    Ok(MaximalSolution {
        blocks,
        measure,
        provenance,
        certificate: Some(certificate),
    })
}

fn blocks_measure(blocks: &[BlockPair]) -> Result<StepMeasure> {
    let mut cells = Vec::with_capacity(2 * blocks.len());
    for b in blocks {
        if b.e > b.c {
            cells.push((b.c, b.e));
        }
        if b.d > b.f {
            cells.push((b.f, b.d));
        }
    }
    // Touching cells of neighbouring components merge in canonical form.
    StepMeasure::from_blocks(&cells)
}

/// Unit-density blocks of `mu`, left to right. Fails unless every cell has
/// density 0 or 1 (within `tol`).
pub fn unit_blocks(mu: &StepMeasure, tol: f64) -> Result<Vec<(f64, f64)>> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, (a, b, v)) in mu.cells().enumerate() {
        if v <= tol {
            continue;
        }
        if (v - 1.0).abs() > tol {
            return Err(Error::validation(
                i,
                format!("density {v} is not a unit block (overlapping blocks?)"),
            ));
        }
        match out.last_mut() {
            Some(last) if last.1 == a => last.1 = b,
            _ => out.push((a, b)),
        }
    }
    Ok(out)
}

/// Result of the left-to-right merge sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub solution: MaximalSolution,
    /// States after each merge step; the last one is the final target.
    pub intermediates: Vec<StepMeasure>,
}

/// Computes the maximal target for a finite union of unit blocks by
/// repeated local saturation: solve the processed prefix on the sub-domain
/// that ends where the next block starts, absorb that block into the freshly
/// produced right block, and continue.
pub fn solve_by_sweep(blocks: &[(f64, f64)], domain: (f64, f64)) -> Result<SweepOutcome> {
    let (c, d) = domain;
    for (i, &(a, b)) in blocks.iter().enumerate() {
        if !(a < b) {
            return Err(Error::validation(i, format!("block ({a}, {b}) is empty or reversed")));
        }
        if a < c || b > d {
            return Err(Error::validation(i, "block is not inside the domain"));
        }
        if i > 0 && blocks[i - 1].1 > a {
            return Err(Error::validation(i, "blocks overlap or are not sorted"));
        }
    }
    let mut intermediates = Vec::with_capacity(blocks.len());
    if blocks.is_empty() {
        let pair = solve_component(c, d, 0.0, 0.0)?;
        return Ok(SweepOutcome {
            solution: sweep_solution(pair, 0.0, 0.0)?,
            intermediates,
        });
    }
    // State: saturated left block (c, sat) and a moving block (f, g).
    let mut sat = c;
    let (mut f, mut g) = blocks[0];
    for i in 0..blocks.len() {
        let wall = blocks.get(i + 1).map_or(d, |next| next.0);
        let k = (sat - c) + (g - f);
        let beta = (sat * sat - c * c + g * g - f * f) / 2.0;
        let pair = solve_component(c, wall, k, beta)?;
        sat = pair.e;
        f = pair.f;
        g = wall;
        if let Some(&(_, next_end)) = blocks.get(i + 1) {
            g = next_end;
        }
        let mut cells = vec![(c, sat), (f, g)];
        cells.extend_from_slice(&blocks[(i + 2).min(blocks.len())..]);
        cells.retain(|&(a, b)| b > a);
        intermediates.push(StepMeasure::from_blocks(&cells)?);
    }
    let pair = BlockPair { c, e: sat, f, d };
    let k = pair.mass();
    let beta = pair.first_moment();
    Ok(SweepOutcome {
        solution: sweep_solution(pair, k, beta)?,
        intermediates,
    })
}

fn sweep_solution(pair: BlockPair, k: f64, beta: f64) -> Result<MaximalSolution> {
    Ok(MaximalSolution {
        measure: pair.to_measure()?,
        blocks: vec![pair],
        provenance: vec![ComponentMoments { k, beta }],
        certificate: None,
    })
}

/// Stationary point of `U^{ν*} - U^μ` on `(-1, 1)` for the centered block
/// `μ = χ_(β/k - k/2, β/k + k/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    /// Closed form `2β(1-k) / (k(2-k))`.
    pub formula: f64,
    /// Root of the exact piecewise-linear derivative difference.
    pub root: f64,
    /// `min (U^{ν*} - U^μ)` on `[-1, 1]` and where it is attained.
    pub min_point: f64,
    pub min_value: f64,
    /// `max (U^{ν*} - U^μ)` on `[-1, 1]`.
    pub max_value: f64,
    pub gap_at_left: f64,
    pub gap_at_right: f64,
}

/// Verifies that the derivative difference has exactly one zero on
/// `(-1, 1)`, located at the closed form.
pub fn critical_point(k: f64, beta: f64) -> Result<CriticalPoint> {
    if !(k > 0.0 && k < 2.0) {
        return Err(Error::Infeasible(format!("mass {k} outside (0, 2)")));
    }
    let (lo, hi) = (k * k / 2.0 - k, k - k * k / 2.0);
    if !(beta > lo && beta < hi) {
        return Err(Error::Infeasible(format!(
            "first moment {beta} outside ({lo}, {hi})"
        )));
    }
    let formula = 2.0 * beta * (1.0 - k) / (k * (2.0 - k));
    let center = beta / k;
    let mu = StepMeasure::indicator(center - k / 2.0, center + k / 2.0)?;
    let target = solve_component(-1.0, 1.0, k, beta)?.to_measure()?;
    let u_target = potential1d::potential(&target);
    let u_mu = potential1d::potential(&mu);
    let diff = u_target.sub(&u_mu);
    let slope_gap = diff.derivative();
    let root = match slope_gap.roots_in(-1.0, 1.0, 1e-10) {
        RootSet::Isolated(roots) if roots.len() == 1 => roots[0],
        RootSet::Isolated(roots) => {
            return Err(Error::verification(format!(
                "expected one stationary point on (-1, 1), found {roots:?}"
            )))
        }
        RootSet::Degenerate { from, to } => {
            return Err(Error::verification(format!(
                "derivative difference vanishes on [{from}, {to}]"
            )))
        }
    };
    let (min_point, min_value) = diff.min_on(-1.0, 1.0);
    let (_, max_value) = diff.max_on(-1.0, 1.0);
    Ok(CriticalPoint {
        formula,
        root,
        min_point,
        min_value,
        max_value,
        gap_at_left: diff.eval(-1.0),
        gap_at_right: diff.eval(1.0),
    })
}

/// A concave cost known through its values on a grid; between grid points it
/// is the linear interpolant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledCost {
    grid: Vec<f64>,
    values: Vec<f64>,
    /// Largest second divided difference; negative means strictly concave.
    max_curvature: f64,
}

/// Second divided differences up to this are treated as zero.
const CONCAVITY_SLACK: f64 = 1e-9;

impl SampledCost {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() || grid.len() < 3 {
            return Err(Error::validation(
                None,
                "need at least three grid points with one value each",
            ));
        }
        for i in 1..grid.len() {
            if !(grid[i] > grid[i - 1]) {
                return Err(Error::validation(i, "grid must be strictly increasing"));
            }
        }
        let mut max_curvature = f64::NEG_INFINITY;
        for i in 1..grid.len() - 1 {
            let left = (values[i] - values[i - 1]) / (grid[i] - grid[i - 1]);
            let right = (values[i + 1] - values[i]) / (grid[i + 1] - grid[i]);
            let curvature = 2.0 * (right - left) / (grid[i + 1] - grid[i - 1]);
            if curvature > CONCAVITY_SLACK {
                return Err(Error::validation(
                    i,
                    format!("samples are not concave (second difference {curvature})"),
                ));
            }
            max_curvature = max_curvature.max(curvature);
        }
        Ok(SampledCost {
            grid,
            values,
            max_curvature,
        })
    }

    /// Samples `u` at `n` equispaced points of `[lo, hi]`.
    pub fn from_fn(u: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Result<Self> {
        let n = n.max(3);
        let grid: Vec<f64> = (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect();
        let values = grid.iter().map(|&x| u(x)).collect();
        Self::new(grid, values)
    }

    pub fn is_strictly_concave(&self) -> bool {
        self.max_curvature < -CONCAVITY_SLACK
    }

    fn eval(&self, x: f64) -> f64 {
        let i = self
            .grid
            .partition_point(|&g| g <= x)
            .clamp(1, self.grid.len() - 1);
        let (x0, x1) = (self.grid[i - 1], self.grid[i]);
        let t = (x - x0) / (x1 - x0);
        self.values[i - 1] + t * (self.values[i] - self.values[i - 1])
    }

    /// `∫ u dν`, exact for the interpolant.
    pub fn objective(&self, nu: &StepMeasure) -> Result<f64> {
        let Some((lo, hi)) = nu.support_hull() else {
            return Ok(0.0);
        };
        let (g0, g1) = (self.grid[0], *self.grid.last().unwrap());
        if lo < g0 || hi > g1 {
            return Err(Error::validation(
                None,
                format!("support [{lo}, {hi}] not covered by cost grid [{g0}, {g1}]"),
            ));
        }
        let mut points: Vec<f64> = self
            .grid
            .iter()
            .chain(nu.breaks())
            .copied()
            .filter(|&x| x >= lo && x <= hi)
            .collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        Ok(points
            .windows(2)
            .map(|w| {
                let v = nu.density_at(0.5 * (w[0] + w[1]));
                v * 0.5 * (self.eval(w[0]) + self.eval(w[1])) * (w[1] - w[0])
            })
            .sum())
    }
}

/// `∫ u dν`.
pub fn primal_objective(nu: &StepMeasure, cost: &SampledCost) -> Result<f64> {
    cost.objective(nu)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependenceReport {
    /// `objectives[j][i]`: cost `j` on candidate `i`; the maximal target is
    /// appended as the last candidate.
    pub objectives: Vec<Vec<f64>>,
    pub argmin: Vec<usize>,
    /// Indices of candidates rejected as inadmissible, with evidence.
    pub rejected: Vec<(usize, OrderCertificate)>,
    /// True iff for every cost the maximal target attains the minimum.
    pub holds: bool,
}

/// Evaluates every cost on every admissible candidate and on `ν*`, and checks
/// that `ν*` minimizes each cost.
pub fn independence_check(
    mu: &StepMeasure,
    open_set: &OpenSet1D,
    candidates: &[StepMeasure],
    costs: &[SampledCost],
    tol: f64,
) -> Result<IndependenceReport> {
    let solution = solve(mu, open_set, tol)?;
    let mut admitted: Vec<&StepMeasure> = Vec::new();
    let mut rejected = Vec::new();
    for (i, cand) in candidates.iter().enumerate() {
        let cert = check_admissible(cand, mu, open_set, tol);
        if cert.ordered {
            admitted.push(cand);
        } else {
            rejected.push((i, cert));
        }
    }
    admitted.push(&solution.measure);
    let star = admitted.len() - 1;
    let mut objectives = Vec::with_capacity(costs.len());
    let mut argmin = Vec::with_capacity(costs.len());
    let mut holds = true;
    for cost in costs {
        let row = admitted
            .iter()
            .map(|nu| cost.objective(nu))
            .collect::<Result<Vec<f64>>>()?;
        let best = (0..row.len())
            .min_by(|&a, &b| row[a].total_cmp(&row[b]))
            .unwrap_or(star);
        // Ties go to ν*.
        let winner = if row[star] <= row[best] + tol { star } else { best };
        holds &= winner == star;
        argmin.push(winner);
        objectives.push(row);
    }
    Ok(IndependenceReport {
        objectives,
        argmin,
        rejected,
        holds,
    })
}

/// Membership of `ν` in the admissible set of `μ` on `open_set`: density at
/// most 1, support in the set, and `μ ≤_{SH,O} ν`.
pub fn check_admissible(
    nu: &StepMeasure,
    mu: &StepMeasure,
    open_set: &OpenSet1D,
    tol: f64,
) -> OrderCertificate {
    let mut violations = Vec::new();
    let max_density = nu.max_density();
    if max_density > 1.0 + tol {
        violations.push(format!("density {max_density} exceeds 1"));
    }
    let mut cert = match order_leq_sh_open(mu, nu, open_set, tol) {
        Ok(cert) => cert,
        Err(e) => {
            violations.push(e.to_string());
            let mut cert = dominates(mu, nu, tol);
            cert.ordered = false;
            cert
        }
    };
    if !violations.is_empty() {
        cert.ordered = false;
    }
    cert.violations.extend(violations);
    cert
}

/// Sufficient test for the strict density gap condition: `μ ≤ δ χ_O` itself.
pub fn check_c0_sufficient(mu: &StepMeasure, open_set: &OpenSet1D, delta: f64) -> Result<bool> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Range {
            value: delta,
            lo: 0.0,
            hi: 1.0,
        });
    }
    if mu.restrict(open_set, 0.0).is_err() {
        return Ok(false);
    }
    Ok(mu.max_density() <= delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure1d::{l1_distance, DEFAULT_TOL};

    fn two_block_moments(c: f64, e: f64, f: f64, d: f64) -> (f64, f64) {
        // Direct integration of the returned blocks.
        let k = (e - c) + (d - f);
        let beta = 0.5 * (e * e - c * c) + 0.5 * (d * d - f * f);
        (k, beta)
    }

    #[test]
    fn centered_interval_matches_published_formula() {
        for &(k, beta) in &[(0.5, 0.0), (1.2, 0.3), (0.3, -0.2), (1.9, 0.0)] {
            let pair = solve_component(-1.0, 1.0, k, beta).unwrap();
            let e = -1.0 + k / 2.0 - beta / (2.0 - k);
            let f = 1.0 - k / 2.0 - beta / (2.0 - k);
            assert!((pair.e - e).abs() < 1e-12, "{pair:?}");
            assert!((pair.f - f).abs() < 1e-12, "{pair:?}");
        }
    }

    #[test]
    fn symmetric_and_one_sided_components() {
        let pair = solve_component(-1.0, 1.0, 0.5, 0.0).unwrap();
        assert_eq!((pair.e, pair.f), (-0.75, 0.75));

        let pair = solve_component(-1.0, 1.0, 0.5, -0.125).unwrap();
        assert!((pair.e + 2.0 / 3.0).abs() < 1e-14);
        assert!((pair.f - 5.0 / 6.0).abs() < 1e-14);
        let (k, beta) = two_block_moments(pair.c, pair.e, pair.f, pair.d);
        assert!((k - 0.5).abs() < 1e-14 && (beta + 0.125).abs() < 1e-14);
    }

    #[test]
    fn infeasible_parameters_name_the_bound() {
        let err = solve_component(-1.0, 1.0, -0.1, 0.0).unwrap_err();
        assert!(err.to_string().contains("negative"));
        let err = solve_component(-1.0, 1.0, 2.5, 0.0).unwrap_err();
        assert!(err.to_string().contains("exceeds"));
        let err = solve_component(-1.0, 1.0, 0.5, 0.5).unwrap_err();
        assert!(err.to_string().contains("upper bound"));
        let err = solve_component(-1.0, 1.0, 0.5, -0.5).unwrap_err();
        assert!(err.to_string().contains("lower bound"));
    }

    #[test]
    fn saturated_and_empty_components() {
        let full = solve_component(0.0, 2.0, 2.0, 2.0).unwrap();
        assert_eq!(full.mass(), 2.0);
        assert!(full.e == full.f);
        let empty = solve_component(0.0, 2.0, 0.0, 0.0).unwrap();
        assert_eq!(empty.mass(), 0.0);
        assert!(empty.to_measure().unwrap().is_zero());
    }

    #[test]
    fn saturated_half_is_a_fixed_point() {
        let mu = StepMeasure::indicator(-1.0, 0.0).unwrap();
        let o = OpenSet1D::interval(-1.0, 1.0).unwrap();
        let sol = solve(&mu, &o, DEFAULT_TOL).unwrap();
        assert_eq!(sol.measure, mu);
    }

    #[test]
    fn components_never_exchange_mass() {
        let mu = StepMeasure::from_blocks(&[(-0.75, -0.25), (0.25, 0.75)]).unwrap();
        let o = OpenSet1D::new(vec![(-1.0, 0.0), (0.0, 1.0)]).unwrap();
        let sol = solve(&mu, &o, DEFAULT_TOL).unwrap();
        assert_eq!(sol.blocks.len(), 2);
        let left = solve_component(-1.0, 0.0, 0.5, -0.25).unwrap();
        let right = solve_component(0.0, 1.0, 0.5, 0.25).unwrap();
        assert_eq!(sol.blocks[0], left);
        assert_eq!(sol.blocks[1], right);
    }

    #[test]
    fn over_dense_input_is_rejected() {
        let mu = StepMeasure::scaled_indicator(1.2, -0.5, 0.5).unwrap();
        let o = OpenSet1D::interval(-1.0, 1.0).unwrap();
        assert!(matches!(
            solve(&mu, &o, DEFAULT_TOL),
            Err(Error::Admissibility { .. })
        ));
    }

    #[test]
    fn empty_measure_gives_empty_target() {
        let o = OpenSet1D::interval(-1.0, 1.0).unwrap();
        let sol = solve(&StepMeasure::zero(), &o, DEFAULT_TOL).unwrap();
        assert!(sol.measure.is_zero());
        assert_eq!(sol.blocks[0].mass(), 0.0);
    }

    #[test]
    fn sweep_single_block_is_a_component_solve() {
        let out = solve_by_sweep(&[(-0.3, 0.2)], (-1.0, 1.0)).unwrap();
        let direct = solve_component(-1.0, 1.0, 0.5, (0.04 - 0.09) / 2.0).unwrap();
        let got = out.solution.blocks[0];
        assert!((got.e - direct.e).abs() < 1e-12 && (got.f - direct.f).abs() < 1e-12);
        assert_eq!(out.intermediates.len(), 1);
    }

    #[test]
    fn sweep_symmetric_pair() {
        let out = solve_by_sweep(&[(-0.6, -0.4), (0.4, 0.6)], (-1.0, 1.0)).unwrap();
        let b = out.solution.blocks[0];
        assert!((b.e + 0.8).abs() < 1e-12 && (b.f - 0.8).abs() < 1e-12);
    }

    #[test]
    fn sweep_asymmetric_pair_matches_closed_form() {
        let blocks = [(-0.5, -0.3), (0.1, 0.4)];
        let mu = StepMeasure::from_blocks(&blocks).unwrap();
        assert!((mu.mass() - 0.5).abs() < 1e-15);
        assert!((mu.first_moment() + 0.005).abs() < 1e-15);
        let o = OpenSet1D::interval(-1.0, 1.0).unwrap();
        let direct = solve(&mu, &o, DEFAULT_TOL).unwrap();
        let swept = solve_by_sweep(&blocks, (-1.0, 1.0)).unwrap();
        let (x, y) = (direct.blocks[0], swept.solution.blocks[0]);
        assert!((x.e - y.e).abs() < 1e-9 && (x.f - y.f).abs() < 1e-9);
    }

    #[test]
    fn sweep_rejects_overlap() {
        assert!(solve_by_sweep(&[(-0.5, 0.0), (-0.1, 0.3)], (-1.0, 1.0)).is_err());
        let doubled = StepMeasure::from_blocks(&[(-0.5, 0.0), (-0.1, 0.3)]).unwrap();
        assert!(unit_blocks(&doubled, DEFAULT_TOL).is_err());
    }

    #[test]
    fn sweep_intermediates_are_admissible_chain() {
        let blocks = [(-0.8, -0.6), (-0.2, 0.0), (0.3, 0.35), (0.5, 0.7)];
        let mu = StepMeasure::from_blocks(&blocks).unwrap();
        let o = OpenSet1D::interval(-1.0, 1.0).unwrap();
        let out = solve_by_sweep(&blocks, (-1.0, 1.0)).unwrap();
        let mut prev = mu.clone();
        for state in &out.intermediates {
            assert!(check_admissible(state, &mu, &o, DEFAULT_TOL).ordered);
            assert!(order_leq_sh_open(&prev, state, &o, DEFAULT_TOL).unwrap().ordered);
            prev = state.clone();
        }
        assert!(l1_distance(&prev, &out.solution.measure) < 1e-12);
    }

    #[test]
    fn critical_point_symmetric_and_known_value() {
        let cp = critical_point(0.5, 0.0).unwrap();
        assert_eq!(cp.formula, 0.0);
        assert!(cp.root.abs() < 1e-12);
        let cp = critical_point(0.8, 0.2).unwrap();
        assert!((cp.formula - 1.0 / 12.0).abs() < 1e-15);
        assert!((cp.root - cp.formula).abs() < 1e-12);
        assert!(critical_point(0.8, 0.9).is_err());
        assert!(critical_point(2.0, 0.0).is_err());
    }

    #[test]
    fn critical_point_minimum_by_dense_scan() {
        let (k, beta) = (0.8, 0.2);
        let center = beta / k;
        let mu = StepMeasure::indicator(center - k / 2.0, center + k / 2.0).unwrap();
        let target = solve_component(-1.0, 1.0, k, beta).unwrap().to_measure().unwrap();
        let (um, ut) = (potential1d::potential(&mu), potential1d::potential(&target));
        let n = 2_000_001;
        let (mut best_y, mut best) = (0.0, f64::INFINITY);
        for i in 0..n {
            let y = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
            let v = ut.eval(y) - um.eval(y);
            if v < best {
                best = v;
                best_y = y;
            }
        }
        assert!((best_y - 1.0 / 12.0).abs() < 1e-6, "{best_y}");
        let cp = critical_point(k, beta).unwrap();
        assert!((cp.min_point - best_y).abs() < 1e-6);
        assert!(cp.gap_at_left.abs() < 1e-12 && cp.gap_at_right.abs() < 1e-12);
    }

    #[test]
    fn linear_cost_sees_only_first_moment() {
        let mu = StepMeasure::indicator(-0.25, 0.25).unwrap();
        let o = OpenSet1D::interval(-1.0, 1.0).unwrap();
        let star = solve(&mu, &o, DEFAULT_TOL).unwrap().measure;
        let u = SampledCost::from_fn(|x| x, -1.0, 1.0, 101).unwrap();
        assert!(!u.is_strictly_concave());
        assert!((u.objective(&mu).unwrap() - mu.first_moment()).abs() < 1e-14);
        assert!((u.objective(&star).unwrap() - mu.first_moment()).abs() < 1e-14);
    }

    #[test]
    fn quadratic_cost_prefers_spread_target() {
        let mu = StepMeasure::indicator(-0.25, 0.25).unwrap();
        let o = OpenSet1D::interval(-1.0, 1.0).unwrap();
        let star = solve(&mu, &o, DEFAULT_TOL).unwrap().measure;
        let u = SampledCost::from_fn(|x| -x * x, -1.0, 1.0, 2001).unwrap();
        assert!(u.is_strictly_concave());
        // Exact values: -∫x² over (-1/4,1/4) = -1/96; over the two end blocks
        // (-1,-3/4)∪(3/4,1) = -2 (1 - 27/64)/3 = -37/96. Interpolation adds
        // at most h²/8 per unit mass.
        let h2 = (2.0f64 / 2000.0).powi(2);
        assert!((u.objective(&mu).unwrap() + 1.0 / 96.0).abs() < h2);
        assert!((u.objective(&star).unwrap() + 37.0 / 96.0).abs() < h2);
        assert!(u.objective(&star).unwrap() < u.objective(&mu).unwrap());
    }

    #[test]
    fn convex_samples_are_rejected() {
        assert!(SampledCost::from_fn(|x| x * x, -1.0, 1.0, 11).is_err());
        assert!(SampledCost::new(vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn independence_over_sweep_states() {
        let blocks = [(-0.7, -0.5), (-0.1, 0.05), (0.3, 0.6)];
        let mu = StepMeasure::from_blocks(&blocks).unwrap();
        let o = OpenSet1D::interval(-1.0, 1.0).unwrap();
        let sweep = solve_by_sweep(&blocks, (-1.0, 1.0)).unwrap();
        let mut candidates = vec![mu.clone()];
        candidates.extend(sweep.intermediates[..2].iter().cloned());
        candidates.push(StepMeasure::scaled_indicator(1.5, 0.0, 0.5).unwrap());
        let costs = [
            SampledCost::from_fn(|x| -x * x, -1.0, 1.0, 4001).unwrap(),
            SampledCost::from_fn(|x: f64| -x.cosh(), -1.0, 1.0, 4001).unwrap(),
        ];
        let report = independence_check(&mu, &o, &candidates, &costs, DEFAULT_TOL).unwrap();
        assert!(report.holds);
        assert_eq!(report.rejected.len(), 1);
        assert_eq!(report.rejected[0].0, 3);
        assert!(report.argmin.iter().all(|&i| i == 3));
    }

    #[test]
    fn admissibility_checks() {
        let mu = StepMeasure::indicator(-0.2, 0.3).unwrap();
        let o = OpenSet1D::interval(-1.0, 1.0).unwrap();
        let star = solve(&mu, &o, DEFAULT_TOL).unwrap().measure;
        assert!(check_admissible(&star, &mu, &o, DEFAULT_TOL).ordered);
        assert!(check_admissible(&mu, &mu, &o, DEFAULT_TOL).ordered);
        let heavy = StepMeasure::scaled_indicator(1.5, 0.0, 0.5).unwrap();
        let cert = check_admissible(&heavy, &heavy, &o, DEFAULT_TOL);
        assert!(!cert.ordered);
        assert!(cert.violations[0].contains("density"));
    }

    #[test]
    fn c0_sufficient_condition() {
        let o = OpenSet1D::interval(-1.0, 1.0).unwrap();
        let mu = StepMeasure::scaled_indicator(0.99, 0.0, 0.75f64.sqrt()).unwrap();
        assert!(check_c0_sufficient(&mu, &o, 0.995).unwrap());
        let sat = StepMeasure::indicator(-1.0, 0.0).unwrap();
        assert!(!check_c0_sufficient(&sat, &o, 0.999).unwrap());
        let half = StepMeasure::scaled_indicator(0.5, -0.5, 0.5).unwrap();
        assert!(check_c0_sufficient(&half, &o, 0.5).unwrap());
        assert!(check_c0_sufficient(&half, &o, 1.0).is_err());
        assert!(check_c0_sufficient(&half, &o, 0.0).is_err());
    }
}
