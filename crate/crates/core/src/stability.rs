//! How the maximal target reacts to perturbations of the initial measure:
//! it is not monotone, not Lipschitz in L¹, but it is continuous under weak
//! convergence.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maximal::{solve, MaximalSolution};
use crate::measure1d::{l1_distance, pointwise_leq, positive_part_l1, OpenSet1D, StepMeasure};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// `‖(μ₁ − μ₂)₊‖_{L¹}`.
    pub input_l1_gap: f64,
    /// `‖(ν₁ − ν₂)₊‖_{L¹}`.
    pub output_l1_gap: f64,
    /// `output / input`, absent when the input gap vanishes.
    pub ratio: Option<f64>,
    pub monotone_in: bool,
    pub monotone_out: bool,
    pub closed_form_ratio: Option<f64>,
    pub nu1: MaximalSolution,
    pub nu2: MaximalSolution,
}

fn compare_pair(
    mu1: &StepMeasure,
    mu2: &StepMeasure,
    open_set: &OpenSet1D,
    tol: f64,
) -> Result<StabilityReport> {
    let nu1 = solve(mu1, open_set, tol)?;
    let nu2 = solve(mu2, open_set, tol)?;
    let input_l1_gap = positive_part_l1(mu1, mu2);
    let output_l1_gap = positive_part_l1(&nu1.measure, &nu2.measure);
    Ok(StabilityReport {
        input_l1_gap,
        output_l1_gap,
        ratio: (input_l1_gap > 0.0).then(|| output_l1_gap / input_l1_gap),
        monotone_in: pointwise_leq(mu1, mu2, tol),
        monotone_out: pointwise_leq(&nu1.measure, &nu2.measure, tol),
        closed_form_ratio: None,
        nu1,
        nu2,
    })
}

/// Solves both inputs and reports whether `μ₁ ≤ μ₂` survives as `ν₁ ≤ ν₂`.
pub fn monotonicity_report(
    mu1: &StepMeasure,
    mu2: &StepMeasure,
    open_set: &OpenSet1D,
    tol: f64,
) -> Result<StabilityReport> {
    compare_pair(mu1, mu2, open_set, tol)
}

/// `μ₁ = r χ_(−x, x)` and `μ₂ = χ_(−c, −c+ry) + r χ_(−x, x−y)` on `(−1, 1)`.
///
/// Both have mass `2rx` and differ by `ry` in L¹. The inner endpoints of the
/// second target move by an amount whose ratio to `ry` grows without bound
/// as `x, r, c → 1` and `y → 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzFamilyParams {
    pub x: f64,
    pub y: f64,
    pub r: f64,
    pub c: f64,
}

impl LipschitzFamilyParams {
    pub fn validate(&self) -> Result<()> {
        let &Self { x, y, r, c } = self;
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::Parameter(format!("x = {x} must lie in (0, 1)")));
        }
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Parameter(format!("r = {r} must lie in (0, 1)")));
        }
        if !(y > 0.0 && y < x) {
            return Err(Error::Parameter(format!("y = {y} must lie in (0, x)")));
        }
        if !(c < 1.0) {
            return Err(Error::Parameter(format!("c = {c} must be below 1")));
        }
        if !(-c + r * y < -x) {
            return Err(Error::Parameter(format!(
                "need -c + r y < -x, got {} >= {}",
                -c + r * y,
                -x
            )));
        }
        // The closed form measures a shift of the middle gap; once the shift
        // exceeds the gap width 2(1 - rx) the positive part saturates.
        let shift = self.closed_form_output_gap();
        let gap = 2.0 * (1.0 - r * x);
        if !(shift <= gap) {
            return Err(Error::Parameter(format!(
                "y = {y} too large: endpoint shift {shift} exceeds the gap width {gap}"
            )));
        }
        Ok(())
    }

    pub fn measures(&self) -> Result<(StepMeasure, StepMeasure)> {
        self.validate()?;
        let &Self { x, y, r, c } = self;
        let mu1 = StepMeasure::scaled_indicator(r, -x, x)?;
        let mu2 = StepMeasure::indicator(-c, -c + r * y)?
            .add(&StepMeasure::scaled_indicator(r, -x, x - y)?);
        Ok((mu1, mu2))
    }

    /// `(2rxy + 2cry − ry² − r²y²) / (2(2 − 2rx))`: the common shift of both
    /// inner endpoints of the second target.
    pub fn closed_form_output_gap(&self) -> f64 {
        let &Self { x, y, r, c } = self;
        (2.0 * r * x * y + 2.0 * c * r * y - r * y * y - r * r * y * y)
            / (2.0 * (2.0 - 2.0 * r * x))
    }

    /// `(2x + 2c − y − ry) / (4(1 − rx))`.
    pub fn closed_form_ratio(&self) -> f64 {
        let &Self { x, y, r, c } = self;
        (2.0 * x + 2.0 * c - y - r * y) / (4.0 * (1.0 - r * x))
    }

    /// Limit of the ratio as `y → 0`: `(x + c) / (2(1 − rx))`.
    pub fn small_gap_limit(&self) -> f64 {
        let &Self { x, r, c, .. } = self;
        (x + c) / (2.0 * (1.0 - r * x))
    }
}

/// Tolerance for agreement between computed gaps and the closed forms.
pub const CLOSED_FORM_TOL: f64 = 1e-9;

/// Solves the family on `(−1, 1)` and cross-checks both L¹ gaps against the
/// closed forms.
pub fn lipschitz_ratio(params: &LipschitzFamilyParams) -> Result<StabilityReport> {
    let (mu1, mu2) = params.measures()?;
    let domain = OpenSet1D::interval(-1.0, 1.0)?;
    let mut report = compare_pair(&mu1, &mu2, &domain, crate::measure1d::DEFAULT_TOL)?;
    let expected_in = params.r * params.y;
    let expected_out = params.closed_form_output_gap();
    if (report.input_l1_gap - expected_in).abs() > CLOSED_FORM_TOL {
        return Err(Error::verification(format!(
            "input gap {} differs from r y = {expected_in}",
            report.input_l1_gap
        )));
    }
    if (report.output_l1_gap - expected_out).abs() > CLOSED_FORM_TOL {
        return Err(Error::verification(format!(
            "output gap {} differs from closed form {expected_out}",
            report.output_l1_gap
        )));
    }
    report.closed_form_ratio = Some(params.closed_form_ratio());
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakConvergenceRow {
    pub index: usize,
    pub mass_gap: f64,
    pub moment_gap: f64,
    pub l1_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakConvergenceTable {
    pub rows: Vec<WeakConvergenceRow>,
    /// Lipschitz constant of `(k, β) ↦ ν*` in L¹ over the instance family.
    pub constant: f64,
    /// `l1_gap <= constant · (mass_gap + moment_gap)` on every row.
    pub bound_holds: bool,
}

/// Bound on `‖ν*(k, β) − ν*(k', β')‖_{L¹}` per unit of `|Δk| + |Δβ|` on a
/// component `(c, d)`, valid while both masses stay at most `k_max < d − c`.
///
/// Shifting to `c = 0` gives `p = (k(L − k/2) − β') / (L − k)` with
/// `β' = β − ck`, so `|∂p/∂k| ≤ L/(L − k)` and `|∂p/∂β'| = 1/(L − k)`. The
/// L¹ distance is at most `2|Δp| + |Δk|`.
fn component_constant(c: f64, d: f64, k_max: f64) -> f64 {
    let len = d - c;
    let slack = len - k_max;
    let dk = 1.0 + 2.0 * (len + c.abs()) / slack;
    let dbeta = 2.0 / slack;
    dk.max(dbeta)
}

/// Tabulates how far `ν*(μ_l)` is from `ν*(μ)` against the mass and moment
/// gaps of the inputs.
pub fn weak_convergence_experiment(
    sequence: &[StepMeasure],
    mu: &StepMeasure,
    open_set: &OpenSet1D,
    tol: f64,
) -> Result<WeakConvergenceTable> {
    let limit = solve(mu, open_set, tol)?;
    let limit_parts = mu.restrict(open_set, tol)?;
    let mut k_max: Vec<f64> = limit_parts.iter().map(StepMeasure::mass).collect();
    let mut rows = Vec::with_capacity(sequence.len());
    for (index, mu_l) in sequence.iter().enumerate() {
        let nu_l = solve(mu_l, open_set, tol)?;
        let parts = mu_l.restrict(open_set, tol)?;
        let mut mass_gap = 0.0;
        let mut moment_gap = 0.0;
        for (i, (p, q)) in parts.iter().zip(&limit_parts).enumerate() {
            mass_gap += (p.mass() - q.mass()).abs();
            moment_gap += (p.first_moment() - q.first_moment()).abs();
            k_max[i] = k_max[i].max(p.mass());
        }
        rows.push(WeakConvergenceRow {
            index,
            mass_gap,
            moment_gap,
            l1_gap: l1_distance(&nu_l.measure, &limit.measure),
        });
    }
    let mut constant: f64 = 0.0;
    for (&(c, d), &k) in open_set.components().iter().zip(&k_max) {
        if k >= d - c - tol {
            return Err(Error::Parameter(format!(
                "mass {k} saturates component ({c}, {d}); the target map is not Lipschitz there"
            )));
        }
        constant = constant.max(component_constant(c, d, k));
    }
    let bound_holds = rows
        .iter()
        .all(|r| r.l1_gap <= constant * (r.mass_gap + r.moment_gap) + tol);
    Ok(WeakConvergenceTable {
        rows,
        constant,
        bound_holds,
    })
}
