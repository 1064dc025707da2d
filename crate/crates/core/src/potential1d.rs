//! Newtonian potentials of step measures in one dimension and the
//! subharmonic-order verifier built on them.
//!
//! In 1D the potential `U(y) = -1/2 ∫ |y - x| dμ(x)` of a step measure is a
//! C¹ piecewise quadratic whose second derivative is `-μ`. Differences of two
//! such potentials are again piecewise quadratic, so `sup (U^ν - U^μ)` is
//! found exactly: endpoints of every piece, plus the vertex of concave pieces.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure1d::{OpenSet1D, StepMeasure};

/// Fundamental solution of `-Δ` evaluated at radius `r = |y|`.
///
/// `d = 1`: `-r/2`; `d = 2`: `-2π log r`; `d = 3`: `r^{2-d} / (d (d-2) ω_d)`
/// with `ω_3 = 4π/3` the volume of the unit ball.
pub fn kernel(dim: u32, r: f64) -> Result<f64> {
    let r = r.abs();
    match dim {
        1 => Ok(-r / 2.0),
        2 | 3 if r == 0.0 => Err(Error::Singularity { dim }),
        2 => Ok(-2.0 * PI * r.ln()),
        3 => {
            let omega = 4.0 * PI / 3.0;
            Ok(r.powi(-1) / (3.0 * omega))
        }
        _ => Err(Error::Parameter(format!("dimension {dim} not supported"))),
    }
}

/// A function on ℝ given by `a y² + b y + c` on each piece.
///
/// `coeffs[0]` applies on `(-∞, breakpoints[0]]`, `coeffs[i]` on
/// `[breakpoints[i-1], breakpoints[i]]`, and the last entry on the right tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseQuadratic {
    pub breakpoints: Vec<f64>,
    pub coeffs: Vec<[f64; 3]>,
}

/// A function on ℝ given by `a y + b` on each piece, laid out like
/// [`PiecewiseQuadratic`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    pub breakpoints: Vec<f64>,
    pub coeffs: Vec<[f64; 2]>,
}

fn piece_index(breakpoints: &[f64], y: f64) -> usize {
    breakpoints.partition_point(|&b| b < y)
}

fn merge_breakpoints(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = a.iter().chain(b).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}

/// A representative point strictly inside piece `i` of `breakpoints`.
fn piece_probe(breakpoints: &[f64], i: usize) -> f64 {
    match (i.checked_sub(1).map(|j| breakpoints[j]), breakpoints.get(i)) {
        (None, None) => 0.0,
        (None, Some(&r)) => r - 1.0,
        (Some(l), None) => l + 1.0,
        (Some(l), Some(&r)) => 0.5 * (l + r),
    }
}

impl PiecewiseQuadratic {
    pub fn zero() -> Self {
        PiecewiseQuadratic {
            breakpoints: Vec::new(),
            coeffs: vec![[0.0; 3]],
        }
    }

    pub fn piece_at(&self, y: f64) -> [f64; 3] {
        self.coeffs[piece_index(&self.breakpoints, y)]
    }

    pub fn eval(&self, y: f64) -> f64 {
        let [a, b, c] = self.piece_at(y);
        (a * y + b) * y + c
    }

    pub fn derivative(&self) -> PiecewiseLinear {
        PiecewiseLinear {
            breakpoints: self.breakpoints.clone(),
            coeffs: self.coeffs.iter().map(|&[a, b, _]| [2.0 * a, b]).collect(),
        }
    }

    /// `self - other` on the merged breakpoint set.
    pub fn sub(&self, other: &Self) -> Self {
        let breakpoints = merge_breakpoints(&self.breakpoints, &other.breakpoints);
        let coeffs = (0..=breakpoints.len())
            .map(|i| {
                let y = piece_probe(&breakpoints, i);
                let p = self.piece_at(y);
                let q = other.piece_at(y);
                [p[0] - q[0], p[1] - q[1], p[2] - q[2]]
            })
            .collect();
        PiecewiseQuadratic {
            breakpoints,
            coeffs,
        }
    }

    /// Exact maximum over `[lo, hi]`, returned as `(argmax, max)`.
    pub fn max_on(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut best = (lo, self.eval(lo));
        let mut consider = |y: f64, v: f64| {
            if v > best.1 {
                best = (y, v);
            }
        };
        let mut edges: Vec<f64> = self
            .breakpoints
            .iter()
            .copied()
            .filter(|&b| b > lo && b < hi)
            .collect();
        edges.insert(0, lo);
        edges.push(hi);
        for w in edges.windows(2) {
            let (l, r) = (w[0], w[1]);
            let [a, b, c] = self.piece_at(0.5 * (l + r));
            let at = |y: f64| (a * y + b) * y + c;
            consider(r, at(r));
            consider(l, at(l));
            if a < 0.0 {
                let vertex = -b / (2.0 * a);
                if vertex > l && vertex < r {
                    consider(vertex, at(vertex));
                }
            }
        }
        best
    }

    /// Exact minimum over `[lo, hi]`, returned as `(argmin, min)`.
    pub fn min_on(&self, lo: f64, hi: f64) -> (f64, f64) {
        let negated = PiecewiseQuadratic {
            breakpoints: self.breakpoints.clone(),
            coeffs: self.coeffs.iter().map(|&[a, b, c]| [-a, -b, -c]).collect(),
        };
        let (y, v) = negated.max_on(lo, hi);
        (y, -v)
    }

    /// Largest jump in value or first derivative across breakpoints.
    pub fn c1_defect(&self) -> f64 {
        self.breakpoints
            .iter()
            .enumerate()
            .map(|(i, &y)| {
                let [a0, b0, c0] = self.coeffs[i];
                let [a1, b1, c1] = self.coeffs[i + 1];
                let value = ((a0 - a1) * y + (b0 - b1)) * y + (c0 - c1);
                let slope = 2.0 * (a0 - a1) * y + (b0 - b1);
                value.abs().max(slope.abs())
            })
            .fold(0.0, f64::max)
    }
}

impl PiecewiseLinear {
    pub fn piece_at(&self, y: f64) -> [f64; 2] {
        self.coeffs[piece_index(&self.breakpoints, y)]
    }

    pub fn eval(&self, y: f64) -> f64 {
        let [a, b] = self.piece_at(y);
        a * y + b
    }

    pub fn sub(&self, other: &Self) -> Self {
        let breakpoints = merge_breakpoints(&self.breakpoints, &other.breakpoints);
        let coeffs = (0..=breakpoints.len())
            .map(|i| {
                let y = piece_probe(&breakpoints, i);
                let p = self.piece_at(y);
                let q = other.piece_at(y);
                [p[0] - q[0], p[1] - q[1]]
            })
            .collect();
        PiecewiseLinear {
            breakpoints,
            coeffs,
        }
    }

    /// Zeros in the open interval `(lo, hi)`, excluding points within
    /// `edge_tol` of either end.
    ///
    /// A piece that vanishes identically is reported through
    /// [`RootSet::Degenerate`].
    pub fn roots_in(&self, lo: f64, hi: f64, edge_tol: f64) -> RootSet {
        const ZERO: f64 = 1e-13;
        let mut edges: Vec<f64> = self
            .breakpoints
            .iter()
            .copied()
            .filter(|&b| b > lo && b < hi)
            .collect();
        edges.insert(0, lo);
        edges.push(hi);
        let mut roots: Vec<f64> = Vec::new();
        for w in edges.windows(2) {
            let (l, r) = (w[0], w[1]);
            let [slope, intercept] = self.piece_at(0.5 * (l + r));
            if slope.abs() <= ZERO {
                if intercept.abs() <= ZERO {
                    return RootSet::Degenerate { from: l, to: r };
                }
                continue;
            }
            let y = -intercept / slope;
            let slack = 1e-12 * (1.0 + y.abs());
            if y >= l - slack && y <= r + slack && y > lo + edge_tol && y < hi - edge_tol {
                if roots.last().is_none_or(|&p| (p - y).abs() > 1e-11) {
                    roots.push(y);
                }
            }
        }
        RootSet::Isolated(roots)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RootSet {
    Isolated(Vec<f64>),
    Degenerate { from: f64, to: f64 },
}

/// Exact potential `U^μ(y) = -1/2 ∫ |y - x| dμ(x)` of a step measure.
///
/// On the cell `[t_j, t_{j+1}]` with density `v`, cumulative mass `M_j` and
/// cumulative moment `B_j` at `t_j`:
/// `U = -1/2 [ v y² + (2M_j - 2v t_j - k) y + (v t_j² - 2B_j + β) ]`.
pub fn potential(mu: &StepMeasure) -> PiecewiseQuadratic {
    if mu.is_zero() {
        return PiecewiseQuadratic::zero();
    }
    let k = mu.mass();
    let beta = mu.first_moment();
    let breaks = mu.breaks().to_vec();
    let mut coeffs = Vec::with_capacity(breaks.len() + 1);
    coeffs.push([0.0, k / 2.0, -beta / 2.0]);
    let (mut cum_mass, mut cum_moment) = (0.0, 0.0);
    for (t0, t1, v) in mu.cells() {
        coeffs.push([
            -v / 2.0,
            -(cum_mass - v * t0 - k / 2.0),
            -(v * t0 * t0 - 2.0 * cum_moment + beta) / 2.0,
        ]);
        cum_mass += v * (t1 - t0);
        cum_moment += v * (t1 * t1 - t0 * t0) / 2.0;
    }
    coeffs.push([0.0, -k / 2.0, beta / 2.0]);
    PiecewiseQuadratic {
        breakpoints: breaks,
        coeffs,
    }
}

/// `[U^μ]'(y) = (mass right of y - mass left of y) / 2`.
pub fn potential_derivative(mu: &StepMeasure) -> PiecewiseLinear {
    potential(mu).derivative()
}

/// Verdict of `μ ≤_SH ν` on a single convex region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentOrder {
    pub interval: Option<[f64; 2]>,
    pub ordered: bool,
    pub mass_gap: f64,
    pub moment_gap: f64,
    pub worst_point: f64,
    pub worst_gap: f64,
}

/// Evidence for or against `μ ≤_SH ν` (equivalently `U^ν ≤ U^μ` with equal
/// mass and first moment).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderCertificate {
    pub ordered: bool,
    pub mass_gap: f64,
    pub moment_gap: f64,
    /// Location of `max (U^ν - U^μ)` over the hull of both supports.
    pub worst_point: f64,
    pub worst_gap: f64,
    pub per_component: Vec<ComponentOrder>,
    /// Hypotheses taken on trust rather than checked.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub assumptions: Vec<String>,
    /// Reasons for `ordered = false` beyond the potential gap.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<String>,
}

impl OrderCertificate {
    fn from_parts(per_component: Vec<ComponentOrder>) -> Self {
        let ordered = per_component.iter().all(|c| c.ordered);
        let mass_gap = per_component.iter().map(|c| c.mass_gap).fold(0.0, f64::max);
        let moment_gap = per_component.iter().map(|c| c.moment_gap).fold(0.0, f64::max);
        let (worst_point, worst_gap) = per_component
            .iter()
            .map(|c| (c.worst_point, c.worst_gap))
            .fold((0.0, f64::NEG_INFINITY), |best, x| if x.1 > best.1 { x } else { best });
        OrderCertificate {
            ordered,
            mass_gap,
            moment_gap,
            worst_point,
            worst_gap: if worst_gap.is_finite() { worst_gap } else { 0.0 },
            per_component,
            assumptions: Vec::new(),
            violations: Vec::new(),
        }
    }
}

fn compare(mu: &StepMeasure, nu: &StepMeasure, tol: f64) -> ComponentOrder {
    let (k_mu, k_nu) = (mu.mass(), nu.mass());
    let mass_gap = (k_mu - k_nu).abs();
    let moment_gap = (mu.first_moment() - nu.first_moment()).abs();
    let diff = potential(nu).sub(&potential(mu));
    let hull = match (mu.support_hull(), nu.support_hull()) {
        (Some(a), Some(b)) => Some((a.0.min(b.0), a.1.max(b.1))),
        (a, b) => a.or(b),
    };
    let (worst_point, worst_gap) = match hull {
        Some((lo, hi)) => diff.max_on(lo, hi),
        None => (0.0, 0.0),
    };
    let scale = k_mu.max(k_nu).max(1.0);
    let ordered = worst_gap <= tol && mass_gap <= tol * scale && moment_gap <= tol * scale;
    ComponentOrder {
        interval: None,
        ordered,
        mass_gap,
        moment_gap,
        worst_point,
        worst_gap,
    }
}

/// Checks `μ ≤_SH ν` on all of ℝ.
pub fn dominates(mu: &StepMeasure, nu: &StepMeasure, tol: f64) -> OrderCertificate {
    OrderCertificate::from_parts(vec![compare(mu, nu, tol)])
}

/// Checks `μ ≤_{SH,O} ν`: mass and first moment must balance on each
/// component separately, and the potentials must be ordered there.
pub fn order_leq_sh_open(
    mu: &StepMeasure,
    nu: &StepMeasure,
    open_set: &OpenSet1D,
    tol: f64,
) -> Result<OrderCertificate> {
    let mu_parts = mu.restrict(open_set, tol)?;
    let nu_parts = nu.restrict(open_set, tol)?;
    let per_component = open_set
        .components()
        .iter()
        .zip(mu_parts.iter().zip(&nu_parts))
        .map(|(&(c, d), (m, n))| ComponentOrder {
            interval: Some([c, d]),
            ..compare(m, n, tol)
        })
        .collect();
    let mut cert = OrderCertificate::from_parts(per_component);
    cert.assumptions
        .push("exit time of the open set equals that of its closure".to_string());
    Ok(cert)
}
