//! Compactly supported piecewise-constant measures on the line and finite
//! unions of open intervals.
//!
//! Every integral in this module is evaluated in closed form over the merged
//! break grid of the operands; nothing is sampled.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used by comparisons when the caller has no preference.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StepMeasureRepr {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

/// A nonnegative step density with bounded support.
///
/// Stored in canonical form: adjacent cells of equal density are merged and
/// leading/trailing zero cells are trimmed, so two measures that agree almost
/// everywhere compare equal field by field. The zero measure has no breaks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StepMeasureRepr", into = "StepMeasureRepr")]
pub struct StepMeasure {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<StepMeasureRepr> for StepMeasure {
    type Error = Error;

    fn try_from(repr: StepMeasureRepr) -> Result<Self> {
        StepMeasure::new(repr.breaks, repr.values)
    }
}

impl From<StepMeasure> for StepMeasureRepr {
    fn from(m: StepMeasure) -> Self {
        StepMeasureRepr {
            breaks: m.breaks,
            values: m.values,
        }
    }
}

impl StepMeasure {
    /// Builds a measure with density `values[i]` on `(breaks[i], breaks[i+1])`.
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.is_empty() && values.is_empty() {
            return Ok(Self::zero());
        }
        if values.len() + 1 != breaks.len() {
            return Err(Error::validation(
                None,
                format!(
                    "expected {} values for {} breaks, got {}",
                    breaks.len().saturating_sub(1),
                    breaks.len(),
                    values.len()
                ),
            ));
        }
        for (i, b) in breaks.iter().enumerate() {
            if !b.is_finite() {
                return Err(Error::validation(i, "break is not finite"));
            }
            if i > 0 && breaks[i - 1] >= *b {
                return Err(Error::validation(i, "breaks must be strictly increasing"));
            }
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::validation(i, "density must be finite and nonnegative"));
            }
        }
        Ok(Self::canonical(breaks, values))
    }

    pub fn zero() -> Self {
        StepMeasure {
            breaks: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Density 1 on `(a, b)`.
    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        Self::scaled_indicator(1.0, a, b)
    }

    /// Density `r` on `(a, b)`. An empty interval gives the zero measure.
    pub fn scaled_indicator(r: f64, a: f64, b: f64) -> Result<Self> {
        if a == b {
            return Ok(Self::zero());
        }
        Self::new(vec![a, b], vec![r])
    }

    /// Sum of unit-density blocks; overlapping blocks add up.
    pub fn from_blocks(blocks: &[(f64, f64)]) -> Result<Self> {
        blocks.iter().try_fold(Self::zero(), |acc, &(a, b)| {
            if a > b {
                return Err(Error::validation(None, format!("block ({a}, {b}) is reversed")));
            }
            Ok(acc.add(&Self::indicator(a, b)?))
        })
    }

    fn canonical(breaks: Vec<f64>, values: Vec<f64>) -> Self {
        let mut out_breaks: Vec<f64> = Vec::with_capacity(breaks.len());
        let mut out_values: Vec<f64> = Vec::with_capacity(values.len());
        for (i, &v) in values.iter().enumerate() {
            if out_values.is_empty() {
                if v == 0.0 {
                    continue;
                }
                out_breaks.push(breaks[i]);
                out_values.push(v);
            } else if *out_values.last().unwrap() == v {
                // extend the previous cell
            } else {
                out_breaks.push(breaks[i]);
                out_values.push(v);
            }
        }
        if out_values.is_empty() {
            return Self::zero();
        }
        // Close the last cell, then drop trailing zeros.
        let last_index = values.len();
        out_breaks.push(breaks[last_index]);
        while out_values.last() == Some(&0.0) {
            out_values.pop();
            out_breaks.pop();
        }
        StepMeasure {
            breaks: out_breaks,
            values: out_values,
        }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// `(inf, sup)` of the closed support, `None` for the zero measure.
    pub fn support_hull(&self) -> Option<(f64, f64)> {
        Some((*self.breaks.first()?, *self.breaks.last()?))
    }

    /// Iterator over `(left, right, density)` cells.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.breaks[i], self.breaks[i + 1], v))
    }

    /// Density at `x`, right-continuous at breaks.
    pub fn density_at(&self, x: f64) -> f64 {
        if self.is_zero() || x < self.breaks[0] || x >= *self.breaks.last().unwrap() {
            return 0.0;
        }
        let i = self.breaks.partition_point(|&b| b <= x) - 1;
        self.values[i]
    }

    pub fn max_density(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn mass(&self) -> f64 {
        self.cells().map(|(a, b, v)| v * (b - a)).sum()
    }

    pub fn first_moment(&self) -> f64 {
        self.cells().map(|(a, b, v)| v * (b * b - a * a) / 2.0).sum()
    }

    pub fn scale(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.breaks.clone(),
            self.values.iter().map(|v| v * factor).collect(),
        )
    }

    /// Pointwise sum.
    pub fn add(&self, other: &Self) -> Self {
        let grid = merged_grid(self, other);
        let values = midpoints(&grid)
            .map(|x| self.density_at(x) + other.density_at(x))
            .collect();
        Self::canonical_or_zero(grid, values)
    }

    fn canonical_or_zero(grid: Vec<f64>, values: Vec<f64>) -> Self {
        if grid.len() < 2 {
            Self::zero()
        } else {
            Self::canonical(grid, values)
        }
    }

    /// `μ · χ_(a,b)`.
    pub fn restrict_to(&self, a: f64, b: f64) -> Self {
        if self.is_zero() || a >= b {
            return Self::zero();
        }
        let mut grid: Vec<f64> = self
            .breaks
            .iter()
            .copied()
            .filter(|&x| x > a && x < b)
            .collect();
        grid.insert(0, a);
        grid.push(b);
        let values = midpoints(&grid).map(|x| self.density_at(x)).collect();
        Self::canonical(grid, values)
    }

    /// Mass on `(a, b)`.
    pub fn mass_on(&self, a: f64, b: f64) -> f64 {
        self.restrict_to(a, b).mass()
    }

    /// Cumulative mass on `(-inf, y]`.
    pub fn cdf(&self, y: f64) -> f64 {
        let mut acc = 0.0;
        for (a, b, v) in self.cells() {
            if y <= a {
                break;
            }
            acc += v * (y.min(b) - a);
        }
        acc
    }

    /// Generalized inverse of [`cdf`](Self::cdf): the smallest `y` with
    /// `cdf(y) >= u`, for `u` in `[0, mass]`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        let total = self.mass();
        if !(0.0..=total).contains(&u) || self.is_zero() {
            return Err(Error::Range {
                value: u,
                lo: 0.0,
                hi: total,
            });
        }
        let mut acc = 0.0;
        let mut last_positive = self.breaks[0];
        for (a, b, v) in self.cells() {
            if v == 0.0 {
                continue;
            }
            let cell_mass = v * (b - a);
            if u <= acc + cell_mass {
                return Ok((a + (u - acc) / v).clamp(a, b));
            }
            acc += cell_mass;
            last_positive = b;
        }
        Ok(last_positive)
    }

    /// Splits `μ` along the components of `open_set`. Mass outside the set
    /// beyond `tol` is a support error.
    pub fn restrict(&self, open_set: &OpenSet1D, tol: f64) -> Result<Vec<StepMeasure>> {
        let parts: Vec<StepMeasure> = open_set
            .components()
            .iter()
            .map(|&(c, d)| self.restrict_to(c, d))
            .collect();
        let inside: f64 = parts.iter().map(StepMeasure::mass).sum();
        let leaked = self.mass() - inside;
        if leaked > tol {
            return Err(Error::Support {
                leaked_mass: leaked,
            });
        }
        Ok(parts)
    }
}

impl Default for StepMeasure {
    fn default() -> Self {
        Self::zero()
    }
}

fn merged_grid(mu: &StepMeasure, nu: &StepMeasure) -> Vec<f64> {
    let mut grid: Vec<f64> = mu.breaks.iter().chain(nu.breaks.iter()).copied().collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

fn midpoints(grid: &[f64]) -> impl Iterator<Item = f64> + '_ {
    grid.windows(2).map(|w| 0.5 * (w[0] + w[1]))
}

/// `∫ max(μ − ν, 0)`.
pub fn positive_part_l1(mu: &StepMeasure, nu: &StepMeasure) -> f64 {
    let grid = merged_grid(mu, nu);
    grid.windows(2)
        .map(|w| {
            let x = 0.5 * (w[0] + w[1]);
            (mu.density_at(x) - nu.density_at(x)).max(0.0) * (w[1] - w[0])
        })
        .sum()
}

/// `∫ |μ − ν|`.
pub fn l1_distance(mu: &StepMeasure, nu: &StepMeasure) -> f64 {
    positive_part_l1(mu, nu) + positive_part_l1(nu, mu)
}

/// True iff `μ ≤ ν + tol` almost everywhere.
pub fn pointwise_leq(mu: &StepMeasure, nu: &StepMeasure, tol: f64) -> bool {
    let grid = merged_grid(mu, nu);
    grid.windows(2)
        .all(|w| {
            let x = 0.5 * (w[0] + w[1]);
            mu.density_at(x) <= nu.density_at(x) + tol
        })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct OpenSetRepr {
    components: Vec<[f64; 2]>,
}

/// A finite disjoint union of bounded open intervals, sorted left to right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OpenSetRepr", into = "OpenSetRepr")]
pub struct OpenSet1D {
    components: Vec<(f64, f64)>,
}

impl TryFrom<OpenSetRepr> for OpenSet1D {
    type Error = Error;

    fn try_from(repr: OpenSetRepr) -> Result<Self> {
        OpenSet1D::new(repr.components.into_iter().map(|[c, d]| (c, d)).collect())
    }
}

impl From<OpenSet1D> for OpenSetRepr {
    fn from(o: OpenSet1D) -> Self {
        OpenSetRepr {
            components: o.components.into_iter().map(|(c, d)| [c, d]).collect(),
        }
    }
}

impl OpenSet1D {
    pub fn new(components: Vec<(f64, f64)>) -> Result<Self> {
        for (i, &(c, d)) in components.iter().enumerate() {
            if !(c.is_finite() && d.is_finite()) {
                return Err(Error::validation(i, "interval endpoints must be finite"));
            }
            if c >= d {
                return Err(Error::validation(i, format!("empty interval ({c}, {d})")));
            }
            if i > 0 && components[i - 1].1 > c {
                return Err(Error::validation(
                    i,
                    "intervals must be sorted and pairwise disjoint",
                ));
            }
        }
        Ok(OpenSet1D { components })
    }

    pub fn interval(c: f64, d: f64) -> Result<Self> {
        Self::new(vec![(c, d)])
    }

    pub fn components(&self) -> &[(f64, f64)] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.components.iter().map(|(c, d)| d - c).sum()
    }

    /// Index of the component whose closure contains `x`.
    pub fn component_of(&self, x: f64) -> Option<usize> {
        self.components
            .iter()
            .position(|&(c, d)| c <= x && x <= d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn indicator_constructor() {
        let m = StepMeasure::new(vec![-1.0, 1.0], vec![1.0]).unwrap();
        assert_eq!(m, StepMeasure::indicator(-1.0, 1.0).unwrap());
        assert_eq!(m.mass(), 2.0);
        assert_eq!(m.first_moment(), 0.0);
    }

    #[test]
    fn rejects_bad_input_with_index() {
        match StepMeasure::new(vec![1.0, 0.0], vec![1.0]) {
            Err(Error::Validation { index: Some(1), .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match StepMeasure::new(vec![0.0, 1.0, 2.0], vec![1.0, -0.5]) {
            Err(Error::Validation { index: Some(1), .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(StepMeasure::new(vec![0.0, 1.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn canonical_form_merges_and_trims() {
        let m = StepMeasure::new(vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![0.0, 0.5, 0.5, 0.0]).unwrap();
        assert_eq!(m.breaks(), &[1.0, 3.0]);
        assert_eq!(m.values(), &[0.5]);
        let zero = StepMeasure::new(vec![0.0, 1.0], vec![0.0]).unwrap();
        assert!(zero.is_zero());
        assert_eq!(zero.mass(), 0.0);
    }

    #[test]
    fn mass_and_moment_of_scaled_block() {
        let m = StepMeasure::scaled_indicator(0.99, -0.5, 1.0).unwrap();
        assert!(close(m.mass(), 1.485, 1e-15));
        assert!(close(m.first_moment(), 0.37125, 1e-15));
        let half = StepMeasure::indicator(-0.5, 0.0).unwrap();
        assert_eq!(half.first_moment(), -0.125);
    }

    #[test]
    fn example_measure_from_breaks() {
        let m = StepMeasure::new(vec![0.0, 0.75f64.sqrt()], vec![0.99]).unwrap();
        assert!(close(m.first_moment(), 0.37125, 1e-12));
    }

    #[test]
    fn positive_part_cases() {
        let mu = StepMeasure::indicator(0.0, 1.0).unwrap();
        assert_eq!(positive_part_l1(&mu, &mu), 0.0);
        let nu = StepMeasure::indicator(2.0, 3.0).unwrap();
        assert_eq!(positive_part_l1(&mu, &nu), mu.mass());
    }

    #[test]
    fn pointwise_comparison() {
        let a = StepMeasure::indicator(-0.9, 0.0).unwrap();
        let b = StepMeasure::indicator(-1.0, 0.0).unwrap();
        assert!(pointwise_leq(&a, &b, DEFAULT_TOL));
        assert!(!pointwise_leq(&b, &a, DEFAULT_TOL));
        assert!(pointwise_leq(&a, &a, 0.0));
    }

    #[test]
    fn cdf_and_quantile_of_indicator() {
        let m = StepMeasure::indicator(-1.0, 1.0).unwrap();
        assert_eq!(m.cdf(0.0), 1.0);
        assert_eq!(m.cdf(-5.0), 0.0);
        assert_eq!(m.cdf(5.0), 2.0);
        assert_eq!(m.quantile(0.0).unwrap(), -1.0);
        assert_eq!(m.quantile(2.0).unwrap(), 1.0);
        assert!(matches!(m.quantile(2.5), Err(Error::Range { .. })));
        assert!(m.quantile(-0.1).is_err());
    }

    #[test]
    fn quantile_skips_gaps() {
        let m = StepMeasure::from_blocks(&[(0.0, 1.0), (2.0, 3.0)]).unwrap();
        assert_eq!(m.quantile(1.0).unwrap(), 1.0);
        assert!(close(m.quantile(1.5).unwrap(), 2.5, 1e-15));
    }

    #[test]
    fn restrict_cases() {
        let o = OpenSet1D::interval(-1.0, 1.0).unwrap();
        let m = StepMeasure::indicator(-0.5, 0.5).unwrap();
        let parts = m.restrict(&o, DEFAULT_TOL).unwrap();
        assert_eq!(parts, vec![m.clone()]);

        let two = OpenSet1D::new(vec![(-1.0, 0.0), (0.0, 1.0)]).unwrap();
        let m = StepMeasure::from_blocks(&[(-0.9, -0.1), (0.1, 0.9)]).unwrap();
        let parts = m.restrict(&two, DEFAULT_TOL).unwrap();
        assert_eq!(parts[0], StepMeasure::indicator(-0.9, -0.1).unwrap());
        assert_eq!(parts[1], StepMeasure::indicator(0.1, 0.9).unwrap());

        let leaky = StepMeasure::indicator(-2.0, 0.0).unwrap();
        match leaky.restrict(&o, DEFAULT_TOL) {
            Err(Error::Support { leaked_mass }) => assert!(close(leaked_mass, 1.0, 1e-15)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn open_set_validation() {
        assert!(OpenSet1D::new(vec![(0.0, 1.0), (0.5, 2.0)]).is_err());
        assert!(OpenSet1D::new(vec![(1.0, 1.0)]).is_err());
        let o = OpenSet1D::new(vec![(-1.0, 0.0), (0.0, 1.0)]).unwrap();
        assert_eq!(o.total_length(), 2.0);
        assert_eq!(o.component_of(0.5), Some(1));
        assert_eq!(o.component_of(3.0), None);
    }

    #[test]
    fn json_schema_round_trip() {
        let m: StepMeasure = serde_json::from_str(r#"{"breaks":[0,1,2],"values":[0.5,0.5]}"#).unwrap();
        assert_eq!(m.breaks(), &[0.0, 2.0]);
        assert!(serde_json::from_str::<StepMeasure>(r#"{"breaks":[1,0],"values":[1]}"#).is_err());
        let o: OpenSet1D = serde_json::from_str(r#"{"components":[[-1,0],[0,1]]}"#).unwrap();
        assert_eq!(o.len(), 2);
        let back = serde_json::to_string(&o).unwrap();
        assert_eq!(back, r#"{"components":[[-1.0,0.0],[0.0,1.0]]}"#);
    }

    prop_compose! {
        fn step_measure()(n in 1usize..6)(
            widths in prop::collection::vec(0.01f64..1.0, n),
            values in prop::collection::vec(0.0f64..1.0, n),
            start in -2.0f64..0.0,
        ) -> StepMeasure {
            let mut breaks = vec![start];
            for w in widths {
                breaks.push(breaks.last().unwrap() + w);
            }
            StepMeasure::new(breaks, values).unwrap()
        }
    }

    proptest! {
        #[test]
        fn canonicalization_is_idempotent(m in step_measure()) {
            let again = StepMeasure::new(m.breaks().to_vec(), m.values().to_vec()).unwrap();
            prop_assert_eq!(again, m);
        }

        #[test]
        fn positive_parts_sum_to_l1(a in step_measure(), b in step_measure()) {
            let lhs = positive_part_l1(&a, &b) + positive_part_l1(&b, &a);
            let grid = merged_grid(&a, &b);
            let direct: f64 = grid.windows(2)
                .map(|w| {
                    let x = 0.5 * (w[0] + w[1]);
                    (a.density_at(x) - b.density_at(x)).abs() * (w[1] - w[0])
                })
                .sum();
            prop_assert!((lhs - direct).abs() <= 1e-12);
        }

        #[test]
        fn restriction_is_additive(m in step_measure(), cut in -1.5f64..1.5) {
            let o = OpenSet1D::new(vec![(-3.0, cut), (cut, 4.0)]).unwrap();
            let parts = m.restrict(&o, DEFAULT_TOL).unwrap();
            let k: f64 = parts.iter().map(StepMeasure::mass).sum();
            let beta: f64 = parts.iter().map(StepMeasure::first_moment).sum();
            prop_assert!((k - m.mass()).abs() <= 1e-12 * m.mass().max(1.0));
            prop_assert!((beta - m.first_moment()).abs() <= 1e-12 * m.mass().max(1.0));
        }

        #[test]
        fn quantile_inverts_cdf(m in step_measure(), t in 0.0f64..1.0) {
            prop_assume!(!m.is_zero());
            let (lo, hi) = m.support_hull().unwrap();
            let y = lo + t * (hi - lo);
            prop_assume!(m.density_at(y) > 1e-6);
            let back = m.quantile(m.cdf(y)).unwrap();
            prop_assert!((back - y).abs() <= 1e-9, "{} vs {}", back, y);
        }

        #[test]
        fn cdf_is_nondecreasing(m in step_measure()) {
            let mut prev = f64::NEG_INFINITY;
            for i in 0..200 {
                let y = -3.0 + 6.0 * i as f64 / 199.0;
                let c = m.cdf(y);
                prop_assert!(c >= prev);
                prev = c;
            }
        }

        #[test]
        fn mass_is_additive(a in step_measure(), b in step_measure()) {
            let s = a.add(&b);
            prop_assert!((s.mass() - a.mass() - b.mass()).abs() <= 1e-12);
        }
    }
}
