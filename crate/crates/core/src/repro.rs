//! Reference scenarios with expected values, computed values and tolerances
//! side by side.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::maximal::{critical_point, solve};
use crate::measure1d::{l1_distance, OpenSet1D, StepMeasure, DEFAULT_TOL};
use crate::particles::{compare_to_formula, run, SimConfig};
use crate::stability::{
    lipschitz_ratio, monotonicity_report, weak_convergence_experiment, LipschitzFamilyParams,
};

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    /// A number printed in the reference publication.
    Published,
    /// An independent computation: closed form, dense scan or exact identity.
    Oracle,
    /// Holds by construction or by a counting argument.
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// `|computed − expected| ≤ tolerance`.
    Near,
    /// `computed > expected − tolerance`.
    Above,
    /// `computed < expected + tolerance`.
    Below,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproRow {
    pub quantity: String,
    pub expected: f64,
    pub computed: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub source: Source,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub inputs: String,
    pub rows: Vec<ReproRow>,
    /// Set when the scenario could not be evaluated at all.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproManifest {
    pub scenarios: Vec<Scenario>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproOptions {
    /// Replaces every row tolerance when set.
    pub tol_override: Option<f64>,
    pub particle_count: usize,
    pub seed: u64,
}

impl Default for ReproOptions {
    fn default() -> Self {
        ReproOptions {
            tol_override: None,
            particle_count: 10_000,
            seed: 20_240_601,
        }
    }
}

struct RowBuilder<'a> {
    rows: Vec<ReproRow>,
    opts: &'a ReproOptions,
}

impl<'a> RowBuilder<'a> {
    fn new(opts: &'a ReproOptions) -> Self {
        RowBuilder {
            rows: Vec::new(),
            opts,
        }
    }

    fn push(
        &mut self,
        quantity: impl Into<String>,
        relation: Relation,
        expected: f64,
        computed: f64,
        tolerance: f64,
        source: Source,
    ) {
        let tolerance = self.opts.tol_override.unwrap_or(tolerance);
        let pass = match relation {
            Relation::Near => (computed - expected).abs() <= tolerance,
            Relation::Above => computed > expected - tolerance,
            Relation::Below => computed < expected + tolerance,
        };
        self.rows.push(ReproRow {
            quantity: quantity.into(),
            expected,
            computed,
            tolerance,
            relation,
            source,
            pass,
        });
    }

    fn near(&mut self, q: impl Into<String>, expected: f64, computed: f64, tol: f64, s: Source) {
        self.push(q, Relation::Near, expected, computed, tol, s);
    }

    fn flag(&mut self, q: impl Into<String>, expected: bool, computed: bool, s: Source) {
        let as_f = |b: bool| if b { 1.0 } else { 0.0 };
        self.push(q, Relation::Near, as_f(expected), as_f(computed), 0.0, s);
    }
}

fn unit_interval() -> Result<OpenSet1D> {
    OpenSet1D::interval(-1.0, 1.0)
}

fn example_5_1(b: &mut RowBuilder) -> Result<()> {
    let mu1 = StepMeasure::indicator(-0.9, 0.0)?;
    let mu2 = StepMeasure::indicator(-1.0, 0.0)?;
    let rep = monotonicity_report(&mu1, &mu2, &unit_interval()?, DEFAULT_TOL)?;
    b.near(
        "L1(nu2, mu2)",
        0.0,
        l1_distance(&rep.nu2.measure, &mu2),
        0.0,
        Source::Identity,
    );
    b.push(
        "right block width of nu1",
        Relation::Above,
        0.0,
        rep.nu1.blocks[0].right_width(),
        0.0,
        Source::Published,
    );
    b.flag("monotone_in", true, rep.monotone_in, Source::Published);
    b.flag("monotone_out", false, rep.monotone_out, Source::Published);
    Ok(())
}

fn example_5_2(b: &mut RowBuilder) -> Result<()> {
    let domain = unit_interval()?;
    let mu1 = StepMeasure::scaled_indicator(0.99, 0.0, 0.75f64.sqrt())?;
    let mu2 = StepMeasure::scaled_indicator(0.99, -0.5, 1.0)?;
    for (tag, mu, e, f) in [
        ("nu1", &mu1, -0.896224371, 0.246410478),
        ("nu2", &mu2, -0.978373786, -0.463373786),
    ] {
        let sol = solve(mu, &domain, DEFAULT_TOL)?;
        let pair = sol.blocks[0];
        b.near(format!("{tag}.e"), e, pair.e, 1e-6, Source::Published);
        b.near(format!("{tag}.f"), f, pair.f, 1e-6, Source::Published);
        b.near(
            format!("{tag}.beta"),
            0.37125,
            sol.provenance[0].beta,
            1e-12,
            Source::Published,
        );
    }
    let rep = monotonicity_report(&mu1, &mu2, &domain, DEFAULT_TOL)?;
    b.flag("monotone_in", true, rep.monotone_in, Source::Published);
    b.flag("monotone_out", false, rep.monotone_out, Source::Published);
    Ok(())
}

fn lipschitz_family(b: &mut RowBuilder) -> Result<()> {
    let reference = LipschitzFamilyParams {
        x: 0.9,
        y: 0.01,
        r: 0.9,
        c: 0.99,
    };
    let rep = lipschitz_ratio(&reference)?;
    b.near(
        "input gap at (0.9, 0.01, 0.9, 0.99)",
        reference.r * reference.y,
        rep.input_l1_gap,
        1e-9,
        Source::Oracle,
    );
    b.near(
        "output gap at (0.9, 0.01, 0.9, 0.99)",
        reference.closed_form_output_gap(),
        rep.output_l1_gap,
        1e-9,
        Source::Published,
    );
    b.near(
        "ratio at (0.9, 0.01, 0.9, 0.99)",
        4.948684210526,
        rep.ratio.unwrap_or(f64::NAN),
        1e-9,
        Source::Oracle,
    );
    let edge = LipschitzFamilyParams {
        x: 0.999,
        y: 1e-4,
        r: 0.999,
        c: 0.999,
    };
    b.push(
        "closed-form ratio at (0.999, 1e-4, 0.999, 0.999)",
        Relation::Above,
        100.0,
        edge.closed_form_ratio(),
        0.0,
        Source::Published,
    );
    let blow_up = LipschitzFamilyParams {
        x: 0.999,
        y: 1e-6,
        r: 0.999,
        c: 0.9999,
    };
    let rep = lipschitz_ratio(&blow_up)?;
    b.push(
        "computed ratio at (0.999, 1e-6, 0.999, 0.9999)",
        Relation::Above,
        100.0,
        rep.ratio.unwrap_or(f64::NAN),
        0.0,
        Source::Published,
    );
    Ok(())
}

fn appendix_critical_point(b: &mut RowBuilder) -> Result<()> {
    // The dense-scan value 1/12 for (0.8, 0.2) is an independent oracle.
    let cp = critical_point(0.8, 0.2)?;
    b.near("root for (0.8, 0.2)", 1.0 / 12.0, cp.root, 1e-10, Source::Oracle);
    for (k, beta) in [(0.8, 0.2), (0.5, -0.3), (1.5, 0.1), (1.2, -0.35)] {
        let cp = critical_point(k, beta)?;
        let label = format!("({k}, {beta})");
        b.near(
            format!("root vs 2b(1-k)/(k(2-k)) for {label}"),
            cp.formula,
            cp.root,
            1e-10,
            Source::Published,
        );
        b.push(
            format!("max of U_nu - U_mu for {label}"),
            Relation::Below,
            0.0,
            cp.max_value,
            1e-10,
            Source::Published,
        );
        b.near(
            format!("gap at -1 for {label}"),
            0.0,
            cp.gap_at_left,
            1e-10,
            Source::Identity,
        );
        b.near(
            format!("gap at +1 for {label}"),
            0.0,
            cp.gap_at_right,
            1e-10,
            Source::Identity,
        );
    }
    Ok(())
}

fn weak_convergence(b: &mut RowBuilder) -> Result<()> {
    let domain = unit_interval()?;
    let mu = StepMeasure::indicator(-0.5, 0.5)?;
    let seq = (2..=64)
        .map(|l| mu.scale(1.0 - 1.0 / l as f64))
        .collect::<Result<Vec<_>>>()?;
    let table = weak_convergence_experiment(&seq, &mu, &domain, DEFAULT_TOL)?;
    let gaps: Vec<f64> = table.rows.iter().map(|r| r.l1_gap).collect();
    let worst_ratio = table
        .rows
        .iter()
        .map(|r| r.l1_gap / (r.mass_gap + r.moment_gap))
        .fold(0.0, f64::max);
    b.push(
        "max L1 gap / (|dk| + |dbeta|)",
        Relation::Below,
        4.0,
        worst_ratio,
        0.0,
        Source::Published,
    );
    b.flag(
        "gap decreases in l",
        true,
        gaps.windows(2).all(|w| w[1] < w[0]),
        Source::Published,
    );
    b.near(
        "L1 gap at l = 64",
        1.0 / 64.0,
        *gaps.last().unwrap_or(&f64::NAN),
        1e-12,
        Source::Oracle,
    );
    Ok(())
}

fn particle_example_5_2(b: &mut RowBuilder) -> Result<()> {
    let domain = unit_interval()?;
    let mu = StepMeasure::scaled_indicator(0.99, 0.0, 0.75f64.sqrt())?;
    let cfg = SimConfig::new(b.opts.particle_count, b.opts.seed).with_dt(1e-4);
    let report = run(&mu, &domain, &cfg)?;
    let sol = solve(&mu, &domain, DEFAULT_TOL)?;
    let cmp = &compare_to_formula(&report, &sol)?[0];
    let comp = &report.components[0];
    b.near(
        "unfrozen walkers",
        0.0,
        comp.unfrozen as f64,
        0.0,
        Source::Identity,
    );
    b.near(
        "p_hat + q_hat - k",
        0.0,
        comp.p_hat + comp.q_hat - sol.provenance[0].k,
        0.0,
        Source::Identity,
    );
    b.near(
        "p_hat",
        0.103776,
        comp.p_hat,
        3.0 * cmp.std_error + 0.005,
        Source::Published,
    );
    Ok(())
}

type ScenarioFn = fn(&mut RowBuilder) -> Result<()>;

/// Runs every scenario; the order is alphabetical by name.
pub fn run_manifest(opts: &ReproOptions) -> ReproManifest {
    let table: [(&str, &str, ScenarioFn); 6] = [
        (
            "appendix_critical_point",
            "mu = chi of a centered block of mass k and moment beta on (-1, 1)",
            appendix_critical_point,
        ),
        (
            "example_5_1",
            "mu1 = chi(-0.9, 0), mu2 = chi(-1, 0) on (-1, 1)",
            example_5_1,
        ),
        (
            "example_5_2",
            "mu1 = 0.99 chi(0, sqrt 0.75), mu2 = 0.99 chi(-0.5, 1) on (-1, 1)",
            example_5_2,
        ),
        (
            "lipschitz_family",
            "mu1 = r chi(-x, x), mu2 = chi(-c, -c + ry) + r chi(-x, x - y) on (-1, 1)",
            lipschitz_family,
        ),
        (
            "particles_example_5_2",
            "walkers from 0.99 chi(0, sqrt 0.75) on (-1, 1), dt = 1e-4",
            particle_example_5_2,
        ),
        (
            "weak_convergence",
            "mu_l = (1 - 1/l) chi(-0.5, 0.5), l = 2..64, on (-1, 1)",
            weak_convergence,
        ),
    ];
    let scenarios: Vec<Scenario> = table
        .iter()
        .map(|&(name, inputs, f)| {
            let mut builder = RowBuilder::new(opts);
            let error = f(&mut builder).err().map(|e| e.to_string());
            let rows = builder.rows;
            Scenario {
                name: name.to_string(),
                inputs: inputs.to_string(),
                pass: error.is_none() && rows.iter().all(|r| r.pass),
                rows,
                error,
            }
        })
        .collect();
    ReproManifest {
        pass: scenarios.iter().all(|s| s.pass),
        scenarios,
    }
}
