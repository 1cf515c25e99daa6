//! The seven subcommands. Each fills a [`RunSummary`] and writes its series next to it.

use std::time::Instant;

use anyhow::{bail, Context as _, Result};
use gibbslab_core::flow::{
    birkhoff_estimate, bounded_difference_check, bounded_difference_trend, decay_slope, liouville_quadrature,
    sample_liouville, BirkhoffEstimate,
};
use gibbslab_core::gibbs::{
    annulus_sums, estimate_critical_exponent, rn_check, window_stability, AnnulusSums, CriticalExponentEstimate,
    MeasureParams, PattersonMeasure, WindowStability,
};
use gibbslab_core::group::{enumerate_orbit, EnumerationOptions, GeneratorSet, GroupKind};
use gibbslab_core::hyperbolic::busemann;
use gibbslab_core::lemmas::{cone_mass_check, north_south_check, shadow_inclusion_check};
use gibbslab_core::potential::{fill_potential_integrals, Potential};
use gibbslab_core::stats::median;
use gibbslab_core::{Arc, BoundaryPoint, DiskPoint, Error as CoreError, OrbitTable, UnitTangent};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::cache::{sha256_hex, CacheParameters, CacheStatus, OrbitCache};
use crate::config::ExperimentConfig;
use crate::output::{cell, svg_polyline, RunDir};

/// Thresholds of the pass/fail verdicts.
pub mod thresholds {
    pub const SHIFT_TOLERANCE: f64 = 0.02;
    pub const RN_LOG_TOLERANCE: f64 = 0.15;
    pub const RN_PASS_FRACTION: f64 = 0.8;
    pub const BUSEMANN_TOLERANCE: f64 = 1e-3;
    pub const EQUIVARIANCE_TOLERANCE: f64 = 1e-9;
    pub const DECAY_TOLERANCE: f64 = 0.10;
    pub const BIRKHOFF_SPREAD: f64 = 0.05;
    pub const LAMBDA_AGREEMENT: f64 = 0.05;
    pub const COROLLARY_SLACK: f64 = 0.02;
    pub const MAX_EMPTY_FRACTION: f64 = 0.2;
    pub const CONE_MASS_FLOOR: f64 = 0.01;
    pub const MAX_NORTH_SOUTH: usize = 50;
    pub const TREND_TOLERANCE: f64 = 0.05;
}
use thresholds::*;

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    /// CSV in the run directory holding the underlying data.
    pub artifact: String,
}

#[derive(Debug, Default, Serialize)]
pub struct RunSummary {
    pub command: String,
    pub seed: u64,
    pub config_sha256: String,
    pub cache_keys: Vec<String>,
    pub wall_clock_seconds: f64,
    #[serde(flatten)]
    pub results: Map<String, Value>,
    pub criteria: Vec<Verdict>,
    pub health: Vec<String>,
    pub exit_code: i32,
}

impl RunSummary {
    fn verdict(&mut self, name: &str, passed: bool, detail: String, artifact: &str) {
        self.criteria.push(Verdict {
            name: name.to_string(),
            passed,
            detail,
            artifact: artifact.to_string(),
        });
    }

    fn put<T: Serialize>(&mut self, key: &str, value: &T) -> Result<()> {
        self.results.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    /// 3 on any health failure, else 2 on any failed criterion, else 0.
    pub fn finish(&mut self) -> i32 {
        self.exit_code = if !self.health.is_empty() {
            3
        } else if self.criteria.iter().any(|v| !v.passed) {
            2
        } else {
            0
        };
        self.exit_code
    }
}

/// Everything a command needs: the resolved config, its group and potential,
/// the orbit cache and the locked output directory.
pub struct Context {
    pub config: ExperimentConfig,
    pub group: GeneratorSet,
    pub potential: Potential,
    pub cache: OrbitCache,
    pub run: RunDir,
    pub summary: RunSummary,
    started: Instant,
}

impl Context {
    pub fn new(command: &str, config: ExperimentConfig, cache: OrbitCache, run: RunDir) -> Result<Self> {
        let config = config.resolved()?;
        let group = config.build_group()?;
        let potential = config.build_potential(&group)?;
        let resolved_json = serde_json::to_string(&config)?;
        run.write_text("config.resolved.toml", &toml::to_string(&config)?)?;
        let summary = RunSummary {
            command: command.to_string(),
            seed: config.seed,
            config_sha256: sha256_hex(resolved_json.as_bytes()),
            ..Default::default()
        };
        Ok(Self {
            config,
            group,
            potential,
            cache,
            run,
            summary,
            started: Instant::now(),
        })
    }

    /// Writes `summary.json` and returns the exit code.
    pub fn finish(mut self) -> Result<i32> {
        self.summary.wall_clock_seconds = self.started.elapsed().as_secs_f64();
        let code = self.summary.finish();
        self.run.write_json("summary.json", &self.summary)?;
        Ok(code)
    }

    fn cache_parameters(&self) -> CacheParameters {
        let c = &self.config;
        CacheParameters::new(
            c.group.clone(),
            c.orbit.radius,
            c.prune_margin(),
            c.orbit.basepoint,
            c.orbit.orbit_point,
            self.potential.shape_label(),
            c.orbit.step,
        )
    }

    /// The orbit table with potential integrals, from the cache when present.
    fn orbit_table(&mut self) -> Result<(OrbitTable, CacheStatus)> {
        let params = self.cache_parameters();
        let c = &self.config;
        let (x, y) = (c.basepoint()?, c.orbit_point()?);
        let options = EnumerationOptions {
            prune_margin: c.prune_margin(),
            node_budget: c.orbit.node_budget,
        };
        let (radius, step) = (c.orbit.radius, c.orbit.step);
        let (group, potential) = (&self.group, &self.potential);
        let (table, key, status) = self.cache.load_or_build(&params, || {
            let mut table = enumerate_orbit(group, x, y, radius, options)?;
            fill_potential_integrals(&mut table, potential, step)?;
            Ok(table)
        })?;
        if !self.summary.cache_keys.contains(&key) {
            self.summary.cache_keys.push(key);
        }
        Ok((table, status))
    }

    fn window(&self) -> (i64, i64) {
        let [n0, n1] = self.config.delta.window.expect("resolved config has a window");
        (n0, n1)
    }

    fn critical_exponent(&self, table: &OrbitTable, potential: &Potential) -> Result<DeltaFit> {
        let sums = annulus_sums(table, potential)?;
        let estimate = estimate_critical_exponent(&sums, self.window())?;
        let stability = window_stability(&sums, self.window())?;
        Ok(DeltaFit {
            sums,
            estimate,
            stability,
        })
    }

    /// `delta_hat` for the measure exponent: estimated for the potential's shape
    /// and moved by its constant offset, so that shifting the potential by a
    /// constant leaves every measure unchanged.
    fn measure_delta(&self, table: &OrbitTable) -> Result<(DeltaFit, f64)> {
        let c = self.potential.offset();
        let fit = self.critical_exponent(table, &self.potential.shifted(-c))?;
        let delta = fit.estimate.delta + c;
        Ok((fit, delta))
    }

    fn measure_params(&self, delta: f64, epsilon: f64) -> MeasureParams {
        MeasureParams::new(delta, epsilon).with_shell(self.config.measure.shell_width)
    }

    fn liouville_samples(&self, count: usize) -> Result<Vec<UnitTangent>> {
        if self.group.kind() != GroupKind::SurfaceOctagon {
            bail!("Liouville samples need the octagon group; Schottky quotients are non-compact");
        }
        Ok(sample_liouville(&self.group, self.config.seed, count)?)
    }
}

struct DeltaFit {
    sums: AnnulusSums,
    estimate: CriticalExponentEstimate,
    stability: WindowStability,
}

fn annulus_rows(table: &OrbitTable, fit: &DeltaFit) -> Vec<Vec<String>> {
    table
        .annuli()
        .iter()
        .map(|(n, idx)| {
            let sum = fit.sums.get(*n);
            vec![n.to_string(), idx.len().to_string(), sum.to_string(), cell((sum > 0.0).then(|| sum.ln()))]
        })
        .collect()
}

pub fn enum_orbit(ctx: &mut Context) -> Result<()> {
    let (table, status) = ctx.orbit_table()?;
    let rows: Vec<Vec<String>> = table
        .annuli()
        .iter()
        .map(|(n, idx)| vec![n.to_string(), idx.len().to_string()])
        .collect();
    ctx.run.write_csv("annuli.csv", &["n", "count"], &rows)?;
    let cache_file = ctx.cache.csv_path(&ctx.cache_parameters());
    ctx.summary.put(
        "orbit",
        &json!({
            "points": table.len(),
            "radius": table.radius,
            "prune_margin": table.prune_margin,
            "complete_annulus_max": table.complete_annulus_max(),
            "cache_status": status,
            "cache_file": cache_file,
        }),
    )?;
    eprintln!(
        "{}: {} orbit points in {}",
        if status == CacheStatus::Hit { "cache hit" } else { "built" },
        table.len(),
        cache_file.display()
    );
    Ok(())
}

pub fn estimate_delta(ctx: &mut Context) -> Result<()> {
    let (table, _) = ctx.orbit_table()?;
    let fit = ctx.critical_exponent(&table, &ctx.potential)?;
    ctx.run
        .write_csv("annuli.csv", &["n", "count", "sum", "log_sum"], &annulus_rows(&table, &fit))?;
    ctx.summary.put(
        "delta",
        &json!({ "estimate": fit.estimate, "stability": fit.stability }),
    )?;
    ctx.summary.verdict(
        "window_stability",
        fit.stability.passes,
        format!(
            "delta {:.4} vs shifted window {:.4}, stderr {:.4}",
            fit.stability.delta, fit.stability.shifted_delta, fit.stability.stderr
        ),
        "annuli.csv",
    );
    let c = ctx.potential.offset();
    if c != 0.0 {
        let base = ctx.critical_exponent(&table, &ctx.potential.shifted(-c))?;
        let shift = fit.estimate.delta - base.estimate.delta;
        ctx.summary.put(
            "shift_test",
            &json!({ "offset": c, "delta_unshifted": base.estimate.delta, "shift": shift }),
        )?;
        ctx.summary.verdict(
            "constant_shift",
            (shift - c).abs() <= SHIFT_TOLERANCE,
            format!("delta moved by {shift:.4} for offset {c}"),
            "annuli.csv",
        );
    }
    Ok(())
}

/// Total mass and, on the octagon, median decay slope for each epsilon.
fn epsilon_sensitivity(
    ctx: &Context,
    table: &OrbitTable,
    delta: f64,
    samples: Option<&[UnitTangent]>,
) -> Result<Vec<Vec<String>>> {
    ctx.config
        .measure
        .sensitivity
        .iter()
        .map(|&eps| {
            let m = PattersonMeasure::build(table, &ctx.potential, ctx.measure_params(delta, eps))?;
            let slope = match samples {
                Some(vs) => {
                    let slopes: Vec<f64> = vs
                        .iter()
                        .filter_map(|v| decay_slope(&m, v, &ctx.config.flow.t_grid).ok().map(|d| d.slope))
                        .collect();
                    median(&slopes)
                }
                None => None,
            };
            Ok(vec![
                eps.to_string(),
                m.exponent().to_string(),
                m.atoms().len().to_string(),
                m.total_mass().to_string(),
                cell(slope),
            ])
        })
        .collect()
}

const SENSITIVITY_HEADER: [&str; 5] = ["epsilon", "exponent", "atoms", "total_mass", "median_slope"];

pub fn build_measure(ctx: &mut Context) -> Result<()> {
    let (table, _) = ctx.orbit_table()?;
    let (_, delta) = ctx.measure_delta(&table)?;
    let m = PattersonMeasure::build(&table, &ctx.potential, ctx.measure_params(delta, ctx.config.measure.epsilon))?;
    let rows: Vec<Vec<String>> = m
        .atoms()
        .iter()
        .map(|a| vec![a.position.angle().to_string(), a.weight.to_string()])
        .collect();
    ctx.run.write_csv("measure.csv", &["proj_angle", "weight"], &rows)?;
    let samples = match ctx.group.kind() {
        GroupKind::SurfaceOctagon => Some(ctx.liouville_samples(ctx.config.flow.samples)?),
        GroupKind::FreeSchottky => None,
    };
    let sens = epsilon_sensitivity(ctx, &table, delta, samples.as_deref())?;
    ctx.run.write_csv("epsilon_sensitivity.csv", &SENSITIVITY_HEADER, &sens)?;
    ctx.summary.put(
        "measure",
        &json!({
            "delta_hat": delta,
            "exponent": m.exponent(),
            "shell_width": ctx.config.measure.shell_width,
            "atoms": m.atoms().len(),
            "total_mass": m.total_mass(),
        }),
    )?;
    Ok(())
}

pub fn cocycle_check(ctx: &mut Context) -> Result<()> {
    let (table, _) = ctx.orbit_table()?;
    let (_, delta) = ctx.measure_delta(&table)?;
    let params = ctx.measure_params(delta, ctx.config.measure.epsilon);
    let s = params.exponent;
    let mu_x = PattersonMeasure::build(&table, &ctx.potential, params)?;
    let cc = ctx.config.cocycle.clone();
    let y = DiskPoint::new(cc.second_basepoint[0], cc.second_basepoint[1])?;
    let h = ctx.config.orbit.step;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.config.seed.wrapping_add(3));
    let constant = ctx.potential.is_constant();
    let mut rows = Vec::new();
    let mut good = 0;
    let mut worst_busemann: f64 = 0.0;
    for i in 0..cc.arcs {
        let center = BoundaryPoint::new(rng.gen_range(0.0..std::f64::consts::TAU));
        let arc = Arc::new(center, cc.arc_half_width)?;
        let mu_y = mu_x.rebased(y, &ctx.potential, h, Some(&arc))?;
        let closed = constant.then(|| (s - ctx.potential.offset()) * busemann(center, mu_x.basepoint(), y));
        match rn_check(&mu_x, &mu_y, &arc, &ctx.potential, s, cc.truncation, h) {
            Ok(r) => {
                let err = r.log_error();
                if err <= RN_LOG_TOLERANCE {
                    good += 1;
                }
                if let Some(b) = closed {
                    worst_busemann = worst_busemann.max((r.cocycle.value - b).abs());
                }
                rows.push(vec![
                    i.to_string(),
                    center.angle().to_string(),
                    r.atoms_x.to_string(),
                    r.atoms_y.to_string(),
                    r.ratio.to_string(),
                    r.predicted.to_string(),
                    err.to_string(),
                    r.cocycle.value.to_string(),
                    r.cocycle.convergence_gap.to_string(),
                    cell(closed),
                ]);
            }
            Err(CoreError::SparseArc { found, .. }) => {
                rows.push(vec![
                    i.to_string(),
                    center.angle().to_string(),
                    found.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    cell(closed),
                ]);
            }
            Err(e) => return Err(e.into()),
        }
    }
    ctx.run.write_csv(
        "cocycle.csv",
        &[
            "arc_id",
            "center",
            "atoms_x",
            "atoms_y",
            "ratio",
            "predicted",
            "log_error",
            "cocycle",
            "convergence_gap",
            "busemann_closed_form",
        ],
        &rows,
    )?;
    let fraction = good as f64 / cc.arcs.max(1) as f64;
    ctx.summary.verdict(
        "radon_nikodym",
        fraction >= RN_PASS_FRACTION,
        format!("{good} of {} arcs within {RN_LOG_TOLERANCE} in log ratio", cc.arcs),
        "cocycle.csv",
    );
    if constant {
        ctx.summary.verdict(
            "cocycle_busemann",
            worst_busemann <= BUSEMANN_TOLERANCE,
            format!("largest deviation from the closed form {worst_busemann:.2e}"),
            "cocycle.csv",
        );
    }

    // Equivariance: the measure at g x is the push-forward of the one at x.
    let mut worst_equivariance: f64 = 0.0;
    let mut eq_rows = Vec::new();
    for letter in ctx.group.letters() {
        let word = gibbslab_core::Word::from_letters(vec![letter]);
        let g = ctx.group.letter(letter);
        let moved = table.translate(g, &word)?;
        let mu_gx = PattersonMeasure::build(&moved, &ctx.potential, params)?;
        let err = equivariance_error(&mu_x, &mu_gx, g, &word)?;
        worst_equivariance = worst_equivariance.max(err);
        eq_rows.push(vec![letter.to_string(), err.to_string()]);
    }
    ctx.run.write_csv("equivariance.csv", &["letter", "max_relative_error"], &eq_rows)?;
    ctx.summary.verdict(
        "equivariance",
        worst_equivariance <= EQUIVARIANCE_TOLERANCE,
        format!("largest relative atom deviation {worst_equivariance:.2e}"),
        "equivariance.csv",
    );
    ctx.summary.put(
        "cocycle",
        &json!({
            "exponent": s,
            "arcs": cc.arcs,
            "arcs_within_tolerance": good,
            "max_busemann_deviation": constant.then_some(worst_busemann),
            "max_equivariance_error": worst_equivariance,
        }),
    )?;
    Ok(())
}

/// Largest relative deviation between the atoms of `mu_gx` and the push-forward of
/// `mu_x` by `g`, matching atom `w` of `mu_x` with atom `g_word . w` of `mu_gx`.
pub fn equivariance_error(
    mu_x: &PattersonMeasure,
    mu_gx: &PattersonMeasure,
    g: &gibbslab_core::Isometry,
    g_word: &gibbslab_core::Word,
) -> Result<f64> {
    if mu_x.atoms().len() != mu_gx.atoms().len() {
        bail!("atom counts differ: {} vs {}", mu_x.atoms().len(), mu_gx.atoms().len());
    }
    let index: std::collections::HashMap<&gibbslab_core::Word, usize> =
        mu_gx.atoms().iter().enumerate().map(|(i, a)| (&a.word, i)).collect();
    let mut worst: f64 = 0.0;
    for a in mu_x.atoms() {
        let key = g_word.concat(&a.word);
        let &i = index.get(&key).with_context(|| format!("no atom for word {key}"))?;
        let b = &mu_gx.atoms()[i];
        let weight = (a.weight - b.weight).abs() / a.weight;
        let position = g.apply_boundary(a.position).gap(&b.position);
        worst = worst.max(weight).max(position);
    }
    Ok(worst)
}

fn lambda_estimates(ctx: &Context, samples: &[UnitTangent]) -> Result<(BirkhoffEstimate, f64)> {
    let f = &ctx.config.flow;
    let birkhoff = birkhoff_estimate(&ctx.potential, samples, f.horizon, f.step)?;
    let quadrature = liouville_quadrature(&ctx.potential, &ctx.group, f.quadrature_step)?;
    Ok((birkhoff, quadrature))
}

fn lambda_verdicts(ctx: &mut Context, birkhoff: &BirkhoffEstimate, quadrature: f64, delta: f64) -> Result<()> {
    let rows: Vec<Vec<String>> = birkhoff
        .per_sample
        .iter()
        .enumerate()
        .map(|(i, v)| vec![i.to_string(), v.to_string()])
        .collect();
    ctx.run.write_csv("birkhoff.csv", &["sample_id", "average"], &rows)?;
    ctx.summary.put(
        "lambda",
        &json!({
            "birkhoff": birkhoff.value,
            "birkhoff_spread": birkhoff.spread,
            "horizon": birkhoff.horizon,
            "quadrature": quadrature,
        }),
    )?;
    ctx.summary.verdict(
        "birkhoff_spread",
        birkhoff.spread <= BIRKHOFF_SPREAD,
        format!("spread {:.4} over {} samples", birkhoff.spread, birkhoff.per_sample.len()),
        "birkhoff.csv",
    );
    let gap = (birkhoff.value - quadrature).abs();
    ctx.summary.verdict(
        "lambda_agreement",
        gap <= LAMBDA_AGREEMENT,
        format!("Birkhoff {:.4} vs quadrature {quadrature:.4}", birkhoff.value),
        "birkhoff.csv",
    );
    let lambda = birkhoff.value.max(quadrature);
    ctx.summary.verdict(
        "corollary",
        lambda <= delta + COROLLARY_SLACK,
        format!("lambda {lambda:.4} against delta {delta:.4}"),
        "annuli.csv",
    );
    Ok(())
}

pub fn lambda_estimate(ctx: &mut Context) -> Result<()> {
    let (table, _) = ctx.orbit_table()?;
    let (fit, delta) = ctx.measure_delta(&table)?;
    ctx.run
        .write_csv("annuli.csv", &["n", "count", "sum", "log_sum"], &annulus_rows(&table, &fit))?;
    let samples = ctx.liouville_samples(ctx.config.flow.samples)?;
    let (birkhoff, quadrature) = lambda_estimates(ctx, &samples)?;
    lambda_verdicts(ctx, &birkhoff, quadrature, delta)
}

pub fn decay_experiment(ctx: &mut Context) -> Result<()> {
    let (table, _) = ctx.orbit_table()?;
    let (fit, delta) = ctx.measure_delta(&table)?;
    ctx.run
        .write_csv("annuli.csv", &["n", "count", "sum", "log_sum"], &annulus_rows(&table, &fit))?;
    let m = PattersonMeasure::build(&table, &ctx.potential, ctx.measure_params(delta, ctx.config.measure.epsilon))?;
    let samples = ctx.liouville_samples(ctx.config.flow.samples)?;
    let grid = ctx.config.flow.t_grid.clone();
    let h = ctx.config.flow.step;

    let mut rows = Vec::new();
    let mut slope_rows = Vec::new();
    let mut slopes = Vec::new();
    let mut empty = 0;
    for (i, v) in samples.iter().enumerate() {
        let partials = ctx.potential.flow_partials(v, &grid, h)?;
        match decay_slope(&m, v, &grid) {
            Ok(d) => {
                empty += d.empty_shadow_count;
                for (&t, &p) in grid.iter().zip(&partials) {
                    let log = d.t_grid.iter().position(|&s| s == t).map(|j| d.log_masses[j]);
                    rows.push(vec![i.to_string(), t.to_string(), cell(log), p.to_string()]);
                }
                let series: Vec<(f64, f64)> = d.t_grid.iter().copied().zip(d.log_masses.iter().copied()).collect();
                ctx.run.write_text(
                    &format!("decay_{i:03}.svg"),
                    &svg_polyline(&format!("sample {i}: slope {:.3}", d.slope), "t", "log mass", &series),
                )?;
                slope_rows.push(vec![i.to_string(), d.slope.to_string(), d.residual.to_string(), d.empty_shadow_count.to_string()]);
                slopes.push(d.slope);
            }
            Err(CoreError::TooFewPoints { found, .. }) => {
                empty += grid.len() - found;
                for (&t, &p) in grid.iter().zip(&partials) {
                    rows.push(vec![i.to_string(), t.to_string(), String::new(), p.to_string()]);
                }
                slope_rows.push(vec![i.to_string(), String::new(), String::new(), (grid.len() - found).to_string()]);
            }
            Err(e) => return Err(e.into()),
        }
    }
    ctx.run
        .write_csv("decay.csv", &["sample_id", "t", "log_mass", "birkhoff_partial"], &rows)?;
    ctx.run
        .write_csv("slopes.csv", &["sample_id", "slope", "residual", "empty_shadows"], &slope_rows)?;
    let total = samples.len() * grid.len();
    let empty_fraction = empty as f64 / total.max(1) as f64;
    if empty_fraction > MAX_EMPTY_FRACTION {
        ctx.summary.health.push(format!(
            "{empty} of {total} shadows carried no atoms ({:.0}%)",
            100.0 * empty_fraction
        ));
    }

    let (birkhoff, quadrature) = lambda_estimates(ctx, &samples)?;
    let median_slope = median(&slopes);
    let predicted = -delta + birkhoff.value;
    ctx.summary.put(
        "decay",
        &json!({
            "delta_hat": delta,
            "delta_stderr": fit.estimate.stderr,
            "exponent": m.exponent(),
            "slopes": slopes,
            "median_slope": median_slope,
            "predicted_slope": predicted,
            "empty_shadows": empty,
        }),
    )?;
    ctx.summary.verdict(
        "decay_slope",
        median_slope.is_some_and(|s| (s - predicted).abs() <= DECAY_TOLERANCE),
        format!(
            "median slope {} against -delta + lambda = {predicted:.4}",
            median_slope.map_or_else(|| "none".to_string(), |m| format!("{m:.4}"))
        ),
        "slopes.csv",
    );
    lambda_verdicts(ctx, &birkhoff, quadrature, delta)?;
    let sens = epsilon_sensitivity(ctx, &table, delta, Some(&samples))?;
    ctx.run.write_csv("epsilon_sensitivity.csv", &SENSITIVITY_HEADER, &sens)?;
    Ok(())
}

pub fn lemma_checks(ctx: &mut Context) -> Result<()> {
    let (table, _) = ctx.orbit_table()?;
    let (_, delta) = ctx.measure_delta(&table)?;
    let params = ctx.measure_params(delta, ctx.config.measure.epsilon);
    let lc = ctx.config.lemmas.clone();
    let seed = ctx.config.seed;

    let cone = cone_mass_check(
        &ctx.group,
        &table,
        &ctx.potential,
        params,
        lc.max_shift,
        lc.cone_samples,
        seed.wrapping_add(1),
    )?;
    let rows: Vec<Vec<String>> = cone
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| vec![i.to_string(), s.word.to_string(), s.xi.angle().to_string(), s.fraction.to_string()])
        .collect();
    ctx.run.write_csv("cone_mass.csv", &["sample_id", "word", "xi", "fraction"], &rows)?;
    ctx.summary.verdict(
        "cone_mass",
        cone.min_fraction > CONE_MASS_FLOOR,
        format!(
            "smallest relative mass {:.4} at word {}",
            cone.min_fraction,
            if cone.worst.word.is_empty() { "(identity)".to_string() } else { cone.worst.word.to_string() }
        ),
        "cone_mass.csv",
    );

    let [t0, t1] = lc.inclusion_t_range;
    let inclusion = shadow_inclusion_check(lc.inclusion_samples, (t0, t1), lc.k_max, seed.wrapping_add(2))?;
    let rows: Vec<Vec<String>> = inclusion
        .failure_counts
        .iter()
        .map(|(k, n)| vec![k.to_string(), n.to_string()])
        .collect();
    ctx.run.write_csv("shadow_inclusion.csv", &["k", "failures"], &rows)?;
    ctx.summary.verdict(
        "shadow_inclusion",
        inclusion.k.is_some(),
        match inclusion.k {
            Some(k) => format!("K = {k} holds on {} samples, threshold N = {}", inclusion.samples, cell(inclusion.n_threshold)),
            None => format!("no K <= {} holds on every sample", lc.k_max),
        },
        "shadow_inclusion.csv",
    );

    let ns = north_south_check(&ctx.group, lc.north_south_half_width, lc.north_south_max_iterations)?;
    let rows: Vec<Vec<String>> = ns
        .iter()
        .map(|c| {
            vec![
                c.letter.to_string(),
                c.repelling.angle().to_string(),
                c.attracting.angle().to_string(),
                c.iterations.map_or_else(String::new, |n| n.to_string()),
            ]
        })
        .collect();
    ctx.run
        .write_csv("north_south.csv", &["letter", "repelling", "attracting", "iterations"], &rows)?;
    let worst = ns.iter().map(|c| c.iterations).max().flatten();
    let converged = ns.iter().all(|c| c.iterations.is_some_and(|n| n <= MAX_NORTH_SOUTH));
    ctx.summary.verdict(
        "north_south",
        converged,
        format!("largest iteration count {}", worst.map_or("none".into(), |n| n.to_string())),
        "north_south.csv",
    );

    let mut bounded = Value::Null;
    if ctx.group.kind() == GroupKind::SurfaceOctagon {
        let samples = ctx.liouville_samples(lc.bounded_samples)?;
        let m = PattersonMeasure::build(&table, &ctx.potential, params)?;
        let mut rows = Vec::new();
        let mut trends = Vec::new();
        let mut d_max: f64 = 0.0;
        for (i, v) in samples.iter().enumerate() {
            let values =
                bounded_difference_check(&ctx.potential, params.exponent, &m, v, &lc.bounded_t_grid, ctx.config.flow.step)?;
            for b in &values {
                if let Some(q) = b.value {
                    d_max = d_max.max(q.abs());
                }
                rows.push(vec![
                    i.to_string(),
                    b.t.to_string(),
                    cell(b.value),
                    b.birkhoff_partial.to_string(),
                    cell(b.log_mass_x),
                    cell(b.log_mass_y),
                ]);
            }
            trends.push(bounded_difference_trend(&values)?);
        }
        ctx.run.write_csv(
            "bounded_difference.csv",
            &["sample_id", "t", "value", "birkhoff_partial", "log_mass_x", "log_mass_y"],
            &rows,
        )?;
        let worst_trend = trends.iter().fold(0.0f64, |a, t| a.max(t.abs()));
        ctx.summary.verdict(
            "bounded_difference",
            worst_trend <= TREND_TOLERANCE,
            format!("largest |trend| {worst_trend:.4} over {} samples, D = {d_max:.4}", trends.len()),
            "bounded_difference.csv",
        );
        bounded = json!({ "trends": trends, "d_empirical": d_max });
    }

    ctx.summary.put(
        "lemmas",
        &json!({
            "c_empirical": cone.min_fraction,
            "k": inclusion.k,
            "n_threshold": inclusion.n_threshold,
            "inclusion_failures": inclusion.failure_counts,
            "north_south_iterations": ns.iter().map(|c| c.iterations).collect::<Vec<_>>(),
            "bounded_difference": bounded,
        }),
    )?;
    Ok(())
}
