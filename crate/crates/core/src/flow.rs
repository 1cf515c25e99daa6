//! Liouville sampling on the octagon surface, Birkhoff averages, and shadow-decay regressions.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{measure_arc, shadow_arc};
use crate::error::{Error, Result};
use crate::gibbs::PattersonMeasure;
use crate::group::{octagon_circumradius, octagon_inradius, GeneratorSet, GroupKind};
use crate::hyperbolic::{dist, tangent_towards, DiskPoint, UnitTangent};
use crate::potential::{simpson_panels, simpson_weight, Potential};
use crate::stats::fit_line;

/// Acceptance rate below which Liouville sampling gives up.
pub const REJECTION_FLOOR: f64 = 0.01;

/// Fewest non-empty shadows a decay regression accepts.
pub const MIN_DECAY_POINTS: usize = 4;

fn require_octagon(group: &GeneratorSet) -> Result<()> {
    if group.kind() == GroupKind::SurfaceOctagon {
        Ok(())
    } else {
        Err(Error::NonCompactDomain)
    }
}

/// Whether `p` lies in the Dirichlet domain of the origin.
fn in_domain(group: &GeneratorSet, p: DiskPoint) -> Result<bool> {
    let here = dist(DiskPoint::ORIGIN, p);
    for g in group.generators() {
        for m in [*g, g.inverse()] {
            if dist(m.apply_point(DiskPoint::ORIGIN)?, p) < here {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Euclidean radius of the disk the octagon is inscribed in.
fn proposal_radius() -> f64 {
    (octagon_circumradius() / 2.0).tanh()
}

/// Unit tangent vectors with basepoints uniform in hyperbolic area over the
/// octagon and uniform directions.
///
/// Points are proposed uniformly in the Euclidean disk around the octagon and
/// accepted with probability proportional to the area density `4 / (1 - r^2)^2`.
pub fn sample_liouville(group: &GeneratorSet, seed: u64, count: usize) -> Result<Vec<UnitTangent>> {
    require_octagon(group)?;
    let rho = proposal_radius();
    let peak = (1.0 - rho * rho).powi(-2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut proposals = 0usize;
    while out.len() < count {
        proposals += 1;
        if proposals > 1000 && (out.len() as f64) < REJECTION_FLOOR * proposals as f64 {
            return Err(Error::RejectionFloor(out.len() as f64 / proposals as f64));
        }
        let r = rho * rng.gen::<f64>().sqrt();
        let angle = rng.gen_range(0.0..TAU);
        let accept = (1.0 - r * r).powi(-2) / peak;
        let keep = rng.gen::<f64>() < accept;
        let direction = rng.gen_range(0.0..TAU);
        if !keep {
            continue;
        }
        let p = DiskPoint::new(r * angle.cos(), r * angle.sin())?;
        if in_domain(group, p)? {
            out.push(UnitTangent::new(p, direction));
        }
    }
    Ok(out)
}

/// Monte Carlo estimate of the octagon's hyperbolic area from Euclidean-uniform proposals.
pub fn estimate_domain_area(group: &GeneratorSet, seed: u64, count: usize) -> Result<f64> {
    require_octagon(group)?;
    let rho = proposal_radius();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = 0.0;
    for _ in 0..count {
        let r = rho * rng.gen::<f64>().sqrt();
        let angle = rng.gen_range(0.0..TAU);
        let p = DiskPoint::new(r * angle.cos(), r * angle.sin())?;
        if in_domain(group, p)? {
            acc += 4.0 / (1.0 - r * r).powi(2);
        }
    }
    Ok(std::f64::consts::PI * rho * rho * acc / count as f64)
}

/// `(1/T) int_0^T F(phi_s v) ds`.
pub fn birkhoff_average(potential: &Potential, v: &UnitTangent, horizon: f64, h: f64) -> Result<f64> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidArgument(format!("horizon {horizon} must be positive")));
    }
    Ok(potential.flow_integral(v, horizon, h)? / horizon)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BirkhoffEstimate {
    /// Mean of the per-sample averages.
    pub value: f64,
    pub horizon: f64,
    pub per_sample: Vec<f64>,
    /// Largest minus smallest per-sample average.
    pub spread: f64,
}

pub fn birkhoff_estimate(potential: &Potential, samples: &[UnitTangent], horizon: f64, h: f64) -> Result<BirkhoffEstimate> {
    if samples.is_empty() {
        return Err(Error::TooFewPoints { found: 0, required: 1 });
    }
    let per_sample = samples
        .par_iter()
        .map(|v| birkhoff_average(potential, v, horizon, h))
        .collect::<Result<Vec<_>>>()?;
    let value = per_sample.iter().sum::<f64>() / per_sample.len() as f64;
    let lo = per_sample.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = per_sample.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(BirkhoffEstimate {
        value,
        horizon,
        per_sample,
        spread: hi - lo,
    })
}

/// Mean of `F` over the octagon with respect to hyperbolic area.
///
/// Tensor Simpson rule in geodesic polar coordinates, one wedge per side. Each
/// wedge is swept by arclength `tau` along its side, at distance `p` (the
/// inradius) from the centre, so that the radial reach `cosh rho = cosh p cosh tau`
/// and the polar angle `tan theta = tanh tau / sinh p` stay smooth up to the corners.
pub fn liouville_quadrature(potential: &Potential, group: &GeneratorSet, grid_step: f64) -> Result<f64> {
    require_octagon(group)?;
    if !potential.is_basepoint_only() {
        return Err(Error::InvalidArgument("potential depends on direction".into()));
    }
    if !(grid_step > 0.0) {
        return Err(Error::InvalidArgument(format!("grid step {grid_step} must be positive")));
    }
    let p = octagon_inradius();
    let (cosh_p, sinh_p) = (p.cosh(), p.sinh());
    let half_side = (sinh_p * FRAC_PI_8.tan()).atanh();
    let wedge = |k: usize| -> Result<(f64, f64)> {
        let facing = k as f64 * FRAC_PI_4;
        let nt = simpson_panels(2.0 * half_side, grid_step);
        let dt = 2.0 * half_side / nt as f64;
        let (mut integral, mut area) = (0.0, 0.0);
        for i in 0..=nt {
            let tau = -half_side + dt * i as f64;
            let q = tau.tanh() / sinh_p;
            let theta = facing + q.atan();
            let dtheta = (1.0 - tau.tanh().powi(2)) / sinh_p / (1.0 + q * q);
            let reach = (cosh_p * tau.cosh()).acosh();
            let nr = simpson_panels(reach, grid_step);
            let dr = reach / nr as f64;
            let wt = simpson_weight(i, nt) * dt / 3.0 * dtheta;
            for j in 1..=nr {
                let rho = dr * j as f64;
                let w = wt * simpson_weight(j, nr) * dr / 3.0 * rho.sinh();
                integral += w * potential.eval_point(DiskPoint::from_polar(rho, theta)?)?;
                area += w;
            }
        }
        Ok((integral, area))
    };
    let parts = (0..8).into_par_iter().map(wedge).collect::<Result<Vec<_>>>()?;
    let integral: f64 = parts.iter().map(|p| p.0).sum();
    let area: f64 = parts.iter().map(|p| p.1).sum();
    Ok(integral / area)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecaySlopeResult {
    pub slope: f64,
    /// Grid points whose shadow carried mass, in order.
    pub t_grid: Vec<f64>,
    pub log_masses: Vec<f64>,
    pub residual: f64,
    pub empty_shadow_count: usize,
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("time grid must be increasing".into()));
    }
    Ok(())
}

/// Regression slope of `log mu_x(B_{x,t}(xi))` against `t`, with `xi` the forward endpoint of `v`.
pub fn decay_slope(measure: &PattersonMeasure, v: &UnitTangent, t_grid: &[f64]) -> Result<DecaySlopeResult> {
    check_grid(t_grid)?;
    let x = measure.basepoint();
    let xi = v.forward_endpoint();
    let mut ts = Vec::new();
    let mut logs = Vec::new();
    let mut empty = 0;
    for &t in t_grid {
        let q = measure_arc(measure, &shadow_arc(x, t, xi)?);
        if q.mass > 0.0 {
            ts.push(t);
            logs.push(q.mass.ln());
        } else {
            empty += 1;
        }
    }
    if ts.len() < MIN_DECAY_POINTS {
        return Err(Error::TooFewPoints {
            found: ts.len(),
            required: MIN_DECAY_POINTS,
        });
    }
    let fit = fit_line(&ts, &logs).ok_or(Error::Degenerate("decay regression"))?;
    Ok(DecaySlopeResult {
        slope: fit.slope,
        t_grid: ts,
        log_masses: logs,
        residual: fit.max_residual,
        empty_shadow_count: empty,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundedDifference {
    pub t: f64,
    /// `t delta - int_0^t F + ln mu_x(B) - ln mu_y(B)`, `None` when either shadow is empty.
    pub value: Option<f64>,
    pub birkhoff_partial: f64,
    pub log_mass_x: Option<f64>,
    pub log_mass_y: Option<f64>,
}

/// The quantity `t delta - int_0^t F(gamma'(s)) ds + ln mu_x(B_{x,t}(xi)) - ln mu_y(B_{x,t}(xi))`
/// along the ray `gamma` from `x = mu_x.basepoint()` to `xi`, the forward endpoint of `v`,
/// with `y = gamma(t)`.
///
/// `mu_y` reweights the atoms of `mu_x` from `y`; only atoms in the shadow are touched.
pub fn bounded_difference_check(
    potential: &Potential,
    delta: f64,
    measure: &PattersonMeasure,
    v: &UnitTangent,
    t_grid: &[f64],
    h: f64,
) -> Result<Vec<BoundedDifference>> {
    check_grid(t_grid)?;
    let x = measure.basepoint();
    let xi = v.forward_endpoint();
    let ray = tangent_towards(x, &xi)?;
    let partials = potential.flow_partials(&ray, t_grid, h)?;
    t_grid
        .iter()
        .zip(partials)
        .map(|(&t, integral)| {
            let arc = shadow_arc(x, t, xi)?;
            let y = ray.flow(t)?.base;
            let mass_x = measure_arc(measure, &arc).mass;
            let rebased = measure.rebased(y, potential, h, Some(&arc))?;
            let mass_y = rebased.total_mass();
            let log = |m: f64| (m > 0.0).then(|| m.ln());
            let (lx, ly) = (log(mass_x), log(mass_y));
            Ok(BoundedDifference {
                t,
                value: lx.zip(ly).map(|(a, b)| t * delta - integral + a - b),
                birkhoff_partial: integral,
                log_mass_x: lx,
                log_mass_y: ly,
            })
        })
        .collect()
}

/// Regression slope of the bounded-difference values over their non-empty grid points.
pub fn bounded_difference_trend(values: &[BoundedDifference]) -> Result<f64> {
    let (ts, qs): (Vec<f64>, Vec<f64>) = values.iter().filter_map(|b| b.value.map(|q| (b.t, q))).unzip();
    if ts.len() < MIN_DECAY_POINTS {
        return Err(Error::TooFewPoints {
            found: ts.len(),
            required: MIN_DECAY_POINTS,
        });
    }
    Ok(fit_line(&ts, &qs).ok_or(Error::Degenerate("trend regression"))?.slope)
}
