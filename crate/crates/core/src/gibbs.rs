//! Weighted orbit counting, the critical exponent, atomic Patterson measures and the Gibbs cocycle.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::measure_arc;
use crate::error::{Error, Result};
use crate::group::{OrbitTable, Word};
use crate::hyperbolic::{busemann, dist, tangent_towards, Arc, BoundaryPoint, DiskPoint};
use crate::potential::{table_integrals, Potential};
use crate::stats::fit_line;

/// Smallest admissible gap between the measure exponent and the estimated critical exponent.
pub const MIN_EXPONENT_MARGIN: f64 = 0.01;

/// Smallest enumeration radius accepted for building a measure.
pub const MIN_TABLE_RADIUS: f64 = 8.0;

/// Fewest regression points accepted by [`estimate_critical_exponent`].
pub const MIN_WINDOW_LEN: usize = 4;

/// Fewest atoms an arc must hold on each side of a Radon-Nikodym comparison.
pub const MIN_ARC_ATOMS: usize = 50;

/// `a_n = sum over n - 1 < d(x, gamma y) <= n of exp(int_x^{gamma y} F)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnulusSums {
    pub sums: BTreeMap<i64, f64>,
    /// Largest `n` whose annulus is known to be completely enumerated.
    pub complete_max: i64,
}

impl AnnulusSums {
    pub fn from_values(sums: BTreeMap<i64, f64>, complete_max: i64) -> Self {
        Self { sums, complete_max }
    }

    pub fn get(&self, n: i64) -> f64 {
        self.sums.get(&n).copied().unwrap_or(0.0)
    }
}

pub fn annulus_sums(table: &OrbitTable, potential: &Potential) -> Result<AnnulusSums> {
    let integrals = table_integrals(table, potential)?;
    let mut sums = BTreeMap::new();
    for (n, members) in table.annuli() {
        let a: f64 = members.iter().map(|&i| integrals[i].exp()).sum();
        sums.insert(n, a);
    }
    Ok(AnnulusSums {
        sums,
        complete_max: table.complete_annulus_max(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalExponentEstimate {
    pub delta: f64,
    pub window: (i64, i64),
    pub residual: f64,
    pub stderr: f64,
}

/// Least-squares slope of `log a_n` against `n` over `window`.
pub fn estimate_critical_exponent(sums: &AnnulusSums, window: (i64, i64)) -> Result<CriticalExponentEstimate> {
    let (n0, n1) = window;
    if n1 > sums.complete_max {
        return Err(Error::WindowOutsideCompleteRange {
            n0,
            n1,
            complete: sums.complete_max,
        });
    }
    if n1 < n0 || ((n1 - n0 + 1) as usize) < MIN_WINDOW_LEN {
        return Err(Error::InvalidArgument(format!(
            "window [{n0}, {n1}] shorter than {MIN_WINDOW_LEN} annuli"
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for n in n0..=n1 {
        let a = sums.get(n);
        if !(a > 0.0) {
            return Err(Error::EmptyAnnulus(n));
        }
        xs.push(n as f64);
        ys.push(a.ln());
    }
    let fit = fit_line(&xs, &ys).ok_or(Error::Degenerate("critical exponent regression"))?;
    Ok(CriticalExponentEstimate {
        delta: fit.slope,
        window,
        residual: fit.max_residual,
        stderr: fit.slope_stderr,
    })
}

/// Sensitivity of the estimate to dropping the first annulus of the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowStability {
    pub delta: f64,
    pub shifted_delta: f64,
    pub stderr: f64,
    pub passes: bool,
}

/// Passes when moving `n0` up by one moves the estimate by less than three standard errors.
pub fn window_stability(sums: &AnnulusSums, window: (i64, i64)) -> Result<WindowStability> {
    let base = estimate_critical_exponent(sums, window)?;
    let shifted = estimate_critical_exponent(sums, (window.0 + 1, window.1))?;
    Ok(WindowStability {
        delta: base.delta,
        shifted_delta: shifted.delta,
        stderr: base.stderr,
        passes: (shifted.delta - base.delta).abs() <= 3.0 * base.stderr,
    })
}

/// `sum over enumerated gamma of exp(int_x^{gamma y} (F - s))`.
pub fn poincare_partial(table: &OrbitTable, potential: &Potential, s: f64) -> Result<f64> {
    let integrals = table_integrals(table, potential)?;
    Ok(table
        .points()
        .iter()
        .zip(&integrals)
        .map(|(p, i)| (i - s * p.distance).exp())
        .sum())
}

/// How an atomic measure is cut out of an orbit table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureParams {
    /// The exponent `s` in the atom weights `exp(int F - s d)`.
    pub exponent: f64,
    /// The estimated critical exponent `s` is checked against.
    pub critical_exponent: f64,
    /// Keep only atoms with `d(x, gamma y) > radius - shell_width`; `None` keeps every atom.
    pub shell_width: Option<f64>,
}

impl MeasureParams {
    /// `s = delta_hat + epsilon` over every enumerated atom.
    pub fn new(critical_exponent: f64, epsilon: f64) -> Self {
        Self {
            exponent: critical_exponent + epsilon,
            critical_exponent,
            shell_width: None,
        }
    }

    pub fn with_shell(self, width: f64) -> Self {
        Self {
            shell_width: Some(width),
            ..self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Atom {
    pub word: Word,
    /// The orbit point `gamma y` carrying the atom.
    pub point: DiskPoint,
    pub position: BoundaryPoint,
    pub weight: f64,
}

/// Finite atomic approximation of the measure `mu_x`, atoms sorted by boundary angle.
#[derive(Debug, Clone, Serialize)]
pub struct PattersonMeasure {
    basepoint: DiskPoint,
    exponent: f64,
    potential: String,
    atoms: Vec<Atom>,
    total_mass: f64,
}

impl PattersonMeasure {
    /// Atoms `exp(int_x^{gamma y} F - s d(x, gamma y))` at the projections of the orbit points from `x`.
    ///
    /// The orbit point at the basepoint itself, if any, has no projection and is skipped.
    pub fn build(table: &OrbitTable, potential: &Potential, params: MeasureParams) -> Result<Self> {
        let s = params.exponent;
        if s < params.critical_exponent + MIN_EXPONENT_MARGIN {
            return Err(Error::BelowCriticalExponent {
                s,
                delta: params.critical_exponent,
            });
        }
        if table.radius < MIN_TABLE_RADIUS {
            return Err(Error::InvalidArgument(format!(
                "orbit radius {} below {MIN_TABLE_RADIUS}",
                table.radius
            )));
        }
        let inner = params.shell_width.map_or(f64::NEG_INFINITY, |w| table.radius - w);
        let integrals = table_integrals(table, potential)?;
        let atoms = table
            .points()
            .iter()
            .zip(&integrals)
            .filter(|(p, _)| p.distance > inner)
            .filter_map(|(p, i)| {
                p.projection.map(|position| Atom {
                    word: p.word.clone(),
                    point: p.point,
                    position,
                    weight: (i - s * p.distance).exp(),
                })
            })
            .collect();
        Ok(Self::from_atoms(table.x, s, potential.label(), atoms))
    }

    fn from_atoms(basepoint: DiskPoint, exponent: f64, potential: String, mut atoms: Vec<Atom>) -> Self {
        atoms.sort_by(|a, b| {
            a.position
                .angle()
                .total_cmp(&b.position.angle())
                .then_with(|| a.word.cmp(&b.word))
        });
        let total_mass = atoms.iter().map(|a| a.weight).sum();
        Self {
            basepoint,
            exponent,
            potential,
            atoms,
            total_mass,
        }
    }

    /// The same atoms reweighted from basepoint `y`: `exp(int_y^{gamma y} F - s d(y, gamma y))`.
    ///
    /// Atoms keep their boundary positions so both measures share a support. With
    /// `within` set, only atoms in that arc are kept.
    pub fn rebased(&self, y: DiskPoint, potential: &Potential, h: f64, within: Option<&Arc>) -> Result<Self> {
        if potential.label() != self.potential {
            return Err(Error::PotentialMismatch {
                expected: self.potential.clone(),
                found: Some(potential.label()),
            });
        }
        let s = self.exponent;
        let kept: Vec<&Atom> = self
            .atoms
            .iter()
            .filter(|a| within.is_none_or(|arc| arc.contains(&a.position)))
            .collect();
        let atoms = kept
            .par_iter()
            .map(|a| {
                let d = dist(y, a.point);
                let integral = potential.line_integral(y, a.point, h)?;
                Ok(Atom {
                    weight: (integral - s * d).exp(),
                    ..(*a).clone()
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_atoms(y, s, self.potential.clone(), atoms))
    }

    pub fn basepoint(&self) -> DiskPoint {
        self.basepoint
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn potential_label(&self) -> &str {
        &self.potential
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CocycleValue {
    pub value: f64,
    pub truncation: f64,
    /// `|value(T) - value(T / 2)|`.
    pub convergence_gap: f64,
}

/// Shortest truncation accepted by [`gibbs_cocycle`].
pub const MIN_COCYCLE_TRUNCATION: f64 = 10.0;

/// `C_{F - delta, xi}(x, y)`, truncated at `xi_T` on the ray from `x` to `xi`.
pub fn gibbs_cocycle(
    potential: &Potential,
    delta: f64,
    xi: BoundaryPoint,
    x: DiskPoint,
    y: DiskPoint,
    truncation: f64,
    h: f64,
) -> Result<CocycleValue> {
    if !(truncation >= MIN_COCYCLE_TRUNCATION) {
        return Err(Error::InvalidArgument(format!(
            "cocycle truncation {truncation} below {MIN_COCYCLE_TRUNCATION}"
        )));
    }
    let value = truncated_cocycle(potential, delta, xi, x, y, truncation, h)?;
    let half = truncated_cocycle(potential, delta, xi, x, y, truncation / 2.0, h)?;
    Ok(CocycleValue {
        value,
        truncation,
        convergence_gap: (value - half).abs(),
    })
}

/// `int_y^{xi_t} (F - delta) - int_x^{xi_t} (F - delta)`, up to `O(e^{-t})`.
///
/// The segment from `y` to `xi_t` is replaced by the ray from `y` to `xi` run for
/// `d(y, xi_t) ~ t - B_xi(x, y)`: the two agree to within `e^{-t}`, while aiming at
/// `xi_t` itself would magnify the rounding in the initial direction by `sinh t`.
fn truncated_cocycle(
    potential: &Potential,
    delta: f64,
    xi: BoundaryPoint,
    x: DiskPoint,
    y: DiskPoint,
    t: f64,
    h: f64,
) -> Result<f64> {
    if x == y {
        return Ok(0.0);
    }
    let length = t - busemann(xi, x, y);
    let from_y = potential.flow_integral(&tangent_towards(y, &xi)?, length, h)? - delta * length;
    let from_x = potential.flow_integral(&tangent_towards(x, &xi)?, t, h)? - delta * t;
    Ok(from_y - from_x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RnCheck {
    /// `mu_x(arc) / mu_y(arc)`.
    pub ratio: f64,
    /// `exp(-C_{F - delta, xi}(x, y))` at the arc centre.
    pub predicted: f64,
    pub cocycle: CocycleValue,
    pub atoms_x: usize,
    pub atoms_y: usize,
}

impl RnCheck {
    pub fn log_error(&self) -> f64 {
        (self.ratio.ln() - self.predicted.ln()).abs()
    }
}

/// Compares a measure ratio on a short arc with the Gibbs cocycle at its centre.
#[allow(clippy::too_many_arguments)]
pub fn rn_check(
    mu_x: &PattersonMeasure,
    mu_y: &PattersonMeasure,
    arc: &Arc,
    potential: &Potential,
    delta: f64,
    truncation: f64,
    h: f64,
) -> Result<RnCheck> {
    if arc.half_width() > 0.1 {
        return Err(Error::InvalidArgument(format!(
            "arc half-width {} above 0.1",
            arc.half_width()
        )));
    }
    let qx = measure_arc(mu_x, arc);
    let qy = measure_arc(mu_y, arc);
    let found = qx.atom_count.min(qy.atom_count);
    if found < MIN_ARC_ATOMS {
        return Err(Error::SparseArc {
            found,
            required: MIN_ARC_ATOMS,
        });
    }
    let cocycle = gibbs_cocycle(
        potential,
        delta,
        arc.center,
        mu_x.basepoint(),
        mu_y.basepoint(),
        truncation,
        h,
    )?;
    Ok(RnCheck {
        ratio: qx.mass / qy.mass,
        predicted: (-cocycle.value).exp(),
        cocycle,
        atoms_x: qx.atom_count,
        atoms_y: qy.atom_count,
    })
}
