//! Group-invariant potentials on the unit tangent bundle and their integrals along geodesics.
//!
//! Both families depend on the base point only. A bump-sum potential is
//! `offset + A * sum_gamma phi(d(p, gamma x0) / r)` with the smooth profile
//! `phi(s) = exp(1 - 1/(1 - s^2))` on `|s| < 1`. It is evaluated by folding the
//! base point into the octagon and summing over the few orbit points of `x0`
//! near the fundamental domain.
//!
//! Line integrals walk the geodesic in steps of [`WALK_STEP`], re-folding the
//! tangent vector after each step so coordinates never approach the boundary
//! circle. On each step every nearby bump is integrated in closed-form
//! geometry: for a bump centre at perpendicular distance `rho` from the
//! geodesic and foot parameter `s0`, `cosh d(s) = cosh rho cosh(s - s0)`. The
//! profile is then integrated by composite Simpson over the part of the step
//! inside its support.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::{enumerate_orbit, EnumerationOptions, GeneratorSet, GroupKind, OrbitTable};
use crate::hyperbolic::{dist, tangent_towards, DiskPoint, Isometry, UnitTangent};

/// Default Simpson step along geodesics.
pub const DEFAULT_STEP: f64 = 0.01;

/// Arclength advanced between two re-foldings of the walker.
pub const WALK_STEP: f64 = 0.5;

/// Floor on the Simpson panel count per bump crossing, so grazing crossings stay resolved.
const MIN_CROSSING_PANELS: usize = 32;

/// The bump profile `exp(1 - 1/(1 - s^2))`, zero for `|s| >= 1`.
pub fn bump_profile(s: f64) -> f64 {
    let q = 1.0 - s * s;
    if q <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / q).exp()
    }
}

#[derive(Debug, Clone)]
pub struct BumpSum {
    amplitude: f64,
    radius: f64,
    center: DiskPoint,
    offset: f64,
    group: GeneratorSet,
    /// Orbit points of the centre close enough to the fold domain to matter.
    local_centers: Vec<DiskPoint>,
}

#[derive(Debug, Clone)]
pub enum Potential {
    Constant { level: f64 },
    BumpSum(BumpSum),
}

impl Potential {
    pub fn constant(level: f64) -> Self {
        Potential::Constant { level }
    }

    /// Sum of bumps of height `amplitude` and radius `radius` over the orbit of `center`.
    pub fn bump(group: &GeneratorSet, amplitude: f64, radius: f64, center: DiskPoint) -> Result<Self> {
        if group.kind() != GroupKind::SurfaceOctagon {
            return Err(Error::NonCompactDomain);
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(format!("bump radius {radius} must be positive")));
        }
        let domain = group.domain_radius().ok_or(Error::NonCompactDomain)?;
        let reach = domain + WALK_STEP + radius + 0.05;
        let local = enumerate_orbit(group, DiskPoint::ORIGIN, center, reach, EnumerationOptions::default())?;
        Ok(Potential::BumpSum(BumpSum {
            amplitude,
            radius,
            center,
            offset: 0.0,
            group: group.clone(),
            local_centers: local.points().iter().map(|p| p.point).collect(),
        }))
    }

    /// `F + c`.
    pub fn shifted(&self, c: f64) -> Potential {
        match self {
            Potential::Constant { level } => Potential::Constant { level: level + c },
            Potential::BumpSum(b) => Potential::BumpSum(BumpSum {
                offset: b.offset + c,
                ..b.clone()
            }),
        }
    }

    /// Canonical description, including any constant offset.
    pub fn label(&self) -> String {
        match self {
            Potential::Constant { level } => format!("constant(level={level})"),
            Potential::BumpSum(b) => format!("{},offset={})", self.shape_label().trim_end_matches(')'), b.offset),
        }
    }

    /// Description of the potential with its constant part removed.
    ///
    /// Orbit tables store integrals of this shape; the constant part is added back as `offset * d`.
    pub fn shape_label(&self) -> String {
        match self {
            Potential::Constant { .. } => "constant".to_string(),
            Potential::BumpSum(b) => format!(
                "bump(amplitude={},radius={},center=({},{}))",
                b.amplitude,
                b.radius,
                b.center.re(),
                b.center.im()
            ),
        }
    }

    /// The constant part: the level of a constant potential, the offset of a bump sum.
    pub fn offset(&self) -> f64 {
        match self {
            Potential::Constant { level } => *level,
            Potential::BumpSum(b) => b.offset,
        }
    }

    /// Both families ignore the direction of the tangent vector.
    pub fn is_basepoint_only(&self) -> bool {
        true
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Potential::Constant { .. })
    }

    pub fn eval(&self, v: &UnitTangent) -> Result<f64> {
        self.eval_point(v.base)
    }

    pub fn eval_point(&self, p: DiskPoint) -> Result<f64> {
        match self {
            Potential::Constant { level } => Ok(*level),
            Potential::BumpSum(b) => {
                let (folded, _) = b.group.fold_to_domain(p)?;
                let sum: f64 = b
                    .local_centers
                    .iter()
                    .map(|&c| bump_profile(dist(folded, c) / b.radius))
                    .sum();
                Ok(b.offset + b.amplitude * sum)
            }
        }
    }

    /// `int_x^y F` with Simpson step at most `h`; zero when `x = y`.
    pub fn line_integral(&self, x: DiskPoint, y: DiskPoint, h: f64) -> Result<f64> {
        if x == y {
            return Ok(0.0);
        }
        let v = tangent_towards(x, &y)?;
        self.flow_integral(&v, dist(x, y), h)
    }

    /// `int_0^length F(phi_s v) ds`.
    pub fn flow_integral(&self, v: &UnitTangent, length: f64, h: f64) -> Result<f64> {
        if !(h > 0.0) {
            return Err(Error::InvalidArgument(format!("quadrature step {h} must be positive")));
        }
        if !(length >= 0.0) {
            return Err(Error::InvalidArgument(format!("negative integration length {length}")));
        }
        match self {
            Potential::Constant { level } => Ok(level * length),
            Potential::BumpSum(b) => b.flow_integral(v, length, h),
        }
    }

    /// Partial integrals `int_0^{t_k} F(phi_s v) ds` at increasing times `times`.
    pub fn flow_partials(&self, v: &UnitTangent, times: &[f64], h: f64) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(times.len());
        let mut acc = 0.0;
        let mut start = *v;
        let mut t_prev = 0.0;
        for &t in times {
            if t < t_prev {
                return Err(Error::InvalidArgument("times must be increasing".into()));
            }
            acc += self.flow_integral(&start, t - t_prev, h)?;
            out.push(acc);
            start = self.advance(&start, t - t_prev)?;
            t_prev = t;
        }
        Ok(out)
    }

    /// Flows `v` for `length`, folding along the way when the potential carries a group.
    fn advance(&self, v: &UnitTangent, length: f64) -> Result<UnitTangent> {
        match self {
            Potential::Constant { .. } => v.flow(length),
            Potential::BumpSum(b) => {
                let mut cur = b.group.fold_tangent(*v)?.0;
                let mut remaining = length;
                while remaining > 0.0 {
                    let piece = remaining.min(WALK_STEP);
                    cur = b.group.fold_tangent(cur.flow(piece)?)?.0;
                    remaining -= piece;
                }
                Ok(cur)
            }
        }
    }
}

impl BumpSum {
    /// Each bump crossing is integrated whole, in the frame of the step where it begins;
    /// splitting a crossing at step boundaries would spoil the rapid convergence that
    /// Simpson enjoys on the flat ends of the profile. Crossings use panels of width
    /// at most `h / 2`, which keeps the error of a crossing near `1e-12` for radii
    /// down to about half a unit at the default step.
    fn flow_integral(&self, v: &UnitTangent, length: f64, h: f64) -> Result<f64> {
        const TIE: f64 = 1e-9;
        let cosh_r = self.radius.cosh();
        let r = self.radius;
        let mut total = self.offset * length;
        let mut cur = self.group.fold_tangent(*v)?.0;
        let mut travelled = 0.0;
        let mut first = true;
        while travelled < length {
            let remaining = length - travelled;
            let piece = remaining.min(WALK_STEP);
            // Frame sending the walker to the origin, pointing along the positive real axis.
            let frame = Isometry::rotation(-cur.direction()) * Isometry::moving_to_origin(cur.base);
            for &c in &self.local_centers {
                let w = frame.apply_point(c)?.to_complex();
                let defect = 1.0 - w.norm_sqr();
                let x0 = (1.0 + w.norm_sqr()) / defect;
                let x1 = 2.0 * w.re / defect;
                let x2 = 2.0 * w.im / defect;
                let cosh_perp = (1.0 + x2 * x2).sqrt();
                if cosh_perp >= cosh_r {
                    continue;
                }
                let foot = (x1 / x0).atanh();
                let half = (cosh_r / cosh_perp).acosh();
                let start = foot - half;
                let owned = start < piece - TIE && (first || start >= -TIE) && foot + half > 0.0;
                if !owned {
                    continue;
                }
                let (a, b) = (start.max(0.0), (foot + half).min(remaining));
                total += self.amplitude
                    * simpson_min_panels(
                        |u| bump_profile((cosh_perp * (u - foot).cosh()).max(1.0).acosh() / r),
                        a,
                        b,
                        h / 2.0,
                        MIN_CROSSING_PANELS,
                    );
            }
            travelled += piece;
            first = false;
            if travelled < length {
                cur = self.group.fold_tangent(cur.flow(piece)?)?.0;
            }
        }
        Ok(total)
    }
}

/// Even number of Simpson panels of width at most `h` covering a length `len`.
pub(crate) fn simpson_panels(len: f64, h: f64) -> usize {
    let n = ((len / h).ceil() as usize).max(2);
    n + n % 2
}

/// Weight of node `i` of `n` in the composite Simpson rule, before the `step / 3` factor.
pub(crate) fn simpson_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i == n {
        1.0
    } else if i % 2 == 1 {
        4.0
    } else {
        2.0
    }
}

/// Composite Simpson rule on `[a, b]` with an even number of panels of width at most `h`.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, h: f64) -> f64 {
    simpson_min_panels(f, a, b, h, 2)
}

/// [`simpson`] with at least `min_panels` panels.
fn simpson_min_panels(f: impl Fn(f64) -> f64, a: f64, b: f64, h: f64, min_panels: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = simpson_panels(b - a, h).max(min_panels + min_panels % 2);
    let step = (b - a) / n as f64;
    let sum: f64 = (0..=n).map(|i| simpson_weight(i, n) * f(a + step * i as f64)).sum();
    sum * step / 3.0
}

/// Fills the shape integrals `int_x^{gamma y} (F - offset)` for every orbit point of `table`.
pub fn fill_potential_integrals(table: &mut OrbitTable, potential: &Potential, h: f64) -> Result<()> {
    let shape = potential.shifted(-potential.offset());
    let x = table.x;
    let integrals = table
        .points()
        .par_iter()
        .map(|p| shape.line_integral(x, p.point, h))
        .collect::<Result<Vec<_>>>()?;
    table.set_potential_integrals(potential.shape_label(), integrals);
    Ok(())
}

/// `int_x^{gamma y} F` for every orbit point, in table order.
///
/// Constant potentials need no stored integrals; bump sums require the table to
/// carry integrals of the same shape.
pub fn table_integrals(table: &OrbitTable, potential: &Potential) -> Result<Vec<f64>> {
    let c = potential.offset();
    if potential.is_constant() {
        return Ok(table.points().iter().map(|p| c * p.distance).collect());
    }
    let expected = potential.shape_label();
    if table.potential_label() != Some(expected.as_str()) {
        return Err(Error::PotentialMismatch {
            expected,
            found: table.potential_label().map(str::to_string),
        });
    }
    Ok(table
        .points()
        .iter()
        .map(|p| p.potential_integral + c * p.distance)
        .collect())
}
