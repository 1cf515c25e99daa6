//! Cone and shadow neighbourhoods on the boundary circle, and arc queries against atomic measures.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gibbs::PattersonMeasure;
use crate::hyperbolic::{normalize_angle, shadow_angle, Arc, BoundaryPoint, DiskPoint, Isometry};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArcQueryResult {
    pub arc: Arc,
    pub atom_count: usize,
    pub mass: f64,
}

/// Boundary points seen from `x` within visual angle `a` of `xi`.
pub fn cone_arc(x: DiskPoint, a: f64, xi: BoundaryPoint) -> Result<Arc> {
    if !(a > 0.0 && a <= PI) {
        return Err(Error::InvalidArgument(format!("cone aperture {a} outside (0, pi]")));
    }
    let to_origin = Isometry::moving_to_origin(x);
    let back = to_origin.inverse();
    let seen = to_origin.apply_boundary(xi);
    if a == PI {
        return Ok(Arc::full_minus(back.apply_boundary(seen.antipode())));
    }
    let local = Arc::new(seen, a)?;
    Ok(Arc::from_endpoints(
        back.apply_boundary(local.start()),
        back.apply_boundary(local.end()),
    ))
}

/// Boundary points `eta` with `d_x(xi, eta) > t`.
///
/// Since `d_x >= 1/2` everywhere, depths below `1/2` give the whole circle.
pub fn shadow_arc(x: DiskPoint, t: f64, xi: BoundaryPoint) -> Result<Arc> {
    if t < 0.5 {
        return Ok(Arc::full());
    }
    cone_arc(x, shadow_angle(t)?, xi)
}

/// Mass and atom count of `measure` on the open arc.
pub fn measure_arc(measure: &PattersonMeasure, arc: &Arc) -> ArcQueryResult {
    let atoms = measure.atoms();
    let mut result = ArcQueryResult {
        arc: *arc,
        atom_count: 0,
        mass: 0.0,
    };
    let mut take = |i: usize| {
        let atom = &atoms[i];
        if arc.contains(&atom.position) {
            result.atom_count += 1;
            result.mass += atom.weight;
        }
    };
    if arc.half_width() >= PI - 1e-9 {
        (0..atoms.len()).for_each(&mut take);
        return result;
    }
    if arc.half_width() == 0.0 {
        return result;
    }
    // Candidate window from the sorted angles, widened slightly; `contains` decides membership.
    let slack = 1e-12;
    let lo = normalize_angle(arc.center.angle() - arc.half_width() - slack);
    let hi = normalize_angle(arc.center.angle() + arc.half_width() + slack);
    let first = atoms.partition_point(|a| a.position.angle() < lo);
    let last = atoms.partition_point(|a| a.position.angle() <= hi);
    if lo <= hi {
        (first..last).for_each(&mut take);
    } else {
        (first..atoms.len()).for_each(&mut take);
        (0..last).for_each(&mut take);
    }
    result
}
