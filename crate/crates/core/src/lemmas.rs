//! Empirical checks of the structural lemmas behind the decay formula.
//!
//! The lemmas only assert that certain constants exist; these routines report
//! the values observed on concrete groups and measures.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{cone_arc, measure_arc};
use crate::error::{Error, Result};
use crate::gibbs::{MeasureParams, PattersonMeasure};
use crate::group::{axis_endpoints, GeneratorSet, Letter, OrbitTable, Word};
use crate::hyperbolic::{dx_distance, shadow_angle, Arc, BoundaryPoint};
use crate::potential::Potential;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeMassSample {
    /// The translate `g x` is the basepoint moved by this word.
    pub word: Word,
    pub xi: BoundaryPoint,
    /// `mu_{gx}(A_{gx,pi/2}(xi)) / |mu_{gx}|`.
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeMassCheck {
    pub min_fraction: f64,
    pub worst: ConeMassSample,
    pub samples: Vec<ConeMassSample>,
}

/// Relative mass of half-space cones `A_{gx,pi/2}(xi)` for random orbit translates
/// `gx` with `d(x, gx) <= max_shift` and uniform random `xi`.
///
/// Each measure is built from the translated table cut down to radius
/// `R - d(x, gx)`, the radius around `gx` it still covers completely.
pub fn cone_mass_check(
    group: &GeneratorSet,
    table: &OrbitTable,
    potential: &Potential,
    params: MeasureParams,
    max_shift: f64,
    count: usize,
    seed: u64,
) -> Result<ConeMassCheck> {
    if count == 0 {
        return Err(Error::TooFewPoints { found: 0, required: 1 });
    }
    let shifts: Vec<&Word> = table
        .points()
        .iter()
        .filter(|p| p.distance <= max_shift)
        .map(|p| &p.word)
        .collect();
    if shifts.is_empty() {
        return Err(Error::InvalidArgument(format!("no orbit point within {max_shift} of the basepoint")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<(Word, BoundaryPoint)> = (0..count)
        .map(|_| {
            let word = shifts[rng.gen_range(0..shifts.len())].clone();
            (word, BoundaryPoint::new(rng.gen_range(0.0..std::f64::consts::TAU)))
        })
        .collect();
    let samples = draws
        .into_par_iter()
        .map(|(word, xi)| {
            let moved = table.translate(&group.element(&word), &word)?;
            let reach = table.radius - crate::hyperbolic::dist(table.x, moved.x);
            let points = moved.points().iter().filter(|p| p.distance <= reach).cloned().collect();
            let label = moved.potential_label().map(str::to_owned);
            let cut = OrbitTable::from_points(moved.x, moved.y, reach, table.prune_margin, points, label);
            let measure = PattersonMeasure::build(&cut, potential, params)?;
            let cone = cone_arc(measure.basepoint(), FRAC_PI_2, xi)?;
            let fraction = measure_arc(&measure, &cone).mass / measure.total_mass();
            Ok(ConeMassSample { word, xi, fraction })
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = samples
        .iter()
        .min_by(|a, b| a.fraction.total_cmp(&b.fraction))
        .cloned()
        .expect("at least one sample");
    Ok(ConeMassCheck {
        min_fraction: worst.fraction,
        worst,
        samples,
    })
}

/// Visual half-width from `x` of the cone `A_{gamma(s),pi/2}(xi)`, where `gamma` is the
/// ray from `x` to `xi`: the angle of parallelism `2 atan(e^-s)`.
pub fn parallel_angle(s: f64) -> f64 {
    2.0 * (-s).exp().atan()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionFailure {
    pub k: u32,
    pub t: f64,
    /// Visual angle at `x` between `xi` and the violating `eta`.
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShadowInclusionCheck {
    /// Smallest `K` for which every sample satisfied the inclusion.
    pub k: Option<u32>,
    /// For that `K`, the smallest grid time from which `A_{gamma(t+K),pi/2}(xi)`
    /// lies in `B_{x,t}(xi)` at every later grid time.
    pub n_threshold: Option<f64>,
    pub samples: usize,
    /// Failure counts for `K = 1, 2, ...` up to the accepted one.
    pub failure_counts: Vec<(u32, usize)>,
    /// First violating sample of each rejected `K`.
    pub failures: Vec<InclusionFailure>,
}

/// Grid step for the reported threshold time.
const THRESHOLD_STEP: f64 = 0.01;

/// Tests `A_{gamma(t+K),pi/2}(xi) ⊆ B_{x,t}(xi)` on random `(eta, t)`.
///
/// `eta` is drawn uniformly from the cone by its visual angle at `x`, and
/// membership in the shadow is `d_x(xi, eta) > t`; both sides are closed forms,
/// so the check is independent of basepoint and direction.
pub fn shadow_inclusion_check(count: usize, t_range: (f64, f64), k_max: u32, seed: u64) -> Result<ShadowInclusionCheck> {
    let (t_lo, t_hi) = t_range;
    if !(t_lo >= 0.5 && t_hi > t_lo) {
        return Err(Error::InvalidArgument(format!("time range [{t_lo}, {t_hi}] must lie in [1/2, inf)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<(f64, f64)> = (0..count)
        .map(|_| (rng.gen_range(t_lo..=t_hi), rng.gen_range(0.0..1.0)))
        .collect();
    let mut failure_counts = Vec::new();
    let mut failures = Vec::new();
    for k in 1..=k_max {
        let mut bad = 0;
        for &(t, u) in &draws {
            let angle = u * parallel_angle(t + k as f64);
            if angle == 0.0 {
                continue;
            }
            if dx_distance(angle)? <= t {
                if bad == 0 {
                    failures.push(InclusionFailure { k, t, angle });
                }
                bad += 1;
            }
        }
        failure_counts.push((k, bad));
        if bad == 0 {
            return Ok(ShadowInclusionCheck {
                k: Some(k),
                n_threshold: inclusion_threshold(k as f64, t_hi)?,
                samples: count,
                failure_counts,
                failures,
            });
        }
    }
    Ok(ShadowInclusionCheck {
        k: None,
        n_threshold: None,
        samples: count,
        failure_counts,
        failures,
    })
}

/// Smallest grid time in `[1/2, t_max]` after which `parallel_angle(t + k) <= shadow_angle(t)` holds throughout.
fn inclusion_threshold(k: f64, t_max: f64) -> Result<Option<f64>> {
    let steps = ((t_max - 0.5) / THRESHOLD_STEP).round() as usize;
    let mut threshold = None;
    for i in (0..=steps).rev() {
        let t = 0.5 + i as f64 * THRESHOLD_STEP;
        if parallel_angle(t + k) <= shadow_angle(t)? {
            threshold = Some(t);
        } else {
            break;
        }
    }
    Ok(threshold)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NorthSouthCheck {
    pub letter: Letter,
    pub repelling: BoundaryPoint,
    pub attracting: BoundaryPoint,
    /// First `n` with `g^n(S^1 - U) ⊆ V`.
    pub iterations: Option<usize>,
}

/// Interior points of the complement of `U` tracked alongside its endpoints.
const NORTH_SOUTH_PROBES: usize = 64;

/// North-south dynamics of each generator and inverse: iterates the boundary
/// action on the complement of `U`, the arc of the given half-width around the
/// repelling point, until it lands in `V`, the same-size arc around the attracting point.
///
/// `g^n` maps the complement of `U` onto the arc between the images of its
/// endpoints that contains the attracting point, so the endpoints decide; the
/// interior probes are a cross-check.
pub fn north_south_check(group: &GeneratorSet, half_width: f64, max_iterations: usize) -> Result<Vec<NorthSouthCheck>> {
    group
        .letters()
        .into_iter()
        .map(|letter| {
            let g = group.letter(letter);
            let (repelling, attracting) = axis_endpoints(g)?;
            let u = Arc::new(repelling, half_width)?;
            if repelling.gap(&attracting) <= 2.0 * half_width {
                return Err(Error::InvalidArgument(format!(
                    "arcs of half-width {half_width} around the fixed points of {letter} overlap"
                )));
            }
            let span = std::f64::consts::TAU - 2.0 * half_width;
            let mut points: Vec<BoundaryPoint> = (0..=NORTH_SOUTH_PROBES + 1)
                .map(|i| BoundaryPoint::new(u.end().angle() + span * i as f64 / (NORTH_SOUTH_PROBES + 1) as f64))
                .collect();
            let inside = |p: &BoundaryPoint| p.gap(&attracting) <= half_width;
            let mut iterations = None;
            for n in 1..=max_iterations {
                for p in points.iter_mut() {
                    *p = g.apply_boundary(*p);
                }
                if points.iter().all(inside) {
                    iterations = Some(n);
                    break;
                }
            }
            Ok(NorthSouthCheck {
                letter,
                repelling,
                attracting,
                iterations,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{build_octagon, build_schottky, enumerate_orbit, EnumerationOptions};
    use crate::hyperbolic::{boundary_gauge, geodesic_point, DiskPoint};
    use crate::potential::{fill_potential_integrals, DEFAULT_STEP};
    use std::f64::consts::PI;

    #[test]
    fn parallel_angle_is_the_cone_width_seen_from_the_origin() {
        let xi = BoundaryPoint::new(0.3);
        for s in [0.5, 1.0, 3.0, 7.0] {
            let apex = geodesic_point(DiskPoint::ORIGIN, &xi, s).unwrap();
            let arc = cone_arc(apex, FRAC_PI_2, xi).unwrap();
            assert!((arc.half_width() - parallel_angle(s)).abs() < 1e-10);
            assert!(arc.center.gap(&xi) < 1e-10);
        }
    }

    #[test]
    fn inclusion_at_t1_k2_holds_geometrically() {
        // Every eta in the cone at gamma(3) has d_x(xi, eta) > 1.
        let x = DiskPoint::new(0.2, -0.1).unwrap();
        let xi = BoundaryPoint::new(1.1);
        let apex = geodesic_point(x, &xi, 3.0).unwrap();
        let cone = cone_arc(apex, FRAC_PI_2, xi).unwrap();
        for i in 1..200 {
            let eta = BoundaryPoint::new(cone.start().angle() + 2.0 * cone.half_width() * i as f64 / 200.0);
            assert!(cone.contains(&eta));
            if eta.gap(&xi) < 1e-12 {
                continue;
            }
            assert!(boundary_gauge(x, xi, eta).unwrap() > 1.0);
        }
    }

    #[test]
    fn inclusion_check_reports_k_and_threshold() {
        let check = shadow_inclusion_check(1000, (1.0, 20.0), 5, 4).unwrap();
        assert_eq!(check.k, Some(1));
        assert_eq!(check.failure_counts, vec![(1, 0)]);
        let n = check.n_threshold.unwrap();
        assert!((0.5..=1.0).contains(&n), "threshold {n}");
        // The threshold is where the closed forms cross.
        if n > 0.5 {
            assert!(parallel_angle(n - 0.01 + 1.0) > shadow_angle(n - 0.01).unwrap());
        }
        assert!(shadow_inclusion_check(10, (0.2, 2.0), 5, 0).is_err());
    }

    #[test]
    fn inclusion_check_rejects_zero_k_budget() {
        let check = shadow_inclusion_check(10, (1.0, 2.0), 0, 0).unwrap();
        assert_eq!(check.k, None);
    }

    #[test]
    fn north_south_for_the_octagon() {
        let g = build_octagon();
        let checks = north_south_check(&g, 0.3, 50).unwrap();
        assert_eq!(checks.len(), 8);
        for c in &checks {
            let n = c.iterations.expect("converges");
            assert!(n <= 20, "{} took {n}", c.letter);
        }
        // Wider target arcs are reached no later.
        let loose = north_south_check(&g, 0.5, 50).unwrap();
        for (a, b) in checks.iter().zip(&loose) {
            assert!(b.iterations.unwrap() <= a.iterations.unwrap());
        }
    }

    #[test]
    fn north_south_rejects_overlapping_arcs() {
        let g = build_octagon();
        assert!(north_south_check(&g, PI / 2.0 + 0.1, 50).is_err());
    }

    #[test]
    fn cone_mass_on_a_small_table() {
        // Radius 8 is the smallest the measure accepts, so only the identity shift fits.
        let g = build_octagon();
        let mut table = enumerate_orbit(
            &g,
            DiskPoint::ORIGIN,
            DiskPoint::ORIGIN,
            8.0,
            EnumerationOptions {
                prune_margin: 2.5,
                ..Default::default()
            },
        )
        .unwrap();
        let f = Potential::constant(0.0);
        fill_potential_integrals(&mut table, &f, DEFAULT_STEP).unwrap();
        let params = MeasureParams::new(1.0, 0.05);
        let check = cone_mass_check(&g, &table, &f, params, 0.0, 20, 1).unwrap();
        assert!(check.min_fraction > 0.05);
        assert!(check.samples.iter().all(|s| s.word.is_empty()));
        // Translates at distance > 0 leave less than radius 8: the measure refuses them.
        assert!(cone_mass_check(&g, &table, &f, params, 3.5, 5, 1).is_err());
        let schottky = build_schottky(2, 4.0, &[0.0, FRAC_PI_2]).unwrap();
        assert!(north_south_check(&schottky, 0.3, 50).unwrap().iter().all(|c| c.iterations.is_some()));
    }
}
