//! Explicit Fuchsian groups: Schottky groups and the genus-2 octagon group.

mod orbit;
mod word;

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hyperbolic::{dist, Arc, BoundaryPoint, DiskPoint, Isometry, UnitTangent};

pub use orbit::{enumerate_orbit, EnumerationOptions, OrbitPoint, OrbitTable};
pub use word::{Letter, Word};

static OCTAGON_SYSTOLE: OnceLock<f64> = OnceLock::new();

/// Smallest translation length over the group, for a group with a compact fundamental domain.
///
/// Every closed geodesic has a conjugate whose axis meets the domain, and such an
/// element `g` satisfies `d(0, g 0) <= l(g) + 2 * domain radius`, so a finite
/// orbit search bounded by the shortest generator suffices.
fn shortest_translation(group: &GeneratorSet) -> f64 {
    let candidate = group
        .generators()
        .iter()
        .filter_map(Isometry::translation_length)
        .fold(f64::INFINITY, f64::min);
    let reach = candidate + 2.0 * group.domain_radius().expect("compact domain");
    let table = enumerate_orbit(group, DiskPoint::ORIGIN, DiskPoint::ORIGIN, reach, EnumerationOptions::default())
        .expect("systole search");
    table
        .points()
        .iter()
        .filter(|p| !p.word.is_empty())
        .filter_map(|p| group.element(&p.word).translation_length())
        .fold(candidate, f64::min)
}

/// Iteration cap for [`GeneratorSet::fold_to_domain`].
pub const FOLD_ITERATION_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupKind {
    FreeSchottky,
    SurfaceOctagon,
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneratorSet {
    kind: GroupKind,
    generators: Vec<Isometry>,
    inverses: Vec<Isometry>,
    /// One boundary arc per letter, in alphabet order (Schottky groups only).
    ping_pong: Option<Vec<(Letter, Arc)>>,
}

impl GeneratorSet {
    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn generators(&self) -> &[Isometry] {
        &self.generators
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn ping_pong_arcs(&self) -> Option<&[(Letter, Arc)]> {
        self.ping_pong.as_deref()
    }

    /// All letters in alphabet order `+1, -1, +2, -2, ...`.
    pub fn letters(&self) -> Vec<Letter> {
        (0..self.rank())
            .flat_map(|i| {
                let g = Letter::generator(i);
                [g, g.inverse()]
            })
            .collect()
    }

    pub fn letter(&self, l: Letter) -> &Isometry {
        if l.is_inverse() {
            &self.inverses[l.index()]
        } else {
            &self.generators[l.index()]
        }
    }

    pub fn element(&self, word: &Word) -> Isometry {
        word.letters()
            .iter()
            .fold(Isometry::IDENTITY, |acc, &l| acc * *self.letter(l))
    }

    /// Radius of a disk about the origin containing the fold domain, when it is bounded.
    pub fn domain_radius(&self) -> Option<f64> {
        match self.kind {
            GroupKind::SurfaceOctagon => Some(octagon_circumradius()),
            GroupKind::FreeSchottky => None,
        }
    }

    /// Minimal displacement `min d(0, g 0)` over the letters.
    pub fn minimal_displacement(&self) -> f64 {
        self.letters()
            .into_iter()
            .map(|l| {
                let image = self.letter(l).apply_point(DiskPoint::ORIGIN).expect("generator image");
                dist(DiskPoint::ORIGIN, image)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Length of the shortest closed geodesic (octagon group) or the minimal
    /// generator displacement of the origin otherwise.
    pub fn systole(&self) -> f64 {
        match self.kind {
            GroupKind::SurfaceOctagon => *OCTAGON_SYSTOLE.get_or_init(|| shortest_translation(self)),
            GroupKind::FreeSchottky => self.minimal_displacement(),
        }
    }

    /// Greedy Dirichlet reduction towards the origin.
    ///
    /// Returns `(p', w)` with `w p = p'` and `d(p', 0) <= d(g p', 0)` for every letter `g`.
    pub fn fold_to_domain(&self, p: DiskPoint) -> Result<(DiskPoint, Word)> {
        let (v, word) = self.fold_tangent(UnitTangent::new(p, 0.0))?;
        Ok((v.base, word))
    }

    /// [`Self::fold_to_domain`] for a tangent vector, carrying its direction along.
    pub fn fold_tangent(&self, v: UnitTangent) -> Result<(UnitTangent, Word)> {
        let letters = self.letters();
        let mut current = v;
        let mut applied: Vec<Letter> = Vec::new();
        for _ in 0..FOLD_ITERATION_CAP {
            let here = dist(DiskPoint::ORIGIN, current.base);
            let mut best: Option<(f64, Letter, UnitTangent)> = None;
            for &l in &letters {
                let Ok(moved) = self.letter(l).apply_tangent(current) else {
                    continue;
                };
                let d = dist(DiskPoint::ORIGIN, moved.base);
                if d < here - 1e-12 && best.as_ref().is_none_or(|b| d < b.0) {
                    best = Some((d, l, moved));
                }
            }
            match best {
                Some((_, l, moved)) => {
                    applied.push(l);
                    current = moved;
                }
                None => {
                    applied.reverse();
                    return Ok((current, Word::from_letters(applied)));
                }
            }
        }
        Err(Error::FoldDiverged(FOLD_ITERATION_CAP))
    }
}

/// Hyperbolic element translating by `translation_length` along the diameter at angle `axis_angle`.
fn axial_generator(translation_length: f64, axis_angle: f64) -> Isometry {
    Isometry::translation(translation_length, axis_angle)
}

/// Attracting boundary arc of a hyperbolic element: the trace on the circle of the
/// interior of the isometric circle of its inverse.
fn attracting_arc(g: &Isometry) -> Result<Arc> {
    let (alpha, beta) = g.disk_coefficients();
    if beta.norm() == 0.0 {
        return Err(Error::NotHyperbolic { trace: g.trace() });
    }
    let center = BoundaryPoint::new(alpha.arg() + beta.arg());
    Arc::new(center, (beta.norm() / alpha.norm()).min(1.0).acos())
}

/// Schottky group on `k` generators translating by `translation_length` along diameters at `axis_angles`.
pub fn build_schottky(k: usize, translation_length: f64, axis_angles: &[f64]) -> Result<GeneratorSet> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("Schottky rank {k} below 2")));
    }
    if axis_angles.len() != k {
        return Err(Error::InvalidArgument(format!(
            "{} axis angles given for {k} generators",
            axis_angles.len()
        )));
    }
    if !(translation_length > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "translation length {translation_length} must be positive"
        )));
    }
    for i in 0..k {
        for j in i + 1..k {
            let diff = (axis_angles[i] - axis_angles[j]).rem_euclid(PI);
            if diff < 1e-9 || PI - diff < 1e-9 {
                return Err(Error::InvalidArgument(format!("axes {i} and {j} are parallel")));
            }
        }
    }
    let generators: Vec<Isometry> = axis_angles
        .iter()
        .map(|&a| axial_generator(translation_length, a))
        .collect();
    let inverses: Vec<Isometry> = generators.iter().map(Isometry::inverse).collect();
    let mut set = GeneratorSet {
        kind: GroupKind::FreeSchottky,
        generators,
        inverses,
        ping_pong: None,
    };
    let arcs: Vec<(Letter, Arc)> = set
        .letters()
        .into_iter()
        .map(|l| attracting_arc(set.letter(l)).map(|a| (l, a)))
        .collect::<Result<_>>()?;
    verify_ping_pong(&set, &arcs)?;
    set.ping_pong = Some(arcs);
    Ok(set)
}

fn verify_ping_pong(set: &GeneratorSet, arcs: &[(Letter, Arc)]) -> Result<()> {
    for (i, (li, ai)) in arcs.iter().enumerate() {
        for (lj, aj) in &arcs[i + 1..] {
            if ai.center.gap(&aj.center) <= ai.half_width() + aj.half_width() {
                return Err(Error::PingPong {
                    first: li.to_string(),
                    second: lj.to_string(),
                });
            }
        }
    }
    // Each letter must carry the closed complement of its inverse's arc into the closure of its own.
    let arc_of = |l: Letter| arcs.iter().find(|(m, _)| *m == l).map(|(_, a)| *a).expect("arc per letter");
    for &(l, own) in arcs {
        let g = set.letter(l);
        let excluded = arc_of(l.inverse());
        let complement_len = 2.0 * (PI - excluded.half_width());
        let samples = 64;
        for s in 0..=samples {
            let eta = BoundaryPoint::new(excluded.end().angle() + complement_len * s as f64 / samples as f64);
            let image = g.apply_boundary(eta);
            if own.center.gap(&image) > own.half_width() + 1e-9 {
                return Err(Error::PingPong {
                    first: l.to_string(),
                    second: l.inverse().to_string(),
                });
            }
        }
    }
    Ok(())
}

/// Inradius of the regular octagon with interior angles `pi/4`: `arcosh(cot(pi/8))`.
pub fn octagon_inradius() -> f64 {
    (1.0 / FRAC_PI_8.tan()).acosh()
}

/// Circumradius of the same octagon: `arcosh(cot^2(pi/8))`.
pub fn octagon_circumradius() -> f64 {
    (1.0 / FRAC_PI_8.tan()).powi(2).acosh()
}

/// Side pairing of the regular octagon taking side `from` onto side `to`.
///
/// Sides are numbered counter-clockwise with side `k` facing angle `k pi/4`.
fn octagon_side_pairing(from: usize, to: usize) -> Isometry {
    let spin = ((to + 4) as f64 - from as f64) * FRAC_PI_4;
    Isometry::translation(2.0 * octagon_inradius(), to as f64 * FRAC_PI_4) * Isometry::rotation(spin)
}

/// Genus-2 surface group from the regular octagon with vertex angle `pi/4`.
///
/// Sides are labelled `a b a^-1 b^-1 c d c^-1 d^-1`, so the four generators pair
/// sides `2 -> 0`, `1 -> 3`, `6 -> 4`, `5 -> 7` and satisfy `[a, b][c, d] = 1`.
pub fn build_octagon() -> GeneratorSet {
    let generators = vec![
        octagon_side_pairing(2, 0),
        octagon_side_pairing(1, 3),
        octagon_side_pairing(6, 4),
        octagon_side_pairing(5, 7),
    ];
    let inverses = generators.iter().map(Isometry::inverse).collect();
    let set = GeneratorSet {
        kind: GroupKind::SurfaceOctagon,
        generators,
        inverses,
        ping_pong: None,
    };
    let relator = octagon_relator(&set);
    assert!(
        relator.projective_distance(&Isometry::IDENTITY) < 1e-8,
        "octagon relator check failed"
    );
    set
}

/// `a b a^-1 b^-1 c d c^-1 d^-1` evaluated in the given generator set.
pub fn octagon_relator(set: &GeneratorSet) -> Isometry {
    let word: Word = "+1.+2.-1.-2.+3.+4.-3.-4".parse().expect("static word");
    set.element(&word)
}

/// `(repelling, attracting)` fixed points of a hyperbolic isometry on the boundary.
pub fn axis_endpoints(g: &Isometry) -> Result<(BoundaryPoint, BoundaryPoint)> {
    if !g.is_hyperbolic() {
        return Err(Error::NotHyperbolic { trace: g.trace() });
    }
    let (mut alpha, mut beta) = g.disk_coefficients();
    if alpha.re < 0.0 {
        alpha = -alpha;
        beta = -beta;
    }
    // Roots of conj(beta) z^2 + (conj(alpha) - alpha) z - beta = 0.
    let s = (alpha.re * alpha.re - 1.0).sqrt();
    let root = |sign: f64| (Complex64::new(sign * s, alpha.im)) / beta.conj();
    let attracting = BoundaryPoint::from_complex(root(1.0));
    let repelling = BoundaryPoint::from_complex(root(-1.0));
    Ok((repelling, attracting))
}
