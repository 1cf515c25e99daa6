use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::{GeneratorSet, GroupKind, Word};
use crate::error::{Error, Result};
use crate::hyperbolic::{boundary_projection, dist, BoundaryPoint, DiskPoint, Isometry};

/// Largest `radius + prune_margin` the enumerator accepts; beyond it disk
/// coordinates run out of double precision.
const MAX_REACH: f64 = 25.0;

#[derive(Debug, Clone, Copy)]
pub struct EnumerationOptions {
    /// Extra radius explored beyond `R` before a branch is abandoned.
    pub prune_margin: f64,
    /// Maximum number of group elements visited.
    pub node_budget: usize,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        Self {
            prune_margin: 4.0,
            node_budget: 40_000_000,
        }
    }
}

/// One orbit point `gamma y` seen from `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitPoint {
    pub word: Word,
    pub point: DiskPoint,
    /// `d(x, gamma y)`.
    pub distance: f64,
    /// `int_x^{gamma y} F`, filled by the potential module.
    pub potential_integral: f64,
    /// Ideal endpoint of the ray from `x` through `gamma y`; `None` when `gamma y = x`.
    pub projection: Option<BoundaryPoint>,
}

impl OrbitPoint {
    pub fn new(word: Word, x: DiskPoint, point: DiskPoint) -> Self {
        let distance = dist(x, point);
        let projection = boundary_projection(x, point).ok();
        Self {
            word,
            point,
            distance,
            potential_integral: 0.0,
            projection,
        }
    }
}

/// Orbit points `gamma y` with `d(x, gamma y) <= radius`, sorted shortlex by word.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitTable {
    pub x: DiskPoint,
    pub y: DiskPoint,
    pub radius: f64,
    pub prune_margin: f64,
    points: Vec<OrbitPoint>,
    /// Label of the potential whose integrals fill `potential_integral`.
    potential: Option<String>,
}

/// Annulus index `n` with `n - 1 < d <= n`.
pub fn annulus_index(distance: f64) -> i64 {
    distance.ceil() as i64
}

impl OrbitTable {
    pub fn from_points(
        x: DiskPoint,
        y: DiskPoint,
        radius: f64,
        prune_margin: f64,
        mut points: Vec<OrbitPoint>,
        potential: Option<String>,
    ) -> Self {
        points.sort_by(|a, b| a.word.cmp(&b.word));
        Self {
            x,
            y,
            radius,
            prune_margin,
            points,
            potential,
        }
    }

    pub fn points(&self) -> &[OrbitPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn potential_label(&self) -> Option<&str> {
        self.potential.as_deref()
    }

    /// Installs potential integrals, one per point in table order.
    pub fn set_potential_integrals(&mut self, label: String, integrals: Vec<f64>) {
        assert_eq!(integrals.len(), self.points.len(), "one integral per orbit point");
        for (p, v) in self.points.iter_mut().zip(integrals) {
            p.potential_integral = v;
        }
        self.potential = Some(label);
    }

    /// Largest annulus index treated as completely enumerated: `floor(R - pruneMargin)`.
    pub fn complete_annulus_max(&self) -> i64 {
        (self.radius - self.prune_margin).floor() as i64
    }

    /// Point indices grouped by annulus.
    pub fn annuli(&self) -> BTreeMap<i64, Vec<usize>> {
        let mut map: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for (i, p) in self.points.iter().enumerate() {
            map.entry(annulus_index(p.distance)).or_default().push(i);
        }
        map
    }

    /// Re-bases the table at `g x`: points become `g gamma y`, words `g_word . w`,
    /// in the same order as `self`.
    ///
    /// Distances and potential integrals are carried over unchanged: both are
    /// invariant, and recomputing distances from disk coordinates this close to
    /// the circle would cost about `1e-9`. Integrals are exact this way for
    /// `Gamma`-invariant potentials when `g` belongs to the group.
    pub fn translate(&self, g: &Isometry, g_word: &Word) -> Result<OrbitTable> {
        let x = g.apply_point(self.x)?;
        let points = self
            .points
            .iter()
            .map(|p| {
                let point = g.apply_point(p.point)?;
                let mut q = OrbitPoint::new(g_word.concat(&p.word), x, point);
                q.distance = p.distance;
                q.potential_integral = p.potential_integral;
                Ok(q)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(OrbitTable {
            x,
            y: self.y,
            radius: self.radius,
            prune_margin: self.prune_margin,
            points,
            potential: self.potential.clone(),
        })
    }
}

/// Enumerates every orbit point `gamma y` with `d(x, gamma y) <= radius`.
///
/// Free groups are walked depth-first over reduced words; the surface group
/// breadth-first over the Cayley graph, deduplicating elements by their image
/// of the origin. Both abandon a branch once `d(x, w y) > radius + prune_margin`.
/// For the surface group this is sound when the margin covers the domain radius
/// plus twice the distances of `x` and `y` from the origin, which is checked.
pub fn enumerate_orbit(
    group: &GeneratorSet,
    x: DiskPoint,
    y: DiskPoint,
    radius: f64,
    options: EnumerationOptions,
) -> Result<OrbitTable> {
    if !(radius >= 0.0) {
        return Err(Error::InvalidArgument(format!("negative radius {radius}")));
    }
    if !(options.prune_margin >= 0.0) || radius + options.prune_margin > MAX_REACH {
        return Err(Error::InvalidArgument(format!(
            "radius {radius} + margin {} exceeds the supported reach {MAX_REACH}",
            options.prune_margin
        )));
    }
    let points = match group.kind() {
        GroupKind::FreeSchottky => enumerate_free(group, x, y, radius, options)?,
        GroupKind::SurfaceOctagon => enumerate_surface(group, x, y, radius, options)?,
    };
    Ok(OrbitTable::from_points(
        x,
        y,
        radius,
        options.prune_margin,
        points,
        None,
    ))
}

/// Distance from `x` to `m y`, or `None` when the image is numerically on the boundary.
fn reach(m: &Isometry, x: DiskPoint, y: DiskPoint) -> Option<(DiskPoint, f64)> {
    let p = m.apply_point(y).ok()?;
    Some((p, dist(x, p)))
}

fn enumerate_free(
    group: &GeneratorSet,
    x: DiskPoint,
    y: DiskPoint,
    radius: f64,
    options: EnumerationOptions,
) -> Result<Vec<OrbitPoint>> {
    let letters = group.letters();
    let bound = radius + options.prune_margin;
    let mut out = Vec::new();
    let mut visited = 0usize;
    // Explicit stack of (matrix, word); children pushed in reverse so pops follow alphabet order.
    let mut stack = vec![(Isometry::IDENTITY, Word::identity())];
    while let Some((m, word)) = stack.pop() {
        visited += 1;
        if visited > options.node_budget {
            let frontier = stack
                .iter()
                .filter_map(|(m, _)| reach(m, x, y).map(|r| r.1))
                .fold(f64::INFINITY, f64::min);
            return Err(Error::MemoryBudget {
                budget: options.node_budget,
                achieved: (frontier - options.prune_margin).clamp(0.0, radius),
            });
        }
        let Some((p, d)) = reach(&m, x, y) else {
            continue;
        };
        if d > bound {
            continue;
        }
        if d <= radius {
            out.push(OrbitPoint::new(word.clone(), x, p));
        }
        for &l in letters.iter().rev() {
            if word.last() == Some(l.inverse()) {
                continue;
            }
            stack.push((m * *group.letter(l), word.with(l)));
        }
    }
    Ok(out)
}

/// Visited orbit points, bucketed by their hyperboloid coordinates `(X1, X2)`.
///
/// In a torsion-free group distinct orbit points lie a systole apart, which on
/// the hyperboloid is a Euclidean gap of at least `sqrt(2 cosh(systole) - 2)`;
/// rounding drift along long words stays orders of magnitude below
/// [`MATCH_RADIUS`].
struct PointIndex {
    cells: HashMap<(i64, i64), Vec<[f64; 2]>>,
}

/// Hyperboloid distance below which two orbit points are the same point.
const MATCH_RADIUS: f64 = 0.1;

impl PointIndex {
    fn new() -> Self {
        Self { cells: HashMap::new() }
    }

    /// `(X1, X2)` of `m(0)`, read off the disk coefficients as `2 alpha beta`.
    fn coordinates(m: &Isometry) -> [f64; 2] {
        let (alpha, beta) = m.disk_coefficients();
        let w = 2.0 * alpha * beta;
        [w.re, w.im]
    }

    fn cell(c: [f64; 2]) -> (i64, i64) {
        (c[0].floor() as i64, c[1].floor() as i64)
    }

    fn contains(&self, c: [f64; 2]) -> bool {
        let (i, j) = Self::cell(c);
        (i - 1..=i + 1).any(|a| {
            (j - 1..=j + 1).any(|b| {
                self.cells.get(&(a, b)).is_some_and(|bucket| {
                    bucket
                        .iter()
                        .any(|q| (q[0] - c[0]).hypot(q[1] - c[1]) < MATCH_RADIUS)
                })
            })
        })
    }

    fn insert(&mut self, c: [f64; 2]) {
        self.cells.entry(Self::cell(c)).or_default().push(c);
    }
}

fn enumerate_surface(
    group: &GeneratorSet,
    x: DiskPoint,
    y: DiskPoint,
    radius: f64,
    options: EnumerationOptions,
) -> Result<Vec<OrbitPoint>> {
    let needed = group.domain_radius().unwrap_or(0.0) + 2.0 * (dist(DiskPoint::ORIGIN, x) + dist(DiskPoint::ORIGIN, y));
    if options.prune_margin < needed {
        return Err(Error::InvalidArgument(format!(
            "prune margin {} below {needed:.3} needed for basepoints this far from the origin",
            options.prune_margin
        )));
    }
    let letters = group.letters();
    let bound = radius + options.prune_margin;
    let mut out = Vec::new();

    if let Some((p, d)) = reach(&Isometry::IDENTITY, x, y) {
        if d <= radius {
            out.push(OrbitPoint::new(Word::identity(), x, p));
        }
    }
    // Pruning lets an element surface at a later BFS level than its word length,
    // so deduplication remembers every element seen so far, keyed by its image of 0.
    let mut seen = PointIndex::new();
    seen.insert(PointIndex::coordinates(&Isometry::IDENTITY));
    let mut layer: Vec<(Isometry, Word)> = vec![(Isometry::IDENTITY, Word::identity())];
    let mut visited = 1usize;

    while !layer.is_empty() {
        let mut next_layer = Vec::new();
        for (m, word) in &layer {
            for &l in &letters {
                if word.last() == Some(l.inverse()) {
                    continue;
                }
                let nm = *m * *group.letter(l);
                let key = PointIndex::coordinates(&nm);
                if seen.contains(key) {
                    continue;
                }
                let Some((p, d)) = reach(&nm, x, y) else {
                    continue;
                };
                if d > bound {
                    continue;
                }
                visited += 1;
                if visited > options.node_budget {
                    let frontier = next_layer
                        .iter()
                        .filter_map(|(m, _): &(Isometry, Word)| reach(m, x, y).map(|r| r.1))
                        .fold(f64::INFINITY, f64::min);
                    return Err(Error::MemoryBudget {
                        budget: options.node_budget,
                        achieved: (frontier - options.prune_margin).clamp(0.0, radius),
                    });
                }
                seen.insert(key);
                let w = word.with(l);
                if d <= radius {
                    out.push(OrbitPoint::new(w.clone(), x, p));
                }
                next_layer.push((nm, w));
            }
        }
        layer = next_layer;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{build_octagon, build_schottky};
    use std::collections::BTreeSet;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn all_reduced_words(group: &GeneratorSet, depth: usize) -> Vec<Word> {
        let mut out = vec![Word::identity()];
        let mut frontier = vec![Word::identity()];
        for _ in 0..depth {
            let mut next = Vec::new();
            for w in &frontier {
                for l in group.letters() {
                    if w.last() == Some(l.inverse()) {
                        continue;
                    }
                    next.push(w.with(l));
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    #[test]
    fn zero_radius_gives_identity_only() {
        let g = build_octagon();
        let y = DiskPoint::new(0.05, 0.02).unwrap();
        let t = enumerate_orbit(&g, DiskPoint::ORIGIN, y, 0.5, EnumerationOptions::default()).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t.points()[0].word.is_empty());
        let t = enumerate_orbit(&g, DiskPoint::ORIGIN, DiskPoint::ORIGIN, 0.0, EnumerationOptions::default())
            .unwrap();
        assert_eq!(t.len(), 1);
        assert!(t.points()[0].projection.is_none());
    }

    #[test]
    fn free_group_word_counts() {
        let g = build_schottky(2, 4.0, &[0.0, FRAC_PI_2]).unwrap();
        let t = enumerate_orbit(&g, DiskPoint::ORIGIN, DiskPoint::ORIGIN, 5.0, EnumerationOptions::default())
            .unwrap();
        let by_len = |n: usize| t.points().iter().filter(|p| p.word.len() == n).count();
        assert_eq!(by_len(0), 1);
        assert_eq!(by_len(1), 4);
        // Length-one words sit at distance 4, inside R = 5; length-two words at about 7.4 do not.
        assert_eq!(by_len(2), 0);
        let t = enumerate_orbit(&g, DiskPoint::ORIGIN, DiskPoint::ORIGIN, 12.0, EnumerationOptions::default())
            .unwrap();
        assert_eq!(t.points().iter().filter(|p| p.word.len() == 2).count(), 12);
        assert!(t.points().iter().all(|p| p.word.is_reduced()));
    }

    #[test]
    fn free_group_completeness_against_exhaustive_search() {
        let g = build_schottky(3, 3.0, &[0.0, PI / 3.0, 2.0 * PI / 3.0]).unwrap();
        let x = DiskPoint::new(0.1, -0.05).unwrap();
        let y = DiskPoint::new(-0.2, 0.1).unwrap();
        let radius = 6.0;
        let t = enumerate_orbit(&g, x, y, radius, EnumerationOptions::default()).unwrap();
        let depth = (radius / g.minimal_displacement()).ceil() as usize + 2;
        let exhaustive: BTreeSet<String> = all_reduced_words(&g, depth)
            .into_iter()
            .filter(|w| {
                let p = g.element(w).apply_point(y).unwrap();
                dist(x, p) <= radius
            })
            .map(|w| w.to_string())
            .collect();
        let found: BTreeSet<String> = t.points().iter().map(|p| p.word.to_string()).collect();
        assert_eq!(found, exhaustive);
    }

    #[test]
    fn doubled_margin_gives_identical_tables() {
        let g = build_octagon();
        let y = DiskPoint::new(0.1, 0.05).unwrap();
        let a = enumerate_orbit(&g, DiskPoint::ORIGIN, y, 5.0, EnumerationOptions::default()).unwrap();
        let b = enumerate_orbit(
            &g,
            DiskPoint::ORIGIN,
            y,
            5.0,
            EnumerationOptions {
                prune_margin: 8.0,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(a.points(), b.points());
    }

    #[test]
    fn octagon_orbit_is_duplicate_free_and_ordered() {
        let g = build_octagon();
        let y = DiskPoint::new(0.1, 0.05).unwrap();
        let t = enumerate_orbit(&g, DiskPoint::ORIGIN, y, 7.0, EnumerationOptions::default()).unwrap();
        for w in t.points().windows(2) {
            assert!(w[0].word < w[1].word);
        }
        // Distinct elements move y at least the systole apart.
        let mut pts: Vec<&OrbitPoint> = t.points().iter().collect();
        pts.sort_by(|a, b| a.distance.partial_cmp(&b.distance).unwrap());
        let sys = g.systole();
        for (i, a) in pts.iter().enumerate() {
            for b in pts[i + 1..].iter().take_while(|b| b.distance - a.distance < 1e-3) {
                assert!(dist(a.point, b.point) > sys - 1e-6);
            }
        }
        // Hyperbolic area count: about (cosh R - 1) / 2 points in the ball of radius R.
        let expected = (7f64.cosh() - 1.0) / 2.0;
        let ratio = t.len() as f64 / expected;
        assert!((0.8..1.2).contains(&ratio), "ratio {ratio}");
        for p in t.points() {
            assert!((p.distance - dist(t.x, p.point)).abs() < 1e-9);
        }
    }

    #[test]
    fn relator_collapses_distinct_words() {
        // Pairwise matrix comparison: reduced words of length <= 4 name fewer distinct elements.
        let g = build_octagon();
        let words = all_reduced_words(&g, 4);
        let mats: Vec<Isometry> = words.iter().map(|w| g.element(w)).collect();
        let mut distinct: Vec<Isometry> = Vec::new();
        for m in &mats {
            if !distinct.iter().any(|d| d.projective_distance(m) < 1e-6) {
                distinct.push(*m);
            }
        }
        assert!(distinct.len() < words.len());
        // The point index agrees with the pairwise count.
        let mut index = PointIndex::new();
        let mut count = 0;
        for m in &mats {
            let key = PointIndex::coordinates(m);
            if !index.contains(key) {
                index.insert(key);
                count += 1;
            }
        }
        assert_eq!(count, distinct.len());
    }

    #[test]
    fn index_coordinates_match_the_hyperboloid() {
        let g = build_octagon();
        for w in ["+1.+2.-3", "-4.-4.+2.-1", "+3"] {
            let m = g.element(&w.parse().unwrap());
            let z = m.apply_point(DiskPoint::ORIGIN).unwrap().to_complex();
            let s = 1.0 - z.norm_sqr();
            let c = PointIndex::coordinates(&m);
            assert!((c[0] - 2.0 * z.re / s).abs() < 1e-9 * (1.0 + c[0].abs()));
            assert!((c[1] - 2.0 * z.im / s).abs() < 1e-9 * (1.0 + c[1].abs()));
        }
    }

    #[test]
    fn budget_is_reported() {
        let g = build_octagon();
        let err = enumerate_orbit(
            &g,
            DiskPoint::ORIGIN,
            DiskPoint::ORIGIN,
            8.0,
            EnumerationOptions {
                node_budget: 100,
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::MemoryBudget { budget: 100, .. }));
    }

    #[test]
    fn translation_rebases_table() {
        let g = build_octagon();
        let y = DiskPoint::new(0.1, 0.05).unwrap();
        let t = enumerate_orbit(&g, DiskPoint::ORIGIN, y, 5.0, EnumerationOptions::default()).unwrap();
        let w: Word = "+1.-3".parse().unwrap();
        let m = g.element(&w);
        let moved = t.translate(&m, &w).unwrap();
        for (a, b) in t.points().iter().zip(moved.points()) {
            assert_eq!(a.distance, b.distance);
            assert!((dist(moved.x, b.point) - b.distance).abs() < 1e-9);
            let direct = g.element(&b.word).apply_point(y).unwrap();
            assert!(dist(direct, b.point) < 1e-9);
        }
    }
}
