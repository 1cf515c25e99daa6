//! Constant curvature -1 geometry of the Poincaré disk.
//!
//! Points live in the open unit disk, ideal points on the unit circle.
//! Isometries are stored as real unimodular matrices acting on the upper
//! half-plane and conjugated to the disk through the Cayley map
//! `w -> (w - i) / (w + i)`. In disk form a matrix `(a b; c d)` becomes
//! `z -> (alpha z + beta) / (conj(beta) z + conj(alpha))` with
//! `alpha = ((a + d) + i (b - c)) / 2` and `beta = ((a - d) - i (b + c)) / 2`.

use std::f64::consts::{PI, TAU};
use std::ops::Mul;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest Euclidean norm accepted for a disk point.
pub const MAX_NORM: f64 = 1.0 - 1e-12;

/// Wraps an angle into `[0, 2pi)`.
pub fn normalize_angle(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    if a >= TAU {
        0.0
    } else {
        a
    }
}

/// Unsigned angular separation of two circle angles, in `[0, pi]`.
pub fn angular_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Counter-clockwise angular length from `from` to `to`, in `[0, 2pi)`.
pub fn ccw_length(from: f64, to: f64) -> f64 {
    normalize_angle(to - from)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiskPoint {
    re: f64,
    im: f64,
}

impl DiskPoint {
    pub const ORIGIN: DiskPoint = DiskPoint { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Result<Self> {
        let norm = re.hypot(im);
        if !(norm < MAX_NORM) {
            return Err(Error::OutsideDisk { re, im });
        }
        Ok(Self { re, im })
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    /// The point at hyperbolic distance `distance` from the origin in direction `angle`.
    pub fn from_polar(distance: f64, angle: f64) -> Result<Self> {
        Self::from_complex(Complex64::from_polar((distance / 2.0).tanh(), angle))
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn euclidean_norm(&self) -> f64 {
        self.re.hypot(self.im)
    }

    /// `1 - |z|^2`, the inverse conformal factor up to the constant 2.
    fn defect(&self) -> f64 {
        let r = self.euclidean_norm();
        (1.0 - r) * (1.0 + r)
    }
}

/// An ideal point, stored as its angle on the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct BoundaryPoint {
    angle: f64,
}

impl BoundaryPoint {
    pub fn new(angle: f64) -> Self {
        Self {
            angle: normalize_angle(angle),
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::new(z.arg())
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(1.0, self.angle)
    }

    pub fn antipode(&self) -> Self {
        Self::new(self.angle + PI)
    }

    pub fn gap(&self, other: &BoundaryPoint) -> f64 {
        angular_gap(self.angle, other.angle)
    }
}

/// A unit tangent vector: a base point and a direction angle measured in the disk chart.
///
/// The disk metric is conformal, so the Euclidean angle of the chart is the
/// Riemannian angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitTangent {
    pub base: DiskPoint,
    direction: f64,
}

impl UnitTangent {
    pub fn new(base: DiskPoint, direction: f64) -> Self {
        Self {
            base,
            direction: normalize_angle(direction),
        }
    }

    pub fn direction(&self) -> f64 {
        self.direction
    }

    /// Geodesic flow for time `s` (negative times flow backwards).
    pub fn flow(&self, s: f64) -> Result<UnitTangent> {
        let p = self.base.to_complex();
        let w = Complex64::from_polar((s / 2.0).tanh(), self.direction);
        let denom = Complex64::new(1.0, 0.0) + p.conj() * w;
        let q = (w + p) / denom;
        let base = DiskPoint::from_complex(q)?;
        Ok(UnitTangent::new(base, self.direction - 2.0 * denom.arg()))
    }

    /// `gamma_v(+infinity)`.
    pub fn forward_endpoint(&self) -> BoundaryPoint {
        from_origin_frame(self.base, Complex64::from_polar(1.0, self.direction))
    }

    /// `gamma_v(-infinity)`.
    pub fn backward_endpoint(&self) -> BoundaryPoint {
        from_origin_frame(self.base, Complex64::from_polar(1.0, self.direction + PI))
    }
}

/// Maps a boundary point seen from the origin frame centred at `base` back to raw coordinates.
fn from_origin_frame(base: DiskPoint, w: Complex64) -> BoundaryPoint {
    let p = base.to_complex();
    BoundaryPoint::from_complex((w + p) / (Complex64::new(1.0, 0.0) + p.conj() * w))
}

/// Direction (at `x`) of the chart vector `z - x` after moving `x` to the origin.
fn direction_from(x: DiskPoint, z: Complex64) -> f64 {
    let p = x.to_complex();
    ((z - p) / (Complex64::new(1.0, 0.0) - p.conj() * z)).arg()
}

/// An open arc of the boundary circle, `{eta : gap(center, eta) < half_width}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Arc {
    pub center: BoundaryPoint,
    half_width: f64,
}

impl Arc {
    pub fn new(center: BoundaryPoint, half_width: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&half_width) {
            return Err(Error::InvalidArgument(format!(
                "arc half-width {half_width} outside [0, pi]"
            )));
        }
        Ok(Self { center, half_width })
    }

    /// Arc running counter-clockwise from `start` to `end`; equal endpoints give the
    /// circle minus that point.
    pub fn from_endpoints(start: BoundaryPoint, end: BoundaryPoint) -> Self {
        let mut len = ccw_length(start.angle(), end.angle());
        if len == 0.0 {
            len = TAU;
        }
        Self {
            center: BoundaryPoint::new(start.angle() + len / 2.0),
            half_width: len / 2.0,
        }
    }

    /// The whole circle.
    pub fn full() -> Self {
        Self {
            center: BoundaryPoint::new(0.0),
            half_width: TAU,
        }
    }

    pub fn is_full(&self) -> bool {
        self.half_width > PI
    }

    pub fn full_minus(point: BoundaryPoint) -> Self {
        Self {
            center: point.antipode(),
            half_width: PI,
        }
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn start(&self) -> BoundaryPoint {
        BoundaryPoint::new(self.center.angle() - self.half_width)
    }

    pub fn end(&self) -> BoundaryPoint {
        BoundaryPoint::new(self.center.angle() + self.half_width)
    }

    pub fn contains(&self, eta: &BoundaryPoint) -> bool {
        self.center.gap(eta) < self.half_width
    }

    pub fn is_subset_of(&self, other: &Arc) -> bool {
        self.half_width == 0.0 || self.center.gap(&other.center) + self.half_width <= other.half_width
    }
}

/// Orientation-preserving isometry of the disk, stored as a real `SL(2, R)` matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Isometry {
    m: [f64; 4],
}

impl Isometry {
    pub const IDENTITY: Isometry = Isometry {
        m: [1.0, 0.0, 0.0, 1.0],
    };

    /// Accepts any real matrix of positive determinant and rescales it to determinant one.
    pub fn from_matrix(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "matrix determinant {det} must be positive"
            )));
        }
        let s = det.sqrt();
        Ok(Self {
            m: [a / s, b / s, c / s, d / s],
        })
    }

    /// Builds the isometry `z -> (alpha z + beta) / (conj(beta) z + conj(alpha))`.
    pub fn from_disk(alpha: Complex64, beta: Complex64) -> Result<Self> {
        Self::from_matrix(
            alpha.re + beta.re,
            alpha.im - beta.im,
            -alpha.im - beta.im,
            alpha.re - beta.re,
        )
    }

    /// Rotation about the origin by `theta`.
    pub fn rotation(theta: f64) -> Self {
        let alpha = Complex64::from_polar(1.0, theta / 2.0);
        Self::from_disk(alpha, Complex64::new(0.0, 0.0)).expect("rotation is unimodular")
    }

    /// Hyperbolic translation by `length` along the diameter pointing at angle `direction`.
    pub fn translation(length: f64, direction: f64) -> Self {
        let alpha = Complex64::new((length / 2.0).cosh(), 0.0);
        let beta = Complex64::from_polar((length / 2.0).sinh(), direction);
        Self::from_disk(alpha, beta).expect("translation is unimodular")
    }

    /// The translation along the diameter through `p` that sends `p` to the origin.
    pub fn moving_to_origin(p: DiskPoint) -> Self {
        let scale = 1.0 / p.defect().sqrt();
        Self::from_disk(Complex64::new(scale, 0.0), -p.to_complex() * scale)
            .expect("translation is unimodular")
    }

    pub fn matrix(&self) -> [f64; 4] {
        self.m
    }

    pub fn det(&self) -> f64 {
        self.m[0] * self.m[3] - self.m[1] * self.m[2]
    }

    pub fn trace(&self) -> f64 {
        self.m[0] + self.m[3]
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.trace().abs() > 2.0
    }

    /// Translation length `2 arcosh(|tr| / 2)` of a hyperbolic element.
    pub fn translation_length(&self) -> Option<f64> {
        self.is_hyperbolic()
            .then(|| 2.0 * (self.trace().abs() / 2.0).acosh())
    }

    pub fn inverse(&self) -> Self {
        let [a, b, c, d] = self.m;
        Self { m: [d, -b, -c, a] }
    }

    /// `(alpha, beta)` of the disk action.
    pub fn disk_coefficients(&self) -> (Complex64, Complex64) {
        let [a, b, c, d] = self.m;
        (
            Complex64::new((a + d) / 2.0, (b - c) / 2.0),
            Complex64::new((a - d) / 2.0, -(b + c) / 2.0),
        )
    }

    fn act(&self, z: Complex64) -> (Complex64, Complex64) {
        let (alpha, beta) = self.disk_coefficients();
        let denom = beta.conj() * z + alpha.conj();
        ((alpha * z + beta) / denom, denom)
    }

    pub fn apply_point(&self, p: DiskPoint) -> Result<DiskPoint> {
        DiskPoint::from_complex(self.act(p.to_complex()).0)
    }

    pub fn apply_boundary(&self, xi: BoundaryPoint) -> BoundaryPoint {
        BoundaryPoint::from_complex(self.act(xi.to_complex()).0)
    }

    /// Pushes a tangent vector forward; the derivative is `1 / denom^2`.
    pub fn apply_tangent(&self, v: UnitTangent) -> Result<UnitTangent> {
        let (image, denom) = self.act(v.base.to_complex());
        Ok(UnitTangent::new(
            DiskPoint::from_complex(image)?,
            v.direction() - 2.0 * denom.arg(),
        ))
    }

    /// Rescales to determinant one.
    pub fn renormalized(self) -> Self {
        let s = self.det().sqrt();
        Self {
            m: self.m.map(|e| e / s),
        }
    }

    /// Max-entry distance to `other`, identifying `M` with `-M`.
    pub fn projective_distance(&self, other: &Isometry) -> f64 {
        let plus = self.m.iter().zip(other.m.iter()).map(|(a, b)| (a - b).abs());
        let minus = self.m.iter().zip(other.m.iter()).map(|(a, b)| (a + b).abs());
        plus.fold(0.0, f64::max).min(minus.fold(0.0, f64::max))
    }
}

impl Mul for Isometry {
    type Output = Isometry;

    /// Composition: `(g * h)(z) = g(h(z))`.
    fn mul(self, rhs: Isometry) -> Isometry {
        let [a, b, c, d] = self.m;
        let [e, f, g, h] = rhs.m;
        Isometry {
            m: [
                a * e + b * g,
                a * f + b * h,
                c * e + d * g,
                c * f + d * h,
            ],
        }
        .renormalized()
    }
}

/// Hyperbolic distance, `2 arsinh(|p - q| / sqrt((1 - |p|^2)(1 - |q|^2)))`.
pub fn dist(p: DiskPoint, q: DiskPoint) -> f64 {
    let chord = (p.to_complex() - q.to_complex()).norm();
    2.0 * (chord / (p.defect() * q.defect()).sqrt()).asinh()
}

/// Anything a geodesic ray from a disk point can be aimed at.
pub trait GeodesicTarget {
    /// Direction at `x` of the geodesic from `x` towards `self`.
    fn direction_from(&self, x: DiskPoint) -> Result<f64>;
}

impl GeodesicTarget for DiskPoint {
    fn direction_from(&self, x: DiskPoint) -> Result<f64> {
        if *self == x {
            return Err(Error::Degenerate("geodesic target coincides with its origin"));
        }
        Ok(direction_from(x, self.to_complex()))
    }
}

impl GeodesicTarget for BoundaryPoint {
    fn direction_from(&self, x: DiskPoint) -> Result<f64> {
        Ok(direction_from(x, self.to_complex()))
    }
}

/// Unit tangent at `x` pointing at `target`.
pub fn tangent_towards<T: GeodesicTarget>(x: DiskPoint, target: &T) -> Result<UnitTangent> {
    Ok(UnitTangent::new(x, target.direction_from(x)?))
}

/// `gamma_{x, target}(t)`: the point at arclength `t >= 0` along the geodesic from `x` to `target`.
pub fn geodesic_point<T: GeodesicTarget>(x: DiskPoint, target: &T, t: f64) -> Result<DiskPoint> {
    if t < 0.0 {
        return Err(Error::InvalidArgument(format!("negative arclength {t}")));
    }
    Ok(tangent_towards(x, target)?.flow(t)?.base)
}

/// Ideal endpoint of the ray from `x` through `p`.
pub fn boundary_projection(x: DiskPoint, p: DiskPoint) -> Result<BoundaryPoint> {
    Ok(tangent_towards(x, &p)?.forward_endpoint())
}

/// Visual angle at `x` between the rays towards `xi` and `eta`, in `(0, pi]`.
pub fn angle_at(x: DiskPoint, xi: BoundaryPoint, eta: BoundaryPoint) -> Result<f64> {
    if xi.gap(&eta) == 0.0 {
        return Err(Error::Degenerate("angle between identical boundary points"));
    }
    let a = xi.direction_from(x)?;
    let b = eta.direction_from(x)?;
    Ok(angular_gap(a, b))
}

/// The visual angle `theta(t)` at which two rays from a common point are at distance 1 at time `t`.
///
/// From the law of cosines `cosh 1 = cosh^2 t - sinh^2 t cos theta`, i.e.
/// `sin(theta / 2) = sinh(1/2) / sinh t`.
pub fn shadow_angle(t: f64) -> Result<f64> {
    if !(t >= 0.5) {
        return Err(Error::InvalidArgument(format!("shadow depth {t} below 1/2")));
    }
    let s = (0.5f64.sinh() / t.sinh()).min(1.0);
    Ok(2.0 * s.asin())
}

/// Inverse of [`shadow_angle`]: the time `t` at which rays at visual angle `theta` are at distance 1.
pub fn dx_distance(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= PI) {
        return Err(Error::InvalidArgument(format!("visual angle {theta} outside (0, pi]")));
    }
    Ok((0.5f64.sinh() / (theta / 2.0).sin()).asinh())
}

/// `d_x(xi, eta)`.
pub fn boundary_gauge(x: DiskPoint, xi: BoundaryPoint, eta: BoundaryPoint) -> Result<f64> {
    dx_distance(angle_at(x, xi, eta)?)
}

/// Busemann cocycle `lim_t d(x, xi_t) - d(y, xi_t)`, via the Poisson kernel.
pub fn busemann(xi: BoundaryPoint, x: DiskPoint, y: DiskPoint) -> f64 {
    let e = xi.to_complex();
    let log_kernel = |p: DiskPoint| ((e - p.to_complex()).norm_sqr() / p.defect()).ln();
    log_kernel(x) - log_kernel(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(re: f64, im: f64) -> DiskPoint {
        DiskPoint::new(re, im).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn rejects_points_on_or_outside_boundary() {
        assert!(DiskPoint::new(1.0, 0.0).is_err());
        assert!(DiskPoint::new(0.0, 1.0 - 1e-13).is_err());
        assert!(DiskPoint::new(0.6, 0.79).is_ok());
    }

    #[test]
    fn distance_examples() {
        assert_eq!(dist(DiskPoint::ORIGIN, DiskPoint::ORIGIN), 0.0);
        // Radial integral of 2 / (1 - r^2) over [0, 1/2].
        assert!(close(dist(DiskPoint::ORIGIN, pt(0.5, 0.0)), 1.0986122886681096, 1e-14));
        let p = pt(0.2, 0.1);
        let q = pt(0.0, -0.3);
        assert_eq!(dist(p, q), dist(q, p));
    }

    #[test]
    fn disk_coefficients_match_cayley_conjugation() {
        let g = Isometry::from_matrix(2.0, 1.0, 1.0, 1.0).unwrap();
        let cayley = |w: Complex64| (w - Complex64::i()) / (w + Complex64::i());
        let cayley_inv = |z: Complex64| Complex64::i() * (1.0 + z) / (1.0 - z);
        let z = Complex64::new(0.3, -0.2);
        let w = cayley_inv(z);
        let expected = cayley((2.0 * w + 1.0) / (w + 1.0));
        let got = g.apply_point(DiskPoint::from_complex(z).unwrap()).unwrap();
        assert!((got.to_complex() - expected).norm() < 1e-14);
    }

    #[test]
    fn apply_examples() {
        let p = pt(0.5, 0.0);
        assert_eq!(Isometry::IDENTITY.apply_point(p).unwrap(), p);
        let r = Isometry::rotation(PI / 2.0).apply_point(p).unwrap();
        assert!(close(r.re(), 0.0, 1e-15) && close(r.im(), 0.5, 1e-15));

        let g = Isometry::from_matrix(2.0, 1.0, 1.0, 1.0).unwrap();
        let ell = g.translation_length().unwrap();
        assert!(close(ell, 2.0 * 1.5f64.acosh(), 1e-14));
        // In the half-plane the axis is the semicircle over the roots of w^2 - w - 1;
        // its apex 1/2 + i sqrt(5)/2 is carried to the disk by the Cayley map.
        let apex = Complex64::new(0.5, 5f64.sqrt() / 2.0);
        let on_axis = DiskPoint::from_complex((apex - Complex64::i()) / (apex + Complex64::i())).unwrap();
        let moved = g.apply_point(on_axis).unwrap();
        assert!(close(dist(on_axis, moved), 1.9248473002384139, 1e-9));
    }

    #[test]
    fn isometries_preserve_distance() {
        let g = Isometry::translation(1.3, 0.4) * Isometry::rotation(2.0) * Isometry::translation(0.7, -1.0);
        let p = pt(0.1, 0.6);
        let q = pt(-0.4, -0.2);
        let d0 = dist(p, q);
        let d1 = dist(g.apply_point(p).unwrap(), g.apply_point(q).unwrap());
        assert!(close(d0, d1, 1e-12));
        assert!(close(g.det(), 1.0, 1e-12));
    }

    #[test]
    fn geodesic_point_examples() {
        let xi = BoundaryPoint::new(0.0);
        assert_eq!(geodesic_point(DiskPoint::ORIGIN, &xi, 0.0).unwrap(), DiskPoint::ORIGIN);
        let p = geodesic_point(DiskPoint::ORIGIN, &xi, 1.0).unwrap();
        assert!(close(p.re(), 0.5f64.tanh(), 1e-15) && p.im().abs() < 1e-15);

        let x = pt(0.3, -0.4);
        let xi = BoundaryPoint::new(2.2);
        let direct = geodesic_point(x, &xi, 3.5).unwrap();
        let mid = geodesic_point(x, &xi, 1.25).unwrap();
        let stepped = geodesic_point(mid, &xi, 2.25).unwrap();
        assert!(dist(direct, stepped) < 1e-9);
        assert!(close(dist(x, direct), 3.5, 1e-9));
        assert!(geodesic_point(x, &x, 1.0).is_err());
        assert!(geodesic_point(x, &xi, -1.0).is_err());
    }

    #[test]
    fn boundary_projection_examples() {
        let b = boundary_projection(DiskPoint::ORIGIN, pt(0.5, 0.0)).unwrap();
        assert!(close(b.angle(), 0.0, 1e-15));
        let b = boundary_projection(DiskPoint::ORIGIN, pt(0.0, -0.1)).unwrap();
        assert!(close(b.angle(), 1.5 * PI, 1e-15));
        assert!(boundary_projection(pt(0.2, 0.2), pt(0.2, 0.2)).is_err());
    }

    #[test]
    fn angle_examples() {
        let o = DiskPoint::ORIGIN;
        let a = BoundaryPoint::new(0.0);
        assert!(close(angle_at(o, a, BoundaryPoint::new(PI)).unwrap(), PI, 1e-15));
        for phi in [0.1, 1.0, 2.5, PI] {
            assert!(close(angle_at(o, a, BoundaryPoint::new(phi)).unwrap(), phi, 1e-14));
        }
        assert!(close(angle_at(pt(0.3, 0.0), a, BoundaryPoint::new(PI)).unwrap(), PI, 1e-14));
        assert!(angle_at(o, a, a).is_err());
    }

    #[test]
    fn shadow_angle_examples() {
        assert!(close(shadow_angle(0.5).unwrap(), PI, 1e-15));
        // Bisection on the visual angle solving d(gamma_xi(1), gamma_eta(1)) = 1.
        assert!(close(shadow_angle(1.0).unwrap(), 0.9187978721780274, 1e-12));
        assert!(close(dx_distance(PI / 2.0).unwrap(), 0.6826664571216058, 1e-12));
        assert!(close(shadow_angle(0.6826664571216058).unwrap(), PI / 2.0, 1e-12));
        assert!(shadow_angle(0.49).is_err());
        assert!(dx_distance(0.0).is_err());
    }

    #[test]
    fn shadow_angle_matches_two_ray_distance() {
        for t in [0.5, 0.8, 2.0, 5.0, 11.0] {
            let theta = shadow_angle(t).unwrap();
            let a = geodesic_point(DiskPoint::ORIGIN, &BoundaryPoint::new(0.0), t).unwrap();
            let b = geodesic_point(DiskPoint::ORIGIN, &BoundaryPoint::new(theta), t).unwrap();
            assert!(close(dist(a, b), 1.0, 1e-8), "t = {t}");
        }
    }

    #[test]
    fn busemann_examples() {
        let x = pt(0.1, 0.2);
        let xi = BoundaryPoint::new(0.7);
        assert_eq!(busemann(xi, x, x), 0.0);
        let zero = BoundaryPoint::new(0.0);
        assert!(close(busemann(zero, DiskPoint::ORIGIN, pt(0.5, 0.0)), 3f64.ln(), 1e-14));
        // Truncated limit d(x, xi_T) - d(y, xi_T) at T = 40, evaluated in extended precision.
        assert!(close(
            busemann(zero, DiskPoint::ORIGIN, pt(0.0, 0.3)),
            -0.18048837571229365,
            1e-14
        ));
    }

    #[test]
    fn busemann_is_isometry_invariant() {
        let g = Isometry::translation(2.0, 1.1) * Isometry::rotation(0.3);
        let xi = BoundaryPoint::new(4.0);
        let x = pt(-0.3, 0.1);
        let y = pt(0.5, 0.5);
        let lhs = busemann(g.apply_boundary(xi), g.apply_point(x).unwrap(), g.apply_point(y).unwrap());
        assert!(close(lhs, busemann(xi, x, y), 1e-10));
    }

    #[test]
    fn arcs() {
        let a = Arc::new(BoundaryPoint::new(0.0), PI).unwrap();
        assert!(a.contains(&BoundaryPoint::new(3.0)));
        assert!(!a.contains(&BoundaryPoint::new(PI)));
        let empty = Arc::new(BoundaryPoint::new(1.0), 0.0).unwrap();
        assert!(!empty.contains(&BoundaryPoint::new(1.0)));
        let small = Arc::new(BoundaryPoint::new(6.2), 0.1).unwrap();
        let big = Arc::new(BoundaryPoint::new(0.0), 0.3).unwrap();
        assert!(small.is_subset_of(&big));
        assert!(!big.is_subset_of(&small));
        let e = Arc::from_endpoints(BoundaryPoint::new(6.0), BoundaryPoint::new(0.5));
        assert!(close(e.half_width(), (0.5 + TAU - 6.0) / 2.0, 1e-14));
        assert!(Arc::new(BoundaryPoint::new(0.0), 4.0).is_err());
    }
}
