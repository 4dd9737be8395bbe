//! 2D oriented-rectangle geometry in the x–z floor plane.
//!
//! y is up everywhere in this crate; placement reasons entirely in x–z.
//! Interiors touching along an edge never count as an intersection, which
//! keeps flush abutting rows representable without special cases.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Vector in the floor plane. Serialized as a `[x, z]` pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec2<T> {
    pub x: T,
    pub z: T,
}

impl<T: Scalar> Vec2<T> {
    pub fn new(x: T, z: T) -> Self {
        Vec2 { x, z }
    }

    pub fn zero() -> Self {
        Vec2 {
            x: T::zero(),
            z: T::zero(),
        }
    }

    pub fn add(self, o: Self) -> Self {
        Vec2::new(self.x + o.x, self.z + o.z)
    }

    pub fn sub(self, o: Self) -> Self {
        Vec2::new(self.x - o.x, self.z - o.z)
    }

    pub fn scale(self, s: T) -> Self {
        Vec2::new(self.x * s, self.z * s)
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.z * o.z
    }

    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(self) -> Self {
        Vec2::new(-self.z, self.x)
    }

    /// Rotate counter-clockwise by `yaw` radians.
    pub fn rotate(self, yaw: T) -> Self {
        let (s, c) = yaw.sin_cos();
        Vec2::new(c * self.x - s * self.z, s * self.x + c * self.z)
    }
}

impl<T: Serialize> Serialize for Vec2<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (&self.x, &self.z).serialize(s)
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Vec2<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (x, z) = <(T, T)>::deserialize(d)?;
        Ok(Vec2 { x, z })
    }
}

/// Normalize an angle into `[0, 2π)`.
pub fn normalize_yaw<T: Scalar>(yaw: T) -> T {
    let tau = T::TAU();
    let mut y = yaw % tau;
    if y < T::zero() {
        y += tau;
    }
    // `-1e-18 % tau` rounds back up to tau itself.
    if y >= tau {
        y -= tau;
    }
    y
}

/// Rectangle with arbitrary yaw about its center.
///
/// The local x axis carries the object's depth (front = local `+x` rotated
/// by yaw); the local z axis carries its width (left = local `+z`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrientedRect<T> {
    pub center: Vec2<T>,
    pub half: Vec2<T>,
    pub yaw: T,
}

impl<T: Scalar> OrientedRect<T> {
    pub fn new(center: Vec2<T>, half: Vec2<T>, yaw: T) -> Self {
        OrientedRect { center, half, yaw }
    }

    pub fn axis_aligned(center: Vec2<T>, half: Vec2<T>) -> Self {
        OrientedRect::new(center, half, T::zero())
    }

    pub fn area(&self) -> T {
        T::c(4.0) * self.half.x * self.half.z
    }

    /// Local axes in world coordinates: `(front, left)`.
    pub fn axes(&self) -> (Vec2<T>, Vec2<T>) {
        let u = Vec2::new(T::one(), T::zero()).rotate(self.yaw);
        (u, u.perp())
    }

    /// Corners in counter-clockwise order starting at front-left.
    pub fn corners(&self) -> [Vec2<T>; 4] {
        let (u, v) = self.axes();
        let ux = u.scale(self.half.x);
        let vz = v.scale(self.half.z);
        [
            self.center.add(ux).add(vz),
            self.center.sub(ux).add(vz),
            self.center.sub(ux).sub(vz),
            self.center.add(ux).sub(vz),
        ]
    }

    /// Axis-aligned bounding box as `(min, max)`.
    pub fn aabb(&self) -> (Vec2<T>, Vec2<T>) {
        let cs = self.corners();
        let mut lo = cs[0];
        let mut hi = cs[0];
        for c in &cs[1..] {
            lo.x = lo.x.min(c.x);
            lo.z = lo.z.min(c.z);
            hi.x = hi.x.max(c.x);
            hi.z = hi.z.max(c.z);
        }
        (lo, hi)
    }

    /// True if `p` lies strictly inside the rectangle.
    pub fn contains(&self, p: Vec2<T>) -> bool {
        let d = p.sub(self.center);
        let (u, v) = self.axes();
        d.dot(u).abs() < self.half.x && d.dot(v).abs() < self.half.z
    }

    /// The four edges as `(start, end, outward unit normal)`.
    pub fn edges(&self) -> [(Vec2<T>, Vec2<T>, Vec2<T>); 4] {
        let c = self.corners();
        let (u, v) = self.axes();
        [
            (c[3], c[0], u),                           // front (+x)
            (c[1], c[2], u.scale(-T::one())),          // back (-x)
            (c[0], c[1], v),                           // left (+z)
            (c[2], c[3], v.scale(-T::one())),          // right (-z)
        ]
    }

    fn project(&self, axis: Vec2<T>) -> (T, T) {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for c in self.corners() {
            let d = c.dot(axis);
            lo = lo.min(d);
            hi = hi.max(d);
        }
        (lo, hi)
    }
}

/// True iff the interiors of `a` and `b` overlap. Rectangles that only
/// touch along an edge or at a corner do not intersect.
pub fn rects_intersect<T: Scalar>(a: &OrientedRect<T>, b: &OrientedRect<T>) -> bool {
    separation_margin(a, b) < T::zero()
}

/// Separating-axis margin: positive when separated (the widest gap over
/// the separating axes), negative when interiors overlap (minus the
/// smallest penetration depth), zero at exact edge contact.
pub fn separation_margin<T: Scalar>(a: &OrientedRect<T>, b: &OrientedRect<T>) -> T {
    let (au, av) = a.axes();
    let (bu, bv) = b.axes();
    let mut margin = T::neg_infinity();
    let mut min_pen = T::infinity();
    for axis in [au, av, bu, bv] {
        let (alo, ahi) = a.project(axis);
        let (blo, bhi) = b.project(axis);
        let gap = (blo - ahi).max(alo - bhi);
        if gap >= T::zero() {
            margin = margin.max(gap);
        } else {
            min_pen = min_pen.min(-gap);
        }
    }
    if margin > T::neg_infinity() {
        margin
    } else {
        -min_pen
    }
}

/// True iff some edge of `a` and some edge of `b` face each other in
/// near-parallel (within `parallel_tol` radians), are separated by at most
/// `gap_tol` along the shared normal, and their lateral overlap covers at
/// least `min_overlap` of the shorter edge.
pub fn abutting<T: Scalar>(
    a: &OrientedRect<T>,
    b: &OrientedRect<T>,
    gap_tol: T,
    min_overlap: T,
    parallel_tol: T,
) -> bool {
    let cos_tol = -(parallel_tol.cos());
    for (a0, a1, na) in a.edges() {
        for (b0, b1, nb) in b.edges() {
            // Opposing normals within tolerance.
            if na.dot(nb) > cos_tol {
                continue;
            }
            let am = a0.add(a1).scale(T::c(0.5));
            let bm = b0.add(b1).scale(T::c(0.5));
            let gap = bm.sub(am).dot(na);
            if gap.abs() > gap_tol {
                continue;
            }
            // Lateral overlap along a's edge direction.
            let t = na.perp();
            let (alo, ahi) = minmax(a0.dot(t), a1.dot(t));
            let (blo, bhi) = minmax(b0.dot(t), b1.dot(t));
            let overlap = ahi.min(bhi) - alo.max(blo);
            let shorter = (ahi - alo).min(bhi - blo);
            if overlap >= min_overlap * shorter && overlap > T::zero() {
                return true;
            }
        }
    }
    false
}

fn minmax<T: Scalar>(a: T, b: T) -> (T, T) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Free-space distance from the face `(a, b)` swept along the outward unit
/// direction `dir`, stopped by the nearest obstacle rectangle or wall
/// segment, capped at `cap`.
pub fn directional_clearance<T: Scalar>(
    face: (Vec2<T>, Vec2<T>),
    dir: Vec2<T>,
    obstacles: &[OrientedRect<T>],
    walls: &[(Vec2<T>, Vec2<T>)],
    cap: T,
) -> T {
    let (a, b) = face;
    let span = b.sub(a);
    let len = span.norm();
    if len <= T::zero() {
        return cap;
    }
    let u = span.scale(T::one() / len);
    let eps = T::c(1e-9);
    let mut best = cap;

    let mut consider = |pts: &[Vec2<T>], closed: bool| {
        let n = pts.len();
        let coords: Vec<(T, T)> = pts
            .iter()
            .map(|p| {
                let d = p.sub(a);
                (d.dot(u), d.dot(dir))
            })
            .collect();
        for (i, &(cu, cd)) in coords.iter().enumerate() {
            if cu >= -eps && cu <= len + eps && cd >= -eps {
                best = best.min(cd.max(T::zero()));
            }
            let j = (i + 1) % n;
            if j == 0 && !closed {
                continue;
            }
            let (du, dd) = coords[j];
            // Crossings of the strip borders u=0 and u=len.
            for border in [T::zero(), len] {
                let lo = cu.min(du);
                let hi = cu.max(du);
                if lo <= border && border <= hi && (du - cu).abs() > eps {
                    let t = (border - cu) / (du - cu);
                    let d_at = cd + t * (dd - cd);
                    if d_at >= -eps {
                        best = best.min(d_at.max(T::zero()));
                    }
                }
            }
        }
    };

    for o in obstacles {
        let (lo, hi) = o.aabb();
        // Quick reject: obstacle entirely behind the face plane.
        let behind = [lo, hi, Vec2::new(lo.x, hi.z), Vec2::new(hi.x, lo.z)]
            .iter()
            .all(|p| p.sub(a).dot(dir) < -eps);
        if behind {
            continue;
        }
        consider(&o.corners(), true);
    }
    for &(w0, w1) in walls {
        consider(&[w0, w1], false);
    }
    best.max(T::zero()).min(cap)
}

// ---------------------------------------------------------------------------
// Rectilinear polygon helpers.
// ---------------------------------------------------------------------------

/// True if every edge of the polygon is axis-aligned.
pub fn is_rectilinear<T: Scalar>(poly: &[Vec2<T>]) -> bool {
    if poly.len() < 4 {
        return false;
    }
    let eps = T::c(1e-9);
    poly.iter().zip(poly.iter().cycle().skip(1)).all(|(p, q)| {
        let d = q.sub(*p);
        (d.x.abs() <= eps) != (d.z.abs() <= eps)
    })
}

/// True if no two non-adjacent edges of the polygon properly intersect.
pub fn is_simple<T: Scalar>(poly: &[Vec2<T>]) -> bool {
    let n = poly.len();
    if n < 4 {
        return false;
    }
    for i in 0..n {
        let (a0, a1) = (poly[i], poly[(i + 1) % n]);
        for j in (i + 1)..n {
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            let (b0, b1) = (poly[j], poly[(j + 1) % n]);
            if segments_properly_intersect(a0, a1, b0, b1) {
                return false;
            }
        }
    }
    true
}

fn segments_properly_intersect<T: Scalar>(a0: Vec2<T>, a1: Vec2<T>, b0: Vec2<T>, b1: Vec2<T>) -> bool {
    let d1 = cross(b1.sub(b0), a0.sub(b0));
    let d2 = cross(b1.sub(b0), a1.sub(b0));
    let d3 = cross(a1.sub(a0), b0.sub(a0));
    let d4 = cross(a1.sub(a0), b1.sub(a0));
    ((d1 > T::zero() && d2 < T::zero()) || (d1 < T::zero() && d2 > T::zero()))
        && ((d3 > T::zero() && d4 < T::zero()) || (d3 < T::zero() && d4 > T::zero()))
}

fn cross<T: Scalar>(a: Vec2<T>, b: Vec2<T>) -> T {
    a.x * b.z - a.z * b.x
}

/// Even-odd point-in-polygon test.
pub fn point_in_polygon<T: Scalar>(p: Vec2<T>, poly: &[Vec2<T>]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (pi, pj) = (poly[i], poly[j]);
        if (pi.z > p.z) != (pj.z > p.z) {
            let xi = (pj.x - pi.x) * (p.z - pi.z) / (pj.z - pi.z) + pi.x;
            if p.x < xi {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Signed area is not needed; this is the absolute polygon area.
pub fn polygon_area<T: Scalar>(poly: &[Vec2<T>]) -> T {
    let n = poly.len();
    let mut acc = T::zero();
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        acc += p.x * q.z - q.x * p.z;
    }
    (acc * T::c(0.5)).abs()
}

/// Bounding box of a polygon as `(min, max)`.
pub fn polygon_bbox<T: Scalar>(poly: &[Vec2<T>]) -> (Vec2<T>, Vec2<T>) {
    let mut lo = poly[0];
    let mut hi = poly[0];
    for p in &poly[1..] {
        lo.x = lo.x.min(p.x);
        lo.z = lo.z.min(p.z);
        hi.x = hi.x.max(p.x);
        hi.z = hi.z.max(p.z);
    }
    (lo, hi)
}

/// Axis-aligned rectangle polygon from `(min, max)` corners.
pub fn rect_polygon<T: Scalar>(lo: Vec2<T>, hi: Vec2<T>) -> Vec<Vec2<T>> {
    vec![
        lo,
        Vec2::new(hi.x, lo.z),
        hi,
        Vec2::new(lo.x, hi.z),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    type R = OrientedRect<f64>;

    fn unit_square(cx: f64, cz: f64) -> R {
        R::axis_aligned(Vec2::new(cx, cz), Vec2::new(0.5, 0.5))
    }

    #[test]
    fn disjoint_squares_do_not_intersect() {
        assert!(!rects_intersect(&unit_square(0.0, 0.0), &unit_square(3.0, 0.0)));
    }

    #[test]
    fn identical_rects_intersect() {
        let r = unit_square(1.0, 2.0);
        assert!(rects_intersect(&r, &r));
    }

    #[test]
    fn edge_contact_is_not_intersection() {
        assert!(!rects_intersect(&unit_square(0.0, 0.0), &unit_square(1.0, 0.0)));
    }

    #[test]
    fn rotated_near_miss_matches_grid_oracle() {
        // A rotated pair that slides past each other: SAT must agree with a
        // dense 1 mm point-membership check.
        let a = R::new(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.2), std::f64::consts::FRAC_PI_4);
        let b = R::new(Vec2::new(1.2, -1.2), Vec2::new(1.0, 0.2), std::f64::consts::FRAC_PI_4);
        assert_eq!(rects_intersect(&a, &b), grid_overlap_oracle(&a, &b));
        let c = R::new(Vec2::new(0.9, -0.9), Vec2::new(1.0, 0.2), std::f64::consts::FRAC_PI_4);
        assert_eq!(rects_intersect(&a, &c), grid_overlap_oracle(&a, &c));
    }

    /// Dense point-membership oracle on a 1 mm grid over the AABB overlap.
    pub fn grid_overlap_oracle(a: &R, b: &R) -> bool {
        let (alo, ahi) = a.aabb();
        let (blo, bhi) = b.aabb();
        let lo = Vec2::new(alo.x.max(blo.x), alo.z.max(blo.z));
        let hi = Vec2::new(ahi.x.min(bhi.x), ahi.z.min(bhi.z));
        if lo.x >= hi.x || lo.z >= hi.z {
            return false;
        }
        let step = 1e-3;
        let nx = ((hi.x - lo.x) / step).ceil() as usize + 1;
        let nz = ((hi.z - lo.z) / step).ceil() as usize + 1;
        for i in 0..nx {
            for j in 0..nz {
                let p = Vec2::new(lo.x + i as f64 * step, lo.z + j as f64 * step);
                if a.contains(p) && b.contains(p) {
                    return true;
                }
            }
        }
        false
    }

    #[test]
    fn intersection_agrees_with_grid_oracle_on_random_pairs() {
        // 10,000 random pairs, skipping near-tangent cases the 1 mm grid
        // cannot resolve.
        let mut rng = StdRng::seed_from_u64(7);
        let mut checked = 0usize;
        while checked < 10_000 {
            let mut draw = || {
                R::new(
                    Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                    Vec2::new(rng.random_range(0.05..0.8), rng.random_range(0.05..0.8)),
                    rng.random_range(0.0..std::f64::consts::TAU),
                )
            };
            let a = draw();
            let b = draw();
            if separation_margin(&a, &b).abs() < 3e-3 {
                continue;
            }
            assert_eq!(
                rects_intersect(&a, &b),
                grid_overlap_oracle(&a, &b),
                "disagreement on {a:?} vs {b:?}"
            );
            checked += 1;
        }
    }

    #[test]
    fn intersection_is_symmetric() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..1000 {
            let mut draw = || {
                R::new(
                    Vec2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
                    Vec2::new(rng.random_range(0.05..1.0), rng.random_range(0.05..1.0)),
                    rng.random_range(0.0..std::f64::consts::TAU),
                )
            };
            let a = draw();
            let b = draw();
            assert_eq!(rects_intersect(&a, &b), rects_intersect(&b, &a));
        }
    }

    #[test]
    fn flush_squares_abut() {
        let a = unit_square(0.0, 0.0);
        let b = unit_square(1.0, 0.0);
        assert!(abutting(&a, &b, 0.0, 0.5, 2f64.to_radians()));
        assert!(!rects_intersect(&a, &b));
    }

    #[test]
    fn gap_beyond_tolerance_does_not_abut() {
        let a = unit_square(0.0, 0.0);
        let b = unit_square(1.10, 0.0);
        assert!(!abutting(&a, &b, 0.02, 0.5, 2f64.to_radians()));
    }

    #[test]
    fn insufficient_overlap_does_not_abut() {
        // Parallel flush edges sharing only 30% of their length: interval
        // overlap by hand is 0.3 < 0.5 of the shorter (unit) edge.
        let a = unit_square(0.0, 0.0);
        let b = unit_square(1.0, 0.7);
        assert!(!abutting(&a, &b, 0.0, 0.5, 2f64.to_radians()));
        assert!(abutting(&a, &b, 0.0, 0.25, 2f64.to_radians()));
    }

    #[test]
    fn identical_rects_do_not_abut() {
        let a = unit_square(0.0, 0.0);
        assert!(!abutting(&a, &a, 0.02, 0.5, 2f64.to_radians()));
    }

    #[test]
    fn yaw_rotation_matches_rotation_matrix_oracle() {
        // yaw π/6 corners checked against an independent 2x2 rotation of
        // the axis-aligned corners.
        let yaw = std::f64::consts::FRAC_PI_6;
        let r = R::new(Vec2::new(0.0, 0.0), Vec2::new(0.5, 1.0), yaw);
        let corners = r.corners();
        let base = [(0.5, 1.0), (-0.5, 1.0), (-0.5, -1.0), (0.5, -1.0)];
        for (got, (lx, lz)) in corners.iter().zip(base) {
            let ex = yaw.cos() * lx - yaw.sin() * lz;
            let ez = yaw.sin() * lx + yaw.cos() * lz;
            assert!((got.x - ex).abs() < 1e-12 && (got.z - ez).abs() < 1e-12);
        }
    }

    #[test]
    fn area_is_yaw_invariant() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..100 {
            let half = Vec2::new(rng.random_range(0.1..2.0), rng.random_range(0.1..2.0));
            let a0 = R::new(Vec2::zero(), half, 0.0).area();
            let a1 = R::new(Vec2::zero(), half, rng.random_range(0.0..6.28)).area();
            assert!((a0 - a1).abs() < 1e-12);
        }
    }

    #[test]
    fn clearance_hits_nearest_obstacle() {
        // Face at x=0.5 of a unit square, looking +x; obstacle face at x=0.9.
        let face = (Vec2::new(0.5, -0.5), Vec2::new(0.5, 0.5));
        let obstacle = R::axis_aligned(Vec2::new(1.4, 0.0), Vec2::new(0.5, 0.5));
        let d = directional_clearance(face, Vec2::new(1.0, 0.0), &[obstacle], &[], 1.5);
        assert!((d - 0.4).abs() < 1e-9, "{d}");
    }

    #[test]
    fn clearance_capped_when_unobstructed() {
        let face = (Vec2::new(0.5, -0.5), Vec2::new(0.5, 0.5));
        let d = directional_clearance(face, Vec2::new(1.0, 0.0), &[], &[], 1.5);
        assert_eq!(d, 1.5);
    }

    #[test]
    fn clearance_stops_at_wall() {
        let face = (Vec2::new(0.5, -0.5), Vec2::new(0.5, 0.5));
        let wall = (Vec2::new(1.2, -3.0), Vec2::new(1.2, 3.0));
        let d: f64 = directional_clearance(face, Vec2::new(1.0, 0.0), &[], &[wall], 1.5);
        assert!((d - 0.7).abs() < 1e-9);
    }

    #[test]
    fn clearance_ignores_lateral_misses() {
        let face = (Vec2::new(0.5, -0.5), Vec2::new(0.5, 0.5));
        let off_side = R::axis_aligned(Vec2::new(1.0, 5.0), Vec2::new(0.5, 0.5));
        let d = directional_clearance(face, Vec2::new(1.0, 0.0), &[off_side], &[], 1.5);
        assert_eq!(d, 1.5);
    }

    #[test]
    fn rectilinear_checks() {
        let rect = rect_polygon(Vec2::new(0.0, 0.0), Vec2::new(4.0, 3.0));
        assert!(is_rectilinear(&rect));
        assert!(is_simple(&rect));
        let skew = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 2.0)];
        assert!(!is_rectilinear(&skew));
    }

    #[test]
    fn point_in_l_shape() {
        let l = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(6.0, 0.0),
            Vec2::new(6.0, 3.0),
            Vec2::new(3.0, 3.0),
            Vec2::new(3.0, 6.0),
            Vec2::new(0.0, 6.0),
        ];
        assert!(point_in_polygon(Vec2::new(1.0, 5.0), &l));
        assert!(point_in_polygon(Vec2::new(5.0, 1.0), &l));
        assert!(!point_in_polygon(Vec2::new(5.0, 5.0), &l));
        let area: f64 = polygon_area(&l);
        assert!((area - 27.0).abs() < 1e-12);
    }

    #[test]
    fn normalize_yaw_range() {
        assert!((normalize_yaw(-0.5) - (std::f64::consts::TAU - 0.5)).abs() < 1e-12);
        assert_eq!(normalize_yaw(0.0), 0.0);
        let y = normalize_yaw(std::f64::consts::TAU);
        assert!(y >= 0.0 && y < std::f64::consts::TAU);
    }
}
