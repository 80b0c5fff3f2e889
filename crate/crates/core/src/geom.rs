//! Axis-aligned boxes generic over the scalar, plus `f64` metric kernels.
//!
//! Box predicates (containment, intersection, per-axis gaps, squared
//! distances) only need ring operations and ordering, so they are written
//! once over a generic scalar and instantiated both at `f64` and at exact
//! rationals. Anything involving square roots (Euclidean norms, distances
//! to segments and triangles) is `f64`-only.

use num_traits::Num;

/// Scalar admissible for box predicates: ordered ring with exact semantics
/// left to the instantiation (`f64`, `Ratio<i128>`, `BigRational`).
pub trait Scalar: Clone + PartialOrd + Num {}
impl<T: Clone + PartialOrd + Num> Scalar for T {}

/// Closed axis-aligned box `Π_i [min_i, max_i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisBox<S, const N: usize> {
    pub min: [S; N],
    pub max: [S; N],
}

impl<S: Scalar, const N: usize> AxisBox<S, N> {
    pub fn new(min: [S; N], max: [S; N]) -> Self {
        for i in 0..N {
            assert!(min[i] <= max[i], "box min must not exceed max");
        }
        AxisBox { min, max }
    }

    /// Closed containment: `min_i ≤ p_i ≤ max_i` for all axes.
    pub fn contains(&self, p: &[S; N]) -> bool {
        (0..N).all(|i| self.min[i] <= p[i] && p[i] <= self.max[i])
    }

    /// Open containment: `min_i < p_i < max_i` for all axes.
    pub fn contains_strict(&self, p: &[S; N]) -> bool {
        (0..N).all(|i| self.min[i] < p[i] && p[i] < self.max[i])
    }

    /// Half-open containment `min_i ≤ p_i < max_i`, the convention that
    /// assigns a lattice point to exactly one cube of a disjoint family.
    pub fn contains_half_open(&self, p: &[S; N]) -> bool {
        (0..N).all(|i| self.min[i] <= p[i] && p[i] < self.max[i])
    }

    /// Closed boxes intersect (shared faces count).
    pub fn intersects(&self, other: &Self) -> bool {
        (0..N).all(|i| self.min[i] <= other.max[i] && other.min[i] <= self.max[i])
    }

    /// Per-axis separation between closed boxes; zero on overlapping axes.
    pub fn gap(&self, other: &Self, axis: usize) -> S {
        if self.min[axis] > other.max[axis] {
            self.min[axis].clone() - other.max[axis].clone()
        } else if other.min[axis] > self.max[axis] {
            other.min[axis].clone() - self.max[axis].clone()
        } else {
            S::zero()
        }
    }

    /// Squared Euclidean distance between closed boxes, exact over exact
    /// scalars. Zero iff the boxes intersect.
    pub fn dist_sq(&self, other: &Self) -> S {
        let mut acc = S::zero();
        for i in 0..N {
            let g = self.gap(other, i);
            acc = acc + g.clone() * g;
        }
        acc
    }

    /// Squared distance from a point to the closed box.
    pub fn point_dist_sq(&self, p: &[S; N]) -> S {
        let mut acc = S::zero();
        for i in 0..N {
            let g = if p[i] < self.min[i] {
                self.min[i].clone() - p[i].clone()
            } else if p[i] > self.max[i] {
                p[i].clone() - self.max[i].clone()
            } else {
                S::zero()
            };
            acc = acc + g.clone() * g;
        }
        acc
    }

    /// All `2^N` corners, axis-0 fastest.
    pub fn corners(&self) -> Vec<[S; N]> {
        let mut out = Vec::with_capacity(1 << N);
        for mask in 0..(1usize << N) {
            let mut c = self.min.clone();
            for i in 0..N {
                if mask & (1 << i) != 0 {
                    c[i] = self.max[i].clone();
                }
            }
            out.push(c);
        }
        out
    }
}

impl<const N: usize> AxisBox<f64, N> {
    pub fn center(&self) -> [f64; N] {
        std::array::from_fn(|i| 0.5 * (self.min[i] + self.max[i]))
    }

    /// Largest `|x|` over the closed box (attained at a corner).
    pub fn max_norm_to_origin(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            let m = self.min[i].abs().max(self.max[i].abs());
            acc += m * m;
        }
        acc.sqrt()
    }

    /// Smallest `|x|` over the closed box (origin clamped to the box).
    pub fn min_norm_to_origin(&self) -> f64 {
        self.point_dist_sq(&[0.0; N]).sqrt()
    }
}

pub fn sub<const N: usize>(a: &[f64; N], b: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|i| a[i] - b[i])
}

pub fn dot<const N: usize>(a: &[f64; N], b: &[f64; N]) -> f64 {
    (0..N).map(|i| a[i] * b[i]).sum()
}

pub fn norm<const N: usize>(a: &[f64; N]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist<const N: usize>(a: &[f64; N], b: &[f64; N]) -> f64 {
    norm(&sub(a, b))
}

/// Squared distance from point `p` to the segment `a`–`b`.
pub fn point_segment_dist_sq<const N: usize>(p: &[f64; N], a: &[f64; N], b: &[f64; N]) -> f64 {
    let ab = sub(b, a);
    let ap = sub(p, a);
    let denom = dot(&ab, &ab);
    let t = if denom > 0.0 {
        (dot(&ap, &ab) / denom).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let proj: [f64; N] = std::array::from_fn(|i| a[i] + t * ab[i]);
    dot(&sub(p, &proj), &sub(p, &proj))
}

/// Squared distance between segments `p1`–`q1` and `p2`–`q2` (any dimension).
/// Clamped closed-form parameter search (Ericson, Real-Time Collision
/// Detection §5.1.9).
pub fn segment_segment_dist_sq<const N: usize>(
    p1: &[f64; N],
    q1: &[f64; N],
    p2: &[f64; N],
    q2: &[f64; N],
) -> f64 {
    let d1 = sub(q1, p1);
    let d2 = sub(q2, p2);
    let r = sub(p1, p2);
    let a = dot(&d1, &d1);
    let e = dot(&d2, &d2);
    let f = dot(&d2, &r);
    let (mut s, mut t);
    if a <= f64::EPSILON && e <= f64::EPSILON {
        s = 0.0;
        t = 0.0;
    } else if a <= f64::EPSILON {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = dot(&d1, &r);
        if e <= f64::EPSILON {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = dot(&d1, &d2);
            let denom = a * e - b * b;
            s = if denom != 0.0 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            t = (b * s + f) / e;
            if t < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            }
        }
    }
    let c1: [f64; N] = std::array::from_fn(|i| p1[i] + s * d1[i]);
    let c2: [f64; N] = std::array::from_fn(|i| p2[i] + t * d2[i]);
    dot(&sub(&c1, &c2), &sub(&c1, &c2))
}

/// Squared distance from point `p` to triangle `abc` in 3-D (Ericson §5.1.5).
pub fn point_triangle_dist_sq(p: &[f64; 3], a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    let ab = sub(b, a);
    let ac = sub(c, a);
    let ap = sub(p, a);
    let d1 = dot(&ab, &ap);
    let d2 = dot(&ac, &ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return dot(&ap, &ap);
    }
    let bp = sub(p, b);
    let d3 = dot(&ab, &bp);
    let d4 = dot(&ac, &bp);
    if d3 >= 0.0 && d4 <= d3 {
        return dot(&bp, &bp);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let t = d1 / (d1 - d3);
        let q: [f64; 3] = std::array::from_fn(|i| a[i] + t * ab[i]);
        return dot(&sub(p, &q), &sub(p, &q));
    }
    let cp = sub(p, c);
    let d5 = dot(&ab, &cp);
    let d6 = dot(&ac, &cp);
    if d6 >= 0.0 && d5 <= d6 {
        return dot(&cp, &cp);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let t = d2 / (d2 - d6);
        let q: [f64; 3] = std::array::from_fn(|i| a[i] + t * ac[i]);
        return dot(&sub(p, &q), &sub(p, &q));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        let q: [f64; 3] = std::array::from_fn(|i| b[i] + t * (c[i] - b[i]));
        return dot(&sub(p, &q), &sub(p, &q));
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    let q: [f64; 3] = std::array::from_fn(|i| a[i] + v * ab[i] + w * ac[i]);
    dot(&sub(p, &q), &sub(p, &q))
}

/// Does the segment `a`–`b` intersect the closed 2-D box? Slab clipping.
pub fn segment_intersects_box2(a: &[f64; 2], b: &[f64; 2], bx: &AxisBox<f64, 2>) -> bool {
    let d = sub(b, a);
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for i in 0..2 {
        if d[i].abs() < f64::MIN_POSITIVE {
            if a[i] < bx.min[i] || a[i] > bx.max[i] {
                return false;
            }
        } else {
            let inv = 1.0 / d[i];
            let mut ta = (bx.min[i] - a[i]) * inv;
            let mut tb = (bx.max[i] - a[i]) * inv;
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 > t1 {
                return false;
            }
        }
    }
    true
}

/// Distance from the closed 2-D box to the segment `a`–`b`.
pub fn box_segment_dist2(bx: &AxisBox<f64, 2>, a: &[f64; 2], b: &[f64; 2]) -> f64 {
    if segment_intersects_box2(a, b, bx) {
        return 0.0;
    }
    // Nearest pair is corner-to-segment or endpoint-to-box.
    let mut best = bx.point_dist_sq(a).min(bx.point_dist_sq(b));
    for c in bx.corners() {
        best = best.min(point_segment_dist_sq(&c, a, b));
    }
    best.sqrt()
}

/// Separating-axis test: does triangle `abc` intersect the closed 3-D box?
pub fn triangle_intersects_box3(
    a: &[f64; 3],
    b: &[f64; 3],
    c: &[f64; 3],
    bx: &AxisBox<f64, 3>,
) -> bool {
    let ctr = bx.center();
    let half: [f64; 3] = std::array::from_fn(|i| 0.5 * (bx.max[i] - bx.min[i]));
    let v0 = sub(a, &ctr);
    let v1 = sub(b, &ctr);
    let v2 = sub(c, &ctr);
    let e0 = sub(&v1, &v0);
    let e1 = sub(&v2, &v1);
    let e2 = sub(&v0, &v2);

    let cross = |u: &[f64; 3], v: &[f64; 3]| -> [f64; 3] {
        [
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ]
    };
    let axis_test = |axis: &[f64; 3]| -> bool {
        let p0 = dot(axis, &v0);
        let p1 = dot(axis, &v1);
        let p2 = dot(axis, &v2);
        let r = half[0] * axis[0].abs() + half[1] * axis[1].abs() + half[2] * axis[2].abs();
        let lo = p0.min(p1).min(p2);
        let hi = p0.max(p1).max(p2);
        lo > r || hi < -r
    };

    // Box face normals.
    for i in 0..3 {
        let lo = v0[i].min(v1[i]).min(v2[i]);
        let hi = v0[i].max(v1[i]).max(v2[i]);
        if lo > half[i] || hi < -half[i] {
            return false;
        }
    }
    // Triangle normal.
    if axis_test(&cross(&e0, &e1)) {
        return false;
    }
    // Nine edge cross products.
    let units: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for e in [&e0, &e1, &e2] {
        for u in &units {
            let ax = cross(u, e);
            if dot(&ax, &ax) > 0.0 && axis_test(&ax) {
                return false;
            }
        }
    }
    true
}

/// Distance from the closed 3-D box to triangle `abc`. Candidate features:
/// box corners vs triangle, triangle vertices vs box, edge-edge pairs; this
/// set is complete for a pair of convex polytopes.
pub fn box_triangle_dist3(bx: &AxisBox<f64, 3>, a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    if triangle_intersects_box3(a, b, c, bx) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for v in [a, b, c] {
        best = best.min(bx.point_dist_sq(v));
    }
    let corners = bx.corners();
    for p in &corners {
        best = best.min(point_triangle_dist_sq(p, a, b, c));
    }
    // 12 box edges against 3 triangle edges.
    let edges: [(usize, usize); 12] = [
        (0, 1),
        (2, 3),
        (4, 5),
        (6, 7),
        (0, 2),
        (1, 3),
        (4, 6),
        (5, 7),
        (0, 4),
        (1, 5),
        (2, 6),
        (3, 7),
    ];
    let tri_edges = [(a, b), (b, c), (c, a)];
    for (i, j) in edges {
        for (p, q) in &tri_edges {
            best = best.min(segment_segment_dist_sq(&corners[i], &corners[j], p, q));
        }
    }
    best.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::Rat;
    use proptest::prelude::*;

    #[test]
    fn rational_box_predicates_are_exact() {
        // 6/5-dilation style corners: denominators 5·2^{s+1}.
        let b = AxisBox::<Rat, 2>::new([rat(-1, 40), rat(19, 40)], [rat(11, 40), rat(31, 40)]);
        assert!(b.contains(&[rat(11, 40), rat(19, 40)]));
        assert!(!b.contains_strict(&[rat(11, 40), rat(19, 40)]));
        assert!(b.contains_strict(&[rat(1, 8), rat(5, 8)]));
        let c = AxisBox::<Rat, 2>::new([rat(11, 40), rat(0, 1)], [rat(1, 1), rat(1, 1)]);
        assert!(b.intersects(&c));
        assert_eq!(b.dist_sq(&c), rat(0, 1));
        let d = AxisBox::<Rat, 2>::new([rat(21, 40), rat(0, 1)], [rat(1, 1), rat(1, 4)]);
        // gaps: x: 21/40-11/40 = 1/4, y: 19/40-1/4 = 9/40.
        assert_eq!(d.dist_sq(&b), rat(1, 16) + rat(81, 1600));
    }

    #[test]
    fn box_segment_distance_cases() {
        let b = AxisBox::<f64, 2>::new([0.0, 0.0], [1.0, 1.0]);
        assert_eq!(box_segment_dist2(&b, &[0.5, 0.5], &[2.0, 2.0]), 0.0);
        let d = box_segment_dist2(&b, &[2.0, -1.0], &[2.0, 2.0]);
        assert!((d - 1.0).abs() < 1e-15);
        // Parallel face case.
        let d = box_segment_dist2(&b, &[0.25, 1.5], &[0.75, 1.5]);
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn box_triangle_distance_cases() {
        let b = AxisBox::<f64, 3>::new([0.0, 0.0, 0.0], [1.0, 1.0, 1.0]);
        // Triangle in plane z = 2 above the box.
        let d = box_triangle_dist3(&b, &[0.2, 0.2, 2.0], &[0.8, 0.2, 2.0], &[0.5, 0.8, 2.0]);
        assert!((d - 1.0).abs() < 1e-14);
        // Intersecting triangle.
        let d = box_triangle_dist3(&b, &[-1.0, 0.5, 0.5], &[2.0, 0.5, 0.5], &[0.5, 2.0, 0.5]);
        assert_eq!(d, 0.0);
        // Edge-edge closest pair: triangle edge diagonal past a box edge.
        let d = box_triangle_dist3(&b, &[1.5, -0.5, 0.5], &[1.5, 1.5, 0.5], &[3.0, 0.5, 0.5]);
        assert!((d - 0.5).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn float_box_dist_matches_corner_sampling(
            ax in -1.0f64..1.0, ay in -1.0f64..1.0,
            bw in 0.01f64..0.5, bh in 0.01f64..0.5,
            cx in -1.0f64..1.0, cy in -1.0f64..1.0,
            dw in 0.01f64..0.5, dh in 0.01f64..0.5,
        ) {
            let b1 = AxisBox::<f64, 2>::new([ax, ay], [ax + bw, ay + bh]);
            let b2 = AxisBox::<f64, 2>::new([cx, cy], [cx + dw, cy + dh]);
            let exact = b1.dist_sq(&b2).sqrt();
            // Dense sampling of b2's boundary can only overestimate.
            let mut best = f64::INFINITY;
            let m = 24;
            for k in 0..=m {
                let t = k as f64 / m as f64;
                for p in [
                    [cx + t * dw, cy],
                    [cx + t * dw, cy + dh],
                    [cx, cy + t * dh],
                    [cx + dw, cy + t * dh],
                ] {
                    best = best.min(b1.point_dist_sq(&p).sqrt());
                }
            }
            prop_assert!(exact <= best + 1e-12);
            prop_assert!(best <= exact + 0.1 * (dw.max(dh)));
        }

        #[test]
        fn segment_distance_symmetry(
            p1 in prop::array::uniform2(-1.0f64..1.0),
            q1 in prop::array::uniform2(-1.0f64..1.0),
            p2 in prop::array::uniform2(-1.0f64..1.0),
            q2 in prop::array::uniform2(-1.0f64..1.0),
        ) {
            let d1 = segment_segment_dist_sq(&p1, &q1, &p2, &q2);
            let d2 = segment_segment_dist_sq(&p2, &q2, &p1, &q1);
            prop_assert!((d1 - d2).abs() <= 1e-12 * (1.0 + d1.abs()));
        }
    }
}
