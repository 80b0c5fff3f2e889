//! Piecewise-linear boundary graph in 3-D: a triangulated height field.
//!
//! Samples live on an m×m grid over [-1,1]²; each grid cell is split along
//! the (i,j)→(i+1,j+1) diagonal into two triangles, so the interpolant is
//! genuinely piecewise linear and exact max/min queries reduce to vertex
//! enumeration. A bitwise-constant field (the flat fixture) short-circuits
//! every query with closed forms.

use crate::exact::{big_from_f64, to_big};
use crate::geom::{box_triangle_dist3, point_triangle_dist_sq, AxisBox};
use crate::{BigRat, Rat};

const BLOCK: usize = 16;

#[derive(Clone, Debug)]
pub(crate) struct HeightField {
    pub samples: Vec<f64>,
    pub m: usize,
    pub delta: f64,
    pub constant: Option<f64>,
    nblocks: usize,
    block_lo: Vec<f64>,
    block_hi: Vec<f64>,
}

impl HeightField {
    pub fn new(samples: Vec<f64>, m: usize, delta: f64) -> Self {
        assert_eq!(samples.len(), m * m);
        let constant = if samples.iter().all(|z| *z == samples[0]) {
            Some(samples[0])
        } else {
            None
        };
        let ncells = m - 1;
        let nblocks = ncells.div_ceil(BLOCK);
        let mut block_lo = vec![f64::INFINITY; nblocks * nblocks];
        let mut block_hi = vec![f64::NEG_INFINITY; nblocks * nblocks];
        for bi in 0..nblocks {
            for bj in 0..nblocks {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for i in (bi * BLOCK)..=(((bi + 1) * BLOCK).min(ncells)) {
                    for j in (bj * BLOCK)..=(((bj + 1) * BLOCK).min(ncells)) {
                        let z = samples[i * m + j];
                        lo = lo.min(z);
                        hi = hi.max(z);
                    }
                }
                block_lo[bi * nblocks + bj] = lo;
                block_hi[bi * nblocks + bj] = hi;
            }
        }
        HeightField {
            samples,
            m,
            delta,
            constant,
            nblocks,
            block_lo,
            block_hi,
        }
    }

    #[inline]
    pub fn abscissa(&self, i: usize) -> f64 {
        -1.0 + i as f64 * self.delta
    }

    #[inline]
    fn z(&self, i: usize, j: usize) -> f64 {
        self.samples[i * self.m + j]
    }

    #[inline]
    fn cell_of(&self, t: f64) -> usize {
        let j = ((t + 1.0) / self.delta).floor() as isize;
        j.clamp(0, self.m as isize - 2) as usize
    }

    /// Interpolant value at `(x, y)`, both in [-1, 1].
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        if let Some(c) = self.constant {
            return c;
        }
        let i = self.cell_of(x);
        let j = self.cell_of(y);
        let u = (x - self.abscissa(i)) / self.delta;
        let v = (y - self.abscissa(j)) / self.delta;
        let z00 = self.z(i, j);
        let z10 = self.z(i + 1, j);
        let z01 = self.z(i, j + 1);
        let z11 = self.z(i + 1, j + 1);
        if u >= v {
            z00 + u * (z10 - z00) + v * (z11 - z10)
        } else {
            z00 + u * (z11 - z01) + v * (z01 - z00)
        }
    }

    /// Lipschitz constant of the interpolant: max triangle gradient norm.
    pub fn measured_lipschitz(&self) -> f64 {
        if self.constant.is_some() {
            return 0.0;
        }
        let mut lip: f64 = 0.0;
        let inv = 1.0 / self.delta;
        for i in 0..self.m - 1 {
            for j in 0..self.m - 1 {
                let z00 = self.z(i, j);
                let z10 = self.z(i + 1, j);
                let z01 = self.z(i, j + 1);
                let z11 = self.z(i + 1, j + 1);
                let g1 = [(z10 - z00) * inv, (z11 - z10) * inv];
                let g2 = [(z11 - z01) * inv, (z01 - z00) * inv];
                lip = lip.max((g1[0] * g1[0] + g1[1] * g1[1]).sqrt());
                lip = lip.max((g2[0] * g2[0] + g2[1] * g2[1]).sqrt());
            }
        }
        lip
    }

    /// Lower bound for the interpolant min over the rectangle
    /// `[lo0,hi0]×[lo1,hi1]`: min over the covering cells' samples.
    pub fn min_sample_bound(&self, lo: [f64; 2], hi: [f64; 2]) -> f64 {
        if let Some(c) = self.constant {
            return c;
        }
        let i0 = self.cell_of(lo[0]);
        let i1 = self.cell_of(hi[0]);
        let j0 = self.cell_of(lo[1]);
        let j1 = self.cell_of(hi[1]);
        let mut out = f64::INFINITY;
        for i in i0..=(i1 + 1) {
            for j in j0..=(j1 + 1) {
                out = out.min(self.z(i, j));
            }
        }
        out
    }

    fn triangles_of_cell(&self, i: usize, j: usize) -> [[[f64; 3]; 3]; 2] {
        let x0 = self.abscissa(i);
        let x1 = self.abscissa(i + 1);
        let y0 = self.abscissa(j);
        let y1 = self.abscissa(j + 1);
        let a = [x0, y0, self.z(i, j)];
        let b = [x1, y0, self.z(i + 1, j)];
        let c = [x1, y1, self.z(i + 1, j + 1)];
        let d = [x0, y1, self.z(i, j + 1)];
        [[a, b, c], [a, c, d]]
    }

    /// Distance from a point to the full graph surface.
    pub fn point_dist(&self, p: &[f64; 3]) -> f64 {
        if let Some(c) = self.constant {
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            let e = (r - 1.0).max(0.0);
            let dz = p[2] - c;
            return (e * e + dz * dz).sqrt();
        }
        let query = AxisBox::new([p[0], p[1], p[2]], [p[0], p[1], p[2]]);
        self.sweep(&query, |tri, best2| {
            point_triangle_dist_sq(p, &tri[0], &tri[1], &tri[2]).min(best2)
        })
    }

    /// Distance from a closed box to the graph surface.
    pub fn box_dist(&self, bx: &AxisBox<f64, 3>) -> f64 {
        if let Some(c) = self.constant {
            let dz = (bx.min[2] - c).max(c - bx.max[2]).max(0.0);
            // Distance in the plane from the box footprint to the unit disk.
            let foot = AxisBox::<f64, 2>::new([bx.min[0], bx.min[1]], [bx.max[0], bx.max[1]]);
            let e = (foot.min_norm_to_origin() - 1.0).max(0.0);
            return (e * e + dz * dz).sqrt();
        }
        self.sweep(bx, |tri, best2| {
            let d = box_triangle_dist3(bx, &tri[0], &tri[1], &tri[2]);
            (d * d).min(best2)
        })
    }

    /// Block sweep: visit triangles of blocks in increasing prism-distance
    /// order until the lower bound exceeds the best found.
    fn sweep(&self, bx: &AxisBox<f64, 3>, mut refine: impl FnMut(&[[f64; 3]; 3], f64) -> f64) -> f64 {
        let nb = self.nblocks;
        let ncells = self.m - 1;
        let mut order: Vec<(f64, usize)> = (0..nb * nb)
            .map(|b| {
                let bi = b / nb;
                let bj = b % nb;
                let prism = AxisBox::new(
                    [
                        self.abscissa(bi * BLOCK),
                        self.abscissa(bj * BLOCK),
                        self.block_lo[b],
                    ],
                    [
                        self.abscissa(((bi + 1) * BLOCK).min(ncells)),
                        self.abscissa(((bj + 1) * BLOCK).min(ncells)),
                        self.block_hi[b],
                    ],
                );
                (prism.dist_sq(bx), b)
            })
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut best2 = f64::INFINITY;
        for (lb, b) in order {
            if lb >= best2 {
                break;
            }
            let bi = b / nb;
            let bj = b % nb;
            for i in (bi * BLOCK)..((bi + 1) * BLOCK).min(ncells) {
                for j in (bj * BLOCK)..((bj + 1) * BLOCK).min(ncells) {
                    for tri in &self.triangles_of_cell(i, j) {
                        best2 = refine(tri, best2);
                    }
                }
            }
        }
        best2.sqrt()
    }

    /// Exact interpolant value at a rational planar point.
    pub fn eval_exact(&self, x: Rat, y: Rat) -> BigRat {
        if let Some(c) = self.constant {
            return big_from_f64(c);
        }
        let inv = (1.0 / self.delta) as i128;
        let xp = (x + Rat::from_integer(1)) * Rat::from_integer(inv);
        let yp = (y + Rat::from_integer(1)) * Rat::from_integer(inv);
        let i = xp.floor().to_integer().clamp(0, self.m as i128 - 2) as usize;
        let j = yp.floor().to_integer().clamp(0, self.m as i128 - 2) as usize;
        let u = xp - Rat::from_integer(i as i128);
        let v = yp - Rat::from_integer(j as i128);
        let z00 = big_from_f64(self.z(i, j));
        let z10 = big_from_f64(self.z(i + 1, j));
        let z01 = big_from_f64(self.z(i, j + 1));
        let z11 = big_from_f64(self.z(i + 1, j + 1));
        let (ub, vb) = (to_big(u), to_big(v));
        if u >= v {
            &z00 + (z10.clone() - &z00) * ub + (z11 - z10) * vb
        } else {
            &z00 + (z11 - &z01) * ub + (z01 - &z00) * vb
        }
    }

    /// Exact max of the interpolant over the closed rational rectangle.
    /// The max of a PL surface over a rectangle is attained at a rectangle
    /// corner, an interior grid vertex, or a crossing of a rectangle edge
    /// with a grid line or cell diagonal.
    pub fn max_over_exact(&self, lo: [Rat; 2], hi: [Rat; 2]) -> BigRat {
        if let Some(c) = self.constant {
            return big_from_f64(c);
        }
        let mut best = self.eval_exact(lo[0], lo[1]);
        let push = |v: BigRat, best: &mut BigRat| {
            if v > *best {
                *best = v;
            }
        };
        for (x, y) in [(lo[0], hi[1]), (hi[0], lo[1]), (hi[0], hi[1])] {
            let v = self.eval_exact(x, y);
            push(v, &mut best);
        }
        let inv = (1.0 / self.delta) as i128;
        let pos = |t: Rat| (t + Rat::from_integer(1)) * Rat::from_integer(inv);
        let i0 = pos(lo[0]).ceil().to_integer().max(0);
        let i1 = pos(hi[0]).floor().to_integer().min(self.m as i128 - 1);
        let j0 = pos(lo[1]).ceil().to_integer().max(0);
        let j1 = pos(hi[1]).floor().to_integer().min(self.m as i128 - 1);
        // Interior and edge grid vertices.
        if i0 <= i1 && j0 <= j1 {
            let mut fmax = f64::NEG_INFINITY;
            for i in i0..=i1 {
                for j in j0..=j1 {
                    fmax = fmax.max(self.z(i as usize, j as usize));
                }
            }
            push(big_from_f64(fmax), &mut best);
        }
        // Rectangle edge crossings with grid lines and diagonals.
        let abscissa_q = |k: i128| Rat::new(k, inv) - Rat::from_integer(1);
        // Vertical edges x = lo[0] and x = hi[0]: crossings at y = grid line
        // (handled via eval at (x, t_j)) and y = x - t_i + t_j (diagonals).
        for x in [lo[0], hi[0]] {
            for j in j0..=j1 {
                let y = abscissa_q(j);
                if y >= lo[1] && y <= hi[1] {
                    let v = self.eval_exact(x, y);
                    push(v, &mut best);
                }
            }
            // Diagonal crossings: y - x = t_j - t_i =: integer multiple of δ.
            let diffpos = pos(lo[1]) - pos(x);
            let d0 = diffpos.floor().to_integer();
            let d1 = (pos(hi[1]) - pos(x)).ceil().to_integer();
            for k in d0..=d1 {
                let y = x + Rat::new(k, inv);
                if y >= lo[1] && y <= hi[1] {
                    let v = self.eval_exact(x, y);
                    push(v, &mut best);
                }
            }
        }
        for y in [lo[1], hi[1]] {
            for i in i0..=i1 {
                let x = abscissa_q(i);
                if x >= lo[0] && x <= hi[0] {
                    let v = self.eval_exact(x, y);
                    push(v, &mut best);
                }
            }
            let d0 = (pos(lo[0]) - pos(y)).floor().to_integer();
            let d1 = (pos(hi[0]) - pos(y)).ceil().to_integer();
            for k in d0..=d1 {
                let x = y + Rat::new(k, inv);
                if x >= lo[0] && x <= hi[0] {
                    let v = self.eval_exact(x, y);
                    push(v, &mut best);
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn bump_field(m: usize) -> HeightField {
        let delta = 2.0 / (m - 1) as f64;
        let mut samples = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                let x: f64 = -1.0 + i as f64 * delta;
                let y: f64 = -1.0 + j as f64 * delta;
                let r2 = x * x + y * y;
                samples[i * m + j] = 0.1 * (1.0 - r2).max(0.0).powi(2);
            }
        }
        HeightField::new(samples, m, delta)
    }

    #[test]
    fn flat_shortcuts() {
        let f = HeightField::new(vec![0.0; 33 * 33], 33, 2.0 / 32.0);
        assert_eq!(f.constant, Some(0.0));
        assert_eq!(f.eval(0.3, -0.2), 0.0);
        let d = f.point_dist(&[0.0, 0.0, 0.25]);
        assert_eq!(d, 0.25);
        // Point beyond the unit-disk rim.
        let d = f.point_dist(&[1.5, 0.0, 0.5]);
        assert!((d - (0.25f64 + 0.25).sqrt()).abs() < 1e-15);
        let bx = AxisBox::new([-0.1, -0.1, 0.125], [0.1, 0.1, 0.25]);
        assert_eq!(f.box_dist(&bx), 0.125);
    }

    #[test]
    fn general_distance_matches_brute_force() {
        let f = bump_field(17);
        let p = [0.2, -0.3, 0.5];
        let fast = f.point_dist(&p);
        let mut slow2 = f64::INFINITY;
        for i in 0..f.m - 1 {
            for j in 0..f.m - 1 {
                for tri in &f.triangles_of_cell(i, j) {
                    slow2 = slow2.min(point_triangle_dist_sq(&p, &tri[0], &tri[1], &tri[2]));
                }
            }
        }
        assert!((fast - slow2.sqrt()).abs() < 1e-13);
        let bx = AxisBox::new([-0.3, 0.1, 0.3], [-0.1, 0.3, 0.5]);
        let fast = f.box_dist(&bx);
        let mut slow = f64::INFINITY;
        for i in 0..f.m - 1 {
            for j in 0..f.m - 1 {
                for tri in &f.triangles_of_cell(i, j) {
                    slow = slow.min(box_triangle_dist3(&bx, &tri[0], &tri[1], &tri[2]));
                }
            }
        }
        assert!((fast - slow).abs() < 1e-13);
    }

    #[test]
    fn exact_rect_max_dominates_sampling() {
        let f = bump_field(17);
        let (lo, hi) = ([rat(-1, 4), rat(-1, 8)], [rat(3, 8), rat(1, 2)]);
        let exact = f.max_over_exact(lo, hi);
        // Dense float sampling can only underestimate the true max.
        let mut fmax = f64::NEG_INFINITY;
        let n = 64;
        for a in 0..=n {
            for b in 0..=n {
                let x = -0.25 + (0.375 + 0.25) * a as f64 / n as f64;
                let y = -0.125 + (0.5 + 0.125) * b as f64 / n as f64;
                fmax = fmax.max(f.eval(x, y));
            }
        }
        assert!(exact >= big_from_f64(fmax - 1e-12));
        assert!(exact <= big_from_f64(fmax + 1e-3));
    }
}
