//! Piecewise-linear boundary graph in 2-D.
//!
//! The boundary function φ is stored as uniformly spaced samples over
//! [-1, 1]; every query is answered against the piecewise-linear
//! interpolant. Distance queries use an outward block sweep with interval
//! bounds so that only segments near the query are touched.

use crate::exact::{big_from_f64, to_big};
use crate::geom::{box_segment_dist2, point_segment_dist_sq, segment_intersects_box2, AxisBox};
use crate::{BigRat, Rat};

const BLOCK: usize = 64;

#[derive(Clone, Debug)]
pub(crate) struct PolylineGraph {
    pub samples: Vec<f64>,
    pub delta: f64,
    /// Per-block min/max of the samples spanned by each block of segments.
    block_lo: Vec<f64>,
    block_hi: Vec<f64>,
    /// The graph clipped to the closed unit ball, as explicit segments.
    clipped: Vec<([f64; 2], [f64; 2])>,
    /// All samples bitwise equal (flat graph) enables exact shortcuts.
    pub constant: Option<f64>,
}

impl PolylineGraph {
    pub fn new(samples: Vec<f64>, delta: f64) -> Self {
        let m = samples.len();
        let nseg = m - 1;
        let nblocks = nseg.div_ceil(BLOCK);
        let mut block_lo = vec![f64::INFINITY; nblocks];
        let mut block_hi = vec![f64::NEG_INFINITY; nblocks];
        for b in 0..nblocks {
            let s0 = b * BLOCK;
            let s1 = ((b + 1) * BLOCK).min(nseg);
            for y in &samples[s0..=s1] {
                block_lo[b] = block_lo[b].min(*y);
                block_hi[b] = block_hi[b].max(*y);
            }
        }
        let constant = if samples.iter().all(|y| *y == samples[0]) {
            Some(samples[0])
        } else {
            None
        };
        let mut g = PolylineGraph {
            samples,
            delta,
            block_lo,
            block_hi,
            clipped: Vec::new(),
            constant,
        };
        g.clipped = g.clip_to_unit_ball();
        g
    }

    #[inline]
    pub fn num_segments(&self) -> usize {
        self.samples.len() - 1
    }

    #[inline]
    pub fn abscissa(&self, i: usize) -> f64 {
        -1.0 + i as f64 * self.delta
    }

    #[inline]
    fn segment(&self, i: usize) -> ([f64; 2], [f64; 2]) {
        (
            [self.abscissa(i), self.samples[i]],
            [self.abscissa(i + 1), self.samples[i + 1]],
        )
    }

    /// Index of the cell containing `t`, clamped into range.
    #[inline]
    pub fn cell_of(&self, t: f64) -> usize {
        let j = ((t + 1.0) / self.delta).floor() as isize;
        j.clamp(0, self.num_segments() as isize - 1) as usize
    }

    /// Interpolant value at `t ∈ [-1, 1]`.
    pub fn eval(&self, t: f64) -> f64 {
        if let Some(c) = self.constant {
            return c;
        }
        let j = self.cell_of(t);
        let frac = (t - self.abscissa(j)) / self.delta;
        self.samples[j] + (self.samples[j + 1] - self.samples[j]) * frac
    }

    /// Max consecutive-sample slope magnitude (Lipschitz constant of the
    /// interpolant).
    pub fn measured_lipschitz(&self) -> f64 {
        let mut lip: f64 = 0.0;
        for i in 0..self.num_segments() {
            lip = lip.max((self.samples[i + 1] - self.samples[i]).abs() / self.delta);
        }
        lip
    }

    /// Exact min over the closed interval `[lo, hi]` of the interpolant,
    /// as an f64 bound: the PL min over a cell is attained at a sample, so
    /// min over `[lo, hi]` is at least the min over the covering cells'
    /// samples. Used only as a conservative prune.
    pub fn min_sample_bound(&self, lo: f64, hi: f64) -> f64 {
        if let Some(c) = self.constant {
            return c;
        }
        let c0 = self.cell_of(lo);
        let c1 = self.cell_of(hi);
        let b0 = c0 / BLOCK;
        let b1 = c1 / BLOCK;
        let mut out = f64::INFINITY;
        if b1 > b0 + 1 {
            for b in (b0 + 1)..b1 {
                out = out.min(self.block_lo[b]);
            }
            for i in c0..=((b0 + 1) * BLOCK).min(self.num_segments() - 1) {
                out = out.min(self.samples[i].min(self.samples[i + 1]));
            }
            for i in (b1 * BLOCK)..=c1 {
                out = out.min(self.samples[i].min(self.samples[i + 1]));
            }
        } else {
            for i in c0..=c1 {
                out = out.min(self.samples[i].min(self.samples[i + 1]));
            }
        }
        out
    }

    /// Exact interpolant value at a rational abscissa.
    pub fn eval_exact(&self, t: Rat) -> BigRat {
        let delta_inv = (1.0 / self.delta) as i128; // delta = 2^-k, exact
        let pos = (t + Rat::from_integer(1)) * Rat::from_integer(delta_inv);
        let mut j = pos.floor().to_integer();
        j = j.clamp(0, self.num_segments() as i128 - 1);
        let frac = to_big(pos - Rat::from_integer(j));
        let yj = big_from_f64(self.samples[j as usize]);
        let yj1 = big_from_f64(self.samples[j as usize + 1]);
        &yj + (yj1 - &yj) * frac
    }

    /// Exact max of the interpolant over `[lo, hi]` (rational endpoints).
    /// Attained at an endpoint or at an interior sample.
    pub fn max_over_exact(&self, lo: Rat, hi: Rat) -> BigRat {
        if let Some(c) = self.constant {
            return big_from_f64(c);
        }
        let mut best = self.eval_exact(lo);
        let at_hi = self.eval_exact(hi);
        if at_hi > best {
            best = at_hi;
        }
        let delta_inv = (1.0 / self.delta) as i128;
        let lo_pos = (lo + Rat::from_integer(1)) * Rat::from_integer(delta_inv);
        let hi_pos = (hi + Rat::from_integer(1)) * Rat::from_integer(delta_inv);
        let first = lo_pos.ceil().to_integer().max(0);
        let last = hi_pos.floor().to_integer().min(self.samples.len() as i128 - 1);
        if first <= last {
            let mut fmax = f64::NEG_INFINITY;
            for i in first..=last {
                fmax = fmax.max(self.samples[i as usize]);
            }
            let fmax = big_from_f64(fmax);
            if fmax > best {
                best = fmax;
            }
        }
        best
    }

    /// Distance from a point to the full graph polyline.
    pub fn point_dist(&self, p: &[f64; 2]) -> f64 {
        if let Some(c) = self.constant {
            let dy = p[1] - c;
            let dx = (p[0].abs() - 1.0).max(0.0);
            return (dx * dx + dy * dy).sqrt();
        }
        let center = self.cell_of(p[0]) / BLOCK;
        let mut best2 = f64::INFINITY;
        self.sweep_blocks(center, |this, b| {
            let (tx0, tx1) = this.block_span(b);
            let hgap = if p[0] < tx0 {
                tx0 - p[0]
            } else if p[0] > tx1 {
                p[0] - tx1
            } else {
                0.0
            };
            if hgap * hgap >= best2 {
                return hgap * hgap >= best2; // stop on this side
            }
            let vlo = this.block_lo[b];
            let vhi = this.block_hi[b];
            let vgap = if p[1] < vlo {
                vlo - p[1]
            } else if p[1] > vhi {
                p[1] - vhi
            } else {
                0.0
            };
            if hgap * hgap + vgap * vgap < best2 {
                let s0 = b * BLOCK;
                let s1 = ((b + 1) * BLOCK).min(this.num_segments());
                for i in s0..s1 {
                    let (a, q) = this.segment(i);
                    best2 = best2.min(point_segment_dist_sq(p, &a, &q));
                }
            }
            false
        });
        best2.sqrt()
    }

    /// Distance from a closed box to the graph, with the nearest graph point.
    pub fn box_dist(&self, bx: &AxisBox<f64, 2>) -> (f64, [f64; 2]) {
        if let Some(c) = self.constant {
            // The graph is the segment {(t, c) : t ∈ [-1, 1]}.
            let dy = (bx.min[1] - c).max(c - bx.max[1]).max(0.0);
            let dx = (bx.min[0] - 1.0).max(-1.0 - bx.max[0]).max(0.0);
            let gx = if bx.min[0] > 1.0 {
                1.0
            } else if bx.max[0] < -1.0 {
                -1.0
            } else {
                bx.min[0].max(-1.0)
            };
            return ((dx * dx + dy * dy).sqrt(), [gx, c]);
        }
        let center = self.cell_of(0.5 * (bx.min[0] + bx.max[0])) / BLOCK;
        let mut best2 = f64::INFINITY;
        let mut best_seg = usize::MAX;
        self.sweep_blocks(center, |this, b| {
            let (tx0, tx1) = this.block_span(b);
            let hgap = if bx.max[0] < tx0 {
                tx0 - bx.max[0]
            } else if bx.min[0] > tx1 {
                bx.min[0] - tx1
            } else {
                0.0
            };
            if hgap * hgap >= best2 {
                return true;
            }
            let rect = AxisBox::new([tx0, this.block_lo[b]], [tx1, this.block_hi[b]]);
            if rect.dist_sq(bx) < best2 {
                let s0 = b * BLOCK;
                let s1 = ((b + 1) * BLOCK).min(this.num_segments());
                for i in s0..s1 {
                    let (a, q) = this.segment(i);
                    let d = box_segment_dist2(bx, &a, &q);
                    if d * d < best2 {
                        best2 = d * d;
                        best_seg = i;
                    }
                }
            }
            false
        });
        let point = if best_seg == usize::MAX {
            [0.0, self.eval(0.0)]
        } else {
            self.nearest_on_segment(bx, best_seg)
        };
        (best2.sqrt(), point)
    }

    fn nearest_on_segment(&self, bx: &AxisBox<f64, 2>, i: usize) -> [f64; 2] {
        let (a, b) = self.segment(i);
        if segment_intersects_box2(&a, &b, bx) {
            // Any point of the overlap; clamp the midpoint parameter.
            let tmid = 0.5 * (a[0] + b[0]);
            let x = tmid.clamp(bx.min[0], bx.max[0]).clamp(a[0], b[0]);
            return [x, self.eval(x)];
        }
        let mut best = f64::INFINITY;
        let mut pt = a;
        for c in bx.corners() {
            let ab = [b[0] - a[0], b[1] - a[1]];
            let denom = ab[0] * ab[0] + ab[1] * ab[1];
            let t = if denom > 0.0 {
                (((c[0] - a[0]) * ab[0] + (c[1] - a[1]) * ab[1]) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let q = [a[0] + t * ab[0], a[1] + t * ab[1]];
            let d = (q[0] - c[0]).powi(2) + (q[1] - c[1]).powi(2);
            if d < best {
                best = d;
                pt = q;
            }
        }
        for e in [a, b] {
            let d = bx.point_dist_sq(&e);
            if d < best {
                best = d;
                pt = e;
            }
        }
        pt
    }

    /// Distance from a point to the graph clipped to the closed unit ball
    /// (the boundary portion `(∂Ω)₁`).
    pub fn point_dist_clipped(&self, p: &[f64; 2]) -> f64 {
        let mut best2 = f64::INFINITY;
        for (a, b) in &self.clipped {
            // Cheap reject on the horizontal gap.
            let hgap = if p[0] < a[0].min(b[0]) {
                a[0].min(b[0]) - p[0]
            } else if p[0] > a[0].max(b[0]) {
                p[0] - a[0].max(b[0])
            } else {
                0.0
            };
            if hgap * hgap >= best2 {
                continue;
            }
            best2 = best2.min(point_segment_dist_sq(p, a, b));
        }
        best2.sqrt()
    }

    /// March blocks outward from `center`, calling `visit`; `visit` returns
    /// true when its side is exhausted (gap bound exceeded).
    fn sweep_blocks(&self, center: usize, mut visit: impl FnMut(&Self, usize) -> bool) {
        let n = self.block_lo.len();
        let center = center.min(n - 1);
        let mut left = center as isize;
        let mut right = center + 1;
        let mut left_done = false;
        let mut right_done = false;
        while (!left_done && left >= 0) || (!right_done && right < n) {
            if !left_done && left >= 0 {
                if visit(self, left as usize) {
                    left_done = true;
                } else {
                    left -= 1;
                }
            }
            if !right_done && right < n {
                if visit(self, right) {
                    right_done = true;
                } else {
                    right += 1;
                }
            }
        }
    }

    fn block_span(&self, b: usize) -> (f64, f64) {
        let s0 = b * BLOCK;
        let s1 = ((b + 1) * BLOCK).min(self.num_segments());
        (self.abscissa(s0), self.abscissa(s1))
    }

    fn clip_to_unit_ball(&self) -> Vec<([f64; 2], [f64; 2])> {
        let mut out = Vec::new();
        for i in 0..self.num_segments() {
            let (a, b) = self.segment(i);
            if let Some(seg) = clip_segment_to_ball(a, b, 1.0) {
                out.push(seg);
            }
        }
        out
    }

    /// First crossing of the vertical ray from `(x, y0)` in direction
    /// `dir = ±1` within length `len`: against the graph only.
    pub fn vertical_graph_crossing(&self, x: f64, y0: f64, dir: f64, len: f64) -> Option<f64> {
        let yb = self.eval(x);
        let theta = (yb - y0) * dir;
        if theta > 0.0 && theta <= len {
            Some(theta)
        } else {
            None
        }
    }

    /// First crossing of the horizontal ray from `(x0, y)` in direction
    /// `dir = ±1` within length `len`: against the graph only.
    pub fn horizontal_graph_crossing(&self, x0: f64, y: f64, dir: f64, len: f64) -> Option<f64> {
        let x_end = x0 + dir * len;
        let c_start = self.cell_of(x0);
        let c_end = self.cell_of(x_end.clamp(-1.0, 1.0));
        let cells: Vec<usize> = if dir > 0.0 {
            (c_start..=c_end).collect()
        } else {
            (c_end..=c_start).rev().collect()
        };
        for j in cells {
            let t0 = self.abscissa(j);
            let y0s = self.samples[j];
            let y1s = self.samples[j + 1];
            let slope = (y1s - y0s) / self.delta;
            // Solve y0s + slope (x - t0) = y on this cell.
            let x_star = if slope != 0.0 {
                t0 + (y - y0s) / slope
            } else if y0s == y {
                // Collinear: crossing at the near end of the overlap.
                if dir > 0.0 {
                    t0.max(x0)
                } else {
                    (t0 + self.delta).min(x0)
                }
            } else {
                continue;
            };
            if x_star < t0 - 1e-15 || x_star > t0 + self.delta + 1e-15 {
                continue;
            }
            let theta = (x_star - x0) * dir;
            if theta > 0.0 && theta <= len {
                return Some(theta);
            }
        }
        None
    }
}

/// Clip segment `a`–`b` to the closed ball of radius `r`; None if disjoint.
pub(crate) fn clip_segment_to_ball(
    a: [f64; 2],
    b: [f64; 2],
    r: f64,
) -> Option<([f64; 2], [f64; 2])> {
    let d = [b[0] - a[0], b[1] - a[1]];
    let qa = d[0] * d[0] + d[1] * d[1];
    let qb = 2.0 * (a[0] * d[0] + a[1] * d[1]);
    let qc = a[0] * a[0] + a[1] * a[1] - r * r;
    if qa == 0.0 {
        return if qc <= 0.0 { Some((a, b)) } else { None };
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let t0 = ((-qb - sq) / (2.0 * qa)).max(0.0);
    let t1 = ((-qb + sq) / (2.0 * qa)).min(1.0);
    if t0 > t1 {
        return None;
    }
    let p0 = [a[0] + t0 * d[0], a[1] + t0 * d[1]];
    let p1 = [a[0] + t1 * d[0], a[1] + t1 * d[1]];
    Some((p0, p1))
}
