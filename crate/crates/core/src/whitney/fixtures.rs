//! Ambient-domain fixtures with closed-form geometry, used to validate the
//! decomposition against exhaustive oracles.

use crate::exact::rat;
use crate::geom::AxisBox;
use crate::whitney::AmbientDomain;
use crate::{BoxF, BoxQ, Rat};

/// The interior of an axis-aligned box with dyadic-rational corners; its
/// Whitney decomposition is the classical square pattern.
#[derive(Clone, Debug)]
pub struct OpenBoxDomain<const N: usize> {
    bounds: BoxF<N>,
    bounds_q: BoxQ<N>,
}

impl<const N: usize> OpenBoxDomain<N> {
    /// Corners must be exactly representable dyadic rationals.
    pub fn new(min: [f64; N], max: [f64; N]) -> Self {
        let to_rat = |x: f64| -> Rat {
            let scaled = x * 2f64.powi(40);
            assert_eq!(scaled.fract(), 0.0, "corner {x} is not dyadic at 2^-40");
            rat(scaled as i128, 1i128 << 40)
        };
        OpenBoxDomain {
            bounds: AxisBox::new(min, max),
            bounds_q: AxisBox::new(min.map(to_rat), max.map(to_rat)),
        }
    }

    pub fn unit_square() -> OpenBoxDomain<2> {
        OpenBoxDomain::new([0.0, 0.0], [1.0, 1.0])
    }

    /// Distance from a closed box to the complement of the open box: the
    /// smallest face clearance, clamped at zero.
    pub fn clearance(&self, b: &BoxF<N>) -> f64 {
        let mut c = f64::INFINITY;
        for i in 0..N {
            c = c.min(b.min[i] - self.bounds.min[i]);
            c = c.min(self.bounds.max[i] - b.max[i]);
        }
        c.max(0.0)
    }
}

impl<const N: usize> AmbientDomain<N> for OpenBoxDomain<N> {
    fn contains(&self, p: &[f64; N]) -> bool {
        self.bounds.contains_strict(p)
    }

    fn point_dist_to_complement(&self, p: &[f64; N]) -> f64 {
        if !self.contains(p) {
            return 0.0;
        }
        let mut c = f64::INFINITY;
        for i in 0..N {
            c = c.min(p[i] - self.bounds.min[i]);
            c = c.min(self.bounds.max[i] - p[i]);
        }
        c
    }

    fn box_dist_to_complement(&self, b: &BoxF<N>) -> f64 {
        self.clearance(b)
    }

    fn may_intersect(&self, b: &BoxF<N>) -> bool {
        (0..N).all(|i| b.min[i] < self.bounds.max[i] && b.max[i] > self.bounds.min[i])
    }

    fn rational_box_in_omega_r(&self, b: &BoxQ<N>, r: Rat) -> bool {
        let r2 = r * r;
        for corner in b.corners() {
            let norm2 = corner
                .iter()
                .map(|x| *x * *x)
                .fold(Rat::from_integer(0), |a, v| a + v);
            if norm2 >= r2 {
                return false;
            }
        }
        (0..N).all(|i| b.min[i] > self.bounds_q.min[i] && b.max[i] < self.bounds_q.max[i])
    }
}
