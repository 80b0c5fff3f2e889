//! Hölder graph domains `Ω₁ = {xⁿ > φ(x′)} ∩ B₁`.
//!
//! A domain is given by uniformly spaced samples of the boundary function φ
//! on the cross-section `B′₁`; the theoretical `C^{1,α}` function is
//! replaced by its piecewise-linear interpolant, for which membership,
//! distances and collar measures are computed exactly up to floating-point
//! rounding (relative error a small multiple of machine epsilon times
//! `1 + K`). The domain radius is fixed at `R = 1` and `0 ∈ ∂Ω`.
//!
//! Distance to the complement `F = ℝⁿ \ Ω₁` splits into the distance to the
//! graph surface and the distance to the sphere `∂B₁`; points of `F` below
//! the graph and outside `B₁` are never nearest for query boxes inside the
//! ball at the truncation depths used (checked at build time on a coarse
//! probe set).

mod polyline;
mod surface;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::to_big;
use crate::geom::AxisBox;
use crate::{BigRat, BoxF, BoxQ, Rat};
use polyline::PolylineGraph;
use surface::HeightField;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("sample list is empty")]
    EmptySamples,
    #[error("measured Lipschitz quotient {measured} exceeds declared seminorm {declared}")]
    SeminormViolation { measured: f64, declared: f64 },
    #[error("invalid domain spec: {0}")]
    InvalidSpec(String),
    #[error("ball of radius {r} at {center:?} is not contained in the unit ball")]
    BallNotContained { center: Vec<f64>, r: f64 },
}

/// Named boundary families. `Table` reads explicit samples; the others
/// synthesize them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Flat,
    Bump,
    Cusp,
    Table,
}

/// A `C^{1,α}` graph domain given by sampled boundary data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphDomainSpec {
    /// Ambient dimension, 2 or 3.
    pub dim: usize,
    /// Hölder exponent of the boundary gradient, in (0, 1].
    pub alpha: f64,
    /// Declared bound with `‖φ‖_{C^{0,1}} ≤ K`.
    #[serde(rename = "K")]
    pub seminorm_k: f64,
    /// Sample spacing; a negative power of two.
    pub delta: f64,
    pub kind: DomainKind,
    /// Explicit samples for `kind = "table"`; synthesized otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<f64>>,
    pub label: String,
}

impl GraphDomainSpec {
    pub fn default_delta(dim: usize) -> f64 {
        if dim == 3 {
            2f64.powi(-9)
        } else {
            2f64.powi(-12)
        }
    }

    /// Half-space graph φ ≡ 0.
    pub fn flat(dim: usize) -> Self {
        GraphDomainSpec {
            dim,
            alpha: 1.0,
            seminorm_k: 1.0,
            delta: Self::default_delta(dim),
            kind: DomainKind::Flat,
            samples: None,
            label: format!("flat{}d", dim),
        }
    }

    /// Smooth bump `φ(t) = 0.2 (1 − cos πt)` (2-D).
    pub fn bump() -> Self {
        GraphDomainSpec {
            dim: 2,
            alpha: 1.0,
            seminorm_k: 1.0,
            delta: Self::default_delta(2),
            kind: DomainKind::Bump,
            samples: None,
            label: "bump".to_string(),
        }
    }

    /// Cusp family `φ_α(t) = |t|^{1+α}`, the critical regularity scale.
    pub fn cusp(alpha: f64) -> Self {
        GraphDomainSpec {
            dim: 2,
            alpha,
            seminorm_k: 2.0,
            delta: Self::default_delta(2),
            kind: DomainKind::Cusp,
            samples: None,
            label: format!("cusp(alpha={})", alpha),
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    /// Parse a domain spec from its JSON representation.
    pub fn from_json(text: &str) -> Result<Self, GeometryError> {
        serde_json::from_str(text).map_err(|e| GeometryError::InvalidSpec(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    fn synthesize(&self) -> Result<Vec<f64>, GeometryError> {
        let delta = self.delta;
        let steps = 2.0 / delta;
        if !(delta > 0.0) || delta.log2().fract() != 0.0 || steps.fract() != 0.0 {
            return Err(GeometryError::InvalidSpec(format!(
                "delta must be a negative power of two dividing 2, got {delta}"
            )));
        }
        let m = steps as usize + 1;
        let phi1 = |t: f64| -> f64 {
            match self.kind {
                DomainKind::Flat => 0.0,
                DomainKind::Bump => 0.2 * (1.0 - (std::f64::consts::PI * t).cos()),
                DomainKind::Cusp => t.abs().powf(1.0 + self.alpha),
                DomainKind::Table => unreachable!(),
            }
        };
        match self.dim {
            2 => Ok((0..m).map(|i| phi1(-1.0 + i as f64 * delta)).collect()),
            3 => {
                let mut out = vec![0.0; m * m];
                if self.kind != DomainKind::Flat {
                    for i in 0..m {
                        for j in 0..m {
                            let x: f64 = -1.0 + i as f64 * delta;
                            let y: f64 = -1.0 + j as f64 * delta;
                            out[i * m + j] = phi1((x * x + y * y).sqrt().min(1.0));
                        }
                    }
                }
                Ok(out)
            }
            d => Err(GeometryError::InvalidSpec(format!("dim must be 2 or 3, got {d}"))),
        }
    }
}

#[derive(Clone, Debug)]
enum Boundary {
    Line(PolylineGraph),
    Surface(HeightField),
}

/// Result of a box-to-complement distance query.
#[derive(Clone, Copy, Debug)]
pub struct DistToComplement {
    pub dist: f64,
    /// The box is disjoint from the closed unit ball.
    pub outside_universe: bool,
}

/// Collar measure report: `|Ω_r(x₀) ∩ {dist(·,(∂Ω)₁) ≤ d}|` and its ratio
/// against `r^{n-1} d`.
#[derive(Clone, Copy, Debug)]
pub struct CollarMeasure {
    pub measure: f64,
    pub ratio: f64,
    pub grid_spacing: f64,
    pub count: u64,
}

/// An immutable graph domain; all queries are pure and thread-safe.
#[derive(Clone, Debug)]
pub struct Domain<const N: usize> {
    spec: GraphDomainSpec,
    boundary: Boundary,
    measured_lipschitz: f64,
}

/// Validates the spec and builds the domain, measuring the interpolant's
/// Lipschitz constant against the declared seminorm.
pub fn build_domain<const N: usize>(spec: GraphDomainSpec) -> Result<Domain<N>, GeometryError> {
    Domain::build(spec)
}

impl<const N: usize> Domain<N> {
    pub fn build(spec: GraphDomainSpec) -> Result<Self, GeometryError> {
        if spec.dim != N {
            return Err(GeometryError::InvalidSpec(format!(
                "spec dim {} does not match domain dimension {N}",
                spec.dim
            )));
        }
        if !(spec.alpha > 0.0 && spec.alpha <= 1.0) {
            return Err(GeometryError::InvalidSpec(format!(
                "alpha must lie in (0, 1], got {}",
                spec.alpha
            )));
        }
        let samples = match &spec.samples {
            Some(s) => s.clone(),
            None => {
                if spec.kind == DomainKind::Table {
                    return Err(GeometryError::InvalidSpec(
                        "table kind requires explicit samples".into(),
                    ));
                }
                spec.synthesize()?
            }
        };
        if samples.is_empty() {
            return Err(GeometryError::EmptySamples);
        }
        if samples.iter().any(|y| !y.is_finite()) {
            return Err(GeometryError::InvalidSpec("samples must be finite".into()));
        }

        let boundary = match N {
            2 => {
                // Seminorm scan precedes shape validation: a short sample
                // table still gets its Lipschitz quotient checked.
                let mut lip: f64 = 0.0;
                for w in samples.windows(2) {
                    lip = lip.max((w[1] - w[0]).abs() / spec.delta);
                }
                if lip > spec.seminorm_k * (1.0 + 1e-9) {
                    return Err(GeometryError::SeminormViolation {
                        measured: lip,
                        declared: spec.seminorm_k,
                    });
                }
                let m = Self::expected_samples(&spec)?;
                if samples.len() != m {
                    return Err(GeometryError::InvalidSpec(format!(
                        "expected {m} samples covering [-1,1] at spacing {}, got {}",
                        spec.delta,
                        samples.len()
                    )));
                }
                if samples[(m - 1) / 2] != 0.0 {
                    return Err(GeometryError::InvalidSpec("phi(0) must be 0".into()));
                }
                Boundary::Line(PolylineGraph::new(samples, spec.delta))
            }
            3 => {
                let m = Self::expected_samples(&spec)?;
                if samples.len() != m * m {
                    return Err(GeometryError::InvalidSpec(format!(
                        "expected {}x{} samples, got {}",
                        m,
                        m,
                        samples.len()
                    )));
                }
                let field = HeightField::new(samples, m, spec.delta);
                let lip = field.measured_lipschitz();
                if lip > spec.seminorm_k * (1.0 + 1e-9) {
                    return Err(GeometryError::SeminormViolation {
                        measured: lip,
                        declared: spec.seminorm_k,
                    });
                }
                if field.samples[((m - 1) / 2) * m + (m - 1) / 2] != 0.0 {
                    return Err(GeometryError::InvalidSpec("phi(0) must be 0".into()));
                }
                Boundary::Surface(field)
            }
            d => {
                return Err(GeometryError::InvalidSpec(format!(
                    "dimension {d} unsupported"
                )))
            }
        };
        let measured_lipschitz = match &boundary {
            Boundary::Line(g) => g.measured_lipschitz(),
            Boundary::Surface(f) => f.measured_lipschitz(),
        };
        let domain = Domain {
            spec,
            boundary,
            measured_lipschitz,
        };
        domain.check_sphere_assumption();
        Ok(domain)
    }

    fn expected_samples(spec: &GraphDomainSpec) -> Result<usize, GeometryError> {
        let steps = 2.0 / spec.delta;
        if !(spec.delta > 0.0) || spec.delta.log2().fract() != 0.0 || steps.fract() != 0.0 {
            return Err(GeometryError::InvalidSpec(format!(
                "delta must be a negative power of two dividing 2, got {}",
                spec.delta
            )));
        }
        Ok(steps as usize + 1)
    }

    pub fn spec(&self) -> &GraphDomainSpec {
        &self.spec
    }

    /// Lipschitz constant of the interpolant measured at build time.
    pub fn measured_lipschitz(&self) -> f64 {
        self.measured_lipschitz
    }

    /// Boundary function at the cross-section projection of `p`.
    pub fn phi(&self, p: &[f64; N]) -> f64 {
        match &self.boundary {
            Boundary::Line(g) => g.eval(p[0]),
            Boundary::Surface(f) => f.eval(p[0], p[1]),
        }
    }

    /// Strict membership in `Ω₁`: above the interpolant and inside `B₁`.
    pub fn contains(&self, p: &[f64; N]) -> bool {
        let norm2: f64 = p.iter().map(|x| x * x).sum();
        norm2 < 1.0 && p[N - 1] > self.phi(p)
    }

    /// Distance from a point to the graph surface (unrestricted).
    pub fn dist_to_graph(&self, p: &[f64; N]) -> f64 {
        match &self.boundary {
            Boundary::Line(g) => {
                let q = [p[0], p[1]];
                g.point_dist(&q)
            }
            Boundary::Surface(f) => {
                let q = [p[0], p[1], p[2]];
                f.point_dist(&q)
            }
        }
    }

    /// Distance from a point to the boundary portion `(∂Ω)₁ = graph ∩ B₁`.
    /// Exact for the clipped polyline in 2-D and for the flat field in 3-D;
    /// a general 3-D field uses the unclipped surface (the difference only
    /// matters within ~δ of the rim).
    pub fn dist_to_boundary_portion(&self, p: &[f64; N]) -> f64 {
        match &self.boundary {
            Boundary::Line(g) => {
                let q = [p[0], p[1]];
                g.point_dist_clipped(&q)
            }
            Boundary::Surface(f) => {
                let q = [p[0], p[1], p[2]];
                f.point_dist(&q)
            }
        }
    }

    /// Distance from a point to `F = ℝⁿ \ Ω₁`; zero outside the domain.
    pub fn point_dist_to_complement(&self, p: &[f64; N]) -> f64 {
        if !self.contains(p) {
            return 0.0;
        }
        let norm: f64 = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        self.dist_to_graph(p).min(1.0 - norm)
    }

    /// Distance from a closed box to `F = ℝⁿ \ Ω₁`, as the minimum of the
    /// distance to the graph surface and to the sphere.
    pub fn dist_to_complement(&self, bx: &BoxF<N>) -> DistToComplement {
        let outside_universe = bx.min_norm_to_origin() > 1.0;
        let sphere = 1.0 - bx.max_norm_to_origin();
        if sphere <= 0.0 {
            // Part of the box leaves the closed ball: those points are in F.
            return DistToComplement {
                dist: 0.0,
                outside_universe,
            };
        }
        let graph = match &self.boundary {
            Boundary::Line(g) => {
                let b2 = AxisBox::new([bx.min[0], bx.min[1]], [bx.max[0], bx.max[1]]);
                // PL max over the projection interval is attained at an
                // endpoint or an interior sample.
                let fmax = g
                    .eval(bx.min[0])
                    .max(g.eval(bx.max[0]))
                    .max(contained_sample_max(g, bx.min[0], bx.max[0]));
                if bx.min[1] <= fmax {
                    0.0
                } else {
                    g.box_dist(&b2).0
                }
            }
            Boundary::Surface(f) => {
                let b3 = AxisBox::new(
                    [bx.min[0], bx.min[1], bx.min[2]],
                    [bx.max[0], bx.max[1], bx.max[2]],
                );
                if let Some(c) = f.constant {
                    if bx.min[2] <= c {
                        0.0
                    } else {
                        f.box_dist(&b3)
                    }
                } else {
                    f.box_dist(&b3)
                }
            }
        };
        DistToComplement {
            dist: graph.min(sphere).max(0.0),
            outside_universe,
        }
    }

    /// Exact test `b ⊂ Ω_r` for a rational box: every corner strictly
    /// inside `B_r` and the bottom face strictly above the graph.
    pub fn rational_box_in_omega_r(&self, b: &BoxQ<N>, r: Rat) -> bool {
        let r2 = r * r;
        for corner in b.corners() {
            let norm2: Rat = corner.iter().map(|x| *x * *x).fold(Rat::from_integer(0), |a, v| a + v);
            if norm2 >= r2 {
                return false;
            }
        }
        let bottom = to_big(b.min[N - 1]);
        let graph_max: BigRat = match &self.boundary {
            Boundary::Line(g) => g.max_over_exact(b.min[0], b.max[0]),
            Boundary::Surface(f) => f.max_over_exact([b.min[0], b.min[1]], [b.max[0], b.max[1]]),
        };
        bottom > graph_max
    }

    /// Conservative: false only if the box certainly misses `Ω₁`.
    pub fn may_intersect(&self, bx: &BoxF<N>) -> bool {
        if bx.min_norm_to_origin() >= 1.0 {
            return false;
        }
        let min_bound = match &self.boundary {
            Boundary::Line(g) => g.min_sample_bound(bx.min[0], bx.max[0]),
            Boundary::Surface(f) => f.min_sample_bound([bx.min[0], bx.min[1]], [bx.max[0], bx.max[1]]),
        };
        bx.max[N - 1] > min_bound
    }

    /// Measure of `Ω_r(x₀) ∩ {dist(x, (∂Ω)₁) ≤ d}` by midpoint counting on
    /// a grid of spacing `d/16`, with the ratio against `r^{n-1} d`.
    pub fn boundary_collar_measure(
        &self,
        center: &[f64; N],
        r: f64,
        d: f64,
    ) -> Result<CollarMeasure, GeometryError> {
        let cnorm: f64 = center.iter().map(|x| x * x).sum::<f64>().sqrt();
        if cnorm + r > 1.0 + 1e-12 {
            return Err(GeometryError::BallNotContained {
                center: center.to_vec(),
                r,
            });
        }
        assert!(d > 0.0, "collar width must be positive");
        let g = d / 16.0;
        let steps = (r / g).ceil() as i64;
        let mut count = 0u64;
        let mut idx = vec![-steps; N];
        'outer: loop {
            let p: [f64; N] = std::array::from_fn(|i| center[i] + (idx[i] as f64 + 0.5) * g);
            let off2: f64 = (0..N).map(|i| (p[i] - center[i]) * (p[i] - center[i])).sum();
            if off2 < r * r && self.contains(&p) && self.dist_to_boundary_portion(&p) <= d {
                count += 1;
            }
            // Odometer increment.
            for i in 0..N {
                idx[i] += 1;
                if idx[i] < steps {
                    continue 'outer;
                }
                idx[i] = -steps;
            }
            break;
        }
        let measure = count as f64 * g.powi(N as i32);
        Ok(CollarMeasure {
            measure,
            ratio: measure / (r.powi(N as i32 - 1) * d),
            grid_spacing: g,
            count,
        })
    }

    /// Coarse runtime check of the sphere-cap assumption: the reported
    /// box-to-complement distance must not exceed the distance to any coarse
    /// sample of the true complement boundary.
    fn check_sphere_assumption(&self) {
        let probes: [[f64; 2]; 4] = [[0.0, 0.55], [0.3, 0.62], [-0.45, 0.5], [0.0, 0.9]];
        for pr in probes {
            let side = 0.02;
            let mut min = [0.0; N];
            let mut max = [0.0; N];
            min[0] = pr[0];
            max[0] = pr[0] + side;
            min[N - 1] = pr[1];
            max[N - 1] = pr[1] + side;
            let bx = AxisBox::new(min, max);
            if !self.may_intersect(&bx) {
                continue;
            }
            let claimed = self.dist_to_complement(&bx).dist;
            // Sampled points of F: sphere samples and graph samples.
            let mut sampled = f64::INFINITY;
            let kmax = 256;
            for k in 0..kmax {
                let angle = std::f64::consts::TAU * k as f64 / kmax as f64;
                let mut sp = [0.0; N];
                sp[0] = angle.cos();
                sp[N - 1] = angle.sin();
                sampled = sampled.min(bx.point_dist_sq(&sp).sqrt());
                let mut gp = [0.0; N];
                gp[0] = -1.0 + 2.0 * k as f64 / (kmax - 1) as f64;
                gp[N - 1] = self.phi(&gp);
                sampled = sampled.min(bx.point_dist_sq(&gp).sqrt());
            }
            debug_assert!(
                claimed <= sampled + 1e-9,
                "complement distance {claimed} exceeds sampled bound {sampled}"
            );
        }
    }
}

fn contained_sample_max(g: &PolylineGraph, lo: f64, hi: f64) -> f64 {
    let i0 = ((lo + 1.0) / g.delta).ceil().max(0.0) as usize;
    let i1 = (((hi + 1.0) / g.delta).floor() as usize).min(g.samples.len() - 1);
    let mut out = f64::NEG_INFINITY;
    for i in i0..=i1.min(g.samples.len() - 1) {
        if i < g.samples.len() {
            out = out.max(g.samples[i]);
        }
    }
    out
}

impl Domain<2> {
    /// Nearest point of the graph to a closed box, with the distance.
    pub fn nearest_boundary_point(&self, bx: &BoxF<2>) -> (f64, [f64; 2]) {
        match &self.boundary {
            Boundary::Line(g) => g.box_dist(bx),
            Boundary::Surface(_) => unreachable!(),
        }
    }

    /// First intersection of the segment from `p` along `±e_axis` of length
    /// `len` with `∂Ω₁` (graph or sphere). Returns the arm length.
    pub fn first_boundary_crossing(
        &self,
        p: &[f64; 2],
        axis: usize,
        dir: f64,
        len: f64,
    ) -> Option<f64> {
        let g = match &self.boundary {
            Boundary::Line(g) => g,
            Boundary::Surface(_) => unreachable!(),
        };
        let graph_theta = if axis == 1 {
            g.vertical_graph_crossing(p[0], p[1], dir, len)
        } else {
            g.horizontal_graph_crossing(p[0], p[1], dir, len)
        };
        let other = p[1 - axis];
        let circle_theta = {
            let disc = 1.0 - other * other;
            if disc <= 0.0 {
                None
            } else {
                let root = disc.sqrt();
                let mut best: Option<f64> = None;
                for target in [root, -root] {
                    let theta = (target - p[axis]) * dir;
                    if theta > 0.0 && theta <= len {
                        best = Some(best.map_or(theta, |b: f64| b.min(theta)));
                    }
                }
                best
            }
        };
        match (graph_theta, circle_theta) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (Some(a), None) => Some(a),
            (None, Some(b)) => Some(b),
            (None, None) => None,
        }
    }

    /// Max finite-difference Hölder quotient `|Dφ(s)−Dφ(t)|/|s−t|^α` over a
    /// deterministic subsample of slope pairs.
    pub fn holder_slope_quotient(&self, alpha: f64) -> f64 {
        let g = match &self.boundary {
            Boundary::Line(g) => g,
            Boundary::Surface(_) => unreachable!(),
        };
        let nseg = g.num_segments();
        let slope = |i: usize| (g.samples[i + 1] - g.samples[i]) / g.delta;
        let mid = |i: usize| g.abscissa(i) + 0.5 * g.delta;
        let mut quot: f64 = 0.0;
        // Near-diagonal pairs.
        for i in 0..nseg {
            for j in (i + 1)..nseg.min(i + 65) {
                let q = (slope(i) - slope(j)).abs() / (mid(i) - mid(j)).abs().powf(alpha);
                quot = quot.max(q);
            }
        }
        // Coarse all-pairs subsample.
        let stride = (nseg / 256).max(1);
        let coarse: Vec<usize> = (0..nseg).step_by(stride).collect();
        for (a, &i) in coarse.iter().enumerate() {
            for &j in &coarse[a + 1..] {
                let q = (slope(i) - slope(j)).abs() / (mid(i) - mid(j)).abs().powf(alpha);
                quot = quot.max(q);
            }
        }
        quot
    }
}
