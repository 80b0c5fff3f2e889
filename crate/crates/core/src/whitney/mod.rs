//! Whitney decomposition of an open set, dyadic-cube combinatorics and the
//! diameter/distance-band families.
//!
//! Construction: a dyadic cube `Q` of generation `s ≤ s_max` is *marked*
//! iff `dist(Q, F) ≥ diam(Q)`; the selected cubes are the marked cubes with
//! no marked proper ancestor. The selection then satisfies the two-sided
//! comparison `d_k ≤ dist(Q_k, F) ≤ 4 d_k` with `d_k = diam Q_k`:
//!
//! - lower bound: marked means `dist ≥ diam` directly;
//! - upper bound: the parent `P` is unmarked, so `dist(P, F) < diam(P)`,
//!   and for `Q ⊂ P` every point of `Q` is within `diam(P)` of the point
//!   of `P` realizing `dist(P, F)`, hence
//!   `dist(Q, F) ≤ dist(P, F) + diam(P) < 2 diam(P) = 4 diam(Q)`.
//!
//! Selected cubes are pairwise disjoint (two dyadic cubes with intersecting
//! interiors are nested, and a selected cube has no marked ancestor) and
//! every point at distance `> 8√n·2^{-s_max}` from the complement lies in a
//! selected cube; the truncation leaves an uncovered collar of width
//! recorded on the decomposition.
//!
//! Dilated boxes `Q̃ = (6/5)Q` carry exact rational corners over the
//! denominator `5·2^{s+1}`, making overlap counting and the containment
//! `Q̃ ⊂ Ω_{1/4}` float-free.

pub mod fixtures;

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::exact::rat;
use crate::geom::AxisBox;
use crate::geometry::Domain;
use crate::{BoxF, BoxQ, Rat};

#[derive(Debug, Error)]
pub enum WhitneyError {
    #[error("anchor cube is not a member of any family F^s")]
    AnchorNotInFamily,
    #[error("target cube is not a member of any family F^s")]
    TargetNotInFamily,
}

/// Closed dyadic cube `Π_i [k_i 2^{-s}, (k_i+1) 2^{-s}]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicCube<const N: usize> {
    pub s: u32,
    pub index: [i64; N],
}

impl<const N: usize> DyadicCube<N> {
    pub fn new(s: u32, index: [i64; N]) -> Self {
        DyadicCube { s, index }
    }

    pub fn side(&self) -> f64 {
        2f64.powi(-(self.s as i32))
    }

    /// Diameter `d = √n · 2^{-s}`.
    pub fn diam(&self) -> f64 {
        (N as f64).sqrt() * self.side()
    }

    pub fn parent(&self) -> Option<DyadicCube<N>> {
        if self.s == 0 {
            return None;
        }
        Some(DyadicCube {
            s: self.s - 1,
            index: self.index.map(|k| k.div_euclid(2)),
        })
    }

    pub fn children(&self) -> Vec<DyadicCube<N>> {
        let mut out = Vec::with_capacity(1 << N);
        for mask in 0..(1u32 << N) {
            let mut idx = self.index.map(|k| 2 * k);
            for i in 0..N {
                if mask & (1 << i) != 0 {
                    idx[i] += 1;
                }
            }
            out.push(DyadicCube {
                s: self.s + 1,
                index: idx,
            });
        }
        out
    }

    /// Is `self` a proper ancestor of `other`?
    pub fn is_ancestor_of(&self, other: &DyadicCube<N>) -> bool {
        if self.s >= other.s {
            return false;
        }
        let shift = other.s - self.s;
        (0..N).all(|i| other.index[i].div_euclid(1 << shift) == self.index[i])
    }

    pub fn to_box(&self) -> BoxF<N> {
        let side = self.side();
        AxisBox::new(
            std::array::from_fn(|i| self.index[i] as f64 * side),
            std::array::from_fn(|i| (self.index[i] + 1) as f64 * side),
        )
    }

    pub fn center(&self) -> [f64; N] {
        let side = self.side();
        std::array::from_fn(|i| (self.index[i] as f64 + 0.5) * side)
    }

    /// Exact rational corners of the `6/5`-dilation about the center:
    /// `[(10k−1)/D, (10k+11)/D]` per axis with `D = 5·2^{s+1}`.
    pub fn dilated(&self) -> BoxQ<N> {
        let den = 5i128 << (self.s + 1);
        AxisBox::new(
            std::array::from_fn(|i| rat(10 * self.index[i] as i128 - 1, den)),
            std::array::from_fn(|i| rat(10 * self.index[i] as i128 + 11, den)),
        )
    }

    pub fn rational_box(&self) -> BoxQ<N> {
        let den = 1i128 << self.s;
        AxisBox::new(
            std::array::from_fn(|i| rat(self.index[i] as i128, den)),
            std::array::from_fn(|i| rat(self.index[i] as i128 + 1, den)),
        )
    }

    /// Exact squared Euclidean distance between the closed cubes, as an
    /// integer numerator over the implicit denominator `2^{2·scale}`.
    pub fn dist_sq_scaled(&self, other: &DyadicCube<N>, scale: u32) -> i128 {
        debug_assert!(scale >= self.s && scale >= other.s);
        let ma = 1i128 << (scale - self.s);
        let mb = 1i128 << (scale - other.s);
        let mut acc: i128 = 0;
        for i in 0..N {
            let a_lo = self.index[i] as i128 * ma;
            let a_hi = (self.index[i] as i128 + 1) * ma;
            let b_lo = other.index[i] as i128 * mb;
            let b_hi = (other.index[i] as i128 + 1) * mb;
            let gap = if a_lo > b_hi {
                a_lo - b_hi
            } else if b_lo > a_hi {
                b_lo - a_hi
            } else {
                0
            };
            acc += gap * gap;
        }
        acc
    }
}

/// Geometry surface the decomposition needs from its ambient open set.
pub trait AmbientDomain<const N: usize>: Send + Sync {
    fn contains(&self, p: &[f64; N]) -> bool;
    fn point_dist_to_complement(&self, p: &[f64; N]) -> f64;
    fn box_dist_to_complement(&self, b: &BoxF<N>) -> f64;
    /// Conservative intersection test: must return true whenever the box
    /// meets the domain.
    fn may_intersect(&self, b: &BoxF<N>) -> bool;
    /// Exact rational test `b ⊂ Ω_r`.
    fn rational_box_in_omega_r(&self, b: &BoxQ<N>, r: Rat) -> bool;
    /// Boundary sampling spacing, if the geometry is sampled; the finest
    /// Whitney cubes must stay at least 4 samples wide so that graph
    /// resolution never limits distance queries.
    fn sample_spacing(&self) -> Option<f64> {
        None
    }
}

impl<const N: usize> AmbientDomain<N> for Domain<N> {
    fn contains(&self, p: &[f64; N]) -> bool {
        Domain::contains(self, p)
    }
    fn point_dist_to_complement(&self, p: &[f64; N]) -> f64 {
        Domain::point_dist_to_complement(self, p)
    }
    fn box_dist_to_complement(&self, b: &BoxF<N>) -> f64 {
        Domain::dist_to_complement(self, b).dist
    }
    fn may_intersect(&self, b: &BoxF<N>) -> bool {
        Domain::may_intersect(self, b)
    }
    fn rational_box_in_omega_r(&self, b: &BoxQ<N>, r: Rat) -> bool {
        Domain::rational_box_in_omega_r(self, b, r)
    }
    fn sample_spacing(&self) -> Option<f64> {
        Some(self.spec().delta)
    }
}

/// A selected cube with its cached distance to the complement.
#[derive(Clone, Copy, Debug)]
pub struct WhitneyCube<const N: usize> {
    pub cube: DyadicCube<N>,
    pub dist_to_complement: f64,
    /// Membership flag for the family `F^s`: `Q̃ ⊂ Ω_{1/4}`.
    pub in_family: bool,
}

/// Truncated Whitney decomposition with per-generation indices.
pub struct WhitneyDecomposition<const N: usize> {
    pub domain: Arc<dyn AmbientDomain<N>>,
    pub cubes: Vec<WhitneyCube<N>>,
    pub s_max: u32,
    /// Width `4·√n·2^{-s_max}` of the collar the truncation may leave
    /// uncovered.
    pub uncovered_collar_bound: f64,
    /// Per generation: sorted `(index, cube id)` for exact point location.
    by_generation: Vec<Vec<([i64; N], u32)>>,
    /// Family `F^s` member ids for `s = 0..=s_max` (empty below `s = 2`).
    families: Vec<Vec<u32>>,
}

/// Runs the marked-cube construction down to generation `s_max`.
pub fn decompose<const N: usize>(
    domain: Arc<dyn AmbientDomain<N>>,
    s_max: u32,
) -> WhitneyDecomposition<N> {
    assert!(s_max >= 4, "s_max must be at least 4");
    if let Some(delta) = domain.sample_spacing() {
        assert!(
            2f64.powi(-(s_max as i32)) >= 4.0 * delta,
            "smallest cube side 2^-{s_max} under-resolves the boundary sampling {delta}"
        );
    }
    let mut selected: Vec<(DyadicCube<N>, f64)> = Vec::new();
    let mut stack: Vec<DyadicCube<N>> = Vec::new();
    // Generation-0 cubes covering [-1, 1]^n.
    let mut roots = vec![[0i64; N]];
    for axis in 0..N {
        let mut next = Vec::new();
        for idx in roots {
            for v in [-1i64, 0] {
                let mut c = idx;
                c[axis] = v;
                next.push(c);
            }
        }
        roots = next;
    }
    for idx in roots {
        stack.push(DyadicCube::new(0, idx));
    }
    while let Some(cube) = stack.pop() {
        let bx = cube.to_box();
        if !domain.may_intersect(&bx) {
            continue;
        }
        let dist = domain.box_dist_to_complement(&bx);
        if dist >= cube.diam() {
            selected.push((cube, dist));
        } else if cube.s < s_max {
            stack.extend(cube.children());
        }
    }
    selected.sort_by(|a, b| a.0.cmp(&b.0));
    WhitneyDecomposition::from_selection(domain, selected, s_max)
}

impl<const N: usize> WhitneyDecomposition<N> {
    fn from_selection(
        domain: Arc<dyn AmbientDomain<N>>,
        selected: Vec<(DyadicCube<N>, f64)>,
        s_max: u32,
    ) -> Self {
        let quarter = rat(1, 4);
        let mut cubes = Vec::with_capacity(selected.len());
        let mut by_generation: Vec<Vec<([i64; N], u32)>> = vec![Vec::new(); s_max as usize + 1];
        for (id, (cube, dist)) in selected.into_iter().enumerate() {
            let in_family = domain.rational_box_in_omega_r(&cube.dilated(), quarter);
            by_generation[cube.s as usize].push((cube.index, id as u32));
            cubes.push(WhitneyCube {
                cube,
                dist_to_complement: dist,
                in_family,
            });
        }
        for gen in &mut by_generation {
            gen.sort_unstable();
        }
        let mut families: Vec<Vec<u32>> = vec![Vec::new(); s_max as usize + 1];
        for (id, wc) in cubes.iter().enumerate() {
            if wc.in_family && wc.cube.s >= 3 {
                // d = √n·2^{-g} ∈ (2^{-s-1}, 2^{-s}] puts generation g in
                // F^{g-1} for n ∈ {2, 3}.
                families[wc.cube.s as usize - 1].push(id as u32);
            }
        }
        WhitneyDecomposition {
            domain,
            cubes,
            s_max,
            uncovered_collar_bound: 4.0 * (N as f64).sqrt() * 2f64.powi(-(s_max as i32)),
            by_generation,
            families,
        }
    }

    /// Test hook: wrap an explicit cube list (distances recomputed).
    pub fn from_cubes(
        domain: Arc<dyn AmbientDomain<N>>,
        cubes: Vec<DyadicCube<N>>,
        s_max: u32,
    ) -> Self {
        let mut selected: Vec<(DyadicCube<N>, f64)> = cubes
            .into_iter()
            .map(|c| {
                let d = domain.box_dist_to_complement(&c.to_box());
                (c, d)
            })
            .collect();
        selected.sort_by(|a, b| a.0.cmp(&b.0));
        Self::from_selection(domain, selected, s_max)
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn cube(&self, id: u32) -> &WhitneyCube<N> {
        &self.cubes[id as usize]
    }

    pub fn lookup(&self, s: u32, index: &[i64; N]) -> Option<u32> {
        let gen = &self.by_generation[s as usize];
        gen.binary_search_by(|probe| probe.0.cmp(index))
            .ok()
            .map(|i| gen[i].1)
    }

    /// Selected cube containing the point (half-open convention fails only
    /// on upper faces of the whole union; closed fallback applied per
    /// generation from coarse to fine).
    pub fn locate(&self, p: &[f64; N]) -> Option<u32> {
        for s in 0..=self.s_max {
            let scale = 2f64.powi(s as i32);
            let index: [i64; N] = std::array::from_fn(|i| (p[i] * scale).floor() as i64);
            if let Some(id) = self.lookup(s, &index) {
                return Some(id);
            }
        }
        None
    }

    pub fn generations(&self) -> impl Iterator<Item = u32> + '_ {
        (0..=self.s_max).filter(|s| !self.by_generation[*s as usize].is_empty())
    }

    /// Ids of the family `F^s = {Q : 2^{-s-1} < d ≤ 2^{-s}, Q̃ ⊂ Ω_{1/4}}`.
    pub fn family_fs(&self, s: u32) -> &[u32] {
        static EMPTY: Vec<u32> = Vec::new();
        if s < 2 || (s as usize) >= self.families.len() {
            return &EMPTY;
        }
        &self.families[s as usize]
    }

    /// Family generations `s` with nonempty `F^s`.
    pub fn family_levels(&self) -> Vec<u32> {
        (2..=self.s_max)
            .filter(|s| !self.family_fs(*s).is_empty())
            .collect()
    }

    fn family_level_of(&self, id: u32) -> Option<u32> {
        let wc = self.cube(id);
        if wc.in_family && wc.cube.s >= 3 {
            Some(wc.cube.s - 1)
        } else {
            None
        }
    }

    /// Distance band of `other` relative to `anchor ∈ F^{s0}`: band 0 is
    /// `dist ≤ 2^{-s0+5}`, band `j ≥ 1` is `2^{-s0+j+4} < dist ≤ 2^{-s0+j+5}`.
    /// Exact integer arithmetic on squared distances.
    pub fn band_of(&self, anchor: &DyadicCube<N>, other: &DyadicCube<N>, s0: u32) -> u32 {
        let scale = anchor.s.max(other.s);
        let d2 = anchor.dist_sq_scaled(other, scale);
        // Threshold for band boundary e: dist ≤ 2^{e} with e = -s0+j+5,
        // squared and scaled: d2 ≤ 2^{2e + 2·scale}.
        let thresh_sq = |e: i32| -> i128 {
            let exp = 2 * e + 2 * scale as i32;
            debug_assert!((0..120).contains(&exp), "threshold exponent out of range");
            1i128 << exp
        };
        let mut j = 0u32;
        while d2 > thresh_sq(-(s0 as i32) + j as i32 + 5) {
            j += 1;
        }
        j
    }

    /// Members of `F^{s,j}` relative to the anchor.
    pub fn family_fsj(
        &self,
        anchor_id: u32,
        s: u32,
        j: u32,
    ) -> Result<Vec<u32>, WhitneyError> {
        let s0 = self
            .family_level_of(anchor_id)
            .ok_or(WhitneyError::AnchorNotInFamily)?;
        let anchor = self.cube(anchor_id).cube;
        Ok(self
            .family_fs(s)
            .iter()
            .copied()
            .filter(|id| self.band_of(&anchor, &self.cube(*id).cube, s0) == j)
            .collect())
    }

    /// `|F^{s,j}|` against the scaling `2^{(-s0+j)(n-1)-s}`.
    pub fn check_family_measure(
        &self,
        anchor_id: u32,
        s: u32,
        j: u32,
    ) -> Result<FamilyMeasure, WhitneyError> {
        let s0 = self
            .family_level_of(anchor_id)
            .ok_or(WhitneyError::AnchorNotInFamily)?;
        let members = self.family_fsj(anchor_id, s, j)?;
        let side = 2f64.powi(-(s as i32 + 1));
        let measure = members.len() as f64 * side.powi(N as i32);
        let bound = 2f64.powi((-(s0 as i32) + j as i32) * (N as i32 - 1) - s as i32);
        Ok(FamilyMeasure {
            s0,
            s,
            j,
            member_count: members.len(),
            measure,
            bound,
            ratio: measure / bound,
        })
    }

    /// Number of anchors `Q_k ∈ F^{s0}` whose band-`j` family contains the
    /// target, against the scaling `2^{j(n-1)}`.
    pub fn check_reverse_count(
        &self,
        target_id: u32,
        s0: u32,
        j: u32,
    ) -> Result<ReverseCount, WhitneyError> {
        self.family_level_of(target_id)
            .ok_or(WhitneyError::TargetNotInFamily)?;
        let target = self.cube(target_id).cube;
        let count = self
            .family_fs(s0)
            .iter()
            .filter(|id| self.band_of(&self.cube(**id).cube, &target, s0) == j)
            .count();
        let bound = 2f64.powi(j as i32 * (N as i32 - 1));
        Ok(ReverseCount {
            s0,
            j,
            count,
            bound,
            ratio: count as f64 / bound,
        })
    }

    /// Exact disjointness and nesting-freedom: two dyadic cubes overlap in
    /// the interior iff one is an ancestor of the other.
    pub fn check_disjointness(&self) -> DisjointnessReport {
        let mut ancestor_violations = 0usize;
        for wc in &self.cubes {
            let mut cur = wc.cube;
            while let Some(p) = cur.parent() {
                if self.lookup(p.s, &p.index).is_some() {
                    ancestor_violations += 1;
                    break;
                }
                cur = p;
            }
        }
        DisjointnessReport {
            cube_count: self.cubes.len(),
            ancestor_violations,
            pass: ancestor_violations == 0,
        }
    }

    /// Min/max of `dist(Q,F)/diam(Q)`; passes iff within `[1, 4]` (the
    /// upper comparison carries a 1e-12 relative rounding guard).
    pub fn check_distance_bounds(&self) -> DistanceBoundsReport {
        let mut min_ratio = f64::INFINITY;
        let mut max_ratio: f64 = 0.0;
        let mut violations = 0usize;
        for wc in &self.cubes {
            let ratio = wc.dist_to_complement / wc.cube.diam();
            min_ratio = min_ratio.min(ratio);
            max_ratio = max_ratio.max(ratio);
            if !(1.0..=4.0 * (1.0 + 1e-12)).contains(&ratio) {
                violations += 1;
            }
        }
        DistanceBoundsReport {
            min_ratio,
            max_ratio,
            violations,
            pass: violations == 0,
        }
    }

    /// Max number of dilated boxes containing any probe point, over all
    /// cube corners, cube centers and dilated-box corners. Exact integer
    /// arithmetic over the common denominator `5·2^{s_max+1}`.
    pub fn check_overlap_bound(&self) -> OverlapReport {
        let bound = 12usize.pow(N as u32);
        let smax = self.s_max;
        let mut max_overlap = 0usize;
        let mut count_at = |p: &[i64; N]| {
            let mut count = 0usize;
            for s in 0..=smax {
                if self.by_generation[s as usize].is_empty() {
                    continue;
                }
                // Dilated box of cube k at generation s, scaled to the
                // common denominator: [(10k-1)·M, (10k+11)·M], M = 2^{smax-s}.
                let m = 1i64 << (smax - s);
                let mut lo = [0i64; N];
                let mut hi = [0i64; N];
                let mut empty = false;
                for i in 0..N {
                    // (10k-1)M ≤ p  ⇔  k ≤ (p + M) / (10M)
                    // p ≤ (10k+11)M ⇔  k ≥ (p - 11M) / (10M)
                    hi[i] = (p[i] + m).div_euclid(10 * m);
                    lo[i] = -((-(p[i] - 11 * m)).div_euclid(10 * m));
                    if lo[i] > hi[i] {
                        empty = true;
                        break;
                    }
                }
                if empty {
                    continue;
                }
                let mut idx = lo;
                'cand: loop {
                    if self.lookup(s, &idx).is_some() {
                        count += 1;
                    }
                    for i in 0..N {
                        idx[i] += 1;
                        if idx[i] <= hi[i] {
                            continue 'cand;
                        }
                        idx[i] = lo[i];
                    }
                    break;
                }
            }
            if count > max_overlap {
                max_overlap = count;
            }
        };
        for wc in &self.cubes {
            let s = wc.cube.s;
            let m = 1i64 << (smax - s);
            // Corner probes: k·2^{-s} → 10·k·M over the common denominator.
            for corner in 0..(1u32 << N) {
                let p: [i64; N] = std::array::from_fn(|i| {
                    let k = wc.cube.index[i] + ((corner >> i) & 1) as i64;
                    10 * k * m
                });
                count_at(&p);
            }
            // Center probe: (2k+1)·2^{-(s+1)} → 5(2k+1)·M.
            let c: [i64; N] = std::array::from_fn(|i| 5 * (2 * wc.cube.index[i] + 1) * m);
            count_at(&c);
            // Dilated corners: (10k∓1/+11)·M.
            for corner in 0..(1u32 << N) {
                let p: [i64; N] = std::array::from_fn(|i| {
                    let k = wc.cube.index[i];
                    if (corner >> i) & 1 == 0 {
                        (10 * k - 1) * m
                    } else {
                        (10 * k + 11) * m
                    }
                });
                count_at(&p);
            }
        }
        OverlapReport {
            max_overlap,
            bound,
            pass: max_overlap <= bound,
        }
    }

    /// Sampled containment `Ω_{r/3} ⊂ ∪ {Q : Q̃ ⊂ Ω_r}` away from the
    /// truncation collar.
    pub fn check_cover_containment(&self, r: f64) -> CoverReport {
        assert!(r > 0.0 && r <= 1.0);
        let spacing = 2f64.powi(-(self.s_max as i32 + 1));
        let collar = 8.0 * (N as f64).sqrt() * 2f64.powi(-(self.s_max as i32));
        let r3 = r / 3.0;
        let steps = (r3 / spacing).ceil() as i64;
        let r_rat = Rat::approximate_float(r).expect("finite r");
        let mut dilation_ok: HashMap<u32, bool> = HashMap::new();
        let mut checked = 0u64;
        let mut covered = 0u64;
        let mut skipped_collar = 0u64;
        let mut violations = 0u64;
        let mut idx = vec![-steps; N];
        'outer: loop {
            let p: [f64; N] = std::array::from_fn(|i| (idx[i] as f64 + 0.5) * spacing);
            let norm2: f64 = p.iter().map(|x| x * x).sum();
            if norm2 < r3 * r3 && self.domain.contains(&p) {
                if self.domain.point_dist_to_complement(&p) <= collar {
                    skipped_collar += 1;
                } else {
                    checked += 1;
                    let ok = match self.locate(&p) {
                        Some(id) => *dilation_ok.entry(id).or_insert_with(|| {
                            self.domain
                                .rational_box_in_omega_r(&self.cube(id).cube.dilated(), r_rat)
                        }),
                        None => false,
                    };
                    if ok {
                        covered += 1;
                    } else {
                        violations += 1;
                    }
                }
            }
            for i in 0..N {
                idx[i] += 1;
                if idx[i] < steps {
                    continue 'outer;
                }
                idx[i] = -steps;
            }
            break;
        }
        CoverReport {
            r,
            checked,
            covered,
            skipped_collar,
            violations,
            pass: violations == 0,
        }
    }

    /// Generation sums `S_s = Σ_{Q ∈ F^s} d^q` with the fitted log₂ slope
    /// and the onset of geometric decay at rate `2^{-(q-n+1)} (1+ε)`.
    pub fn sum_diameters(&self, q: f64, epsilon: f64) -> DiamSumReport {
        let mut per_s = Vec::new();
        for s in 2..=self.s_max {
            let d = (N as f64).sqrt() * 2f64.powi(-(s as i32 + 1));
            let sum = self.family_fs(s).len() as f64 * d.powf(q);
            per_s.push((s, sum));
        }
        let cumulative: f64 = per_s.iter().map(|(_, v)| v).sum();
        // Smallest s* from which S_{s+1} ≤ S_s · 2^{-(q-n+1)} · (1+ε) holds
        // through the last nonzero generation.
        let rate = 2f64.powf(-(q - N as f64 + 1.0)) * (1.0 + epsilon);
        let last_nonzero = per_s.iter().rposition(|(_, v)| *v > 0.0);
        let decay_onset = last_nonzero.and_then(|last| {
            let mut onset = None;
            for start in (0..last).rev() {
                let window_ok = (start..last).all(|i| {
                    let (_, a) = per_s[i];
                    let (_, b) = per_s[i + 1];
                    a > 0.0 && b <= a * rate
                });
                if window_ok {
                    onset = Some(per_s[start].0);
                } else {
                    break;
                }
            }
            onset
        });
        // The slope is fitted on the decaying regime (from s* onward); the
        // boot generations fill in the family and bias a full-range fit.
        let window_pts = |from: u32| -> Vec<(f64, f64)> {
            per_s
                .iter()
                .filter(|(s, v)| *v > 0.0 && *s >= from)
                .map(|(s, v)| (*s as f64, v.log2()))
                .collect()
        };
        let slope = crate::analysis::fit::linear_slope(&window_pts(decay_onset.unwrap_or(2)));
        let slope_full = crate::analysis::fit::linear_slope(&window_pts(2));
        DiamSumReport {
            q,
            per_s,
            cumulative,
            slope,
            slope_full,
            theory_slope: -(q - N as f64 + 1.0),
            decay_onset,
            epsilon,
        }
    }

    /// JSON-lines dump, one selected cube per line.
    pub fn dump_jsonl(&self) -> String {
        let mut out = String::new();
        for wc in &self.cubes {
            let idx: Vec<i64> = wc.cube.index.to_vec();
            out.push_str(&format!(
                "{{\"s\":{},\"index\":{:?},\"d\":{:.17e},\"dist_to_F\":{:.17e}}}\n",
                wc.cube.s,
                idx,
                wc.cube.diam(),
                wc.dist_to_complement
            ));
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct DisjointnessReport {
    pub cube_count: usize,
    pub ancestor_violations: usize,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct DistanceBoundsReport {
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub violations: usize,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct OverlapReport {
    pub max_overlap: usize,
    pub bound: usize,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct CoverReport {
    pub r: f64,
    pub checked: u64,
    pub covered: u64,
    pub skipped_collar: u64,
    pub violations: u64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct DiamSumReport {
    pub q: f64,
    pub per_s: Vec<(u32, f64)>,
    pub cumulative: f64,
    /// Log₂ slope fitted from the decay onset onward.
    pub slope: Option<f64>,
    /// Full-range slope, reported for reference.
    pub slope_full: Option<f64>,
    pub theory_slope: f64,
    pub decay_onset: Option<u32>,
    pub epsilon: f64,
}

#[derive(Clone, Debug)]
pub struct FamilyMeasure {
    pub s0: u32,
    pub s: u32,
    pub j: u32,
    pub member_count: usize,
    pub measure: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct ReverseCount {
    pub s0: u32,
    pub j: u32,
    pub count: usize,
    pub bound: f64,
    pub ratio: f64,
}
