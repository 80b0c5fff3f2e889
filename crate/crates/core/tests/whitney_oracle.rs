//! Decomposition correctness against an independent exhaustive oracle, and
//! the exact combinatorial checks on real graph domains.

use std::collections::BTreeSet;
use std::sync::Arc;

use w2p_core::exact::rat;
use w2p_core::geometry::{Domain, GraphDomainSpec};
use w2p_core::whitney::fixtures::OpenBoxDomain;
use w2p_core::whitney::{decompose, AmbientDomain, DyadicCube, WhitneyDecomposition};

/// Enumerate every dyadic cube of generation ≤ s_max over [-1,1]² and apply
/// the mark/maximality rule directly with the closed-form clearance of the
/// open unit square. Entirely independent of the recursive construction.
fn square_oracle(s_max: u32) -> BTreeSet<(u32, [i64; 2])> {
    let clearance = |s: u32, k: [i64; 2]| -> f64 {
        let side = 2f64.powi(-(s as i32));
        let mut c = f64::INFINITY;
        for i in 0..2 {
            let lo = k[i] as f64 * side;
            let hi = (k[i] + 1) as f64 * side;
            c = c.min(lo).min(1.0 - hi);
        }
        c.max(0.0)
    };
    let marked = |s: u32, k: [i64; 2]| -> bool {
        let side = 2f64.powi(-(s as i32));
        clearance(s, k) >= std::f64::consts::SQRT_2 * side
    };
    let mut selected = BTreeSet::new();
    for s in 0..=s_max {
        let range = 1i64 << s;
        for kx in -range..range {
            for ky in -range..range {
                let k = [kx, ky];
                if !marked(s, k) {
                    continue;
                }
                let mut ancestor_marked = false;
                let mut cur = k;
                for sp in (0..s).rev() {
                    cur = [cur[0].div_euclid(2), cur[1].div_euclid(2)];
                    if marked(sp, cur) {
                        ancestor_marked = true;
                        break;
                    }
                }
                if !ancestor_marked {
                    selected.insert((s, k));
                }
            }
        }
    }
    selected
}

#[test]
fn unit_square_matches_exhaustive_oracle() {
    let s_max = 6;
    let fixture: Arc<dyn AmbientDomain<2>> =
        Arc::new(OpenBoxDomain::<2>::new([0.0, 0.0], [1.0, 1.0]));
    let dec = decompose(fixture, s_max);
    let got: BTreeSet<(u32, [i64; 2])> = dec
        .cubes
        .iter()
        .map(|wc| (wc.cube.s, wc.cube.index))
        .collect();
    let expect = square_oracle(s_max);
    assert_eq!(got, expect, "selection differs from the exhaustive oracle");
    // Classical square pattern sanity: counts per generation.
    let mut counts = std::collections::BTreeMap::new();
    for (s, _) in &got {
        *counts.entry(*s).or_insert(0usize) += 1;
    }
    // The coarsest selected generation for the dist ≥ diam rule is s = 3.
    assert!(!counts.contains_key(&2));
    assert!(counts[&3] >= 4);
    // Fourfold symmetry of the square applies to every generation count.
    for (_, c) in counts {
        assert_eq!(c % 4, 0);
    }
}

#[test]
fn dilated_box_exact_geometry() {
    let cube = DyadicCube::<2>::new(3, [5, -2]);
    let dil = cube.dilated();
    // Side (6/5)·2^{-s} exactly.
    let side = dil.max[0] - dil.min[0];
    assert_eq!(side, rat(12, 80));
    assert_eq!(side, rat(6, 5) * rat(1, 8));
    // Center coincides with the cube center exactly.
    let c_dil = (dil.min[0] + dil.max[0]) / rat(2, 1);
    assert_eq!(c_dil, rat(11, 16));
    let c_cube = (cube.rational_box().min[0] + cube.rational_box().max[0]) / rat(2, 1);
    assert_eq!(c_dil, c_cube);
}

#[test]
fn cube_ancestry_and_disjointness() {
    let c = DyadicCube::<2>::new(4, [-7, 3]);
    let p = c.parent().unwrap();
    assert_eq!(p.index, [-4, 1]);
    assert!(p.is_ancestor_of(&c));
    assert!(!c.is_ancestor_of(&p));
    for ch in c.children() {
        assert!(c.is_ancestor_of(&ch));
        assert_eq!(ch.parent().unwrap(), c);
    }
    // Distinct same-generation cubes never relate.
    let d = DyadicCube::<2>::new(4, [-6, 3]);
    assert!(!c.is_ancestor_of(&d) && !d.is_ancestor_of(&c));
}

fn graph_domain(spec: GraphDomainSpec, delta_pow: i32) -> Arc<Domain<2>> {
    Arc::new(Domain::build(spec.with_delta(2f64.powi(delta_pow))).unwrap())
}

#[test]
fn flat_distance_bounds_exact() {
    let domain = graph_domain(GraphDomainSpec::flat(2), -10);
    let dec = decompose(domain.clone() as Arc<dyn AmbientDomain<2>>, 8);
    assert!(dec.len() > 100);
    let rep = dec.check_distance_bounds();
    assert!(rep.pass, "ratios [{}, {}]", rep.min_ratio, rep.max_ratio);
    assert!(rep.min_ratio >= 1.0 && rep.max_ratio <= 4.0 * (1.0 + 1e-12));
    assert!(dec.check_disjointness().pass);
}

#[test]
fn cusp_distance_bounds_and_overlap() {
    let domain = graph_domain(GraphDomainSpec::cusp(0.5), -11);
    let dec = decompose(domain.clone() as Arc<dyn AmbientDomain<2>>, 9);
    let rep = dec.check_distance_bounds();
    assert!(rep.pass, "ratios [{}, {}]", rep.min_ratio, rep.max_ratio);
    let ov = dec.check_overlap_bound();
    assert!(ov.pass, "overlap {} > {}", ov.max_overlap, ov.bound);
    assert!(ov.max_overlap >= 2, "probes must see real overlaps");
}

#[test]
fn moved_cube_violates_lower_bound() {
    let domain = graph_domain(GraphDomainSpec::flat(2), -10);
    let dec = decompose(domain.clone() as Arc<dyn AmbientDomain<2>>, 6);
    let mut cubes: Vec<DyadicCube<2>> = dec.cubes.iter().map(|wc| wc.cube).collect();
    // Slide one cube right next to the boundary: dist < diam there.
    let s = 6;
    cubes.push(DyadicCube::new(s, [0, 0]));
    let handmade = WhitneyDecomposition::from_cubes(
        domain as Arc<dyn AmbientDomain<2>>,
        cubes,
        6,
    );
    let rep = handmade.check_distance_bounds();
    assert!(!rep.pass);
    assert!(rep.min_ratio < 1.0);
}

#[test]
fn truncated_cover_flat_and_cusp() {
    let domain = graph_domain(GraphDomainSpec::flat(2), -10);
    let dec = decompose(domain as Arc<dyn AmbientDomain<2>>, 8);
    let rep = dec.check_cover_containment(1.0);
    assert!(rep.pass, "violations {}", rep.violations);
    assert!(rep.checked > 1000);
    assert!(rep.skipped_collar > 0, "collar accounting must engage");

    let domain = graph_domain(GraphDomainSpec::cusp(0.6), -10);
    let dec = decompose(domain as Arc<dyn AmbientDomain<2>>, 8);
    let rep = dec.check_cover_containment(0.75);
    assert!(rep.pass, "violations {}", rep.violations);
}

#[test]
fn families_partition_and_emptiness() {
    let domain = graph_domain(GraphDomainSpec::cusp(0.6), -10);
    let dec = decompose(domain as Arc<dyn AmbientDomain<2>>, 8);
    let levels = dec.family_levels();
    assert!(levels.contains(&4), "levels found: {levels:?}");
    // Families start at s = 2.
    assert!(dec.family_fs(0).is_empty() && dec.family_fs(1).is_empty());

    let s0 = 4u32;
    let anchor = dec.family_fs(s0)[0];
    // Band partition: each member of F^s in exactly one band.
    for &s in &levels {
        let mut seen = BTreeSet::new();
        let mut total = 0usize;
        for j in 0..=(s0 + 2) {
            for id in dec.family_fsj(anchor, s, j).unwrap() {
                assert!(seen.insert(id), "cube in two bands");
                total += 1;
            }
        }
        assert_eq!(total, dec.family_fs(s).len(), "band union misses cubes");
    }
    // Eq. emptiness ranges: j > s0 and s < s0 - j - 6 give empty families.
    for &s in &levels {
        for j in (s0 + 1)..=(s0 + 4) {
            assert!(dec.family_fsj(anchor, s, j).unwrap().is_empty());
        }
    }
    for j in 0..=s0 {
        for s in 2..s0.saturating_sub(j + 6).max(2) {
            assert!(dec.family_fsj(anchor, s, j).unwrap().is_empty());
        }
    }
    // Anchor must be a family member.
    let non_family = dec
        .cubes
        .iter()
        .position(|wc| !wc.in_family)
        .expect("some cube outside the family") as u32;
    assert!(dec.family_fsj(non_family, 4, 0).is_err());
}

#[test]
fn family_measure_and_reverse_count_scaling() {
    let domain = graph_domain(GraphDomainSpec::flat(2), -11);
    let dec = decompose(domain as Arc<dyn AmbientDomain<2>>, 9);
    let s0 = 4u32;
    let anchors = dec.family_fs(s0);
    assert!(!anchors.is_empty());
    let anchor = anchors[0];
    // Exact enumeration cross-check of |F^{4,0}|: member volumes sum.
    let members = dec.family_fsj(anchor, 4, 0).unwrap();
    let fm = dec.check_family_measure(anchor, 4, 0).unwrap();
    assert_eq!(fm.member_count, members.len());
    let vol: f64 = members
        .iter()
        .map(|id| {
            let side = dec.cube(*id).cube.side();
            side * side
        })
        .sum();
    assert!((fm.measure - vol).abs() < 1e-15);
    // Empty family has ratio zero.
    let fm_empty = dec.check_family_measure(anchor, 2, s0 + 3);
    assert_eq!(fm_empty.unwrap().ratio, 0.0);
    // Reverse counts: direct enumeration oracle over F^{s0}.
    let target = dec.family_fs(5)[0];
    for j in 0..=2u32 {
        let rc = dec.check_reverse_count(target, s0, j).unwrap();
        let tcube = dec.cube(target).cube;
        let direct = dec
            .family_fs(s0)
            .iter()
            .filter(|id| dec.band_of(&dec.cube(**id).cube, &tcube, s0) == j)
            .count();
        assert_eq!(rc.count, direct);
    }
}

#[test]
fn diameter_sums_decay() {
    let domain = graph_domain(GraphDomainSpec::flat(2), -12);
    let dec = decompose(domain as Arc<dyn AmbientDomain<2>>, 10);
    let rep = dec.sum_diameters(1.5, 0.5);
    // Theory slope -(q - n + 1) = -0.5 for n = 2, q = 1.5.
    let slope = rep.slope.expect("nonzero sums");
    assert!(
        (slope - rep.theory_slope).abs() <= 0.3,
        "slope {slope} vs theory {}",
        rep.theory_slope
    );
    assert!(rep.decay_onset.is_some());
    // q = n: cumulative is a volume comparison, bounded by |Ω_{1/4}| times
    // a small overlap slack.
    let rep_n = dec.sum_diameters(2.0, 0.5);
    let omega_quarter = std::f64::consts::PI * 0.25 * 0.25;
    assert!(rep_n.cumulative <= 2.0f64.powi(2) * omega_quarter);
}

#[test]
fn flat_fixture_3d_smallscale() {
    let spec = GraphDomainSpec::flat(3).with_delta(2f64.powi(-7));
    let domain: Arc<dyn AmbientDomain<3>> = Arc::new(Domain::<3>::build(spec).unwrap());
    let dec = decompose(domain, 5);
    assert!(dec.len() > 100);
    assert!(dec.check_disjointness().pass);
    let rep = dec.check_distance_bounds();
    assert!(rep.pass, "ratios [{}, {}]", rep.min_ratio, rep.max_ratio);
    let ov = dec.check_overlap_bound();
    assert!(ov.pass && ov.bound == 12usize.pow(3));
}

#[test]
fn single_cube_overlap_is_one() {
    let domain = graph_domain(GraphDomainSpec::flat(2), -10);
    let handmade = WhitneyDecomposition::from_cubes(
        domain as Arc<dyn AmbientDomain<2>>,
        vec![DyadicCube::new(4, [1, 3])],
        4,
    );
    let ov = handmade.check_overlap_bound();
    assert_eq!(ov.max_overlap, 1);
}

#[test]
fn overlap_counter_matches_rational_brute_force() {
    use w2p_core::exact::rat;
    use w2p_core::Rat;
    // Exhaustive probe-by-probe count with exact rational containment,
    // fully independent of the scaled-integer candidate arithmetic.
    let fixture: Arc<dyn AmbientDomain<2>> =
        Arc::new(OpenBoxDomain::<2>::new([0.0, 0.0], [1.0, 1.0]));
    let dec = decompose(fixture, 5);
    let dilated: Vec<_> = dec.cubes.iter().map(|wc| wc.cube.dilated()).collect();
    let mut probes: Vec<[Rat; 2]> = Vec::new();
    for wc in &dec.cubes {
        let c = wc.cube;
        let den = 1i128 << c.s;
        for corner in 0..4u32 {
            probes.push([
                rat(c.index[0] as i128 + ((corner & 1) as i128), den),
                rat(c.index[1] as i128 + (((corner >> 1) & 1) as i128), den),
            ]);
        }
        probes.push([
            rat(2 * c.index[0] as i128 + 1, 2 * den),
            rat(2 * c.index[1] as i128 + 1, 2 * den),
        ]);
        let dil = c.dilated();
        for corner in 0..4u32 {
            probes.push([
                if corner & 1 == 0 { dil.min[0] } else { dil.max[0] },
                if (corner >> 1) & 1 == 0 { dil.min[1] } else { dil.max[1] },
            ]);
        }
    }
    let mut brute_max = 0usize;
    for p in &probes {
        let count = dilated.iter().filter(|d| d.contains(p)).count();
        brute_max = brute_max.max(count);
    }
    let fast = dec.check_overlap_bound();
    assert_eq!(fast.max_overlap, brute_max);
    assert!(brute_max >= 4, "square pattern should overlap at corners");
}

#[test]
fn whitney_box_distance_matches_dense_boundary_sampling() {
    // dist_to_complement on selected cubes vs the brute-force minimum over
    // a dense sampling of ∂Ω₁ (graph within the ball, plus the sphere cap),
    // within 10·K·step.
    let spec = GraphDomainSpec::cusp(0.6);
    let k = spec.seminorm_k;
    let domain = Arc::new(Domain::<2>::build(spec.with_delta(2f64.powi(-12))).unwrap());
    let dec = decompose(Arc::clone(&domain) as Arc<dyn AmbientDomain<2>>, 8);
    let step = 2f64.powi(-12);
    // Dense boundary sample.
    let mut boundary: Vec<[f64; 2]> = Vec::new();
    let n = (2.0 / step) as usize;
    for i in 0..=n {
        let t = -1.0 + i as f64 * step;
        let y = domain.phi(&[t, 0.0]);
        if t * t + y * y <= 1.0 {
            boundary.push([t, y]);
        }
    }
    let arc_n = (std::f64::consts::TAU / step) as usize;
    for i in 0..arc_n {
        let a = std::f64::consts::TAU * i as f64 / arc_n as f64;
        let p = [a.cos(), a.sin()];
        if p[1] >= domain.phi(&p) {
            boundary.push(p);
        }
    }
    // Spot-check a deterministic subset of cubes.
    for wc in dec.cubes.iter().step_by(97) {
        let bx = wc.cube.to_box();
        let mut brute = f64::INFINITY;
        for b in &boundary {
            brute = brute.min(bx.point_dist_sq(b).sqrt());
        }
        assert!(
            (wc.dist_to_complement - brute).abs() <= 10.0 * k * step,
            "cube {:?}: dist {} vs sampled {}",
            wc.cube,
            wc.dist_to_complement,
            brute
        );
    }
}
