//! Manufactured-solution studies and solver oracles for the cut-cell
//! discretization.
//!
//! The Shortley–Weller difference is exact on polynomials of degree ≤ 2 in
//! each variable, so affine and quadratic manufactured solutions reproduce
//! to solver tolerance; genuine convergence orders are measured on the
//! transcendental harmonic `e^x cos y`.

use std::sync::Arc;

use w2p_core::analysis::fit;
use w2p_core::fdsolver::{
    assemble_poisson, build_grid, second_differences, DiscreteField, Grid, NodeClass,
    SolverError, SparseSystem, DEFAULT_TOL, DIRS,
};
use w2p_core::geometry::{Domain, GraphDomainSpec};

fn domain(spec: GraphDomainSpec) -> Arc<Domain<2>> {
    Arc::new(Domain::build(spec).unwrap())
}

fn solve_mms(
    dom: &Arc<Domain<2>>,
    h: f64,
    u_exact: &dyn Fn([f64; 2]) -> f64,
    f: &dyn Fn([f64; 2]) -> f64,
) -> (Arc<Grid>, DiscreteField, f64) {
    // Tight solves: the discretization error under study must not be
    // polluted by the algebraic tolerance (amplified by the condition
    // number, roughly h^{-2}).
    let grid = Arc::new(build_grid(Arc::clone(dom), h).unwrap());
    let system = assemble_poisson(&grid, f, u_exact);
    let u = system.solve_refined(&system.rhs, 1e-11, 2).unwrap();
    let exact = DiscreteField::from_fn(&grid, u_exact);
    let err = u.axpy(-1.0, &exact).max_abs();
    (grid, u, err)
}

#[test]
fn affine_is_reproduced_to_machine_precision() {
    for spec in [GraphDomainSpec::flat(2), GraphDomainSpec::bump()] {
        let dom = domain(spec);
        let (_, _, err) = solve_mms(&dom, 1.0 / 32.0, &|p| p[0], &|_| 0.0);
        assert!(err <= 1e-10, "affine error {err}");
    }
}

#[test]
fn quadratic_is_reproduced_to_solver_tolerance() {
    // u = x² - y² is harmonic and differenced exactly by the stencil, so
    // the only error left is the linear-solver tolerance.
    for spec in [GraphDomainSpec::flat(2), GraphDomainSpec::bump()] {
        let dom = domain(spec);
        let (_, _, err) = solve_mms(&dom, 1.0 / 64.0, &|p| p[0] * p[0] - p[1] * p[1], &|_| 0.0);
        assert!(err <= 1e-8, "quadratic error {err}");
    }
}

#[test]
fn transcendental_convergence_order() {
    let u_exact = |p: [f64; 2]| p[0].exp() * p[1].cos();
    for spec in [GraphDomainSpec::flat(2), GraphDomainSpec::bump()] {
        let dom = domain(spec);
        let mut pts = Vec::new();
        for m in [5, 6, 7] {
            let h = 2f64.powi(-m);
            let (_, _, err) = solve_mms(&dom, h, &u_exact, &|_| 0.0);
            pts.push((h.ln(), err.ln()));
        }
        let order = fit::linear_slope(&pts).unwrap();
        assert!(order >= 1.8, "fitted solution order {order}");
    }
}

#[test]
fn hessian_interior_convergence() {
    let u_exact = |p: [f64; 2]| p[0].exp() * p[1].cos();
    let dom = domain(GraphDomainSpec::flat(2));
    let mut pts = Vec::new();
    // Ω_{1/12} holds no full-stencil nodes until the radius is several h
    // wide, so the Hessian ladder starts at h = 1/64.
    for m in [6, 7, 8] {
        let h = 2f64.powi(-m);
        let (grid, u, _) = solve_mms(&dom, h, &u_exact, &|_| 0.0);
        let hess = second_differences(&u);
        let mut max_err = 0.0f64;
        for (k, node) in grid.unknowns.iter().enumerate() {
            if !hess.valid[k] {
                continue;
            }
            let p = grid.node_coords(*node);
            if p[0] * p[0] + p[1] * p[1] >= (1.0 / 12.0) * (1.0 / 12.0) {
                continue;
            }
            let e11 = (hess.d11[k] - p[0].exp() * p[1].cos()).abs();
            let e22 = (hess.d22[k] + p[0].exp() * p[1].cos()).abs();
            let e12 = (hess.d12[k] + p[0].exp() * p[1].sin()).abs();
            max_err = max_err.max(e11).max(e22).max(e12);
        }
        assert!(max_err > 0.0, "mask left no nodes in the window");
        pts.push((h.ln(), max_err.ln()));
    }
    let order = fit::linear_slope(&pts).unwrap();
    assert!(order >= 0.8, "fitted Hessian order {order}");
}

#[test]
fn second_differences_exact_on_polynomials() {
    let dom = domain(GraphDomainSpec::flat(2));
    let grid = Arc::new(build_grid(Arc::clone(&dom), 1.0 / 32.0).unwrap());
    // Affine field: all defined entries vanish.
    let aff = DiscreteField::from_fn(&grid, |p| 3.0 * p[0] - 2.0 * p[1] + 1.0);
    let h_aff = second_differences(&aff);
    // Product field: mixed entry 1, diagonal entries 0.
    let xy = DiscreteField::from_fn(&grid, |p| p[0] * p[1]);
    let h_xy = second_differences(&xy);
    let mut seen = 0;
    for k in 0..grid.num_unknowns() {
        if !h_aff.valid[k] {
            continue;
        }
        seen += 1;
        assert!(h_aff.d11[k].abs() < 1e-12);
        assert!(h_aff.d22[k].abs() < 1e-12);
        assert!(h_aff.d12[k].abs() < 1e-12);
        assert!((h_xy.d12[k] - 1.0).abs() < 1e-11);
        assert!(h_xy.d11[k].abs() < 1e-11);
        assert!(h_xy.d22[k].abs() < 1e-11);
    }
    assert!(seen > 100);
    // The valid set shrinks by one layer: strictly fewer valid nodes than
    // interior nodes.
    let interior = grid
        .unknowns
        .iter()
        .filter(|n| grid.class(**n) == NodeClass::Interior)
        .count();
    assert!(h_aff.valid_count() < interior);
}

#[test]
fn discrete_maximum_principle() {
    // f ≤ 0 and g ≥ 0 imply u ≥ 0 (M-matrix inverse positivity); with
    // f ≡ -1, g ≡ 0 the solution is strictly positive inside.
    let dom = domain(GraphDomainSpec::flat(2));
    let grid = Arc::new(build_grid(Arc::clone(&dom), 1.0 / 32.0).unwrap());
    let system = assemble_poisson(&grid, &|_| -1.0, &|_| 0.0);
    assert!(system.validate_m_matrix());
    let u = system.solve(DEFAULT_TOL).unwrap();
    assert!(u.values.iter().all(|v| *v > 0.0));
}

#[test]
fn zero_data_gives_zero_field() {
    let dom = domain(GraphDomainSpec::flat(2));
    let grid = Arc::new(build_grid(Arc::clone(&dom), 1.0 / 16.0).unwrap());
    let system = assemble_poisson(&grid, &|_| 0.0, &|_| 0.0);
    let u = system.solve(DEFAULT_TOL).unwrap();
    assert!(u.values.iter().all(|v| *v == 0.0));
}

#[test]
fn linearity_of_solve() {
    let dom = domain(GraphDomainSpec::cusp(0.75));
    let grid = Arc::new(build_grid(Arc::clone(&dom), 1.0 / 64.0).unwrap());
    let f1 = |p: [f64; 2]| (3.0 * p[0]).sin();
    let f2 = |p: [f64; 2]| p[1] * p[1];
    let (a, b) = (2.5, -1.25);
    let system = assemble_poisson(&grid, &f1, &|_| 0.0);
    let u1 = system.solve_with_rhs(&system.rhs_for(&f1, &|_| 0.0), DEFAULT_TOL).unwrap();
    let u2 = system.solve_with_rhs(&system.rhs_for(&f2, &|_| 0.0), DEFAULT_TOL).unwrap();
    let combo = |p: [f64; 2]| a * f1(p) + b * f2(p);
    let u12 = system
        .solve_with_rhs(&system.rhs_for(&combo, &|_| 0.0), DEFAULT_TOL)
        .unwrap();
    let recomposed = u1.axpy(0.0, &u1).axpy(a - 1.0, &u1).axpy(b, &u2);
    let err = u12.axpy(-1.0, &recomposed).max_abs();
    let scale = u12.max_abs().max(1.0);
    assert!(err <= 1e-7 * scale, "linearity defect {err}");
}

#[test]
fn dense_factorization_oracle() {
    // Small system: extract the dense matrix column by column and compare
    // the iterative solution against Gaussian elimination.
    let dom = domain(GraphDomainSpec::flat(2).with_delta(2f64.powi(-8)));
    let grid = Arc::new(build_grid(Arc::clone(&dom), 1.0 / 16.0).unwrap());
    let system = assemble_poisson(&grid, &|p| (p[0] * 5.0).cos(), &|p| p[1]);
    let n = system.num_rows();
    assert!(n <= 800, "oracle wants a small system, got {n}");
    let mut dense = vec![vec![0.0f64; n]; n];
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        system.matvec(&e, &mut col);
        for i in 0..n {
            dense[i][j] = col[i];
        }
        e[j] = 0.0;
    }
    let x_dense = gauss_solve(dense, system.rhs.clone());
    let x_iter = system.solve_refined(&system.rhs, 1e-11, 1).unwrap();
    let mut max_rel = 0.0f64;
    let scale = x_dense.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..n {
        max_rel = max_rel.max((x_dense[i] - x_iter.values[i]).abs() / scale);
    }
    assert!(max_rel <= 1e-8, "iterative vs dense mismatch {max_rel}");
}

fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|i, j| a[*i][col].abs().total_cmp(&a[*j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        assert!(a[col][col].abs() > 1e-300);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in (row + 1)..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    x
}

#[test]
fn single_unknown_system() {
    let dom = domain(GraphDomainSpec::flat(2));
    let grid = Arc::new(build_grid(Arc::clone(&dom), 1.0 / 16.0).unwrap());
    let system = SparseSystem::from_csr(
        Arc::clone(&grid),
        vec![0, 1],
        vec![0],
        vec![4.0],
        vec![10.0],
    );
    let u = system.solve_with_rhs(&[10.0], 1e-14).unwrap();
    assert!((u.values[0] - 2.5).abs() < 1e-12);
}

#[test]
fn cut_arm_bisection_oracle() {
    // Recompute every cut arm by bisecting contains() along the segment.
    let dom = domain(GraphDomainSpec::cusp(0.6));
    let h = 1.0 / 64.0;
    let grid = Arc::new(build_grid(Arc::clone(&dom), h).unwrap());
    let mut checked = 0usize;
    for node in grid.unknowns.iter() {
        if grid.class(*node) != NodeClass::Cut {
            continue;
        }
        let p = grid.node_coords(*node);
        let arms = grid.arms(*node);
        for (d, (axis, dir)) in DIRS.iter().enumerate() {
            let theta = arms[d].length;
            assert!(theta > 0.0 && theta <= h);
            if let w2p_core::fdsolver::Terminus::Boundary(_) = arms[d].terminus {
                // Find the first membership flip along 64 substeps, then
                // bisect inside that subinterval.
                let steps = 64;
                let mut prev_t = 0.0;
                let mut flip = None;
                for k in 1..=steps {
                    let t = h * k as f64 / steps as f64;
                    let mut q = p;
                    q[*axis] += dir * t;
                    if !dom.contains(&q) {
                        flip = Some((prev_t, t));
                        break;
                    }
                    prev_t = t;
                }
                let (mut lo, mut hi) = flip.unwrap_or((h * (1.0 - 1.0 / steps as f64), h));
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let mut q = p;
                    q[*axis] += dir * mid;
                    if dom.contains(&q) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let oracle = 0.5 * (lo + hi);
                assert!(
                    (theta - oracle).abs() <= 1e-9,
                    "arm {theta} vs bisection {oracle} at {p:?} dir {d}"
                );
                checked += 1;
            }
        }
    }
    assert!(checked > 50, "too few cut arms exercised: {checked}");
}

#[test]
fn refinement_stability() {
    // For fixed smooth data the max difference between consecutive
    // refinements decreases by at least 3x per halving.
    let dom = domain(GraphDomainSpec::bump());
    let f = |p: [f64; 2]| (2.0 * p[0]).cos() * (3.0 * p[1]).sin();
    let g = |_: [f64; 2]| 0.0;
    let mut fields: Vec<(Arc<Grid>, DiscreteField)> = Vec::new();
    for m in [4, 5, 6, 7] {
        let grid = Arc::new(build_grid(Arc::clone(&dom), 2f64.powi(-m)).unwrap());
        let system = assemble_poisson(&grid, &f, &g);
        fields.push((Arc::clone(&grid), system.solve(DEFAULT_TOL).unwrap()));
    }
    let mut diffs = Vec::new();
    for w in fields.windows(2) {
        let (coarse_grid, coarse) = &w[0];
        let (fine_grid, fine) = &w[1];
        let mut d = 0.0f64;
        for (k, node) in coarse_grid.unknowns.iter().enumerate() {
            let p = coarse_grid.node_coords(*node);
            let (i, j) = (
                (p[0] / fine_grid.h).round() as i64,
                (p[1] / fine_grid.h).round() as i64,
            );
            let fine_node = fine_grid.node_index(i, j);
            if let Some(v) = fine.value_at_node(fine_node) {
                d = d.max((coarse.values[k] - v).abs());
            }
        }
        diffs.push(d);
    }
    for w in diffs.windows(2) {
        assert!(
            w[1] * 3.0 <= w[0],
            "refinement stalled: {} then {}",
            w[0],
            w[1]
        );
    }
}

#[test]
fn resolution_preconditions() {
    let dom = domain(GraphDomainSpec::flat(2));
    assert!(matches!(
        build_grid(Arc::clone(&dom), 0.1),
        Err(SolverError::InvalidResolution(_))
    ));
    assert!(matches!(
        build_grid(Arc::clone(&dom), 2f64.powi(-3)),
        Err(SolverError::InvalidResolution(_))
    ));
    // h below 4δ under-resolves the sampled boundary.
    let fine = domain(GraphDomainSpec::cusp(0.6));
    assert!(matches!(
        build_grid(fine, 2f64.powi(-11)),
        Err(SolverError::InvalidResolution(_))
    ));
}

#[test]
fn flat_grid_classification() {
    let dom = domain(GraphDomainSpec::flat(2));
    let h = 1.0 / 16.0;
    let grid = Arc::new(build_grid(Arc::clone(&dom), h).unwrap());
    // First row above the graph is CUT with the south arm ending exactly on
    // the graph at distance h.
    let node = grid.node_index(0, 1);
    assert_eq!(grid.class(node), NodeClass::Cut);
    let arms = grid.arms(node);
    assert_eq!(arms[3].length, h);
    assert!(matches!(
        arms[3].terminus,
        w2p_core::fdsolver::Terminus::Boundary(_)
    ));
    // A bulk node is INTERIOR.
    assert_eq!(grid.class(grid.node_index(0, 5)), NodeClass::Interior);
    // Nodes on and below the graph carry no unknowns.
    assert_eq!(grid.class(grid.node_index(3, 0)), NodeClass::Exterior);
    assert_eq!(grid.class(grid.node_index(3, -2)), NodeClass::Exterior);
}

#[test]
fn classification_consistency() {
    // A node whose four lattice neighbors are interior is itself interior.
    let dom = domain(GraphDomainSpec::cusp(0.6));
    let grid = Arc::new(build_grid(Arc::clone(&dom), 1.0 / 64.0).unwrap());
    for node in grid.unknowns.iter() {
        let (i, j) = grid.node_ij(*node);
        let all_nb_interior = [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)]
            .iter()
            .all(|(di, dj)| grid.class_at(i + di, j + dj) == NodeClass::Interior);
        if all_nb_interior {
            assert_eq!(grid.class(*node), NodeClass::Interior, "node ({i},{j})");
        }
    }
}

#[test]
fn degenerate_arm_snaps_to_boundary() {
    // A plateau grazing a lattice row from below: the node sits 1e-4·h
    // above the graph, under the 1e-3·h snap threshold.
    let h = 1.0 / 16.0;
    let delta = h / 4.0;
    let m = (2.0 / delta) as usize + 1;
    let plateau = h * (1.0 - 1e-4);
    let samples: Vec<f64> = (0..m)
        .map(|i| {
            let t: f64 = -1.0 + i as f64 * delta;
            t.abs().min(plateau)
        })
        .collect();
    let spec = GraphDomainSpec {
        dim: 2,
        alpha: 1.0,
        seminorm_k: 1.0,
        delta,
        kind: w2p_core::geometry::DomainKind::Table,
        samples: Some(samples),
        label: "plateau".into(),
    };
    let dom = Arc::new(Domain::build(spec).unwrap());
    let grid = Arc::new(build_grid(Arc::clone(&dom), h).unwrap());
    assert!(grid.snapped_count > 0, "plateau must trigger snapping");
    // Snapped nodes carry no unknowns.
    for node in grid.unknowns.iter() {
        assert_ne!(grid.class(*node), NodeClass::Snapped);
    }
    // The system still assembles as an M-matrix and reproduces affine data
    // up to the 1e-3·h boundary perturbation.
    let system = assemble_poisson(&grid, &|_| 0.0, &|p| p[1]);
    assert!(system.validate_m_matrix());
    let u = system.solve_refined(&system.rhs, 1e-11, 1).unwrap();
    let exact = DiscreteField::from_fn(&grid, |p| p[1]);
    let err = u.axpy(-1.0, &exact).max_abs();
    assert!(err <= 1e-3 * h, "snap perturbation too large: {err}");
}
