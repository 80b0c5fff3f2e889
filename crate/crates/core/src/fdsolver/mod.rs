//! Shortley–Weller cut-cell discretization of the Dirichlet Poisson problem
//! on a 2-D graph domain, with an iterative sparse solver and
//! second-difference Hessian fields.
//!
//! Nodes sit on the uniform lattice `h·ℤ²` inside `[-1,1]²`. A node is
//! INTERIOR when all four axis arms of length `h` stay inside `Ω₁`, CUT
//! when at least one arm first meets `∂Ω₁` at length `θ ∈ (0, h]`, and
//! EXTERIOR otherwise. Dirichlet data is imposed exactly at the arm
//! endpoints, which keeps the matrix an M-matrix; arms shorter than
//! `10⁻³·h` snap their node onto the boundary (the node becomes a
//! boundary-valued point, perturbing the data location by under `10⁻³ h`).
//!
//! The assembled rows are generally nonsymmetric at cut neighborhoods (the
//! opposite-arm factors of adjacent rows differ), so the solver is
//! Jacobi-preconditioned BiCGSTAB rather than plain CG; it is deterministic
//! for a fixed assembly order.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::geometry::Domain;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("grid resolution too coarse: no interior nodes")]
    ResolutionTooCoarse,
    #[error("invalid resolution: {0}")]
    InvalidResolution(String),
    #[error("no convergence after {iterations} iterations (relative residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeClass {
    Interior,
    Cut,
    Exterior,
    /// Arm shorter than `10⁻³ h`: treated as a boundary-valued node.
    Snapped,
}

/// Arm directions in storage order.
pub const DIRS: [(usize, f64); 4] = [(0, 1.0), (0, -1.0), (1, 1.0), (1, -1.0)];

#[derive(Clone, Copy, Debug)]
pub enum Terminus {
    /// Full arm ending at an in-domain lattice neighbor.
    Unknown,
    /// Arm ending on `∂Ω₁` at the stored point.
    Boundary([f64; 2]),
}

#[derive(Clone, Copy, Debug)]
pub struct Arm {
    pub length: f64,
    pub terminus: Terminus,
}

/// Uniform cut-cell grid over a 2-D graph domain.
pub struct Grid {
    pub domain: Arc<Domain<2>>,
    pub h: f64,
    /// Lattice indices run in `[-half, half]` per axis.
    half: i64,
    side: usize,
    class: Vec<NodeClass>,
    cut_arms: HashMap<u32, [Arm; 4]>,
    /// Unknown id per node (-1 when the node carries no unknown).
    unknown_id: Vec<i32>,
    /// Node index per unknown.
    pub unknowns: Vec<u32>,
    pub snapped_count: usize,
}

impl Grid {
    #[inline]
    pub fn node_index(&self, i: i64, j: i64) -> u32 {
        ((i + self.half) as usize * self.side + (j + self.half) as usize) as u32
    }

    #[inline]
    pub fn node_coords(&self, node: u32) -> [f64; 2] {
        let i = (node as usize / self.side) as i64 - self.half;
        let j = (node as usize % self.side) as i64 - self.half;
        [i as f64 * self.h, j as f64 * self.h]
    }

    #[inline]
    pub fn node_ij(&self, node: u32) -> (i64, i64) {
        let i = (node as usize / self.side) as i64 - self.half;
        let j = (node as usize % self.side) as i64 - self.half;
        (i, j)
    }

    #[inline]
    pub fn class(&self, node: u32) -> NodeClass {
        self.class[node as usize]
    }

    #[inline]
    pub fn class_at(&self, i: i64, j: i64) -> NodeClass {
        if i.abs() > self.half || j.abs() > self.half {
            return NodeClass::Exterior;
        }
        self.class[self.node_index(i, j) as usize]
    }

    #[inline]
    pub fn unknown_of(&self, node: u32) -> Option<u32> {
        let id = self.unknown_id[node as usize];
        (id >= 0).then_some(id as u32)
    }

    pub fn num_unknowns(&self) -> usize {
        self.unknowns.len()
    }

    /// Arms of an unknown node (full arms synthesized for interior nodes).
    pub fn arms(&self, node: u32) -> [Arm; 4] {
        if let Some(a) = self.cut_arms.get(&node) {
            *a
        } else {
            [Arm {
                length: self.h,
                terminus: Terminus::Unknown,
            }; 4]
        }
    }

    /// CSV dump of classification and arm lengths.
    pub fn dump_csv(&self) -> String {
        let mut out = String::from("i,j,class,theta_e,theta_w,theta_n,theta_s\n");
        for node in 0..self.class.len() as u32 {
            let c = self.class(node);
            if c == NodeClass::Exterior {
                continue;
            }
            let (i, j) = self.node_ij(node);
            let arms = self.arms(node);
            out.push_str(&format!(
                "{},{},{:?},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                i, j, c, arms[0].length, arms[1].length, arms[2].length, arms[3].length
            ));
        }
        out
    }
}

/// Classifies nodes and computes cut arms by exact intersection with the
/// boundary polyline and circle.
pub fn build_grid(domain: Arc<Domain<2>>, h: f64) -> Result<Grid, SolverError> {
    let m = -h.log2();
    if !(h > 0.0) || m.fract() != 0.0 || m < 4.0 {
        return Err(SolverError::InvalidResolution(format!(
            "h must be 2^-m with m ≥ 4, got {h}"
        )));
    }
    if h < 4.0 * domain.spec().delta {
        return Err(SolverError::InvalidResolution(format!(
            "h = {h} under-resolves the boundary sampling (need h ≥ 4δ = {})",
            4.0 * domain.spec().delta
        )));
    }
    let half = (1.0 / h) as i64;
    let side = (2 * half + 1) as usize;
    let mut class = vec![NodeClass::Exterior; side * side];
    let mut cut_arms: HashMap<u32, [Arm; 4]> = HashMap::new();
    let snap = 1e-3 * h;

    for i in -half..=half {
        for j in -half..=half {
            let p = [i as f64 * h, j as f64 * h];
            if !domain.contains(&p) {
                continue;
            }
            let node = ((i + half) as usize * side + (j + half) as usize) as u32;
            let mut arms = [Arm {
                length: h,
                terminus: Terminus::Unknown,
            }; 4];
            let mut any_cut = false;
            let mut degenerate = false;
            for (d, (axis, dir)) in DIRS.iter().enumerate() {
                match domain.first_boundary_crossing(&p, *axis, *dir, h) {
                    Some(theta) => {
                        let mut q = p;
                        q[*axis] += dir * theta;
                        arms[d] = Arm {
                            length: theta,
                            terminus: Terminus::Boundary(q),
                        };
                        any_cut = true;
                        if theta < snap {
                            degenerate = true;
                        }
                    }
                    None => {
                        // Guard: a neighbor sitting exactly on the boundary
                        // must terminate the arm.
                        let mut q = p;
                        q[*axis] += dir * h;
                        if !domain.contains(&q) {
                            arms[d] = Arm {
                                length: h,
                                terminus: Terminus::Boundary(q),
                            };
                            any_cut = true;
                        }
                    }
                }
            }
            if degenerate {
                class[node as usize] = NodeClass::Snapped;
            } else if any_cut {
                class[node as usize] = NodeClass::Cut;
                cut_arms.insert(node, arms);
            } else {
                class[node as usize] = NodeClass::Interior;
            }
        }
    }

    let mut unknown_id = vec![-1i32; side * side];
    let mut unknowns = Vec::new();
    let mut snapped_count = 0usize;
    for node in 0..(side * side) as u32 {
        match class[node as usize] {
            NodeClass::Interior | NodeClass::Cut => {
                unknown_id[node as usize] = unknowns.len() as i32;
                unknowns.push(node);
            }
            NodeClass::Snapped => snapped_count += 1,
            NodeClass::Exterior => {}
        }
    }
    if unknowns.is_empty() {
        return Err(SolverError::ResolutionTooCoarse);
    }
    Ok(Grid {
        domain,
        h,
        half,
        side,
        class,
        cut_arms,
        unknown_id,
        unknowns,
        snapped_count,
    })
}

/// Grid function: one value per unknown node; the boundary trace is
/// reconstructed from the Dirichlet data, not stored.
#[derive(Clone)]
pub struct DiscreteField {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
}

impl DiscreteField {
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = grid
            .unknowns
            .iter()
            .map(|n| f(grid.node_coords(*n)))
            .collect();
        DiscreteField {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        DiscreteField {
            grid: Arc::clone(grid),
            values: vec![0.0; grid.num_unknowns()],
        }
    }

    pub fn value_at_node(&self, node: u32) -> Option<f64> {
        self.grid.unknown_of(node).map(|u| self.values[u as usize])
    }

    /// Componentwise `self + c·other`.
    pub fn axpy(&self, c: f64, other: &DiscreteField) -> DiscreteField {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + c * b)
            .collect();
        DiscreteField {
            grid: Arc::clone(&self.grid),
            values,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn dump_csv(&self) -> String {
        let mut out = String::from("i,j,value\n");
        for (u, node) in self.grid.unknowns.iter().enumerate() {
            let (i, j) = self.grid.node_ij(*node);
            out.push_str(&format!("{},{},{:.17e}\n", i, j, self.values[u]));
        }
        out
    }
}

/// Row-compressed sparse system `A u = b` with `A = -Δ_h` (positive
/// diagonal, nonpositive off-diagonals, nonnegative row sums).
pub struct SparseSystem {
    pub grid: Arc<Grid>,
    row_ptr: Vec<u32>,
    col_idx: Vec<u32>,
    vals: Vec<f64>,
    diag: Vec<f64>,
    /// Dirichlet folding data per row: (row, coefficient, boundary point).
    boundary_terms: Vec<(u32, f64, [f64; 2])>,
    /// Assembled right-hand side for the original data.
    pub rhs: Vec<f64>,
}

/// Assembles the Shortley–Weller Laplacian with Dirichlet data folded into
/// the right-hand side: rows discretize `-Δu = -f`.
pub fn assemble_poisson(
    grid: &Arc<Grid>,
    f: &dyn Fn([f64; 2]) -> f64,
    g: &dyn Fn([f64; 2]) -> f64,
) -> SparseSystem {
    let n = grid.num_unknowns();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::new();
    let mut vals = Vec::new();
    let mut diag = vec![0.0; n];
    let mut boundary_terms = Vec::new();
    row_ptr.push(0u32);

    for (row, node) in grid.unknowns.iter().enumerate() {
        let p = grid.node_coords(*node);
        let (i, j) = grid.node_ij(*node);
        let arms = grid.arms(*node);
        let th = [
            arms[0].length,
            arms[1].length,
            arms[2].length,
            arms[3].length,
        ];
        let mut d = 0.0;
        let neighbor_ij = [(i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)];
        for dir in 0..4 {
            let opp = dir ^ 1;
            let coeff = 2.0 / (th[dir] * (th[dir] + th[opp]));
            d += coeff;
            match arms[dir].terminus {
                Terminus::Unknown => {
                    let (ni, nj) = neighbor_ij[dir];
                    match grid.class_at(ni, nj) {
                        NodeClass::Interior | NodeClass::Cut => {
                            let nb = grid.node_index(ni, nj);
                            let u = grid.unknown_of(nb).expect("classified unknown");
                            col_idx.push(u);
                            vals.push(-coeff);
                        }
                        NodeClass::Snapped => {
                            // Merged into the boundary: Dirichlet at the
                            // snapped node's position.
                            let mut q = p;
                            q[DIRS[dir].0] += DIRS[dir].1 * grid.h;
                            boundary_terms.push((row as u32, coeff, q));
                        }
                        NodeClass::Exterior => {
                            unreachable!("full arm into an exterior node")
                        }
                    }
                }
                Terminus::Boundary(q) => {
                    boundary_terms.push((row as u32, coeff, q));
                }
            }
        }
        diag[row] = d;
        col_idx.push(row as u32);
        vals.push(d);
        row_ptr.push(col_idx.len() as u32);
    }

    let mut system = SparseSystem {
        grid: Arc::clone(grid),
        row_ptr,
        col_idx,
        vals,
        diag,
        boundary_terms,
        rhs: Vec::new(),
    };
    system.rhs = system.rhs_for(f, g);
    system
}

impl SparseSystem {
    /// Raw CSR constructor for solver-level tests on synthetic matrices.
    #[doc(hidden)]
    pub fn from_csr(
        grid: Arc<Grid>,
        row_ptr: Vec<u32>,
        col_idx: Vec<u32>,
        vals: Vec<f64>,
        rhs: Vec<f64>,
    ) -> Self {
        let n = row_ptr.len() - 1;
        let mut diag = vec![0.0; n];
        for row in 0..n {
            for k in row_ptr[row] as usize..row_ptr[row + 1] as usize {
                if col_idx[k] as usize == row {
                    diag[row] = vals[k];
                }
            }
        }
        SparseSystem {
            grid,
            row_ptr,
            col_idx,
            vals,
            diag,
            boundary_terms: Vec::new(),
            rhs,
        }
    }

    /// Right-hand side for new data on the same matrix: `b = -f + Σ c·g`.
    pub fn rhs_for(&self, f: &dyn Fn([f64; 2]) -> f64, g: &dyn Fn([f64; 2]) -> f64) -> Vec<f64> {
        let mut b: Vec<f64> = self
            .grid
            .unknowns
            .iter()
            .map(|n| -f(self.grid.node_coords(*n)))
            .collect();
        for (row, coeff, q) in &self.boundary_terms {
            b[*row as usize] += coeff * g(*q);
        }
        b
    }

    pub fn num_rows(&self) -> usize {
        self.diag.len()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for row in 0..self.num_rows() {
            let mut acc = 0.0;
            for k in self.row_ptr[row] as usize..self.row_ptr[row + 1] as usize {
                acc += self.vals[k] * x[self.col_idx[k] as usize];
            }
            y[row] = acc;
        }
    }

    /// Residual `b - A x` evaluated per row.
    pub fn residual(&self, x: &[f64], b: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.num_rows()];
        self.matvec(x, &mut r);
        for i in 0..r.len() {
            r[i] = b[i] - r[i];
        }
        r
    }

    /// M-matrix structure check: positive diagonal, nonpositive
    /// off-diagonals, nonnegative row sums, strictly positive at rows with
    /// boundary arms.
    pub fn validate_m_matrix(&self) -> bool {
        let mut has_bterm = vec![false; self.num_rows()];
        for (row, _, _) in &self.boundary_terms {
            has_bterm[*row as usize] = true;
        }
        for row in 0..self.num_rows() {
            if self.diag[row] <= 0.0 {
                return false;
            }
            let mut sum = 0.0;
            for k in self.row_ptr[row] as usize..self.row_ptr[row + 1] as usize {
                let v = self.vals[k];
                if self.col_idx[k] as usize != row && v > 0.0 {
                    return false;
                }
                sum += v;
            }
            let tol = 1e-12 * self.diag[row];
            if sum < -tol {
                return false;
            }
            if has_bterm[row] && sum <= tol {
                return false;
            }
        }
        true
    }

    /// Jacobi-preconditioned BiCGSTAB down to `‖b - Ax‖ ≤ tol·‖b‖`, capped
    /// at `50·√n` iterations. Deterministic for fixed assembly order.
    pub fn solve_with_rhs(&self, b: &[f64], tol: f64) -> Result<DiscreteField, SolverError> {
        let n = self.num_rows();
        let bnorm = norm2(b);
        let mut x = vec![0.0; n];
        if bnorm == 0.0 {
            return Ok(DiscreteField {
                grid: Arc::clone(&self.grid),
                values: x,
            });
        }
        let cap = (50.0 * (n as f64).sqrt()).ceil() as usize;
        let minv: Vec<f64> = self.diag.iter().map(|d| 1.0 / d).collect();
        let mut iterations = 0usize;
        for _restart in 0..4 {
            let mut r = self.residual(&x, b);
            if norm2(&r) <= tol * bnorm {
                return Ok(DiscreteField {
                    grid: Arc::clone(&self.grid),
                    values: x,
                });
            }
            let rhat = r.clone();
            let mut rho = 1.0f64;
            let mut alpha = 1.0f64;
            let mut omega = 1.0f64;
            let mut v = vec![0.0; n];
            let mut p = vec![0.0; n];
            let mut phat = vec![0.0; n];
            let mut s = vec![0.0; n];
            let mut shat = vec![0.0; n];
            let mut t = vec![0.0; n];
            let mut broke_down = false;
            while iterations < cap {
                iterations += 1;
                let rho_new = dot(&rhat, &r);
                if rho_new.abs() < 1e-300 || omega == 0.0 {
                    broke_down = true;
                    break;
                }
                let beta = (rho_new / rho) * (alpha / omega);
                for i in 0..n {
                    p[i] = r[i] + beta * (p[i] - omega * v[i]);
                }
                for i in 0..n {
                    phat[i] = minv[i] * p[i];
                }
                self.matvec(&phat, &mut v);
                let denom = dot(&rhat, &v);
                if denom.abs() < 1e-300 {
                    broke_down = true;
                    break;
                }
                alpha = rho_new / denom;
                for i in 0..n {
                    s[i] = r[i] - alpha * v[i];
                }
                if norm2(&s) <= tol * bnorm {
                    for i in 0..n {
                        x[i] += alpha * phat[i];
                    }
                    break;
                }
                for i in 0..n {
                    shat[i] = minv[i] * s[i];
                }
                self.matvec(&shat, &mut t);
                let tt = dot(&t, &t);
                if tt == 0.0 {
                    broke_down = true;
                    break;
                }
                omega = dot(&t, &s) / tt;
                for i in 0..n {
                    x[i] += alpha * phat[i] + omega * shat[i];
                }
                for i in 0..n {
                    r[i] = s[i] - omega * t[i];
                }
                if norm2(&r) <= tol * bnorm {
                    break;
                }
                rho = rho_new;
            }
            // Recompute the true residual; restart on drift or breakdown.
            let true_res = norm2(&self.residual(&x, b));
            if true_res <= tol * bnorm {
                return Ok(DiscreteField {
                    grid: Arc::clone(&self.grid),
                    values: x,
                });
            }
            if iterations >= cap && !broke_down {
                break;
            }
        }
        let residual = norm2(&self.residual(&x, b)) / bnorm;
        Err(SolverError::NoConvergence {
            iterations,
            residual,
        })
    }

    /// Solve against the assembled right-hand side.
    pub fn solve(&self, tol: f64) -> Result<DiscreteField, SolverError> {
        self.solve_with_rhs(&self.rhs, tol)
    }

    /// Solve followed by `passes` iterative-refinement corrections,
    /// shrinking the solution error below the condition-amplified residual
    /// tolerance. Used where reproduction to near machine precision is
    /// asserted.
    pub fn solve_refined(
        &self,
        b: &[f64],
        tol: f64,
        passes: usize,
    ) -> Result<DiscreteField, SolverError> {
        let mut x = self.solve_with_rhs(b, tol)?;
        for _ in 0..passes {
            let r = self.residual(&x.values, b);
            let e = self.solve_with_rhs(&r, tol)?;
            for i in 0..x.values.len() {
                x.values[i] += e.values[i];
            }
        }
        Ok(x)
    }
}

pub const DEFAULT_TOL: f64 = 1e-10;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Per-node symmetric second-difference tensor, defined only where the full
/// nine-point stencil (axis and diagonal neighbors) is INTERIOR; the valid
/// set shrinks by one layer relative to the interior node set.
pub struct HessianField {
    pub grid: Arc<Grid>,
    pub d11: Vec<f64>,
    pub d22: Vec<f64>,
    pub d12: Vec<f64>,
    pub valid: Vec<bool>,
}

impl HessianField {
    /// Frobenius magnitude `√(D11² + 2·D12² + D22²)` at an unknown.
    pub fn magnitude(&self, u: usize) -> f64 {
        (self.d11[u] * self.d11[u] + 2.0 * self.d12[u] * self.d12[u] + self.d22[u] * self.d22[u])
            .sqrt()
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }
}

/// Centered second differences per axis and the four-point cross difference
/// for the mixed term.
pub fn second_differences(field: &DiscreteField) -> HessianField {
    let grid = &field.grid;
    let n = grid.num_unknowns();
    let h2 = grid.h * grid.h;
    let mut d11 = vec![0.0; n];
    let mut d22 = vec![0.0; n];
    let mut d12 = vec![0.0; n];
    let mut valid = vec![false; n];
    for (u, node) in grid.unknowns.iter().enumerate() {
        if grid.class(*node) != NodeClass::Interior {
            continue;
        }
        let (i, j) = grid.node_ij(*node);
        let mut ok = true;
        for (di, dj) in [
            (1i64, 0i64),
            (-1, 0),
            (0, 1),
            (0, -1),
            (1, 1),
            (1, -1),
            (-1, 1),
            (-1, -1),
        ] {
            if grid.class_at(i + di, j + dj) != NodeClass::Interior {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        let at = |di: i64, dj: i64| -> f64 {
            let nb = grid.node_index(i + di, j + dj);
            field.values[grid.unknown_of(nb).expect("interior neighbor") as usize]
        };
        let c = field.values[u];
        d11[u] = (at(1, 0) - 2.0 * c + at(-1, 0)) / h2;
        d22[u] = (at(0, 1) - 2.0 * c + at(0, -1)) / h2;
        d12[u] = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h2);
        valid[u] = true;
    }
    HessianField {
        grid: Arc::clone(grid),
        d11,
        d22,
        d12,
        valid,
    }
}
