//! Fundamental operators of a Γₙ-contraction.
//!
//! For `T = (S₁,…,Sₙ)` the forward system `F` solves
//! `Sᵢ − S*_{n−i}Sₙ = D Fᵢ D` with `D = D_{Sₙ}`; the adjoint system `E`
//! solves the same equations for `T* = (S₁*,…,Sₙ*)`. Both are stored in the
//! coordinates of the defect range basis.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::gammaclass::binomial;
use crate::hardy::{mphi, mz, TruncatedHardySpace};
use crate::opcore::{commutator, defect, herm_max_eigenvalue, op_norm, pinv_apply, DefectData, OperatorTuple, Side};
use crate::{Error, Mat, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    /// `F` of `T`, on the range of `D_{Sₙ}`.
    Forward,
    /// `E` of `T*`, on the range of `D_{Sₙ*}`.
    Adjoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundamentalSystem {
    pub which: Which,
    pub arity: usize,
    /// `F₁,…,F_{n−1}` as `r × r` matrices.
    #[serde(with = "crate::io::mat_vec")]
    pub ops: Vec<Mat>,
    /// Orthonormal basis (`d × r`) of the defect range.
    #[serde(with = "crate::io::mat")]
    pub basis: Mat,
    /// Nonzero eigenvalues of the defect operator, matching `basis`.
    pub defect_values: Vec<f64>,
    pub residual_16: f64,
    pub residual_17: f64,
    /// Worst slack of the numerical-radius bound over all indices.
    pub radius_margin: f64,
    /// Set when the defect has rank zero and the system is vacuous.
    pub rank_deficient: bool,
}

impl FundamentalSystem {
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    /// `Fᵢ` with 1-based index.
    pub fn op(&self, i: usize) -> &Mat {
        &self.ops[i - 1]
    }

    /// `Q Fᵢ Q*` on the ambient space.
    pub fn ambient(&self, i: usize) -> Mat {
        &self.basis * self.op(i) * self.basis.adjoint()
    }

    /// Defect operator rebuilt from basis and eigenvalues.
    pub fn defect_operator(&self) -> Mat {
        let mut q = self.basis.clone();
        for (k, v) in self.defect_values.iter().enumerate() {
            q.column_mut(k).scale_mut(*v);
        }
        q * self.basis.adjoint()
    }

    /// `Q* D`, the defect in range coordinates.
    pub fn defect_coords(&self) -> Mat {
        let mut m = self.basis.adjoint();
        for (k, v) in self.defect_values.iter().enumerate() {
            m.row_mut(k).scale_mut(*v);
        }
        m
    }
}

/// Solver settings. Defaults follow a 360 × 360 grid for the radius check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    /// Grid for the pencil parameter `z = e^{iθ}`.
    pub outer_angles: usize,
    /// Grid passed to the numerical radius of each `Fᵢ + zF_{n−i}`.
    pub inner_angles: usize,
    /// Fail with `ResidualTooLarge` when the defining equation is not met.
    pub require_residual: bool,
}

impl SolveOptions {
    pub fn new(tol: f64) -> Self {
        SolveOptions {
            tol,
            outer_angles: 360,
            inner_angles: 360,
            require_residual: true,
        }
    }
}

fn oriented(t: &OperatorTuple, which: Which) -> OperatorTuple {
    match which {
        Which::Forward => t.clone(),
        Which::Adjoint => t.adjoint(),
    }
}

/// Defect of the last operator in the orientation used by `which`.
pub fn system_defect(t: &OperatorTuple, which: Which, tol: f64) -> Result<DefectData> {
    defect(oriented(t, which).last(), Side::Right, tol)
}

pub fn solve_fundamental(t: &OperatorTuple, which: Which, tol: f64) -> Result<FundamentalSystem> {
    solve_fundamental_with(t, which, &SolveOptions::new(tol))
}

/// Double pseudo-inverse solution `Fᵢ = D⁺(Sᵢ − S*_{n−i}Sₙ)D⁺` in range coordinates.
pub fn solve_fundamental_with(
    t: &OperatorTuple,
    which: Which,
    opts: &SolveOptions,
) -> Result<FundamentalSystem> {
    let tol = opts.tol;
    let tt = oriented(t, which);
    let n = tt.arity();
    let sn = tt.last();
    let dd = defect(sn, Side::Right, tol)?;
    let q = &dd.range_basis;
    let scale = tt.max_norm().max(1.0);

    let rhs: Vec<Mat> = (1..n).map(|i| tt.op(i) - tt.op(n - i).adjoint() * sn).collect();
    let mut ops = Vec::with_capacity(n - 1);
    let mut amb = Vec::with_capacity(n - 1);
    for r in &rhs {
        let left = pinv_apply(&dd.d, r, tol);
        let both = pinv_apply(&dd.d, &left.adjoint(), tol).adjoint();
        let f = q.adjoint() * &both * q;
        amb.push(q * &f * q.adjoint());
        ops.push(f);
    }
    let residual_16 = rhs
        .iter()
        .zip(&amb)
        .map(|(r, f)| op_norm(&(r - &dd.d * f * &dd.d)))
        .fold(0.0, f64::max);
    let residual_17 = (1..n)
        .map(|i| {
            let lhs = &dd.d * tt.op(i);
            let rhs = &amb[i - 1] * &dd.d + amb[n - i - 1].adjoint() * &dd.d * sn;
            op_norm(&(lhs - rhs))
        })
        .fold(0.0, f64::max);
    if opts.require_residual && residual_16 > tol * scale {
        return Err(Error::ResidualTooLarge {
            residual: residual_16,
            tol: tol * scale,
        });
    }
    let radius_margin = radius_margin(&ops, n, opts.outer_angles, opts.inner_angles);
    Ok(FundamentalSystem {
        which,
        arity: n,
        rank_deficient: dd.rank() == 0,
        basis: dd.range_basis.clone(),
        defect_values: dd.values.clone(),
        ops,
        residual_16,
        residual_17,
        radius_margin,
    })
}

/// `min_i [C(n−1,i) + C(n−1,n−i) − max_θ ω(Fᵢ + e^{iθ}F_{n−i})]` on the given grids.
pub fn radius_margin(ops: &[Mat], n: usize, outer: usize, inner: usize) -> f64 {
    let mut margin = f64::INFINITY;
    for i in 1..n {
        if i > n - i {
            // ω(F_{n−i} + zFᵢ) = ω(Fᵢ + z̄F_{n−i}) over the circle; already covered.
            continue;
        }
        let bound = (binomial(n - 1, i) + binomial(n - 1, n - i)) as f64;
        let worst = pencil_radius(&ops[i - 1], &ops[n - i - 1], outer, inner);
        margin = margin.min(bound - worst);
    }
    margin
}

/// `max_θ ω(A + e^{iθ}B)` with both the pencil and the radius evaluated on grids.
pub fn pencil_radius(a: &Mat, b: &Mat, outer: usize, inner: usize) -> f64 {
    let r = a.nrows();
    if r == 0 {
        return 0.0;
    }
    let re = |m: &Mat| (m + m.adjoint()).scale(0.5);
    let im = |m: &Mat| (m - m.adjoint()).map(|z| z * C64::new(0.0, -0.5));
    let (ra, ia, rb, ib) = (re(a), im(a), re(b), im(b));
    let tau = std::f64::consts::TAU;
    let mut best = f64::NEG_INFINITY;
    let mut h = Mat::zeros(r, r);
    for k in 0..outer.max(1) {
        let theta = tau * k as f64 / outer.max(1) as f64;
        for j in 0..inner.max(1) {
            let phi = tau * j as f64 / inner.max(1) as f64;
            // Re(e^{iφ}A + e^{i(φ+θ)}B)
            let (ca, sa) = (phi.cos(), phi.sin());
            let (cb, sb) = ((phi + theta).cos(), (phi + theta).sin());
            for idx in 0..r * r {
                h[idx] = ra[idx] * ca - ia[idx] * sa + rb[idx] * cb - ib[idx] * sb;
            }
            best = best.max(herm_max_eigenvalue(&h));
        }
    }
    best
}

/// Independent solution of `D Sᵢ = Fᵢ D + F*_{n−i} D Sₙ` by real least squares.
///
/// The unknowns `Fᵢ` enter both linearly and conjugate-linearly, so the system
/// is split into real and imaginary parts before solving.
pub fn solve_fundamental_sylvester(t: &OperatorTuple, which: Which, tol: f64) -> Result<Vec<Mat>> {
    let tt = oriented(t, which);
    let n = tt.arity();
    let sn = tt.last();
    let dd = defect(sn, Side::Right, tol)?;
    let r = dd.rank();
    let d = tt.dim();
    let m = n - 1;
    if r == 0 {
        return Ok(vec![Mat::zeros(0, 0); m]);
    }
    let dc = dd.coords();
    let g = &dc * sn;
    let eq_len = 2 * r * d;
    let rows = eq_len * m;
    let cols = 2 * r * r * m;
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    let mut b = DVector::<f64>::zeros(rows);
    let put = |a: &mut DMatrix<f64>, eq: usize, row: usize, col_d: usize, col: usize, z: C64| {
        let base = eq * eq_len + 2 * (row * d + col_d);
        a[(base, col)] += z.re;
        a[(base + 1, col)] += z.im;
    };
    for k in 0..m {
        for p in 0..r {
            for s in 0..r {
                for (part, unit) in [(0usize, C64::new(1.0, 0.0)), (1, C64::new(0.0, 1.0))] {
                    let col = 2 * (k * r * r + p * r + s) + part;
                    // X_k = unit·E_ps contributes unit·dc[s,:] to row p of equation k.
                    for q in 0..d {
                        put(&mut a, k, p, q, col, unit * dc[(s, q)]);
                    }
                    // In equation i with n−i−1 = k (0-based), X_k* = conj(unit)·E_sp gives row s += conj(unit)·g[p,:].
                    let i = m - 1 - k;
                    for q in 0..d {
                        put(&mut a, i, s, q, col, unit.conj() * g[(p, q)]);
                    }
                }
            }
        }
    }
    for i in 0..m {
        let target = &dc * tt.op(i + 1);
        for p in 0..r {
            for q in 0..d {
                let base = i * eq_len + 2 * (p * d + q);
                b[base] = target[(p, q)].re;
                b[base + 1] = target[(p, q)].im;
            }
        }
    }
    // Least squares through the complexified real system (the SVD lives in opcore).
    let x = pinv_apply(&a.map(|v| C64::new(v, 0.0)), &Mat::from_fn(rows, 1, |i, _| C64::new(b[i], 0.0)), 1e-13)
        .map(|z| z.re);
    Ok((0..m)
        .map(|k| {
            Mat::from_fn(r, r, |p, s| {
                let col = 2 * (k * r * r + p * r + s);
                C64::new(x[col], x[col + 1])
            })
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResidual {
    pub i: usize,
    pub j: usize,
    /// `‖[Eᵢ, Eⱼ]‖`.
    pub commutator: f64,
    /// `‖[Eᵢ*, E_{n−j}] − [Eⱼ*, E_{n−i}]‖`.
    pub cross: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutativityReport {
    pub pairs: Vec<PairResidual>,
    pub worst: f64,
    pub passed: bool,
}

/// Commutativity condition `[Eᵢ,Eⱼ] = 0` and `[Eᵢ*,E_{n−j}] = [Eⱼ*,E_{n−i}]` for `i ≤ j`.
pub fn check_commutativity_condition(e: &FundamentalSystem, tol: f64) -> CommutativityReport {
    commutativity_of(&e.ops, tol)
}

/// Same as [`check_commutativity_condition`] on a bare list `E₁,…,E_{n−1}`.
pub fn commutativity_of(ops: &[Mat], tol: f64) -> CommutativityReport {
    let n = ops.len() + 1;
    let e = |i: usize| &ops[i - 1];
    let mut pairs = Vec::new();
    let mut worst: f64 = 0.0;
    for i in 1..n {
        for j in i..n {
            let comm = op_norm(&commutator(e(i), e(j)));
            let cross = op_norm(
                &(commutator(&e(i).adjoint(), e(n - j)) - commutator(&e(j).adjoint(), e(n - i))),
            );
            worst = worst.max(comm).max(cross);
            pairs.push(PairResidual {
                i,
                j,
                commutator: comm,
                cross,
            });
        }
    }
    CommutativityReport {
        pairs,
        worst,
        passed: worst <= tol,
    }
}

/// `(M_{Φ₁},…,M_{Φ_{n−1}}, M_z)` with `Φᵢ(z) = Eᵢ* + zE_{n−i}` on the truncated Hardy space.
pub fn pencil_tuple(e: &FundamentalSystem, space: &TruncatedHardySpace, tol: f64) -> Result<OperatorTuple> {
    pencil_from_ops(&e.ops, space, tol)
}

pub fn pencil_from_ops(ops: &[Mat], space: &TruncatedHardySpace, tol: f64) -> Result<OperatorTuple> {
    let n = ops.len() + 1;
    if n < 2 {
        return Err(Error::ArityTooSmall(n));
    }
    if ops.iter().any(|m| m.nrows() != space.coeff_dim || m.ncols() != space.coeff_dim) {
        return Err(Error::DimensionMismatch(format!(
            "pencil coefficients must be {0}x{0}",
            space.coeff_dim
        )));
    }
    let report = commutativity_of(ops, tol);
    if !report.passed {
        return Err(Error::CommutativityFailed(report.worst));
    }
    let mut out = Vec::with_capacity(n);
    for i in 1..n {
        out.push(mphi(space, &ops[i - 1].adjoint(), &ops[n - i - 1])?);
    }
    out.push(mz(space));
    OperatorTuple::new(out)
}

/// Residuals of a solved system: both defining equations and the ω bound.
pub fn residual_summary(f: &FundamentalSystem) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    m.insert("residual_16".into(), f.residual_16);
    m.insert("residual_17".into(), f.residual_17);
    m.insert("radius_margin".into(), f.radius_margin);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;
    use crate::opcore::max_abs;

    fn scalar(s: &[C64]) -> OperatorTuple {
        OperatorTuple::new(s.iter().map(|z| Mat::from_element(1, 1, *z)).collect()).unwrap()
    }

    #[test]
    fn unitary_last_gives_empty_system() {
        let t = scalar(&[c(2.0, 0.0), c(1.0, 0.0)]);
        let f = solve_fundamental(&t, Which::Forward, 1e-8).unwrap();
        assert_eq!(f.rank(), 0);
        assert!(f.rank_deficient);
        assert!(f.residual_16 <= 1e-12);
    }

    #[test]
    fn scalar_closed_form() {
        let (s, p) = (c(1.2, 0.0), c(0.5, 0.0));
        let f = solve_fundamental(&scalar(&[s, p]), Which::Forward, 1e-10).unwrap();
        let expect = (s - s.conj() * p) / (1.0 - p.norm_sqr());
        // The 1x1 basis vector may carry a phase, which cancels in Q*FQ.
        assert!((f.op(1)[(0, 0)] - expect).norm() < 1e-12);
        assert!((expect.re - 0.8).abs() < 1e-12);
        assert!(f.radius_margin >= -1e-8);
        let g = solve_fundamental_sylvester(&scalar(&[s, p]), Which::Forward, 1e-10).unwrap();
        assert!((g[0][(0, 0)] - expect).norm() < 1e-10);
    }

    #[test]
    fn zero_tuple() {
        let z = Mat::zeros(2, 2);
        let t = OperatorTuple::new(vec![z.clone(), z.clone(), z]).unwrap();
        let f = solve_fundamental(&t, Which::Adjoint, 1e-10).unwrap();
        assert_eq!(f.rank(), 2);
        assert!(f.ops.iter().all(|m| max_abs(m) == 0.0));
        assert_eq!(f.residual_16, 0.0);
        assert_eq!(f.residual_17, 0.0);
    }

    #[test]
    fn non_contraction_residual_error() {
        // Unimodular p with s − s̄p = i ≠ 0 while the defect vanishes.
        let t = scalar(&[c(0.0, 0.5), c(1.0, 0.0)]);
        assert!(matches!(
            solve_fundamental(&t, Which::Forward, 1e-8),
            Err(Error::ResidualTooLarge { .. })
        ));
    }

    #[test]
    fn commutativity_examples() {
        let e1 = Mat::from_row_slice(1, 1, &[c(0.3, 0.2)]);
        assert!(commutativity_of(&[e1], 1e-12).passed);
        let d1 = Mat::from_diagonal(&DVector::from_vec(vec![c(0.1, 0.0), c(0.2, 0.0)]));
        let d2 = Mat::from_diagonal(&DVector::from_vec(vec![c(0.0, 0.3), c(-0.4, 0.0)]));
        assert!(commutativity_of(&[d1.clone(), d2.clone(), d1], 1e-12).passed);
        let a = Mat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let b = Mat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        let rep = commutativity_of(&[a.clone(), b.clone(), Mat::zeros(2, 2)], 1e-12);
        assert!(!rep.passed);
        let p12 = rep.pairs.iter().find(|p| p.i == 1 && p.j == 2).unwrap();
        assert!((p12.commutator - op_norm(&commutator(&a, &b))).abs() < 1e-14);
    }

    #[test]
    fn pencil_examples() {
        let space = TruncatedHardySpace::new(1, 8);
        let e = vec![Mat::from_element(1, 1, c(0.3, 0.0))];
        let t = pencil_from_ops(&e, &space, 1e-12).unwrap();
        let m = t.op(1);
        for k in 0..9 {
            assert_eq!(m[(k, k)], c(0.3, 0.0));
            if k > 0 {
                assert_eq!(m[(k, k - 1)], c(0.3, 0.0));
            }
        }
        let zero = pencil_from_ops(&[Mat::zeros(2, 2), Mat::zeros(2, 2)], &TruncatedHardySpace::new(2, 3), 1e-12)
            .unwrap();
        assert_eq!(zero.op(1), &Mat::zeros(8, 8));
        assert_eq!(zero.op(3), &mz(&TruncatedHardySpace::new(2, 3)));
    }
}
