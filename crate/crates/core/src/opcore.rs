//! Dense complex operator-tuple primitives.

use nalgebra::linalg::Schur;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::{Error, Mat, Result, C64};

/// Maximum number of random linear combinations tried by [`joint_spectrum`].
pub const TRIANGULARIZATION_ATTEMPTS: usize = 8;

/// Commuting n-tuple `(S₁,…,Sₙ)` of square matrices on a common space.
///
/// The commutation residual `max_{i<j} ‖SᵢSⱼ − SⱼSᵢ‖` is recorded at
/// construction. A zero-dimensional space is allowed and represents an
/// empty summand.
#[derive(Debug, Clone)]
pub struct OperatorTuple {
    ops: Vec<Mat>,
    commutation_residual: f64,
    /// Filled on first call to [`OperatorTuple::max_norm`].
    max_norm: OnceLock<f64>,
}

impl PartialEq for OperatorTuple {
    fn eq(&self, other: &Self) -> bool {
        self.ops == other.ops
    }
}

impl OperatorTuple {
    pub fn new(ops: Vec<Mat>) -> Result<Self> {
        if ops.len() < 2 {
            return Err(Error::ArityTooSmall(ops.len()));
        }
        let d = ops[0].nrows();
        for (k, m) in ops.iter().enumerate() {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::DimensionMismatch(format!(
                    "operator {} is {}x{}, expected {d}x{d}",
                    k + 1,
                    m.nrows(),
                    m.ncols()
                )));
            }
            if !all_finite(m) {
                return Err(Error::NonFinite);
            }
        }
        let commutation_residual = max_commutator(&ops);
        Ok(OperatorTuple {
            ops,
            commutation_residual,
            max_norm: OnceLock::new(),
        })
    }

    pub fn arity(&self) -> usize {
        self.ops.len()
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }

    pub fn ops(&self) -> &[Mat] {
        &self.ops
    }

    pub fn into_ops(self) -> Vec<Mat> {
        self.ops
    }

    /// `Sᵢ` with the 1-based index used in the formulas (`op(n)` is the last operator).
    pub fn op(&self, i: usize) -> &Mat {
        &self.ops[i - 1]
    }

    pub fn last(&self) -> &Mat {
        self.ops.last().unwrap()
    }

    pub fn commutation_residual(&self) -> f64 {
        self.commutation_residual
    }

    /// `(S₁*,…,Sₙ*)`.
    pub fn adjoint(&self) -> OperatorTuple {
        OperatorTuple {
            ops: self.ops.iter().map(|m| m.adjoint()).collect(),
            commutation_residual: self.commutation_residual,
            max_norm: self.max_norm.clone(),
        }
    }

    /// Largest operator norm among the coordinates.
    pub fn max_norm(&self) -> f64 {
        *self.max_norm.get_or_init(|| self.ops.iter().map(op_norm).fold(0.0, f64::max))
    }

    pub fn is_empty_space(&self) -> bool {
        self.dim() == 0
    }
}

pub(crate) fn all_finite(m: &Mat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Above this dimension residual norms use [`op_norm_bound`] instead of an SVD.
const LARGE: usize = 128;

fn max_commutator(ops: &[Mat]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..ops.len() {
        for j in i + 1..ops.len() {
            let c = commutator(&ops[i], &ops[j]);
            let norm = if c.nrows() > LARGE { op_norm_bound(&c) } else { op_norm(&c) };
            worst = worst.max(norm);
        }
    }
    worst
}

fn faer_view(a: &Mat) -> faer::MatRef<'_, C64> {
    faer::MatRef::from_column_major_slice(a.as_slice(), a.nrows(), a.ncols())
}

fn from_faer(m: faer::Mat<C64>) -> Mat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Dense `AB` through faer's blocked kernels (nalgebra multiplies complex matrices naively).
pub fn gemm(a: &Mat, b: &Mat) -> Mat {
    if a.nrows().max(a.ncols()).max(b.ncols()) <= 32 {
        return a * b;
    }
    from_faer(faer_view(a) * faer_view(b))
}

/// Dense `A*B` without forming the adjoint.
pub fn gemm_adj(a: &Mat, b: &Mat) -> Mat {
    if a.nrows().max(a.ncols()).max(b.ncols()) <= 32 {
        return a.ad_mul(b);
    }
    from_faer(faer_view(a).adjoint() * faer_view(b))
}

/// `AB`, skipping the zero entries of `A` when it is large and mostly zero
/// (truncated Toeplitz blocks are banded).
pub fn mul(a: &Mat, b: &Mat) -> Mat {
    if a.nrows() <= LARGE {
        return gemm(a, b);
    }
    let zero = C64::new(0.0, 0.0);
    let nnz = a.iter().filter(|z| **z != zero).count();
    if 4 * nnz > a.nrows() * a.ncols() {
        return gemm(a, b);
    }
    let mut out = Mat::zeros(a.nrows(), b.ncols());
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let v = a[(i, j)];
            if v != zero {
                for c in 0..b.ncols() {
                    out[(i, c)] += v * b[(j, c)];
                }
            }
        }
    }
    out
}

pub fn commutator(a: &Mat, b: &Mat) -> Mat {
    mul(a, b) - mul(b, a)
}

/// Largest singular value; zero for empty matrices.
pub fn op_norm(a: &Mat) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    if a.nrows() == 1 || a.ncols() == 1 {
        return a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    }
    let fa = faer::Mat::<faer::c64>::from_fn(a.nrows(), a.ncols(), |i, j| {
        let z = a[(i, j)];
        faer::c64::new(z.re, z.im)
    });
    fa.singular_values().expect("svd converges on finite input").first().copied().unwrap_or(0.0)
}

/// Cheap upper bound `min(‖A‖_F, (‖A‖₁‖A‖_∞)^{1/2}) ≥ ‖A‖` for large residual matrices.
pub fn op_norm_bound(a: &Mat) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    let fro = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let col = (0..a.ncols()).map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let row = (0..a.nrows()).map(|i| a.row(i).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    fro.min((col * row).sqrt())
}

pub fn max_abs(a: &Mat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn herm_eig(m: &Mat) -> (Vec<f64>, Mat) {
    let d = m.nrows();
    if d == 0 {
        return (Vec::new(), Mat::zeros(0, 0));
    }
    let h = (m + m.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    let mut idx: Vec<usize> = (0..d).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = Mat::zeros(d, d);
    for (col, &k) in idx.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(k));
    }
    (vals, vecs)
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn herm_max_eigenvalue(h: &Mat) -> f64 {
    match h.nrows() {
        0 => f64::NEG_INFINITY,
        1 => h[(0, 0)].re,
        2 => {
            let a = h[(0, 0)].re;
            let d = h[(1, 1)].re;
            let b = h[(0, 1)];
            0.5 * (a + d) + (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt()
        }
        _ => h.clone().symmetric_eigenvalues().max(),
    }
}

/// Which defect operator to form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `(I − AA*)^{1/2}`.
    Left,
    /// `(I − A*A)^{1/2}`.
    Right,
}

/// Defect operator together with an orthonormal basis of its range.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectData {
    pub d: Mat,
    /// Columns span the closure of `Ran D`.
    pub range_basis: Mat,
    /// Nonzero eigenvalues of `D`, in the order of `range_basis`.
    pub values: Vec<f64>,
}

impl DefectData {
    pub fn rank(&self) -> usize {
        self.values.len()
    }

    pub fn dim(&self) -> usize {
        self.d.nrows()
    }

    /// `Q* D`, the defect written in range coordinates (`r × d`).
    pub fn coords(&self) -> Mat {
        let mut m = self.range_basis.adjoint();
        for (k, v) in self.values.iter().enumerate() {
            m.row_mut(k).scale_mut(*v);
        }
        m
    }

    /// `Q Λ⁻¹ Q*`, the pseudo-inverse of `D`.
    pub fn pinv(&self) -> Mat {
        let mut q = self.range_basis.clone();
        for (k, v) in self.values.iter().enumerate() {
            q.column_mut(k).scale_mut(1.0 / v);
        }
        q * self.range_basis.adjoint()
    }
}

/// Principal square root of `I − A*A` (right) or `I − AA*` (left).
///
/// Eigenvalues of the squared defect at or below `tol` are set to zero; the
/// remaining eigenvectors form the range basis. The left defect of `A` is
/// computed as the right defect of `A*`.
pub fn defect(a: &Mat, side: Side, tol: f64) -> Result<DefectData> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "defect of a {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    if !all_finite(a) {
        return Err(Error::NonFinite);
    }
    let norm = op_norm(a);
    if norm > 1.0 + tol {
        return Err(Error::NotAContraction(norm));
    }
    let b = match side {
        Side::Right => a.clone(),
        Side::Left => a.adjoint(),
    };
    let dim = a.nrows();
    let m = Mat::identity(dim, dim) - b.adjoint() * &b;
    let (vals, vecs) = herm_eig(&m);
    let kept: Vec<usize> = (0..dim).rev().filter(|&k| vals[k] > tol).collect();
    let mut range_basis = Mat::zeros(dim, kept.len());
    let mut values = Vec::with_capacity(kept.len());
    for (col, &k) in kept.iter().enumerate() {
        range_basis.set_column(col, &vecs.column(k));
        values.push(vals[k].sqrt());
    }
    let mut scaled = range_basis.clone();
    for (col, v) in values.iter().enumerate() {
        scaled.column_mut(col).scale_mut(*v);
    }
    let d = &scaled * range_basis.adjoint();
    Ok(DefectData {
        d,
        range_basis,
        values,
    })
}

/// Thin singular value decomposition `A = U diag(s) V*`, singular values descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Mat,
    pub s: Vec<f64>,
    pub v: Mat,
}

/// Thin SVD through faer. nalgebra's complex SVD can return inaccurate factors on
/// rank-deficient partial isometries, which the subspace iterations here rely on.
pub fn svd(a: &Mat) -> Svd {
    let (m, n) = a.shape();
    let k = m.min(n);
    if k == 0 {
        return Svd {
            u: Mat::zeros(m, 0),
            s: Vec::new(),
            v: Mat::zeros(n, 0),
        };
    }
    let fa = faer::Mat::<faer::c64>::from_fn(m, n, |i, j| {
        let z = a[(i, j)];
        faer::c64::new(z.re, z.im)
    });
    let dec = fa.thin_svd().expect("svd converges on finite input");
    let (fu, fs, fv) = (dec.U(), dec.S().column_vector(), dec.V());
    Svd {
        u: Mat::from_fn(m, k, |i, j| C64::new(fu[(i, j)].re, fu[(i, j)].im)),
        s: (0..k).map(|j| fs[j].re).collect(),
        v: Mat::from_fn(n, k, |i, j| C64::new(fv[(i, j)].re, fv[(i, j)].im)),
    }
}

/// `A⁺B` with singular values of `A` below `tol·σ_max` treated as zero.
pub fn pinv_apply(a: &Mat, b: &Mat, tol: f64) -> Mat {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Mat::zeros(a.ncols(), b.ncols());
    }
    let dec = svd(a);
    let smax = dec.s[0];
    let mut ub = dec.u.adjoint() * b;
    for (k, s) in dec.s.iter().enumerate() {
        let f = if *s > tol * smax && *s > 0.0 { 1.0 / s } else { 0.0 };
        ub.row_mut(k).scale_mut(f);
    }
    &dec.v * ub
}

/// Orthonormal basis of the column space of `a`, keeping singular values above `cutoff`.
pub fn orth_basis(a: &Mat, cutoff: f64) -> Mat {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Mat::zeros(a.nrows(), 0);
    }
    let dec = svd(a);
    let keep = dec.s.iter().take_while(|s| **s > cutoff).count();
    dec.u.columns(0, keep).into_owned()
}

/// Orthonormal basis of the orthogonal complement of the span of the orthonormal columns `q`.
pub fn complement_basis(q: &Mat) -> Mat {
    let d = q.nrows();
    let p = Mat::identity(d, d) - q * q.adjoint();
    let (vals, vecs) = herm_eig(&p);
    let keep: Vec<usize> = (0..d).rev().filter(|&k| vals[k] > 0.5).collect();
    let mut out = Mat::zeros(d, keep.len());
    for (col, &k) in keep.iter().enumerate() {
        out.set_column(col, &vecs.column(k));
    }
    out
}

fn hermitian_part_rotated(a: &Mat, theta: f64) -> Mat {
    let rot = C64::from_polar(1.0, theta);
    let b = a.map(|z| z * rot);
    (&b + b.adjoint()).scale(0.5)
}

/// Grid lower bound `max_θ λ_max(Re(e^{iθ}A))` over `angles` equispaced angles.
pub fn numerical_radius(a: &Mat, angles: usize) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    let angles = angles.max(1);
    (0..angles)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / angles as f64;
            herm_max_eigenvalue(&hermitian_part_rotated(a, t))
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Grid search followed by golden-section refinement around every grid local maximum.
///
/// Never smaller than [`numerical_radius`] at the same grid.
pub fn numerical_radius_refined(a: &Mat, angles: usize) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    let angles = angles.max(4);
    let step = std::f64::consts::TAU / angles as f64;
    let f = |t: f64| herm_max_eigenvalue(&hermitian_part_rotated(a, t));
    let vals: Vec<f64> = (0..angles).map(|k| f(step * k as f64)).collect();
    let mut best = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for k in 0..angles {
        let prev = vals[(k + angles - 1) % angles];
        let next = vals[(k + 1) % angles];
        if vals[k] >= prev && vals[k] >= next {
            let center = step * k as f64;
            best = best.max(golden_max(&f, center - step, center + step, 48));
        }
    }
    best
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
pub(crate) fn golden_max(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, iters: usize) -> f64 {
    golden_argmax(f, lo, hi, iters).1
}

/// Golden-section search returning the best abscissa seen and its value.
pub(crate) fn golden_argmax(
    f: &dyn Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    iters: usize,
) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for _ in 0..iters {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
            if f2 > best.1 {
                best = (x2, f2);
            }
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
            if f1 > best.1 {
                best = (x1, f1);
            }
        }
    }
    best
}

/// Joint eigenvalues of a commuting tuple, one n-tuple per dimension.
///
/// The tuple is first permuted to block upper-triangular form along the
/// strongly connected components of its joint sparsity pattern, so exactly
/// triangular structure is read off without perturbation. Each remaining
/// diagonal block is triangularized by the Schur form of a random real linear
/// combination of the coordinates.
pub fn joint_spectrum<R: Rng + ?Sized>(
    t: &OperatorTuple,
    tol: f64,
    rng: &mut R,
) -> Result<Vec<Vec<C64>>> {
    let scale = t.max_norm().max(1.0);
    if t.commutation_residual() > tol * scale * scale {
        return Err(Error::NonCommuting {
            residual: t.commutation_residual(),
            tol,
        });
    }
    let mut points = Vec::with_capacity(t.dim());
    for block in pattern_blocks(t.ops()) {
        if block.len() == 1 {
            let k = block[0];
            points.push(t.ops().iter().map(|m| m[(k, k)]).collect());
            continue;
        }
        let sub: Vec<Mat> = t
            .ops()
            .iter()
            .map(|m| m.select_rows(&block).select_columns(&block))
            .collect();
        points.extend(triangularize_block(&sub, tol, rng)?);
    }
    Ok(points)
}

fn pattern_blocks(ops: &[Mat]) -> Vec<Vec<usize>> {
    let d = ops[0].nrows();
    let mut g = DiGraph::<(), ()>::with_capacity(d, 0);
    let nodes: Vec<_> = (0..d).map(|_| g.add_node(())).collect();
    for i in 0..d {
        for j in 0..d {
            if i != j && ops.iter().any(|m| m[(i, j)] != C64::new(0.0, 0.0)) {
                g.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let mut sccs = tarjan_scc(&g);
    sccs.reverse();
    sccs.into_iter()
        .map(|comp| {
            let mut v: Vec<usize> = comp.into_iter().map(|n| n.index()).collect();
            v.sort_unstable();
            v
        })
        .collect()
}

fn triangularize_block<R: Rng + ?Sized>(
    ops: &[Mat],
    tol: f64,
    rng: &mut R,
) -> Result<Vec<Vec<C64>>> {
    let d = ops[0].nrows();
    for _ in 0..TRIANGULARIZATION_ATTEMPTS {
        let mut l = Mat::zeros(d, d);
        for m in ops {
            let c: f64 = rng.sample(StandardNormal);
            l += m.map(|z| z * c);
        }
        let Some(schur) = Schur::try_new(l, f64::EPSILON, 0) else {
            continue;
        };
        let (q, _) = schur.unpack();
        let conj: Vec<Mat> = ops.iter().map(|m| q.adjoint() * m * &q).collect();
        let ok = conj.iter().zip(ops).all(|(c, m)| {
            let bound = tol * max_abs(m).max(1.0);
            (0..d).all(|i| (0..i).all(|j| c[(i, j)].norm() <= bound))
        });
        if ok {
            return Ok((0..d)
                .map(|k| conj.iter().map(|c| c[(k, k)]).collect())
                .collect());
        }
    }
    Err(Error::TriangularizationFailed(TRIANGULARIZATION_ATTEMPTS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(v: &[C64]) -> Mat {
        Mat::from_diagonal(&nalgebra::DVector::from_row_slice(v))
    }

    #[test]
    fn tuple_rejects_bad_input() {
        let i = Mat::identity(2, 2);
        assert_eq!(
            OperatorTuple::new(vec![i.clone()]).unwrap_err(),
            Error::ArityTooSmall(1)
        );
        assert!(matches!(
            OperatorTuple::new(vec![i.clone(), Mat::identity(3, 3)]),
            Err(Error::DimensionMismatch(_))
        ));
        let mut bad = i.clone();
        bad[(0, 0)] = c(f64::NAN, 0.0);
        assert_eq!(
            OperatorTuple::new(vec![i, bad]).unwrap_err(),
            Error::NonFinite
        );
    }

    #[test]
    fn spectrum_of_diagonal_tuple() {
        let a = diag(&[c(0.1, 0.0), c(0.2, 0.3), c(-0.5, 0.0)]);
        let b = diag(&[c(0.0, 1.0), c(0.4, 0.0), c(0.7, -0.1)]);
        let t = OperatorTuple::new(vec![a.clone(), b.clone()]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts = joint_spectrum(&t, 1e-10, &mut rng).unwrap();
        assert_eq!(pts.len(), 3);
        for k in 0..3 {
            assert!(pts
                .iter()
                .any(|p| (p[0] - a[(k, k)]).norm() < 1e-12 && (p[1] - b[(k, k)]).norm() < 1e-12));
        }
    }

    #[test]
    fn spectrum_of_zero_tuple() {
        let z = Mat::zeros(3, 3);
        let t = OperatorTuple::new(vec![z.clone(), z.clone(), z]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts = joint_spectrum(&t, 1e-10, &mut rng).unwrap();
        assert_eq!(pts.len(), 3);
        assert!(pts.iter().all(|p| p.iter().all(|z| z.norm() == 0.0)));
    }

    #[test]
    fn spectrum_of_polynomials_in_nilpotent() {
        // p(N) = 0.3 + 2N, q(N) = -0.1i + 0.5N with N the 2x2 Jordan cell, conjugated densely.
        let n = Mat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let p = Mat::identity(2, 2).map(|z| z * 0.3) + n.map(|z| z * 2.0);
        let q = Mat::identity(2, 2).map(|z| z * c(0.0, -0.1)) + n.map(|z| z * 0.5);
        let th: f64 = 0.7;
        let u = Mat::from_row_slice(
            2,
            2,
            &[c(th.cos(), 0.0), c(0.0, th.sin()), c(0.0, th.sin()), c(th.cos(), 0.0)],
        );
        let t = OperatorTuple::new(vec![
            &u * p * u.adjoint(),
            &u * q * u.adjoint(),
        ])
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts = joint_spectrum(&t, 1e-8, &mut rng).unwrap();
        for pt in pts {
            assert!((pt[0] - c(0.3, 0.0)).norm() < 1e-6);
            assert!((pt[1] - c(0.0, -0.1)).norm() < 1e-6);
        }
    }

    #[test]
    fn noncommuting_is_rejected() {
        let a = Mat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let t = OperatorTuple::new(vec![a.clone(), a.transpose()]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(matches!(
            joint_spectrum(&t, 1e-8, &mut rng),
            Err(Error::NonCommuting { .. })
        ));
    }

    #[test]
    fn defect_examples() {
        let u = Mat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)]);
        let du = defect(&u, Side::Right, 1e-10).unwrap();
        assert_eq!(du.rank(), 0);
        assert!(max_abs(&du.d) < 1e-12);

        let z = Mat::zeros(3, 3);
        let dz = defect(&z, Side::Left, 1e-10).unwrap();
        assert_eq!(dz.rank(), 3);
        assert!(max_abs(&(dz.d - Mat::identity(3, 3))) < 1e-12);

        let a = Mat::from_element(1, 1, c(0.6, 0.0));
        let da = defect(&a, Side::Right, 1e-10).unwrap();
        assert!((da.d[(0, 0)].re - 0.8).abs() < 1e-12);

        let big = Mat::from_element(1, 1, c(1.5, 0.0));
        assert!(matches!(
            defect(&big, Side::Right, 1e-8),
            Err(Error::NotAContraction(_))
        ));
    }

    #[test]
    fn defect_coords_and_pinv() {
        let a = diag(&[c(0.6, 0.0), c(1.0, 0.0), c(0.0, 0.5)]);
        let dd = defect(&a, Side::Right, 1e-10).unwrap();
        assert_eq!(dd.rank(), 2);
        let back = &dd.range_basis * dd.coords();
        assert!(max_abs(&(back - &dd.d)) < 1e-12);
        let p = dd.pinv() * &dd.d;
        let proj = &dd.range_basis * dd.range_basis.adjoint();
        assert!(max_abs(&(p - proj)) < 1e-12);
    }

    #[test]
    fn norm_examples() {
        assert!((op_norm(&Mat::identity(3, 3)) - 1.0).abs() < 1e-14);
        let d = diag(&[c(3.0, 0.0), c(0.0, -4.0)]);
        assert!((op_norm(&d) - 4.0).abs() < 1e-12);
        assert_eq!(op_norm(&Mat::zeros(0, 0)), 0.0);
    }

    #[test]
    fn pinv_example() {
        let a = diag(&[c(2.0, 0.0), c(0.0, 0.0)]);
        let b = diag(&[c(2.0, 0.0), c(5.0, 0.0)]);
        let x = pinv_apply(&a, &b, 1e-12);
        assert!(max_abs(&(x - diag(&[c(1.0, 0.0), c(0.0, 0.0)]))) < 1e-14);
    }

    #[test]
    fn numerical_radius_examples() {
        assert!((numerical_radius(&Mat::identity(3, 3), 360) - 1.0).abs() < 1e-12);
        let j = Mat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!((numerical_radius(&j, 360) - 0.5).abs() < 1e-4);
        let n = diag(&[c(0.3, 0.4), c(-0.9, 0.1), c(0.0, 0.2)]);
        let rho = 0.9f64.hypot(0.1);
        assert!((numerical_radius_refined(&n, 360) - rho).abs() < 1e-6);
    }

    #[test]
    fn complement_is_orthogonal() {
        let q = orth_basis(
            &Mat::from_row_slice(3, 1, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)]),
            1e-12,
        );
        let w = complement_basis(&q);
        assert_eq!(w.ncols(), 2);
        assert!(max_abs(&(q.adjoint() * &w)) < 1e-12);
        assert!(max_abs(&(w.adjoint() * &w - Mat::identity(2, 2))) < 1e-12);
    }
}
