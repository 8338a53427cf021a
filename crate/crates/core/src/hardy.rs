//! Truncated Hardy spaces, the Wold decomposition of Γₙ-isometries, the
//! canonical Γₙ-unitary and node checks for unitary extensions of pencils.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fundops::commutativity_of;
use crate::gammaclass::{certify_contraction, CertParams, ClassLabel};
use crate::opcore::{
    complement_basis, herm_eig, joint_spectrum, max_abs, op_norm, orth_basis, OperatorTuple,
};
use crate::symdomain::roots;
use crate::{Error, Mat, Result, C64};

/// `ℰ`-valued polynomials of degree ≤ N, coefficient-major by degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncatedHardySpace {
    pub coeff_dim: usize,
    pub degree: usize,
}

impl TruncatedHardySpace {
    pub fn new(coeff_dim: usize, degree: usize) -> Self {
        TruncatedHardySpace { coeff_dim, degree }
    }

    pub fn total_dim(&self) -> usize {
        self.coeff_dim * (self.degree + 1)
    }

    /// Coordinates of degree `< N`, where shift identities hold exactly.
    pub fn interior(&self) -> Vec<usize> {
        (0..self.coeff_dim * self.degree).collect()
    }

    /// Coordinates of the degree-`k` coefficient.
    pub fn slot(&self, k: usize) -> std::ops::Range<usize> {
        k * self.coeff_dim..(k + 1) * self.coeff_dim
    }
}

/// Samples of `ℰ`-valued functions at the M-th roots of unity, with per-node weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusGridSpace {
    pub coeff_dim: usize,
    pub grid_size: usize,
    #[serde(with = "crate::io::mat_vec")]
    pub weights: Vec<Mat>,
}

impl TorusGridSpace {
    pub fn new(coeff_dim: usize, grid_size: usize, weights: Vec<Mat>) -> Result<Self> {
        if grid_size == 0 {
            return Err(Error::InvalidParameter("grid size must be positive".into()));
        }
        if weights.len() != grid_size
            || weights
                .iter()
                .any(|w| w.nrows() != coeff_dim || w.ncols() != coeff_dim)
        {
            return Err(Error::DimensionMismatch(format!(
                "need {grid_size} weights of size {coeff_dim}x{coeff_dim}"
            )));
        }
        Ok(TorusGridSpace {
            coeff_dim,
            grid_size,
            weights,
        })
    }

    /// Identity weights.
    pub fn unweighted(coeff_dim: usize, grid_size: usize) -> Result<Self> {
        Self::new(coeff_dim, grid_size, vec![Mat::identity(coeff_dim, coeff_dim); grid_size])
    }

    pub fn nodes(&self) -> Vec<C64> {
        grid_nodes(self.grid_size)
    }

    /// Grids need at least `2N+1` nodes to pair with a degree-N truncation.
    pub fn check_adequate(&self, degree: usize) -> Result<()> {
        check_grid(self.grid_size, degree)
    }
}

pub fn grid_nodes(m: usize) -> Vec<C64> {
    (0..m)
        .map(|k| C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / m as f64))
        .collect()
}

pub fn check_grid(grid: usize, degree: usize) -> Result<()> {
    if grid < 2 * degree + 1 {
        return Err(Error::GridInadequate {
            grid,
            degree,
            need: 2 * degree + 1,
        });
    }
    Ok(())
}

/// Truncated shift: degree k goes to k+1, the top coefficient is annihilated.
pub fn mz(space: &TruncatedHardySpace) -> Mat {
    let r = space.coeff_dim;
    let dim = space.total_dim();
    let mut m = Mat::zeros(dim, dim);
    for k in 0..space.degree {
        for j in 0..r {
            m[((k + 1) * r + j, k * r + j)] = C64::new(1.0, 0.0);
        }
    }
    m
}

/// Multiplication by `A + zB`, truncated: block lower-bidiagonal with `A` on the diagonal.
pub fn mphi(space: &TruncatedHardySpace, a: &Mat, b: &Mat) -> Result<Mat> {
    let r = space.coeff_dim;
    if a.shape() != (r, r) || b.shape() != (r, r) {
        return Err(Error::DimensionMismatch(format!(
            "symbol coefficients must be {r}x{r}, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let dim = space.total_dim();
    let mut m = Mat::zeros(dim, dim);
    for k in 0..=space.degree {
        m.view_mut((k * r, k * r), (r, r)).copy_from(a);
        if k < space.degree {
            m.view_mut(((k + 1) * r, k * r), (r, r)).copy_from(b);
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WoldDecomposition {
    /// Unitary `U_w` with `U_w Vᵢ U_w*` block diagonal (pure part first).
    #[serde(with = "crate::io::mat")]
    pub change_of_basis: Mat,
    pub shift_multiplicity: usize,
    /// Truncation degree of the pure part.
    pub degree: usize,
    #[serde(with = "crate::io::tuple")]
    pub unitary_part: OperatorTuple,
    /// `E₁,…,E_{n−1}` in the wandering basis.
    #[serde(with = "crate::io::mat_vec")]
    pub pencil_coeffs: Vec<Mat>,
    /// Orthonormal basis (`d × r`) of the wandering subspace.
    #[serde(with = "crate::io::mat")]
    pub wandering_basis: Mat,
    /// Orthonormal basis (`d × u`) of the unitary subspace.
    #[serde(with = "crate::io::mat")]
    pub unitary_basis: Mat,
    pub residuals: BTreeMap<String, f64>,
}

impl WoldDecomposition {
    pub fn max_residual(&self) -> f64 {
        self.residuals.values().cloned().fold(0.0, f64::max)
    }

    /// Pencil coefficients rewritten in another orthonormal basis of the wandering space.
    pub fn pencil_coeffs_in(&self, basis: &Mat) -> Vec<Mat> {
        let m = basis.adjoint() * &self.wandering_basis;
        self.pencil_coeffs
            .iter()
            .map(|e| &m * e * m.adjoint())
            .collect()
    }

    pub fn hardy_space(&self) -> TruncatedHardySpace {
        TruncatedHardySpace::new(self.shift_multiplicity, self.degree)
    }
}

/// Splits a Γₙ-isometry into a truncated pencil model and a Γₙ-unitary.
pub fn wold(v: &OperatorTuple, tol: f64) -> Result<WoldDecomposition> {
    let n = v.arity();
    let d = v.dim();
    let vn = v.last();
    let scale = v.max_norm().max(1.0);
    let budget = tol * scale;
    let cutoff = tol.sqrt();

    // Stabilized intersection of Ran Vₙᵏ.
    let mut qu = Mat::identity(d, d);
    for _ in 0..=d {
        let next = orth_basis(&(vn * &qu), cutoff);
        let stable = next.ncols() == qu.ncols();
        qu = next;
        if stable {
            break;
        }
    }
    let u = qu.ncols();
    let p = complement_basis(&qu);
    let pure_dim = d - u;

    let mut residuals = BTreeMap::new();
    let mut v12: f64 = 0.0;
    let mut v21: f64 = 0.0;
    for m in v.ops() {
        v12 = v12.max(op_norm(&(qu.adjoint() * m * &p)));
        v21 = v21.max(op_norm(&(p.adjoint() * m * &qu)));
    }
    residuals.insert("v12".to_string(), v12);
    residuals.insert("v21".to_string(), v21);

    // Wandering subspace inside the pure part.
    let (w, r, degree) = if pure_dim == 0 {
        (Mat::zeros(d, 0), 0, 0)
    } else {
        let range = orth_basis(&(p.adjoint() * vn * &p), cutoff);
        let w = &p * complement_basis(&range);
        let r = w.ncols();
        if r == 0 {
            return Err(Error::NotAnIsometry(
                "pure part has no wandering subspace".into(),
            ));
        }
        if pure_dim % r != 0 {
            return Err(Error::TruncationHorizonTooSmall(format!(
                "pure part of dimension {pure_dim} is not a whole number of degree slots of size {r}"
            )));
        }
        (w, r, pure_dim / r - 1)
    };

    let mut orbit = Mat::zeros(d, pure_dim);
    let mut blk = w.clone();
    for k in 0..=degree {
        if r > 0 {
            orbit.view_mut((0, k * r), (d, r)).copy_from(&blk);
        }
        blk = vn * &blk;
    }
    let tail = op_norm(&blk);
    residuals.insert("orbit_tail".to_string(), tail);
    if r > 0 && tail > budget {
        return Err(Error::TruncationHorizonTooSmall(format!(
            "orbit of the wandering space leaves degree {degree} (tail {tail:.3e})"
        )));
    }
    let orbit_gram = op_norm(&(orbit.adjoint() * &orbit - Mat::identity(pure_dim, pure_dim)));
    residuals.insert("orbit_orthonormality".to_string(), orbit_gram);
    if orbit_gram > budget {
        return Err(Error::NotAnIsometry(format!(
            "orbit of the wandering space is not orthonormal (defect {orbit_gram:.3e})"
        )));
    }

    let mut basis = Mat::zeros(d, d);
    basis.view_mut((0, 0), (d, pure_dim)).copy_from(&orbit);
    basis.view_mut((0, pure_dim), (d, u)).copy_from(&qu);
    let uw = basis.adjoint();
    residuals.insert(
        "change_of_basis".to_string(),
        op_norm(&(&uw * uw.adjoint() - Mat::identity(d, d))),
    );
    let conj: Vec<Mat> = v.ops().iter().map(|m| &uw * m * &basis).collect();

    let unitary_ops: Vec<Mat> = conj
        .iter()
        .map(|c| c.view((pure_dim, pure_dim), (u, u)).into_owned())
        .collect();
    let un = unitary_ops.last().unwrap();
    let unitary_defect = op_norm(&(un.adjoint() * un - Mat::identity(u, u)))
        .max(op_norm(&(un * un.adjoint() - Mat::identity(u, u))));
    residuals.insert("unitary_defect".to_string(), unitary_defect);
    if unitary_defect > budget {
        return Err(Error::NotAnIsometry(format!(
            "unitary summand is not unitary (defect {unitary_defect:.3e})"
        )));
    }

    // Φᵢ(z) = Eᵢ* + zE_{n−i}: the (0,0) block is Eᵢ*, the (1,0) block is E_{n−i}.
    let pencil_coeffs: Vec<Mat> = (0..n - 1)
        .map(|i| conj[i].view((0, 0), (r, r)).adjoint())
        .collect();
    let space = TruncatedHardySpace::new(r, degree);
    let mut pencil_block: f64 = 0.0;
    let mut consistency: f64 = 0.0;
    for i in 1..n {
        let pure = conj[i - 1].view((0, 0), (pure_dim, pure_dim)).into_owned();
        let model = mphi(&space, &pencil_coeffs[i - 1].adjoint(), &pencil_coeffs[n - i - 1])?;
        pencil_block = pencil_block.max(op_norm(&(pure - model)));
        if degree >= 1 {
            let sub = conj[i - 1].view((r, 0), (r, r)).into_owned();
            consistency = consistency.max(op_norm(&(sub - &pencil_coeffs[n - i - 1])));
        }
    }
    let shift = conj[n - 1].view((0, 0), (pure_dim, pure_dim)).into_owned();
    residuals.insert("pencil_block".to_string(), pencil_block);
    residuals.insert("shift_block".to_string(), op_norm(&(shift - mz(&space))));
    residuals.insert("extraction_consistency".to_string(), consistency);
    residuals.insert(
        "commutativity_condition".to_string(),
        if r > 0 { commutativity_of(&pencil_coeffs, tol).worst } else { 0.0 },
    );

    // Identities on the interior: every coordinate except the top degree slot.
    let interior: Vec<usize> = (0..r * degree).chain(pure_dim..d).collect();
    let j = basis.select_columns(&interior);
    let mut pencil_identity: f64 = 0.0;
    for i in 1..n {
        let lhs = (v.op(i) - v.op(n - i).adjoint() * vn) * &j;
        pencil_identity = pencil_identity.max(op_norm(&lhs));
    }
    residuals.insert("pencil_identity".to_string(), pencil_identity);
    let iso = op_norm(&((vn.adjoint() * vn - Mat::identity(d, d)) * &j));
    residuals.insert("isometry_interior".to_string(), iso);
    if iso > budget {
        return Err(Error::NotAnIsometry(format!(
            "last operator is not isometric on the interior (defect {iso:.3e})"
        )));
    }

    Ok(WoldDecomposition {
        change_of_basis: uw,
        shift_multiplicity: r,
        degree,
        unitary_part: OperatorTuple::new(unitary_ops)?,
        pencil_coeffs,
        wandering_basis: w,
        unitary_basis: qu,
        residuals,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalUnitary {
    /// `(D₁,…,Dₙ)` in the coordinates of `basis`.
    #[serde(with = "crate::io::tuple")]
    pub tuple: OperatorTuple,
    /// The limit operator 𝒫.
    #[serde(rename = "p", with = "crate::io::mat")]
    pub p_op: Mat,
    /// Orthonormal basis (`d × p`) of `Ran 𝒫`.
    #[serde(with = "crate::io::mat")]
    pub basis: Mat,
    /// Nonzero eigenvalues of 𝒫, matching `basis`.
    pub values: Vec<f64>,
    pub iterations: usize,
    /// Largest violation of `A_{k+1} ⪯ A_k` over all iterations (0 when monotone).
    pub monotonicity_violation: f64,
    /// Most negative eigenvalue seen among the iterates (0 when all are psd).
    pub psd_violation: f64,
    pub residuals: BTreeMap<String, f64>,
}

impl CanonicalUnitary {
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }
}

/// Default iteration cap: `10·d/(1−‖Sₙ‖)`, raised to the geometric-decay
/// estimate `log(tol)/log(‖Sₙ‖²)` when that is larger, capped at 10⁶.
pub fn default_max_iter(dim: usize, norm: f64, tol: f64) -> usize {
    let cap = 1_000_000usize;
    if norm >= 1.0 {
        return cap;
    }
    let spec = 10.0 * dim.max(1) as f64 / (1.0 - norm);
    let decay = if norm > 0.0 {
        tol.ln() / (norm * norm).ln() + 10.0
    } else {
        2.0
    };
    (spec.max(decay).ceil() as usize).min(cap)
}

/// Builds the canonical Γₙ-unitary from the limit `𝒫² = lim Sₙᵏ Sₙ*ᵏ`.
pub fn canonical_gamma_unitary(
    t: &OperatorTuple,
    tol: f64,
    max_iter: Option<usize>,
) -> Result<CanonicalUnitary> {
    let n = t.arity();
    let d = t.dim();
    let sn = t.last();
    let max_iter = max_iter.unwrap_or_else(|| default_max_iter(d, op_norm(sn), tol));
    let mut a = Mat::identity(d, d);
    let mut monotone: f64 = 0.0;
    let mut psd: f64 = 0.0;
    let mut iterations = 0;
    let mut converged = d == 0;
    let mut last_step = 0.0;
    while !converged && iterations < max_iter {
        let next = sn * &a * sn.adjoint();
        let next = (&next + next.adjoint()).scale(0.5);
        let (dv, _) = herm_eig(&(&a - &next));
        monotone = monotone.max(-dv[0]);
        let (nv, _) = herm_eig(&next);
        psd = psd.max(-nv[0]);
        last_step = max_abs(&(&a - &next));
        a = next;
        iterations += 1;
        if monotone > 1e-9 {
            return Err(Error::IterationDivergence {
                iterations,
                last_step,
            });
        }
        converged = last_step <= tol;
    }
    if !converged {
        return Err(Error::IterationDivergence {
            iterations,
            last_step,
        });
    }
    let (vals, vecs) = herm_eig(&a);
    let cutoff = (1e3 * tol).max(1e-9);
    let keep: Vec<usize> = (0..d).rev().filter(|&k| vals[k] > cutoff).collect();
    let p = keep.len();
    let mut basis = Mat::zeros(d, p);
    let mut values = Vec::with_capacity(p);
    for (col, &k) in keep.iter().enumerate() {
        basis.set_column(col, &vecs.column(k));
        values.push(vals[k].sqrt());
    }
    let lam = |s: f64| {
        Mat::from_diagonal(&nalgebra::DVector::from_iterator(
            p,
            values.iter().map(|v| C64::new(v.powf(s), 0.0)),
        ))
    };
    let (lh, lhi) = (lam(1.0), lam(-1.0));
    let p_op = &basis * &lh * basis.adjoint();
    // Dᵢ* 𝒫h = 𝒫 Sᵢ* h, written on Ran 𝒫 as Dᵢ* = Λ Q* Sᵢ* Q Λ⁻¹.
    let mut ops = Vec::with_capacity(n);
    let mut quotient: f64 = 0.0;
    for m in t.ops() {
        let ds = &lh * basis.adjoint() * m.adjoint() * &basis * &lhi;
        let lhs = &lh * basis.adjoint() * m.adjoint();
        let rhs = &ds * &lh * basis.adjoint();
        quotient = quotient.max(op_norm(&(lhs - rhs)));
        ops.push(ds.adjoint());
    }
    if quotient > 1e-6 {
        return Err(Error::IllDefinedQuotient(quotient));
    }
    let tuple = OperatorTuple::new(ops)?;
    let mut residuals = BTreeMap::new();
    residuals.insert("quotient".to_string(), quotient);
    residuals.insert("last_step".to_string(), last_step);
    residuals.extend(gamma_unitary_residuals(&tuple));
    Ok(CanonicalUnitary {
        tuple,
        p_op,
        basis,
        values,
        iterations,
        monotonicity_violation: monotone,
        psd_violation: psd,
        residuals,
    })
}

/// Structural Γₙ-unitary identities: `Sₙ` unitary, `Sᵢ = S*_{n−i}Sₙ`, normality, commutation.
pub fn gamma_unitary_residuals(t: &OperatorTuple) -> BTreeMap<String, f64> {
    let n = t.arity();
    let d = t.dim();
    let sn = t.last();
    let id = Mat::identity(d, d);
    let mut m = BTreeMap::new();
    m.insert(
        "unitary".to_string(),
        op_norm(&(sn.adjoint() * sn - &id)).max(op_norm(&(sn * sn.adjoint() - &id))),
    );
    let mut pencil: f64 = 0.0;
    let mut normal: f64 = 0.0;
    for i in 1..n {
        pencil = pencil.max(op_norm(&(t.op(i) - t.op(n - i).adjoint() * sn)));
    }
    for s in t.ops() {
        normal = normal.max(op_norm(&(s * s.adjoint() - s.adjoint() * s)));
    }
    m.insert("pencil_identity".to_string(), pencil);
    m.insert("normality".to_string(), normal);
    m.insert("commutation".to_string(), t.commutation_residual());
    m
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeReport {
    pub eta: C64,
    pub normality: f64,
    pub pencil_identity: f64,
    pub commutation: f64,
    /// Largest `| |t| − 1 |` over the roots attached to the node tuple's joint spectrum.
    pub boundary_deviation: f64,
    pub scaled_certified: bool,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub nodes: Vec<NodeReport>,
    pub worst_node: usize,
    pub worst_eta: C64,
    pub worst_residual: f64,
    /// Structural Γₙ-unitary residual of the unitary summand, when present.
    pub unitary_part_residual: f64,
    pub passed: bool,
}

/// At each node η checks that `(Φ₁(η),…,Φ_{n−1}(η), η)` is a Γₙ-unitary on ℰ.
pub fn check_unitary_extension(
    pencil: &[Mat],
    unitary: Option<&OperatorTuple>,
    grid: usize,
    params: &CertParams,
) -> Result<ExtensionReport> {
    let n = pencil.len() + 1;
    if n < 2 {
        return Err(Error::ArityTooSmall(n));
    }
    let r = pencil[0].nrows();
    let tol = params.tol;
    let e = |i: usize| &pencil[i - 1];
    let nodes: Vec<NodeReport> = grid_nodes(grid)
        .into_par_iter()
        .enumerate()
        .map(|(k, eta)| -> Result<NodeReport> {
            let phi: Vec<Mat> = (1..n)
                .map(|i| e(i).adjoint() + e(n - i).map(|z| z * eta))
                .collect();
            let mut ops = phi.clone();
            ops.push(Mat::identity(r, r).map(|z| z * eta));
            let tuple = OperatorTuple::new(ops)?;
            let normality = phi
                .iter()
                .map(|m| op_norm(&(m * m.adjoint() - m.adjoint() * m)))
                .fold(0.0, f64::max);
            let pencil_identity = (1..n)
                .map(|i| op_norm(&(&phi[i - 1] - phi[n - i - 1].adjoint().map(|z| z * eta))))
                .fold(0.0, f64::max);
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ k as u64);
            let mut boundary_deviation: f64 = 0.0;
            match joint_spectrum(&tuple, tol.max(1e-7), &mut rng) {
                Ok(points) => {
                    for pt in points {
                        for t in roots(&pt)? {
                            boundary_deviation = boundary_deviation.max((t.norm() - 1.0).abs());
                        }
                    }
                }
                Err(Error::TriangularizationFailed(_)) | Err(Error::NonCommuting { .. }) => {
                    boundary_deviation = f64::INFINITY;
                }
                Err(err) => return Err(err),
            }
            let scaled_certified = scaled_pencil_certifies(&phi, n, params)?;
            let residual = normality
                .max(pencil_identity)
                .max(tuple.commutation_residual())
                .max(boundary_deviation);
            Ok(NodeReport {
                eta,
                normality,
                pencil_identity,
                commutation: tuple.commutation_residual(),
                boundary_deviation,
                scaled_certified,
                residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (worst_node, worst_residual) = nodes
        .iter()
        .enumerate()
        .map(|(k, nr)| (k, nr.residual))
        .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    let unitary_part_residual = unitary
        .map(|u| {
            if u.dim() == 0 {
                0.0
            } else {
                gamma_unitary_residuals(u).values().cloned().fold(0.0, f64::max)
            }
        })
        .unwrap_or(0.0);
    let passed = worst_residual <= tol
        && unitary_part_residual <= tol
        && nodes.iter().all(|nr| nr.scaled_certified);
    Ok(ExtensionReport {
        worst_eta: nodes.get(worst_node).map_or(C64::new(0.0, 0.0), |nr| nr.eta),
        nodes,
        worst_node,
        worst_residual,
        unitary_part_residual,
        passed,
    })
}

fn scaled_pencil_certifies(phi: &[Mat], n: usize, params: &CertParams) -> Result<bool> {
    let scaled: Vec<Mat> = (1..n)
        .map(|i| phi[i - 1].map(|z| z * ((n - i) as f64 / n as f64)))
        .collect();
    if n == 2 {
        return Ok(op_norm(&scaled[0]) <= 1.0 + params.tol);
    }
    let t = OperatorTuple::new(scaled)?;
    let mut sub = params.clone();
    sub.degree = params.degree.min(2 * (n - 1)).max(1);
    match certify_contraction(&t, &sub) {
        Ok(c) => Ok(c.label == ClassLabel::Contraction),
        Err(Error::SpectrumOutsideDomain { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;
    use crate::fundops::pencil_from_ops;
    use crate::gammaclass::direct_sum;

    fn small(n: usize) -> CertParams {
        let mut p = CertParams::for_arity(n);
        p.trials = 30;
        p.density = 16;
        p.random_points = 4000;
        p
    }

    #[test]
    fn shift_and_symbol_examples() {
        assert_eq!(mz(&TruncatedHardySpace::new(2, 0)), Mat::zeros(2, 2));
        let sp = TruncatedHardySpace::new(2, 3);
        let id = mphi(&sp, &Mat::identity(2, 2), &Mat::zeros(2, 2)).unwrap();
        assert_eq!(id, Mat::identity(8, 8));
        let sp1 = TruncatedHardySpace::new(1, 2);
        let (a, b) = (c(0.5, 0.1), c(-0.2, 0.3));
        let m = mphi(&sp1, &Mat::from_element(1, 1, a), &Mat::from_element(1, 1, b)).unwrap();
        let z = c(0.0, 0.0);
        assert_eq!(m, Mat::from_row_slice(3, 3, &[a, z, z, b, a, z, z, b, a]));
        assert!(mphi(&sp1, &Mat::zeros(2, 2), &Mat::zeros(1, 1)).is_err());
    }

    #[test]
    fn symbol_products_match_polynomial_product() {
        let sp = TruncatedHardySpace::new(1, 5);
        let (a, b, cc, d) = (c(0.3, 0.1), c(0.2, -0.4), c(-0.5, 0.0), c(0.1, 0.7));
        let m1 = mphi(&sp, &Mat::from_element(1, 1, a), &Mat::from_element(1, 1, b)).unwrap();
        let m2 = mphi(&sp, &Mat::from_element(1, 1, cc), &Mat::from_element(1, 1, d)).unwrap();
        let prod = &m1 * &m2;
        // (a + bz)(c + dz) = ac + (ad + bc) z + bd z²
        let coeffs = [a * cc, a * d + b * cc, b * d];
        for col in 0..6 {
            for row in 0..6 {
                let k = row as isize - col as isize;
                let expect = if (0..3).contains(&k) { coeffs[k as usize] } else { c(0.0, 0.0) };
                assert!((prod[(row, col)] - expect).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn wold_of_unitary_tuple() {
        let w = C64::from_polar(1.0, 0.7);
        let s = crate::symdomain::symmetrize(&[w, c(1.0, 0.0)]);
        let t = OperatorTuple::new(s.iter().map(|z| Mat::from_element(1, 1, *z)).collect()).unwrap();
        let wd = wold(&t, 1e-10).unwrap();
        assert_eq!(wd.shift_multiplicity, 0);
        assert_eq!(wd.unitary_part.dim(), 1);
        assert!((wd.unitary_part.op(1)[(0, 0)] - s[0]).norm() < 1e-12);
    }

    #[test]
    fn wold_of_pencil_and_unitary() {
        let e = vec![Mat::from_element(1, 1, c(0.4, 0.2))];
        let pencil = pencil_from_ops(&e, &TruncatedHardySpace::new(1, 6), 1e-12).unwrap();
        let w = C64::from_polar(1.0, 2.0);
        let s = crate::symdomain::symmetrize(&[w, w.conj()]);
        let unit = OperatorTuple::new(s.iter().map(|z| Mat::from_element(1, 1, *z)).collect()).unwrap();
        let v = direct_sum(&pencil, &unit).unwrap();
        let wd = wold(&v, 1e-10).unwrap();
        assert_eq!(wd.shift_multiplicity, 1);
        assert_eq!(wd.degree, 6);
        assert!(wd.max_residual() < 1e-10, "{:?}", wd.residuals);
        let true_basis = Mat::from_fn(8, 1, |i, _| if i == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let rec = wd.pencil_coeffs_in(&true_basis);
        assert!((rec[0][(0, 0)] - e[0][(0, 0)]).norm() < 1e-10);
    }

    #[test]
    fn canonical_examples() {
        let w = C64::from_polar(1.0, 0.3);
        let s = crate::symdomain::symmetrize(&[w, c(-1.0, 0.0)]);
        let t = OperatorTuple::new(s.iter().map(|z| Mat::from_element(1, 1, *z)).collect()).unwrap();
        let cu = canonical_gamma_unitary(&t, 1e-12, None).unwrap();
        assert_eq!(cu.rank(), 1);
        for i in 1..=2 {
            assert!((cu.tuple.op(i)[(0, 0)] - s[i - 1]).norm() < 1e-10);
        }
        let strict = OperatorTuple::new(vec![
            Mat::from_element(1, 1, c(0.5, 0.0)),
            Mat::from_element(1, 1, c(0.9, 0.0)),
        ])
        .unwrap();
        let cs = canonical_gamma_unitary(&strict, 1e-12, None).unwrap();
        assert_eq!(cs.rank(), 0);
        assert_eq!(cs.monotonicity_violation, 0.0);

        // Mixed: S₂ = diag(u, 0.5), S₁ = diag(s₁ of the unimodular part, 0.3).
        let mixed = OperatorTuple::new(vec![
            Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![s[0], c(0.3, 0.0)])),
            Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![s[1], c(0.5, 0.0)])),
        ])
        .unwrap();
        let cm = canonical_gamma_unitary(&mixed, 1e-12, None).unwrap();
        assert_eq!(cm.rank(), 1);
        let proj = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]));
        assert!(max_abs(&(&cm.p_op - proj)) < 1e-10);
    }

    #[test]
    fn extension_examples() {
        let zero = vec![Mat::zeros(1, 1)];
        let rep = check_unitary_extension(&zero, None, 16, &small(2)).unwrap();
        assert!(rep.passed, "{rep:?}");
        let one = vec![Mat::identity(1, 1)];
        let rep = check_unitary_extension(&one, None, 16, &small(2)).unwrap();
        assert!(rep.passed, "{rep:?}");
        let two = vec![Mat::from_element(1, 1, c(2.0, 0.0))];
        let rep = check_unitary_extension(&two, None, 16, &small(2)).unwrap();
        assert!(!rep.passed);
        assert_eq!(rep.worst_node, 0);
        assert!((rep.worst_eta - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn grid_adequacy() {
        assert!(check_grid(64, 16).is_ok());
        assert!(matches!(check_grid(32, 16), Err(Error::GridInadequate { need: 33, .. })));
    }
}
