//! Constructions of test tuples with known Γₙ-class.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::fundops::pencil_from_ops;
use crate::gammaclass::direct_sum;
use crate::hardy::TruncatedHardySpace;
use crate::opcore::{herm_eig, numerical_radius_refined, OperatorTuple};
use crate::symdomain::{random_disc_point, symmetrize};
use crate::{Error, Mat, Result, C64};

/// `(s₁(z),…,sₙ(z))` as 1×1 matrices.
pub fn scalar(z: &[C64]) -> Result<OperatorTuple> {
    if z.len() < 2 {
        return Err(Error::ArityTooSmall(z.len()));
    }
    OperatorTuple::new(symmetrize(z).into_iter().map(|s| Mat::from_element(1, 1, s)).collect())
}

/// Diagonal tuple whose k-th diagonal entry is `𝐬(points[k])`.
pub fn diagonal(points: &[Vec<C64>]) -> Result<OperatorTuple> {
    let n = points.first().map_or(0, |p| p.len());
    if n < 2 {
        return Err(Error::ArityTooSmall(n));
    }
    if points.iter().any(|p| p.len() != n) {
        return Err(Error::DimensionMismatch("points of different arity".into()));
    }
    let d = points.len();
    let sym: Vec<Vec<C64>> = points.iter().map(|p| symmetrize(p)).collect();
    OperatorTuple::new(
        (0..n)
            .map(|i| Mat::from_fn(d, d, |a, b| if a == b { sym[a][i] } else { C64::new(0.0, 0.0) }))
            .collect(),
    )
}

/// Diagonal tuple from `d` random points of the polydisc of the given radius.
pub fn random_diagonal<R: Rng + ?Sized>(n: usize, d: usize, radius: f64, rng: &mut R) -> Result<OperatorTuple> {
    let pts: Vec<Vec<C64>> = (0..d).map(|_| random_disc_point(n, radius, rng)).collect();
    diagonal(&pts)
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Mat {
    Mat::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-distributed unitary (QR of a Ginibre matrix with the phases of `R` removed).
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Mat {
    if d == 0 {
        return Mat::zeros(0, 0);
    }
    let qr = ginibre(d, d, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..d {
        let diag = r[(k, k)];
        let phase = if diag.norm() > 0.0 { diag / diag.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, k)] *= phase;
        }
    }
    q
}

fn random_angles<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<f64> {
    (0..count).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect()
}

fn conj_diag(w: &Mat, diag: &[C64]) -> Mat {
    let d = diag.len();
    let dm = Mat::from_fn(d, d, |a, b| if a == b { diag[a] } else { C64::new(0.0, 0.0) });
    w * dm * w.adjoint()
}

/// Γₙ-unitary `W diag(𝐬(e^{iθ_k})) W*` with random angles and Haar `W`.
pub fn gamma_unitary<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<OperatorTuple> {
    if n < 2 {
        return Err(Error::ArityTooSmall(n));
    }
    let w = random_unitary(d, rng);
    let pts: Vec<Vec<C64>> = (0..d)
        .map(|_| symmetrize(&random_angles(n, rng).into_iter().map(|a| C64::from_polar(1.0, a)).collect::<Vec<_>>()))
        .collect();
    OperatorTuple::new(
        (0..n)
            .map(|i| conj_diag(&w, &pts.iter().map(|p| p[i]).collect::<Vec<_>>()))
            .collect(),
    )
}

/// Pencil coefficients `Eᵢ = W e_i(ū) W*` for diagonal unitaries `u₁,…,u_{n−1}`.
///
/// Every node tuple `(Φ₁(η),…,Φ_{n−1}(η), η)` equals `𝐬(u, η)` up to the conjugation,
/// so these pencils extend to Γₙ-unitaries and the pencil tuple is a Γₙ-isometry.
pub fn torus_pencil<R: Rng + ?Sized>(n: usize, r: usize, rng: &mut R) -> Result<Vec<Mat>> {
    if n < 2 {
        return Err(Error::ArityTooSmall(n));
    }
    let w = random_unitary(r, rng);
    let mut per_slot: Vec<Vec<C64>> = vec![Vec::with_capacity(r); n - 1];
    for _ in 0..r {
        let u: Vec<C64> = random_angles(n - 1, rng)
            .into_iter()
            .map(|a| C64::from_polar(1.0, -a))
            .collect();
        let e = symmetrize(&u);
        for i in 1..n {
            per_slot[i - 1].push(e[i - 1]);
        }
    }
    Ok(per_slot.iter().map(|diag| conj_diag(&w, diag)).collect())
}

/// Non-normal `E` with `ω(E) = scale ≤ 1`, so `(M_{E*+zE}, M_z)` is a Γ₂-isometry.
pub fn radius_pencil<R: Rng + ?Sized>(r: usize, scale: f64, rng: &mut R) -> Result<Vec<Mat>> {
    if !(0.0..=1.0).contains(&scale) {
        return Err(Error::InvalidParameter(format!("scale {scale} outside [0, 1]")));
    }
    let a = ginibre(r, r, rng);
    // The refined grid value is a lower bound; the extra factor keeps ω(E) ≤ scale.
    let w = numerical_radius_refined(&a, 720) * (1.0 + 1e-9);
    if w == 0.0 {
        return Ok(vec![Mat::zeros(r, r)]);
    }
    Ok(vec![a.map(|z| z * (scale / w))])
}

/// `(M_{Φ₁},…,M_z)` on the Hardy space truncated at `degree`, optionally ⊕ a Γₙ-unitary.
pub fn pencil_isometry(
    e: &[Mat],
    degree: usize,
    unitary: Option<&OperatorTuple>,
    tol: f64,
) -> Result<OperatorTuple> {
    let r = e.first().map_or(0, |m| m.nrows());
    let pencil = pencil_from_ops(e, &TruncatedHardySpace::new(r, degree), tol)?;
    match unitary {
        Some(u) => direct_sum(&pencil, u),
        None => Ok(pencil),
    }
}

/// Compression of the pencil Γₙ-isometry to `span{k_λ ⊗ x : λ ∈ nodes, x ∈ ℰ}`.
///
/// The span of Szegő kernels is co-invariant, so `T* = V*|` is exact: with
/// Gram matrix `G` of the kernels, `Sᵢ* = G^{1/2} Aᵢ G^{−1/2}` where `Aᵢ` acts by
/// `Φᵢ(λ)*` on each kernel. The result is a Γₙ-contraction whenever the pencil is a
/// Γₙ-isometry on the full Hardy space.
pub fn coinvariant_compression(e: &[Mat], nodes: &[C64]) -> Result<OperatorTuple> {
    let n = e.len() + 1;
    if n < 2 {
        return Err(Error::ArityTooSmall(n));
    }
    let r = e[0].nrows();
    if nodes.iter().any(|l| !(l.norm() < 1.0)) {
        return Err(Error::InvalidParameter("kernel nodes must lie in the open disc".into()));
    }
    let m = nodes.len();
    let dim = m * r;
    let gram = Mat::from_fn(dim, dim, |p, q| {
        let (j, a) = (p / r, p % r);
        let (k, b) = (q / r, q % r);
        if a == b {
            C64::new(1.0, 0.0) / (C64::new(1.0, 0.0) - nodes[j] * nodes[k].conj())
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let (vals, vecs) = herm_eig(&gram);
    if vals.first().map_or(false, |v| *v <= 1e-10 * vals[dim - 1]) {
        return Err(Error::IllConditionedGram);
    }
    let pow = |s: f64| {
        let d = Mat::from_fn(dim, dim, |a, b| {
            if a == b { C64::new(vals[a].powf(s), 0.0) } else { C64::new(0.0, 0.0) }
        });
        &vecs * d * vecs.adjoint()
    };
    let (gh, ghi) = (pow(0.5), pow(-0.5));
    let mut ops = Vec::with_capacity(n);
    for i in 1..=n {
        let mut a = Mat::zeros(dim, dim);
        for (j, lam) in nodes.iter().enumerate() {
            let blk = if i == n {
                Mat::identity(r, r).map(|z| z * lam.conj())
            } else {
                (e[i - 1].adjoint() + e[n - i - 1].map(|z| z * lam)).adjoint()
            };
            a.view_mut((j * r, j * r), (r, r)).copy_from(&blk);
        }
        ops.push((&gh * a * &ghi).adjoint());
    }
    OperatorTuple::new(ops)
}

/// `count` nodes drawn from the disc of the given radius, pairwise separated by at least `gap`.
pub fn separated_nodes<R: Rng + ?Sized>(count: usize, radius: f64, gap: f64, rng: &mut R) -> Vec<C64> {
    let mut out: Vec<C64> = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < 10_000 {
        attempts += 1;
        let p = random_disc_point(1, radius, rng)[0];
        if out.iter().all(|q| (p - q).norm() >= gap) {
            out.push(p);
        }
    }
    out
}

/// Commuting tuple `Sᵢ = pᵢ(A)` for one random `A` with spectral radius `radius`; no class guarantee.
pub fn random_commuting<R: Rng + ?Sized>(n: usize, d: usize, radius: f64, rng: &mut R) -> Result<OperatorTuple> {
    if n < 2 {
        return Err(Error::ArityTooSmall(n));
    }
    let a = ginibre(d, d, rng);
    let rho = if d == 0 {
        1.0
    } else {
        a.clone().schur().unpack().1.diagonal().iter().map(|z| z.norm()).fold(0.0, f64::max)
    };
    let a = a.map(|z| z * (radius / rho.max(1e-300)));
    let mut ops = Vec::with_capacity(n);
    for _ in 0..n {
        let deg = rng.random_range(1..=3usize);
        let coeffs = ginibre(1, deg + 1, rng);
        let mut acc = Mat::zeros(d, d);
        for k in (0..=deg).rev() {
            acc = &acc * &a + Mat::identity(d, d).map(|z| z * coeffs[(0, k)] * 0.5);
        }
        ops.push(acc);
    }
    OperatorTuple::new(ops)
}

/// Smallest pairwise distance between points of `C^n`.
pub fn min_separation(points: &[Vec<C64>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let dist = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            best = best.min(dist);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;
    use crate::fundops::commutativity_of;
    use crate::gammaclass::{certify_contraction, CertParams, ClassLabel};
    use crate::opcore::op_norm;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn scalar_example() {
        let t = scalar(&[c(0.5, 0.0), c(0.5, 0.0)]).unwrap();
        assert_eq!(t.op(1)[(0, 0)], c(1.0, 0.0));
        assert_eq!(t.op(2)[(0, 0)], c(0.25, 0.0));
    }

    #[test]
    fn unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_unitary(5, &mut rng);
        assert!(op_norm(&(u.adjoint() * &u - Mat::identity(5, 5))) < 1e-13);
    }

    #[test]
    fn torus_pencils_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 2..=4 {
            let e = torus_pencil(n, 3, &mut rng).unwrap();
            assert!(commutativity_of(&e, 1e-12).passed);
        }
    }

    #[test]
    fn compression_of_scalar_pencil_is_mobius_point() {
        // r = 1, one node: T* = Φ(λ)*, so T = (Φ₁(λ), λ).
        let e = vec![Mat::from_element(1, 1, c(0.3, 0.2))];
        let lam = c(0.4, -0.1);
        let t = coinvariant_compression(&e, &[lam]).unwrap();
        let phi = e[0][(0, 0)].conj() + lam * e[0][(0, 0)];
        assert!((t.op(1)[(0, 0)] - phi).norm() < 1e-14);
        assert!((t.op(2)[(0, 0)] - lam).norm() < 1e-14);
    }

    #[test]
    fn compressions_certify() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut params = CertParams::for_arity(2);
        params.trials = 30;
        for _ in 0..3 {
            let e = radius_pencil(2, 0.9, &mut rng).unwrap();
            let nodes = separated_nodes(2, 0.6, 0.2, &mut rng);
            let t = coinvariant_compression(&e, &nodes).unwrap();
            assert!(t.commutation_residual() < 1e-12);
            let cert = certify_contraction(&t, &params).unwrap();
            assert_eq!(cert.label, ClassLabel::Contraction);
        }
    }
}
