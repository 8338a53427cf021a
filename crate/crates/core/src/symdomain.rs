//! Geometry of the symmetrized polydisc Γₙ.

use nalgebra::linalg::Schur;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::{Error, Mat, Result, C64};

/// A point of ℂⁿ. Serializes as an array of `[re, im]` pairs.
pub type Point = Vec<C64>;

/// Largest number of points a single [`sample_boundary`] call may produce.
pub const SAMPLE_BUDGET: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// The closed symmetrized polydisc.
    #[serde(rename = "Gamma_n")]
    Gamma,
    /// Its interior.
    #[serde(rename = "G_n")]
    Open,
    /// The distinguished boundary `s(𝕋ⁿ)`.
    #[serde(rename = "bGamma_n")]
    DistinguishedBoundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    Grid,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleSource {
    TorusGrid,
    TorusRandom,
    PolydiscRandom,
}

/// Symmetrized images of sample points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSample {
    pub points: Vec<Point>,
    pub source: SampleSource,
    pub density: usize,
}

/// Elementary symmetric polynomials `(s₁,…,sₙ)` of the inputs.
pub fn symmetrize(z: &[C64]) -> Point {
    let n = z.len();
    let mut e = vec![C64::new(0.0, 0.0); n + 1];
    e[0] = C64::new(1.0, 0.0);
    for (k, zk) in z.iter().enumerate() {
        for j in (1..=k + 1).rev() {
            let prev = e[j - 1];
            e[j] += zk * prev;
        }
    }
    e.split_off(1)
}

/// Symmetrization of torus angles, `s(e^{iθ₁},…,e^{iθₙ})`.
pub fn symmetrize_angles(theta: &[f64]) -> Point {
    let z: Vec<C64> = theta.iter().map(|&t| C64::from_polar(1.0, t)).collect();
    symmetrize(&z)
}

/// Roots of `tⁿ − s₁tⁿ⁻¹ + s₂tⁿ⁻² − … + (−1)ⁿsₙ` via companion-matrix eigenvalues.
///
/// Roots that land within `1e-4` of each other are treated as one cluster and
/// replaced by the cluster mean, which is far better conditioned than the
/// individual members of a split multiple root.
pub fn roots(s: &[C64]) -> Result<Vec<C64>> {
    if s.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = s.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![s[0]]);
    }
    let mut comp = Mat::zeros(n, n);
    for k in 0..n {
        // Coefficient of t^{n-1-k} is (−1)^{k+1} s_{k+1}; first row holds its negative.
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        comp[(0, k)] = s[k] * sign;
    }
    for k in 1..n {
        comp[(k, k - 1)] = C64::new(1.0, 0.0);
    }
    let raw: Vec<C64> = match Schur::try_new(comp, f64::EPSILON, 0) {
        Some(schur) => {
            let (_, t) = schur.unpack();
            (0..n).map(|k| t[(k, k)]).collect()
        }
        None => return Err(Error::TriangularizationFailed(1)),
    };
    Ok(merge_clusters(raw))
}

fn merge_clusters(raw: Vec<C64>) -> Vec<C64> {
    let n = raw.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(l: &mut [usize], k: usize) -> usize {
        let mut r = k;
        while l[r] != r {
            r = l[r];
        }
        l[k] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let scale = raw[i].norm().max(raw[j].norm()).max(1.0);
            if (raw[i] - raw[j]).norm() <= 1e-4 * scale {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                label[a.max(b)] = a.min(b);
            }
        }
    }
    let mut out = raw.clone();
    for i in 0..n {
        let root = find(&mut label, i);
        let members: Vec<usize> = (0..n).filter(|&j| find(&mut label, j) == root).collect();
        if members.len() > 1 {
            let sum: C64 = members.iter().map(|&j| raw[j]).sum();
            out[i] = sum / members.len() as f64;
        }
    }
    out
}

/// Root-criterion membership test for `s` in the requested region.
pub fn membership(s: &[C64], region: Region, tol: f64) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    let r = roots(s)?;
    Ok(match region {
        Region::Gamma => r.iter().all(|t| t.norm() <= 1.0 + tol),
        Region::Open => r.iter().all(|t| t.norm() < 1.0 - tol),
        Region::DistinguishedBoundary => r.iter().all(|t| (t.norm() - 1.0).abs() <= tol),
    })
}

/// Largest modulus among the roots of the polynomial attached to `s`.
pub fn max_root_modulus(s: &[C64]) -> Result<f64> {
    Ok(roots(s)?.iter().map(|t| t.norm()).fold(0.0, f64::max))
}

/// Symmetrized torus samples: the full `densityⁿ` grid or `density` uniform random points.
pub fn sample_boundary<R: Rng + ?Sized>(
    n: usize,
    density: usize,
    mode: SampleMode,
    rng: &mut R,
) -> Result<DomainSample> {
    if n < 2 {
        return Err(Error::ArityTooSmall(n));
    }
    if density < 1 {
        return Err(Error::InvalidParameter("density must be at least 1".into()));
    }
    match mode {
        SampleMode::Grid => {
            let requested = (density as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
            if requested > SAMPLE_BUDGET as u128 {
                return Err(Error::SampleBudgetExceeded {
                    requested,
                    budget: SAMPLE_BUDGET,
                });
            }
            let mut points = Vec::with_capacity(requested as usize);
            let mut idx = vec![0usize; n];
            loop {
                let theta: Vec<f64> = idx
                    .iter()
                    .map(|&k| TAU * k as f64 / density as f64)
                    .collect();
                points.push(symmetrize_angles(&theta));
                if !advance(&mut idx, density) {
                    break;
                }
            }
            Ok(DomainSample {
                points,
                source: SampleSource::TorusGrid,
                density,
            })
        }
        SampleMode::Random => {
            if density > SAMPLE_BUDGET {
                return Err(Error::SampleBudgetExceeded {
                    requested: density as u128,
                    budget: SAMPLE_BUDGET,
                });
            }
            let points = (0..density)
                .map(|_| {
                    let theta: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * TAU).collect();
                    symmetrize_angles(&theta)
                })
                .collect();
            Ok(DomainSample {
                points,
                source: SampleSource::TorusRandom,
                density,
            })
        }
    }
}

/// `count` symmetrized points drawn uniformly (by area) from the closed polydisc.
pub fn sample_polydisc<R: Rng + ?Sized>(n: usize, count: usize, rng: &mut R) -> DomainSample {
    let points = (0..count)
        .map(|_| symmetrize(&random_disc_point(n, 1.0, rng)))
        .collect();
    DomainSample {
        points,
        source: SampleSource::PolydiscRandom,
        density: count,
    }
}

/// `n` independent points uniform in the disc of the given radius.
pub fn random_disc_point<R: Rng + ?Sized>(n: usize, radius: f64, rng: &mut R) -> Vec<C64> {
    (0..n)
        .map(|_| {
            let r = radius * rng.random::<f64>().sqrt();
            C64::from_polar(r, rng.random::<f64>() * TAU)
        })
        .collect()
}

fn advance(idx: &mut [usize], base: usize) -> bool {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < base {
            return true;
        }
        idx[k] = 0;
    }
    false
}

/// Non-decreasing index tuples `0 ≤ i₁ ≤ … ≤ iₙ < density`: one representative
/// per permutation class of the torus grid.
pub(crate) fn grid_multisets(n: usize, density: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        out.push(idx.clone());
        let mut k = n;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if idx[k] + 1 < density {
                idx[k] += 1;
                let v = idx[k];
                for j in k + 1..n {
                    idx[j] = v;
                }
                break;
            }
        }
    }
}

/// Number of multisets of size `n` from `density` symbols.
pub(crate) fn multiset_count(n: usize, density: usize) -> u128 {
    let mut c: u128 = 1;
    for k in 0..n as u128 {
        c = c * (density as u128 + k) / (k + 1);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &[C64], b: &[C64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn symmetrize_examples() {
        assert!(close(&symmetrize(&[c(0.0, 0.0); 3]), &[c(0.0, 0.0); 3], 0.0));
        assert!(close(
            &symmetrize(&[c(1.0, 0.0), c(1.0, 0.0)]),
            &[c(2.0, 0.0), c(1.0, 0.0)],
            0.0
        ));
        // (t−0.5)(t−0.5i)(t+0.5) = t³ − 0.5i t² − 0.25 t + 0.125i
        let s = symmetrize(&[c(0.5, 0.0), c(0.0, 0.5), c(-0.5, 0.0)]);
        assert!(close(&s, &[c(0.0, 0.5), c(-0.25, 0.0), c(0.0, -0.125)], 1e-15));
    }

    #[test]
    fn membership_examples() {
        assert!(membership(&[c(0.0, 0.0); 4], Region::Gamma, 1e-8).unwrap());
        assert!(membership(&[c(2.0, 0.0), c(1.0, 0.0)], Region::DistinguishedBoundary, 1e-8).unwrap());
        let z: Vec<C64> = (0..3)
            .map(|k| C64::from_polar(0.9, std::f64::consts::PI * k as f64 / 3.0))
            .collect();
        assert!(membership(&symmetrize(&z), Region::Open, 1e-8).unwrap());
        assert!(!membership(&[c(3.0, 0.0), c(1.0, 0.0)], Region::Gamma, 1e-8).unwrap());
        assert_eq!(
            membership(&[c(f64::INFINITY, 0.0), c(0.0, 0.0)], Region::Gamma, 1e-8),
            Err(Error::NonFinite)
        );
    }

    #[test]
    fn triple_root_on_circle() {
        let w = C64::from_polar(1.0, 0.4);
        let s = symmetrize(&[w, w, w]);
        assert!(membership(&s, Region::DistinguishedBoundary, 1e-8).unwrap());
    }

    #[test]
    fn sampling_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let one = sample_boundary(2, 1, SampleMode::Grid, &mut rng).unwrap();
        assert_eq!(one.points.len(), 1);
        assert!(close(&one.points[0], &[c(2.0, 0.0), c(1.0, 0.0)], 1e-15));
        let grid = sample_boundary(2, 4, SampleMode::Grid, &mut rng).unwrap();
        assert_eq!(grid.points.len(), 16);
        assert!(grid
            .points
            .iter()
            .all(|p| membership(p, Region::DistinguishedBoundary, 1e-8).unwrap()));
        let rnd = sample_boundary(3, 100, SampleMode::Random, &mut rng).unwrap();
        assert_eq!(rnd.points.len(), 100);
        assert_eq!(rnd.source, SampleSource::TorusRandom);
        assert!(rnd
            .points
            .iter()
            .all(|p| membership(p, Region::DistinguishedBoundary, 1e-8).unwrap()));
        assert!(matches!(
            sample_boundary(8, 1000, SampleMode::Grid, &mut rng),
            Err(Error::SampleBudgetExceeded { .. })
        ));
    }

    #[test]
    fn multisets_are_counted() {
        let m = grid_multisets(3, 5);
        assert_eq!(m.len() as u128, multiset_count(3, 5));
        assert!(m.iter().all(|v| v.windows(2).all(|w| w[0] <= w[1])));
    }
}
