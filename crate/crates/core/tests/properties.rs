use proptest::prelude::*;

use gamma_models::fundops::{solve_fundamental, Which};
use gamma_models::hardy::{mphi, mz, TruncatedHardySpace};
use gamma_models::io::{self, TupleDocument};
use gamma_models::models::{characteristic_function, schaffer_model, verify_model, DilateOptions};
use gamma_models::opcore::{defect, max_abs, op_norm, Side};
use gamma_models::recipes::scalar;
use gamma_models::symdomain::{membership, roots, symmetrize, Region};
use gamma_models::{Mat, OperatorTuple, C64};

fn disc(radius: f64) -> impl Strategy<Value = C64> {
    (0.0..radius, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| C64::from_polar(r, t))
}

fn cplx() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| C64::new(a, b))
}

fn mat(d: usize) -> impl Strategy<Value = Mat> {
    proptest::collection::vec(cplx(), d * d).prop_map(move |v| Mat::from_row_slice(d, d, &v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symmetrize_then_roots_recovers_points(z in proptest::collection::vec(disc(0.95), 2..=4)) {
        let mut sep = f64::INFINITY;
        for i in 0..z.len() {
            for j in i + 1..z.len() {
                sep = sep.min((z[i] - z[j]).norm());
            }
        }
        prop_assume!(sep > 1e-2);
        let s = symmetrize(&z);
        let r = roots(&s).unwrap();
        for p in &z {
            let best = r.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(best < 1e-8, "{p} missing from {r:?}");
        }
        prop_assert!(membership(&s, Region::Gamma, 1e-8).unwrap());
    }

    #[test]
    fn torus_points_are_distinguished_boundary(theta in proptest::collection::vec(0.0..std::f64::consts::TAU, 2..=4)) {
        let z: Vec<C64> = theta.iter().map(|t| C64::from_polar(1.0, *t)).collect();
        prop_assert!(membership(&symmetrize(&z), Region::DistinguishedBoundary, 1e-8).unwrap());
    }

    #[test]
    fn symbol_products_are_toeplitz(a in mat(2), b in mat(2), c in mat(2), d in mat(2)) {
        let sp = TruncatedHardySpace::new(2, 4);
        let lhs = mphi(&sp, &a, &b).unwrap() * mphi(&sp, &c, &d).unwrap();
        // (A + Bz)(C + Dz) = AC + (AD + BC)z + BDz², read off slot by slot.
        let coeffs = [&a * &c, &a * &d + &b * &c, &b * &d];
        for col in 0..=sp.degree {
            for row in 0..=sp.degree {
                let blk = lhs.view((2 * row, 2 * col), (2, 2)).into_owned();
                let k = row as isize - col as isize;
                let expect = if (0..3).contains(&k) { coeffs[k as usize].clone() } else { Mat::zeros(2, 2) };
                prop_assert!(max_abs(&(blk - expect)) < 1e-12);
            }
        }
        let shift = mz(&sp);
        let with_z = mphi(&sp, &Mat::zeros(2, 2), &Mat::identity(2, 2)).unwrap();
        prop_assert_eq!(shift, with_z);
    }

    #[test]
    fn defect_squares_to_identity_gap(a in mat(3), scale in 0.1..0.99f64) {
        let a = a.map(|z| z * (scale / op_norm(&a).max(1e-12)));
        let dd = defect(&a, Side::Right, 1e-12).unwrap();
        let gap = &dd.d * &dd.d + a.adjoint() * &a - Mat::identity(3, 3);
        prop_assert!(op_norm(&gap) < 1e-12);
    }

    #[test]
    fn tuple_document_roundtrips_exactly(a in mat(2), s in cplx()) {
        let b = a.map(|z| z * s) + Mat::identity(2, 2);
        let t = OperatorTuple::new(vec![a, b]).unwrap();
        let text = io::to_string(&TupleDocument::from_tuple(&t)).unwrap();
        let back: TupleDocument = io::from_str(&text).unwrap();
        prop_assert_eq!(back.to_tuple().unwrap(), t);
        prop_assert_eq!(io::to_string(&back).unwrap(), text);
    }

    #[test]
    fn scalar_characteristic_function_is_inner(t in disc(0.98)) {
        let th = characteristic_function(&Mat::from_element(1, 1, t), 1e-12).unwrap();
        let rep = th.boundary_report(64).unwrap();
        prop_assert!(rep["unimodularity"] < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn schaffer_compresses_scalar_tuples(z in proptest::collection::vec(disc(0.95), 2..=3)) {
        let t = scalar(&symmetrize(&z)).unwrap();
        let f = solve_fundamental(&t, Which::Forward, 1e-10).unwrap();
        let m = schaffer_model(&t, &f, &DilateOptions::new(1e-10).with_degree(5)).unwrap();
        prop_assert!(m.report.passed(), "{:?}", m.report);
        let v = verify_model(&m, &t, 5, 1e-10).unwrap();
        prop_assert!(v.worst < 1e-10);
    }
}
