use proptest::prelude::*;

use oeq::grading::Potential;
use oeq::mf::{fresh_vars, identity_defect, Defect};
use oeq::poly::{int, Polynomial};
use oeq::residue::{qdim, qdim_via_fermions, QuantumDimensions};

/// Identity defect of Σ z_i^{e_i} plus, for a chain, z1^a z2 + z2^b.
fn defect(exps: &[u32], chain: bool) -> Defect {
    let v = if chain {
        format!("z1^{}*z2 + z2^{}", exps[0], exps[1].max(2))
    } else {
        exps.iter().enumerate().map(|(i, e)| format!("z{}^{e}", i + 1)).collect::<Vec<_>>().join(" + ")
    };
    let v = Potential::parse(&v).unwrap();
    let n = v.vars().len();
    identity_defect(&v, &fresh_vars("x", n), &fresh_vars("y", n)).unwrap()
}

fn scaled(q: &QuantumDimensions, k: i64) -> QuantumDimensions {
    QuantumDimensions { ql: q.ql.scale(&int(k)), qr: q.qr.scale(&int(k)) }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn identity_has_unit_dimensions(exps in prop::collection::vec(2u32..7, 1..3), chain in any::<bool>()) {
        let d = defect(&exps, chain && exps.len() == 2);
        let one = QuantumDimensions { ql: Polynomial::one(), qr: Polynomial::one() };
        prop_assert_eq!(qdim(&d).unwrap(), one.clone());
        prop_assert_eq!(qdim_via_fermions(&d).unwrap(), one);
    }

    #[test]
    fn sums_add_and_products_multiply(a in 2u32..6, b in 2u32..6, copies in 1usize..4) {
        let d = defect(&[a], false);
        let mut sum = d.clone();
        for _ in 1..copies {
            sum = sum.direct_sum(&d).unwrap();
        }
        prop_assert_eq!(qdim(&sum).unwrap(), scaled(&qdim(&d).unwrap(), copies as i64));

        let v = Potential::parse(&format!("z1^{b}")).unwrap();
        let e = identity_defect(&v, &fresh_vars("x7", 1), &fresh_vars("y7", 1)).unwrap();
        let t = qdim(&d.tensor_product(&e).unwrap()).unwrap();
        // only |q| is multiplicative
        prop_assert_eq!(&t.ql * &t.ql, Polynomial::one());
        prop_assert_eq!(&t.qr * &t.qr, Polynomial::one());
    }

    #[test]
    fn adjoint_needs_even_y(exps in prop::collection::vec(2u32..6, 1..4)) {
        let d = defect(&exps, false);
        match d.adjoint() {
            Ok(a) => {
                prop_assert_eq!(exps.len() % 2, 0);
                prop_assert_eq!(qdim(&a).unwrap(), qdim(&d).unwrap().swapped());
            }
            Err(e) => {
                prop_assert_eq!(exps.len() % 2, 1);
                prop_assert!(matches!(e, oeq::Error::UnsupportedParity));
            }
        }
    }
}
