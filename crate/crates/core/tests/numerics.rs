use std::f64::consts::PI;

use num_complex::Complex64 as C;
use proptest::prelude::*;
use unidisc::circuits::{Circuit, Gate};
use unidisc::qmath::{eig_unitary2, schmidt_decompose, u3_params, PureState, U3Params, Unitary2};
use unidisc::sim::apply_circuit;

fn unitary() -> impl Strategy<Value = Unitary2> {
    (0.0..PI, -PI..PI, -PI..PI, -PI..PI).prop_map(|(t, p, l, g)| {
        Unitary2::from_u3(t, p, l).scaled(C::from_polar(1.0, g))
    })
}

fn state(n: usize) -> impl Strategy<Value = PureState> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_filter_map(
        "zero vector",
        |v| PureState::normalized(v.into_iter().map(|(r, i)| C::new(r, i)).collect()).ok(),
    )
}

/// Roots of λ² − tr·λ + det, the characteristic polynomial.
fn char_roots(u: &Unitary2) -> [C; 2] {
    let (tr, det) = (u.trace(), u.det());
    let disc = (tr * tr - det * 4.0).sqrt();
    [(tr + disc) / 2.0, (tr - disc) / 2.0]
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(1000)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn eigenpairs(u in unitary()) {
        let e = eig_unitary2(&u);
        for k in 0..2 {
            let v = e.vectors[k].as_qubit().unwrap();
            let uv = u.apply(v);
            let lam = C::from_polar(1.0, e.phases[k]);
            prop_assert!((uv[0] - v[0] * lam).norm() < 1e-10);
            prop_assert!((uv[1] - v[1] * lam).norm() < 1e-10);
        }
        prop_assert!(e.vectors[0].inner(&e.vectors[1]).norm() < 1e-10);
        prop_assert!(e.phases[0] <= e.phases[1]);
        let roots = char_roots(&u);
        for p in e.phases {
            let z = C::from_polar(1.0, p);
            prop_assert!(roots.iter().any(|r| (r - z).norm() < 1e-7));
        }
    }

    #[test]
    fn schmidt_round_trip(s in state(2)) {
        let f = schmidt_decompose(&s).unwrap();
        prop_assert!(f.reassemble().distance_up_to_phase(&s) < 1e-10);
        prop_assert!(f.coeffs[0] >= f.coeffs[1] && f.coeffs[1] >= 0.0);
        prop_assert!((f.coeffs[0].powi(2) + f.coeffs[1].powi(2) - 1.0).abs() < 1e-10);
        prop_assert!(f.local_a.unitarity_error() < 1e-10);
        prop_assert!(f.local_b.unitarity_error() < 1e-10);
        // Squared coefficients are the eigenvalues of the reduced density matrix.
        let a = s.amplitude_matrix().unwrap();
        let det = (a[0][0] * a[1][1] - a[0][1] * a[1][0]).norm_sqr();
        let big = (1.0 + (1.0 - 4.0 * det).max(0.0).sqrt()) / 2.0;
        prop_assert!((f.coeffs[0].powi(2) - big).abs() < 1e-9);
    }

    #[test]
    fn u3_round_trip(u in unitary()) {
        let p = u3_params(&u);
        let back = p.gate().scaled(C::from_polar(1.0, p.global_phase));
        prop_assert!(back.max_abs_diff(&u) < 1e-10);
        prop_assert!((0.0..=PI + 1e-12).contains(&p.theta));
    }

    #[test]
    fn tensor_and_local_agree(a in state(1), b in state(1), u in unitary()) {
        let ab = a.tensor(&b).unwrap();
        let via_local = ab.apply_local(&u, 1).unwrap();
        let direct = a.tensor(&PureState::qubit(u.apply(b.as_qubit().unwrap())).unwrap()).unwrap();
        prop_assert!(via_local.distance_up_to_phase(&direct) < 1e-12);
    }

    #[test]
    fn products_stay_unitary(a in unitary(), b in unitary()) {
        prop_assert!((a * b).unitarity_error() < 1e-10);
    }

    #[test]
    fn norm_after_random_gates(
        s in state(3),
        gates in prop::collection::vec((0usize..4, 0usize..3, 0usize..3, 0.0..PI, -PI..PI, -PI..PI), 100),
    ) {
        let mut c = Circuit::new(3, 0);
        for (kind, a, b, t, p, l) in gates {
            if kind == 0 && a != b {
                c.push(Gate::Cx { control: a, target: b }).unwrap();
            } else {
                c.push(Gate::u3(U3Params::new(t, p, l), a)).unwrap();
            }
        }
        let out = apply_circuit(&s, &c).unwrap();
        prop_assert!((out.norm() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn rejects_non_unitary() {
    let m = [[C::new(1.0, 0.0), C::new(1.0, 0.0)], [C::new(0.0, 0.0), C::new(1.0, 0.0)]];
    assert!(Unitary2::new(m).is_err());
    assert!(PureState::new(vec![C::new(1.0, 0.0), C::new(1.0, 0.0)]).is_err());
    assert!(PureState::new(vec![C::new(1.0, 0.0); 3]).is_err());
}
