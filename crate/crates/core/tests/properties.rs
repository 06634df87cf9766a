use approx::assert_relative_eq;
use nalgebra::DMatrix;
use proptest::prelude::*;
use thermoconvex::convexity::{classify_hessian, classify_with, ClassifyPolicy};
use thermoconvex::eos::{Eos, IdealPolytropicParams, PolytropicGas, TaitEos, TaitParams};
use thermoconvex::transforms::{exchange, legendre_with, named_chain, named_chains, reciprocal, reciprocal_map, ChainSpec, LegendreOptions};

fn gas() -> PolytropicGas {
    let p = IdealPolytropicParams::from_two(Some(1.0), None, None, Some(1.4)).unwrap();
    PolytropicGas::new(p, 1.0, 0.0, 300.0).unwrap()
}

fn water() -> TaitEos {
    TaitEos::new(TaitParams::new(7.15, 3.3e8, 8.4e4, 1e-3, 296.0, 293.15, 1e5, 145.0, 4180.0).unwrap()).unwrap()
}

fn symmetric(entries: &[f64]) -> DMatrix<f64> {
    let a = DMatrix::from_row_slice(3, 3, entries);
    (&a + a.transpose()) * 0.5
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn negation_mirrors_class(e in prop::collection::vec(-5.0f64..5.0, 9)) {
        let h = symmetric(&e);
        let a = classify_hessian(&h, 1.0).unwrap();
        let b = classify_hessian(&(-&h), 1.0).unwrap();
        prop_assert_eq!(b.class, a.class.mirror());
    }

    #[test]
    fn diagonal_congruence_keeps_class(
        signs in prop::collection::vec(any::<bool>(), 3),
        mags in prop::collection::vec(0.5f64..2.0, 3),
        scales in prop::collection::vec(-3.0f64..3.0, 3),
    ) {
        let d: Vec<f64> = signs.iter().zip(&mags).map(|(s, m)| if *s { *m } else { -*m }).collect();
        let h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d));
        let p = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(3, scales.iter().map(|k| 10f64.powf(*k))));
        let g = &p * &h * &p;
        let a = classify_with(&h, 1.0, ClassifyPolicy::Equilibrated).unwrap();
        let b = classify_with(&g, 1e-300, ClassifyPolicy::Equilibrated).unwrap();
        prop_assert_eq!(a.class, b.class);
        prop_assert!(a.class.is_definite() || signs.iter().any(|s| *s) && signs.iter().any(|s| !*s));
    }

    #[test]
    fn reciprocal_map_is_an_involution(x in prop::collection::vec(0.1f64..10.0, 3), pivot in 1usize..=3) {
        let back = reciprocal_map(&reciprocal_map(&x, pivot), pivot);
        for (a, b) in back.iter().zip(&x) {
            prop_assert!((a - b).abs() <= 1e-14 * b.abs());
        }
    }

    #[test]
    fn reciprocal_twice_restores_energy(v in 0.1f64..10.0, s in -1.0f64..1.0) {
        let u = gas().internal_energy();
        let rr = reciprocal(&reciprocal(&u, 1).unwrap(), 1).unwrap();
        let a = u.jet(&[v, s]).unwrap();
        let b = rr.jet(&[v, s]).unwrap();
        prop_assert!((a.value - b.value).abs() <= 1e-13 * a.value.abs());
        prop_assert!((&a.hessian - &b.hessian).norm() <= 1e-12 * a.hessian.norm());
    }

    #[test]
    fn exchange_twice_restores_energy(v in 0.1f64..10.0, s in -1.0f64..1.0) {
        let u = gas().internal_energy();
        let ee = exchange(&exchange(&u, 2).unwrap(), 2).unwrap();
        let a = u.jet(&[v, s]).unwrap();
        let b = ee.jet(&[v, s]).unwrap();
        prop_assert!((a.value - b.value).abs() <= 1e-11 * a.value.abs());
    }

    #[test]
    fn fenchel_equality_on_the_gradient_image(v in 0.1f64..10.0, s in -1.0f64..1.0) {
        let u = gas().internal_energy();
        let opts = LegendreOptions {
            image_box: Some((vec![f64::NEG_INFINITY, 0.0], vec![0.0, f64::INFINITY])),
            ..Default::default()
        };
        let psi = legendre_with(&u, &opts).unwrap();
        let j = u.jet(&[v, s]).unwrap();
        let w = [j.gradient[0], j.gradient[1]];
        let k = psi.jet(&w).unwrap();
        let pairing = w[0] * v + w[1] * s;
        prop_assert!((k.value + j.value - pairing).abs() <= 1e-10 * (j.value.abs() + pairing.abs()));
        prop_assert!((k.gradient[0] - v).abs() <= 1e-10 * v);
        prop_assert!((k.gradient[1] - s).abs() <= 1e-10 * (1.0 + s.abs()));
    }

    #[test]
    fn tait_gibbs_relation(v_rel in (1.0f64 / 1.03)..1.0, theta in 280.0f64..360.0) {
        let eos = water();
        let v = 1e-3 * v_rel;
        let [v, s] = eos.state_from_vt(v, theta).unwrap();
        let j = eos.internal_energy().jet(&[v, s]).unwrap();
        let p = eos.pressure(v, s).unwrap();
        prop_assert!((p + j.gradient[0]).abs() <= 1e-9 * p.abs().max(eos.pressure(1e-3, 296.0).unwrap().abs()));
        prop_assert!((eos.temperature(v, s).unwrap() - j.gradient[1]).abs() <= 1e-12 * theta);
        prop_assert!((eos.temperature(v, s).unwrap() - theta).abs() <= 1e-10 * theta);
    }
}

#[test]
fn polytropic_pressure_closed_form() {
    let eos = gas();
    for &(v, s) in &[(0.5, 0.0), (1.0, 0.3), (4.0, -0.7)] {
        let j = eos.internal_energy().jet(&[v, s]).unwrap();
        let theta = j.gradient[1];
        assert_relative_eq!(eos.pressure(v, s).unwrap(), theta / v, max_relative = 1e-13);
        assert_relative_eq!(-j.gradient[0], theta / v, max_relative = 1e-13);
    }
}

#[test]
fn named_chains_round_trip_through_json() {
    for (name, _) in named_chains() {
        for d in 1..=3 {
            let spec = named_chain(name, d).unwrap();
            let text = serde_json::to_string(&spec).unwrap();
            let back: ChainSpec = serde_json::from_str(&text).unwrap();
            assert_eq!(spec, back, "{name} d={d}");
        }
    }
}
