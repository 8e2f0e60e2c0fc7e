use postsel::prepost::{evolve_full, sum_rule_residual, weak_value};
use postsel::random::{random_decomposition, random_ket, random_operator, random_unitary};
use postsel::scenario::design_prepost;
use postsel::shortcut::{predict_conditional, predict_success_probability, LossAssignment};
use postsel::state::{inner, projector_of};
use postsel::{Circuit, CircuitElement, Ket, Operator, PrePost, Space, TargetWeakValues, C64};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + b.norm())
}

fn amplitudes(dim: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), dim)
}

/// Design a pre/post pair whose path weak values are `ws` (sum fixed to 1
/// by the last entry).
fn designed(ws: &[f64]) -> PrePost {
    let mut all = ws.to_vec();
    all.push(1.0 - ws.iter().sum::<f64>());
    design_prepost(&TargetWeakValues::from_real(&all).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn normalization_is_idempotent(amps in amplitudes(4)) {
        let amps: Vec<C64> = amps.into_iter().map(|(r, i)| C64::new(r, i)).collect();
        prop_assume!(amps.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-6);
        let k = Ket::normalized(Space::paths(4).unwrap(), amps).unwrap();
        prop_assert!((k.norm_sqr() - 1.0).abs() <= 1e-12);
        let again = k.clone().normalize().unwrap();
        prop_assert_eq!(again, k);
    }

    #[test]
    fn projectors_are_idempotent_and_hermitian(seed in any::<u64>(), dim in 1usize..6) {
        let space = Space::paths(dim).unwrap();
        let p = projector_of(&random_ket(&mut rng(seed), &space).unwrap()).unwrap();
        prop_assert!(p.compose(&p).unwrap().distance(&p).unwrap() <= 1e-12);
        prop_assert!(p.adjoint().distance(&p).unwrap() <= 1e-12);
        prop_assert!(p.is_projector());
    }

    #[test]
    fn tensor_is_bilinear_and_inner_products_factor(seed in any::<u64>(), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let mut r = rng(seed);
        let sx = Space::paths(3).unwrap();
        let sy = Space::polarization();
        let (x, x2) = (random_ket(&mut r, &sx).unwrap(), random_ket(&mut r, &sx).unwrap());
        let (y, y2) = (random_ket(&mut r, &sy).unwrap(), random_ket(&mut r, &sy).unwrap());
        let (ca, cb) = (C64::new(a, 0.3), C64::new(b, -0.7));
        let lhs = x.scale(ca).add(&x2.scale(cb)).unwrap().tensor(&y).unwrap();
        let rhs = x.tensor(&y).unwrap().scale(ca).add(&x2.tensor(&y).unwrap().scale(cb)).unwrap();
        for (l, r) in lhs.amps().iter().zip(rhs.amps()) {
            prop_assert!((l - r).norm() <= 1e-12);
        }
        let joint = inner(&x.tensor(&y).unwrap(), &x2.tensor(&y2).unwrap()).unwrap();
        let split = inner(&x, &x2).unwrap() * inner(&y, &y2).unwrap();
        prop_assert!((joint - split).norm() <= 1e-12);
    }

    #[test]
    fn weak_value_is_linear(seed in any::<u64>(), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let mut r = rng(seed);
        let space = Space::paths(3).unwrap();
        let pp = postsel::checks::random_prepost(&mut r, &space).unwrap();
        let (x, y) = (random_operator(&mut r, &space).unwrap(), random_operator(&mut r, &space).unwrap());
        let (ca, cb) = (C64::new(a, 0.5), C64::new(b, 0.0));
        let combo = x.scale(ca).add(&y.scale(cb)).unwrap();
        let lhs = weak_value(&combo, &pp).unwrap();
        let rhs = ca * weak_value(&x, &pp).unwrap() + cb * weak_value(&y, &pp).unwrap();
        prop_assert!(close(lhs, rhs, 1e-9), "{lhs} vs {rhs}");
    }

    #[test]
    fn complete_decompositions_sum_to_one(seed in any::<u64>(), dim in 2usize..6, parts in 1usize..6) {
        let mut r = rng(seed);
        let space = Space::paths(dim).unwrap();
        let pp = postsel::checks::random_prepost(&mut r, &space).unwrap();
        let projectors = random_decomposition(&mut r, &space, parts.min(dim)).unwrap();
        prop_assert!(sum_rule_residual(&projectors, &pp).unwrap() <= 1e-12);
    }

    #[test]
    fn opposite_weak_values_cancel_equal_loss(a in -3.0..3.0f64, t in 0.0..=1.0f64) {
        let pp = designed(&[a, -a]);
        let loss = LossAssignment::on_paths(3, &[0, 1], t).unwrap();
        let p = predict_success_probability(&pp, &loss).unwrap();
        prop_assert!((p - pp.success_probability()).abs() <= 1e-12);
        let circuit = Circuit::new(pp.space().clone())
            .with(CircuitElement::Attenuator { path: 0, transmission: t }).unwrap()
            .with(CircuitElement::Attenuator { path: 1, transmission: t }).unwrap();
        let oracle = evolve_full(&circuit, &pp, &Ket::unit()).unwrap().success_probability;
        prop_assert!((oracle - pp.success_probability()).abs() <= 1e-12);
    }

    #[test]
    fn unit_weak_value_acts_with_certainty(b in -3.0..3.0f64, t in 0.0..=1.0f64, seed in any::<u64>()) {
        // Targets (1, b, -b): the first path's operation is applied for sure.
        let pp = designed(&[1.0, b]);
        let pol = Space::polarization();
        let mut r = rng(seed);
        let u = random_unitary(&mut r, &pol).unwrap();
        let psi = random_ket(&mut r, &pol).unwrap();
        let id = Operator::identity(pol);
        let out = predict_conditional(&[u.clone(), id.clone(), id], &pp, &psi).unwrap();
        let want = u.apply(&psi).unwrap();
        prop_assert!(out.conditional_state.fidelity_amplitude(&want).unwrap() >= 1.0 - 1e-12);
        prop_assert!((out.success_probability - pp.success_probability()).abs() <= 1e-12);
        let loss = LossAssignment::on_paths(3, &[0], t).unwrap();
        let p = predict_success_probability(&pp, &loss).unwrap();
        prop_assert!((p - t * pp.success_probability()).abs() <= 1e-12);
    }

    #[test]
    fn zero_weak_value_path_is_inert(a in -3.0..3.0f64, t in 0.0..=1.0f64) {
        let pp = designed(&[0.0, a]);
        let loss = LossAssignment::on_paths(3, &[0], t).unwrap();
        let p = predict_success_probability(&pp, &loss).unwrap();
        prop_assert!((p - pp.success_probability()).abs() <= 1e-12);
    }

    #[test]
    fn designer_roundtrips(seed in any::<u64>(), n in 1usize..6) {
        use rand::Rng;
        let mut r = rng(seed);
        let mut ws: Vec<C64> = (0..n).map(|_| C64::new(r.random_range(-3.0..3.0), r.random_range(-3.0..3.0))).collect();
        let rest: C64 = ws.iter().sum();
        ws.push(C64::new(1.0, 0.0) - rest);
        let targets = TargetWeakValues::new(ws.clone()).unwrap();
        let got = design_prepost(&targets).unwrap().path_weak_values();
        for (g, w) in got.iter().zip(&ws) {
            prop_assert!((g - w).norm() <= 1e-9, "{g} vs {w}");
        }
    }
}
