//! Predicting pre/postselected outcomes from weak values alone.
//!
//! For per-path unitaries the internal state becomes
//! `sum_k w_k U_k |psi>` up to normalization `N`, and the postselection
//! succeeds with probability `N |<f|i>|^2`. For per-path losses the
//! probability becomes `|<f|i>|^2 |sum_k w_k sqrt(T_k)|^2`. Neither formula
//! follows the time evolution; [`check_oracle_equivalence`] compares them
//! against [`evolve_full`].

use crate::error::{Error, Result};
use crate::prepost::{check_transmission, evolve_full, Circuit, CircuitElement, PrePost, EPS_POST};
use crate::state::{Ket, Operator, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct ShortcutPrediction {
    /// Normalized internal state.
    pub conditional_state: Ket,
    /// Squared norm of `sum_k w_k U_k |psi>`.
    pub normalizer: f64,
    pub success_probability: f64,
}

/// Per-path transmission probabilities, each in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LossAssignment(Vec<f64>);

impl LossAssignment {
    pub fn new(transmissions: Vec<f64>) -> Result<Self> {
        for &t in &transmissions {
            check_transmission(t)?;
        }
        Ok(Self(transmissions))
    }

    /// No loss on any of `paths` paths.
    pub fn lossless(paths: usize) -> Self {
        Self(vec![1.0; paths])
    }

    /// Transmission `t` on the listed paths, 1 elsewhere.
    pub fn on_paths(paths: usize, lossy: &[usize], t: f64) -> Result<Self> {
        check_transmission(t)?;
        let mut v = vec![1.0; paths];
        for &p in lossy {
            *v.get_mut(p).ok_or_else(|| {
                Error::SpaceMismatch(format!("path index {p} outside {paths} paths"))
            })? = t;
        }
        Ok(Self(v))
    }

    pub fn transmissions(&self) -> &[f64] {
        &self.0
    }
}

fn unnormalized_sum(unitaries: &[Operator], weak_values: &[C64], psi: &Ket) -> Result<Ket> {
    let mut acc = psi.scale(C64::new(0.0, 0.0));
    for (u, w) in unitaries.iter().zip(weak_values) {
        acc = acc.add(&u.apply(psi)?.scale(*w))?;
    }
    Ok(acc)
}

/// Conditional internal state from one unitary per path.
pub fn predict_conditional(
    unitaries: &[Operator],
    pp: &PrePost,
    psi: &Ket,
) -> Result<ShortcutPrediction> {
    let weak_values = pp.path_weak_values();
    if unitaries.len() != weak_values.len() {
        return Err(Error::SpaceMismatch(format!(
            "{} unitaries for {} paths",
            unitaries.len(),
            weak_values.len()
        )));
    }
    let psi = psi.clone().normalize()?;
    let sum = unnormalized_sum(unitaries, &weak_values, &psi)?;
    let normalizer = sum.norm_sqr();
    if normalizer <= EPS_POST * EPS_POST {
        return Err(Error::PostselectionSingular {
            magnitude: normalizer.sqrt(),
        });
    }
    Ok(ShortcutPrediction {
        conditional_state: sum.normalize()?,
        normalizer,
        success_probability: normalizer * pp.success_probability(),
    })
}

/// `sum_k w_k sqrt(T_k)`.
pub fn loss_amplitude_factor(weak_values: &[C64], loss: &LossAssignment) -> Result<C64> {
    if weak_values.len() != loss.0.len() {
        return Err(Error::SpaceMismatch(format!(
            "{} weak values for {} transmissions",
            weak_values.len(),
            loss.0.len()
        )));
    }
    Ok(weak_values
        .iter()
        .zip(&loss.0)
        .map(|(w, t)| w * t.sqrt())
        .sum())
}

/// `|<f|i>|^2 |sum_k w_k sqrt(T_k)|^2`.
pub fn predict_success_probability(pp: &PrePost, loss: &LossAssignment) -> Result<f64> {
    let factor = loss_amplitude_factor(&pp.path_weak_values(), loss)?;
    Ok(pp.success_probability() * factor.norm_sqr())
}

/// A circuit reduced to what the shortcut formulas accept.
enum PerPath {
    Unitaries(Vec<Operator>),
    Losses(LossAssignment),
}

fn per_path_form(circuit: &Circuit) -> Result<PerPath> {
    let k = circuit.selection().dim();
    let mut unitaries: Vec<Option<Operator>> = vec![None; k];
    let mut losses: Vec<Option<f64>> = vec![None; k];
    let mut set_loss = |path: usize, t: f64| {
        if losses[path].replace(t).is_some() {
            return Err(Error::UnsupportedShape(format!(
                "more than one loss on path index {path}"
            )));
        }
        Ok(())
    };
    for element in circuit.elements() {
        match element {
            CircuitElement::Unitary { path, op } => {
                if unitaries[*path].replace(op.clone()).is_some() {
                    return Err(Error::UnsupportedShape(format!(
                        "more than one unitary on path index {path}"
                    )));
                }
            }
            CircuitElement::Attenuator { path, transmission } => set_loss(*path, *transmission)?,
            CircuitElement::Shutter { path } => set_loss(*path, 0.0)?,
            CircuitElement::JointShutter { labels } => {
                for idx in circuit.shutter_indices(labels) {
                    set_loss(idx, 0.0)?;
                }
            }
        }
    }
    let has_unitary = unitaries.iter().any(Option::is_some);
    let has_loss = losses.iter().any(Option::is_some);
    match (has_unitary, has_loss) {
        (true, true) => Err(Error::UnsupportedShape(
            "unitaries and losses in one circuit have no weak-value shortcut".into(),
        )),
        (false, true) => Ok(PerPath::Losses(LossAssignment::new(
            losses.into_iter().map(|t| t.unwrap_or(1.0)).collect(),
        )?)),
        _ => {
            let identity = Operator::identity(circuit.internal().clone());
            Ok(PerPath::Unitaries(
                unitaries
                    .into_iter()
                    .map(|u| u.unwrap_or_else(|| identity.clone()))
                    .collect(),
            ))
        }
    }
}

/// Largest deviation between the shortcut and the full evolution, over
/// the success probability and the conditional-state overlap deficit
/// `1 - |<a|b>|`.
pub fn check_oracle_equivalence(circuit: &Circuit, pp: &PrePost, psi: &Ket) -> Result<f64> {
    let shape = per_path_form(circuit)?;
    let psi = psi.clone().normalize()?;
    let oracle = evolve_full(circuit, pp, &psi)?;

    let (shortcut_probability, shortcut_state) = match shape {
        PerPath::Unitaries(us) => {
            let sum = unnormalized_sum(&us, &pp.path_weak_values(), &psi)?;
            (sum.norm_sqr() * pp.success_probability(), sum)
        }
        // Losses leave the internal state untouched.
        PerPath::Losses(loss) => (predict_success_probability(pp, &loss)?, psi.clone()),
    };

    let probability_gap = (shortcut_probability - oracle.success_probability).abs();
    let singular = EPS_POST * EPS_POST;
    let state_gap = match (
        shortcut_probability > singular,
        oracle.success_probability > singular,
    ) {
        (true, true) => {
            let a = shortcut_state.normalize()?;
            let b = oracle.conditional_state.clone().normalize()?;
            (1.0 - a.fidelity_amplitude(&b)?).max(0.0)
        }
        (false, false) => 0.0,
        _ => 1.0,
    };
    Ok(probability_gap.max(state_gap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_ket, random_unitary};
    use crate::state::{Space, TOL};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn three_box() -> PrePost {
        let space = Space::paths(3).unwrap();
        PrePost::new(
            Ket::from_real(space.clone(), &[1.0, 1.0, 1.0]).unwrap(),
            Ket::from_real(space, &[1.0, -1.0, 1.0]).unwrap(),
        )
        .unwrap()
    }

    fn w3() -> Vec<C64> {
        [1.0, -1.0, 1.0].iter().map(|&x| C64::new(x, 0.0)).collect()
    }

    #[test]
    fn factor_with_loss_on_path_one() {
        for t in [0.0, 0.3, 1.0] {
            let f = loss_amplitude_factor(&w3(), &LossAssignment::new(vec![t, 1.0, 1.0]).unwrap())
                .unwrap();
            assert!((f - C64::new(t.sqrt(), 0.0)).norm() <= TOL);
        }
    }

    #[test]
    fn factor_with_loss_on_paths_one_and_two() {
        for t in [0.0, 0.3, 1.0] {
            let f = loss_amplitude_factor(&w3(), &LossAssignment::new(vec![t, t, 1.0]).unwrap())
                .unwrap();
            assert!((f - C64::new(1.0, 0.0)).norm() <= TOL);
        }
    }

    #[test]
    fn factor_with_loss_on_path_two() {
        for t in [0.0, 0.3, 1.0] {
            let f = loss_amplitude_factor(&w3(), &LossAssignment::new(vec![1.0, t, 1.0]).unwrap())
                .unwrap();
            assert!((f - C64::new(2.0 - t.sqrt(), 0.0)).norm() <= TOL);
        }
    }

    #[test]
    fn invalid_transmission_is_rejected() {
        assert!(matches!(
            LossAssignment::new(vec![1.0, -0.1]),
            Err(Error::InvalidTransmission(_))
        ));
        assert!(matches!(
            LossAssignment::new(vec![f64::NAN]),
            Err(Error::InvalidTransmission(_))
        ));
    }

    #[test]
    fn three_box_success_probabilities() {
        let pp = three_box();
        for t in [0.0, 0.25, 0.5, 1.0] {
            let one =
                predict_success_probability(&pp, &LossAssignment::on_paths(3, &[0], t).unwrap())
                    .unwrap();
            assert!((one - t / 9.0).abs() <= TOL);
            let both =
                predict_success_probability(&pp, &LossAssignment::on_paths(3, &[0, 1], t).unwrap())
                    .unwrap();
            assert!((both - 1.0 / 9.0).abs() <= TOL);
        }
        let blocked =
            predict_success_probability(&pp, &LossAssignment::on_paths(3, &[1], 0.0).unwrap())
                .unwrap();
        assert!((blocked - 4.0 / 9.0).abs() <= TOL);
    }

    #[test]
    fn predicted_conditional_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let pp = three_box();
        let pol = Space::polarization();
        let u = random_unitary(&mut rng, &pol).unwrap();
        let id = Operator::identity(pol.clone());
        let psi = random_ket(&mut rng, &pol).unwrap();

        let p = predict_conditional(&[u.clone(), id.clone(), id.clone()], &pp, &psi).unwrap();
        assert!(
            (p.conditional_state
                .fidelity_amplitude(&u.apply(&psi).unwrap())
                .unwrap()
                - 1.0)
                .abs()
                <= TOL
        );
        assert!((p.normalizer - 1.0).abs() <= TOL);

        let p = predict_conditional(&[u.clone(), u, id.clone()], &pp, &psi).unwrap();
        assert!((p.conditional_state.fidelity_amplitude(&psi).unwrap() - 1.0).abs() <= TOL);

        let p = predict_conditional(&[id.clone(), id.clone(), id], &pp, &psi).unwrap();
        assert!((p.normalizer - 1.0).abs() <= TOL);
        assert!((p.success_probability - 1.0 / 9.0).abs() <= TOL);
    }

    #[test]
    fn completely_destructive_sum_is_singular() {
        // Weak values (1/2, 1/2) with U_2 = -U_1 cancel exactly.
        let space = Space::paths(2).unwrap();
        let pp = PrePost::new(
            Ket::from_real(space.clone(), &[1.0, 1.0]).unwrap(),
            Ket::from_real(space, &[1.0, 1.0]).unwrap(),
        )
        .unwrap();
        let pol = Space::polarization();
        let id = Operator::identity(pol.clone());
        let psi = Ket::from_label(pol, "H").unwrap();
        let err = predict_conditional(&[id.clone(), id.scale(C64::new(-1.0, 0.0))], &pp, &psi)
            .unwrap_err();
        assert!(matches!(err, Error::PostselectionSingular { .. }));
    }

    #[test]
    fn oracle_equivalence_on_simple_circuits() {
        let pp = three_box();
        let empty = Circuit::new(Space::paths(3).unwrap());
        assert!(check_oracle_equivalence(&empty, &pp, &Ket::unit()).unwrap() <= TOL);

        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let pol = Space::polarization();
        let mut c = Circuit::with_internal(Space::paths(3).unwrap(), pol.clone());
        for path in 0..3 {
            c.push(CircuitElement::Unitary {
                path,
                op: random_unitary(&mut rng, &pol).unwrap(),
            })
            .unwrap();
        }
        let psi = random_ket(&mut rng, &pol).unwrap();
        assert!(check_oracle_equivalence(&c, &pp, &psi).unwrap() <= 1e-9);
    }

    #[test]
    fn unsupported_shapes() {
        let pp = three_box();
        let pol = Space::polarization();
        let id = Operator::identity(pol.clone());
        let psi = Ket::from_label(pol.clone(), "H").unwrap();
        let twice = Circuit::with_internal(Space::paths(3).unwrap(), pol.clone())
            .with(CircuitElement::Unitary {
                path: 0,
                op: id.clone(),
            })
            .unwrap()
            .with(CircuitElement::Unitary {
                path: 0,
                op: id.clone(),
            })
            .unwrap();
        assert!(matches!(
            check_oracle_equivalence(&twice, &pp, &psi),
            Err(Error::UnsupportedShape(_))
        ));
        let mixed = Circuit::with_internal(Space::paths(3).unwrap(), pol)
            .with(CircuitElement::Unitary { path: 0, op: id })
            .unwrap()
            .with(CircuitElement::Attenuator {
                path: 0,
                transmission: 0.5,
            })
            .unwrap();
        assert!(matches!(
            check_oracle_equivalence(&mixed, &pp, &psi),
            Err(Error::UnsupportedShape(_))
        ));
        let double_loss = Circuit::new(Space::paths(3).unwrap())
            .with(CircuitElement::Shutter { path: 1 })
            .unwrap()
            .with(CircuitElement::Attenuator {
                path: 1,
                transmission: 0.5,
            })
            .unwrap();
        assert!(matches!(
            check_oracle_equivalence(&double_loss, &pp, &Ket::unit()),
            Err(Error::UnsupportedShape(_))
        ));
    }
}
