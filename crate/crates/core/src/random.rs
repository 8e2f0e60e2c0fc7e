//! Seeded random kets, unitaries and projector decompositions for property
//! checks and the built-in verification suites.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::state::{Ket, Operator, Space, C64};

fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-distributed normalized ket.
pub fn random_ket(rng: &mut impl Rng, space: &Space) -> Result<Ket> {
    let amps = (0..space.dim()).map(|_| gaussian(rng)).collect();
    Ket::normalized(space.clone(), amps)
}

/// Orthonormal columns via Gram-Schmidt on a complex Gaussian matrix.
fn orthonormal_columns(rng: &mut impl Rng, dim: usize) -> Vec<Vec<C64>> {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
        for u in &cols {
            let proj: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            v.iter_mut().zip(u).for_each(|(x, a)| *x -= proj * a);
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-6 {
            v.iter_mut().for_each(|z| *z /= n);
            cols.push(v);
        }
    }
    cols
}

pub fn random_unitary(rng: &mut impl Rng, space: &Space) -> Result<Operator> {
    let dim = space.dim();
    let cols = orthonormal_columns(rng, dim);
    let rows = (0..dim)
        .map(|r| (0..dim).map(|c| cols[c][r]).collect())
        .collect();
    Operator::from_rows(space.clone(), rows)
}

/// A random complete set of `parts` mutually orthogonal projectors summing
/// to the identity. Ranks are spread as evenly as possible.
pub fn random_decomposition(
    rng: &mut impl Rng,
    space: &Space,
    parts: usize,
) -> Result<Vec<Operator>> {
    let dim = space.dim();
    let parts = parts.clamp(1, dim);
    let cols = orthonormal_columns(rng, dim);
    let mut projectors = vec![Operator::zeros(space.clone()); parts];
    for (i, col) in cols.into_iter().enumerate() {
        let v = Ket::new(space.clone(), col)?;
        let slot = i % parts;
        projectors[slot] = projectors[slot].add(&Operator::outer(&v, &v)?)?;
    }
    Ok(projectors)
}

/// Random Hermitian-or-not dense operator with Gaussian entries.
pub fn random_operator(rng: &mut impl Rng, space: &Space) -> Result<Operator> {
    let dim = space.dim();
    let rows = (0..dim)
        .map(|_| (0..dim).map(|_| gaussian(rng)).collect())
        .collect();
    Operator::from_rows(space.clone(), rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::TOL;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unitaries_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 1..=4 {
            let u = random_unitary(&mut rng, &Space::paths(d).unwrap()).unwrap();
            assert!(u.unitarity_defect() <= TOL, "dim {d}");
        }
    }

    #[test]
    fn decomposition_is_complete() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let space = Space::paths(4).unwrap();
        let ps = random_decomposition(&mut rng, &space, 3).unwrap();
        let sum = ps
            .iter()
            .skip(1)
            .fold(ps[0].clone(), |acc, p| acc.add(p).unwrap());
        assert!(sum.distance(&Operator::identity(space)).unwrap() <= TOL);
        assert!(ps.iter().all(Operator::is_projector));
    }
}
