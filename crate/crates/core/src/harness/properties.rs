//! Randomized checks of the mirror-map identities, shared by the verify
//! suite and the property tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::linalg::{dot, sub, Vector};
use crate::mirror_maps::{CompositePart, FeasibleSet, MirrorMap, TimeVaryingMap};

/// The maps the suite is run against.
pub fn catalogue(n: usize, seed: u64) -> Result<Vec<(String, TimeVaryingMap)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut center = |r: f64| -> Vector { (0..n).map(|_| rng.gen_range(-r..r)).collect() };
    let cube = FeasibleSet::cube(n, 1.0)?;
    let ball = FeasibleSet::ball(center(0.5), 1.5)?;
    let simplex = FeasibleSet::simplex(n);
    let mut skew: Vector = (1..=n).map(|i| i as f64).collect();
    let s: f64 = skew.iter().sum();
    skew.iter_mut().for_each(|v| *v /= s);
    let l1 = CompositePart::L1 { lambda: 0.5 };
    let mut accum = TimeVaryingMap::accumulation(MirrorMap::euclidean(cube.clone(), center(1.0), 1.5)?, 0.8)?;
    accum.add_anchor(0.7, &center(1.0));
    accum.add_anchor(1.3, &center(1.0));
    Ok(vec![
        ("euclidean-rn".into(), TimeVaryingMap::fixed(MirrorMap::euclidean(FeasibleSet::rn(n), center(2.0), 2.0)?)),
        ("euclidean-box".into(), TimeVaryingMap::fixed(MirrorMap::euclidean(cube.clone(), center(1.0), 1.0)?)),
        ("euclidean-ball".into(), TimeVaryingMap::fixed(MirrorMap::euclidean(ball.clone(), center(0.3), 0.5)?)),
        ("entropy-simplex".into(), TimeVaryingMap::fixed(MirrorMap::entropy_centered(simplex, skew, 1.0)?)),
        (
            "l1-euclidean-rn".into(),
            TimeVaryingMap::composite(MirrorMap::euclidean(FeasibleSet::rn(n), center(1.0), 1.0)?, l1.clone(), 1.7)?,
        ),
        ("l1-euclidean-box".into(), TimeVaryingMap::composite(MirrorMap::euclidean(cube, center(1.0), 1.0)?, l1, 0.9)?),
        ("accumulation-box".into(), accum),
    ])
}

fn dual_sample(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vector {
    let d = Normal::new(0.0, scale).expect("positive scale");
    (0..n).map(|_| d.sample(rng)).collect()
}

/// min over cases of D_{φ*}(z1, z2) − (σ/2)‖∇φ*(z1) − ∇φ*(z2)‖².
pub fn strong_smoothness_slack(map: &TimeVaryingMap, cases: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = map.base().dim();
    let mut worst = f64::INFINITY;
    for _ in 0..cases {
        let z1 = dual_sample(&mut rng, n, 3.0);
        let z2 = dual_sample(&mut rng, n, 3.0);
        let u1 = map.grad_conjugate(&z1)?;
        let u2 = map.grad_conjugate(&z2)?;
        let d = map.bregman_dual_at(&z1, &u1, &u2);
        let nrm = map.base().norm(&sub(&u1, &u2));
        worst = worst.min(d - 0.5 * map.sigma() * nrm * nrm);
    }
    Ok(worst)
}

/// max over triples of |D(x,y) − D(z,y) − ⟨∇φ*(z) − ∇φ*(y), x − z⟩ − D(x,z)|.
pub fn three_point_error(map: &TimeVaryingMap, cases: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = map.base().dim();
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let x = dual_sample(&mut rng, n, 3.0);
        let y = dual_sample(&mut rng, n, 3.0);
        let z = dual_sample(&mut rng, n, 3.0);
        let (ux, uy, uz) = (map.grad_conjugate(&x)?, map.grad_conjugate(&y)?, map.grad_conjugate(&z)?);
        let lhs = map.bregman_dual_at(&x, &ux, &uy);
        let rhs = map.bregman_dual_at(&z, &uz, &uy) + dot(&sub(&uz, &uy), &sub(&x, &z)) + map.bregman_dual_at(&x, &ux, &uz);
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// max over z and feasible x of the first-order optimality residual of ∇φ*(z).
pub fn conjugate_optimality(map: &TimeVaryingMap, zs: usize, xs: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = map.base().dim();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..zs {
        let z = dual_sample(&mut rng, n, 3.0);
        for _ in 0..xs {
            let x = map.set().sample(&mut rng, 5.0);
            worst = worst.max(map.first_order_gap(&z, &x)?);
        }
    }
    Ok(worst)
}

/// max over z of φ_i*(z) − φ_{i−1}*(z) along a growing composite weight or
/// a growing accumulation.
pub fn conjugate_monotonicity(map: &TimeVaryingMap, steps: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = map.base().dim();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..steps {
        let z = dual_sample(&mut rng, n, 3.0);
        let a = rng.gen_range(0.0..2.0);
        let anchor = map.set().sample(&mut rng, 2.0);
        let next = match map.mode() {
            crate::mirror_maps::Mode::Composite { weight, .. } => map.with_weight(weight + a),
            crate::mirror_maps::Mode::Accumulation { .. } => map.with_anchor(a, &anchor),
            crate::mirror_maps::Mode::Static => map.clone(),
        };
        worst = worst.max(next.conjugate_value(&z)? - map.conjugate_value(&z)?);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalogue_passes() {
        for (name, m) in catalogue(4, 7).unwrap() {
            assert!(strong_smoothness_slack(&m, 200, 1).unwrap() >= -1e-10, "{name}");
            assert!(three_point_error(&m, 200, 2).unwrap() <= 1e-10, "{name}");
            assert!(conjugate_optimality(&m, 20, 100, 3).unwrap() <= 1e-9, "{name}");
            assert!(conjugate_monotonicity(&m, 200, 4).unwrap() <= 1e-12, "{name}");
        }
    }
}
