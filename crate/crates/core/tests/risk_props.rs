//! Objective bounds must contain the mean and the negated standard deviation
//! of every function inside the pointwise bounds.

use mvabo_core::gp::PointwiseBounds;
use mvabo_core::risk::{noisy_input_bounds, rect_diameter, EnvDistribution, RiskBoundTable};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

/// Mean and negated standard deviation by direct summation.
fn risk_of(f: &[f64], p: &[f64]) -> (f64, f64) {
    let mean: f64 = f.iter().zip(p).map(|(a, b)| a * b).sum();
    let var: f64 = f.iter().zip(p).map(|(a, b)| b * (a - mean) * (a - mean)).sum();
    (mean, -var.max(0.0).sqrt())
}

fn line(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|j| vec![j as f64]).collect()
}

fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> EnvDistribution<f64> {
    let masses: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
    EnvDistribution::from_masses(line(n), masses).unwrap()
}

fn random_bounds(rng: &mut ChaCha8Rng, nx: usize, nw: usize) -> PointwiseBounds<f64> {
    let centre: Vec<f64> = (0..nx * nw).map(|_| rng.random_range(-2.0..2.0)).collect();
    let half: Vec<f64> = (0..nx * nw).map(|_| rng.random_range(0.0..0.8)).collect();
    PointwiseBounds::new(
        nx,
        nw,
        centre.iter().zip(&half).map(|(c, h)| c - h).collect(),
        centre.iter().zip(&half).map(|(c, h)| c + h).collect(),
    )
    .unwrap()
}

fn sample_inside(rng: &mut ChaCha8Rng, pw: &PointwiseBounds<f64>) -> Vec<f64> {
    pw.lower()
        .iter()
        .zip(pw.upper())
        .map(|(&l, &u)| match rng.random_range(0..4) {
            0 => l,
            1 => u,
            _ => l + (u - l) * rng.random::<f64>(),
        })
        .collect()
}

fn assert_lift(table: &RiskBoundTable<f64>, f: &[f64], p: &[f64], nw: usize) -> Result<(), TestCaseError> {
    for x in 0..table.len() {
        let (m, s) = risk_of(&f[x * nw..(x + 1) * nw], p);
        let (b1, b2) = (table.f1()[x], table.f2()[x]);
        prop_assert!(b1.lower - TOL <= m && m <= b1.upper + TOL, "F1 {m} outside {b1:?}");
        prop_assert!(b2.lower - TOL <= s && s <= b2.upper + TOL, "F2 {s} outside {b2:?}");
        if let Some(g) = table.g() {
            let a = table.alpha().unwrap();
            let v = a * m + (1.0 - a) * s;
            prop_assert!(g[x].lower - TOL <= v && v <= g[x].upper + TOL);
        }
    }
    Ok(())
}

#[test]
fn five_by_four_grid_thousand_functions() {
    let mut rng = ChaCha8Rng::seed_from_u64(54);
    let pw = random_bounds(&mut rng, 5, 4);
    let p = random_weights(&mut rng, 4);
    let table = RiskBoundTable::compute(0, &pw, &p).unwrap().with_scalarization(0.3).unwrap();
    for _ in 0..1000 {
        let f = sample_inside(&mut rng, &pw);
        assert_lift(&table, &f, p.weights(), 4).unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn lift_contains_every_function_inside(seed in any::<u64>(), nx in 1usize..6, nw in 1usize..7, alpha in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pw = random_bounds(&mut rng, nx, nw);
        let p = random_weights(&mut rng, nw);
        let table = RiskBoundTable::compute(0, &pw, &p).unwrap().with_scalarization(alpha).unwrap();
        for _ in 0..20 {
            let f = sample_inside(&mut rng, &pw);
            assert_lift(&table, &f, p.weights(), nw)?;
        }
    }

    #[test]
    fn ordering_sign_and_diameter(seed in any::<u64>(), nx in 1usize..6, nw in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pw = random_bounds(&mut rng, nx, nw);
        let p = random_weights(&mut rng, nw);
        let table = RiskBoundTable::compute(0, &pw, &p).unwrap();
        for x in 0..nx {
            let (b1, b2) = (table.f1()[x], table.f2()[x]);
            prop_assert!(b1.lower <= b1.upper && b2.lower <= b2.upper);
            prop_assert!(b2.upper <= 0.0);
            let lambda = rect_diameter(&table, x);
            prop_assert!(lambda >= b1.width().max(b2.width()));
            prop_assert!(lambda <= b1.width() + b2.width() + TOL);
        }
    }

    #[test]
    fn narrower_pointwise_gives_nested_bounds(seed in any::<u64>(), nx in 1usize..5, nw in 1usize..6, shrink in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let wide = random_bounds(&mut rng, nx, nw);
        let p = random_weights(&mut rng, nw);
        let (lo, hi): (Vec<f64>, Vec<f64>) = wide
            .lower()
            .iter()
            .zip(wide.upper())
            .map(|(&l, &u)| {
                let c = l + (u - l) * rng.random::<f64>();
                (c - (c - l) * shrink, c + (u - c) * shrink)
            })
            .unzip();
        let narrow = PointwiseBounds::new(nx, nw, lo, hi).unwrap();
        let a = RiskBoundTable::compute(0, &wide, &p).unwrap();
        let b = RiskBoundTable::compute(0, &narrow, &p).unwrap();
        for x in 0..nx {
            prop_assert!(a.f1()[x].lower <= b.f1()[x].lower + TOL && b.f1()[x].upper <= a.f1()[x].upper + TOL);
            prop_assert!(a.f2()[x].lower <= b.f2()[x].lower + TOL && b.f2()[x].upper <= a.f2()[x].upper + TOL);
        }
    }

    #[test]
    fn zero_width_is_exact(seed in any::<u64>(), nx in 1usize..6, nw in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f: Vec<f64> = (0..nx * nw).map(|_| rng.random_range(-3.0..3.0)).collect();
        let p = random_weights(&mut rng, nw);
        let table = RiskBoundTable::compute(0, &PointwiseBounds::exact(nx, nw, f.clone()).unwrap(), &p).unwrap();
        for x in 0..nx {
            let (m, s) = risk_of(&f[x * nw..(x + 1) * nw], p.weights());
            prop_assert!((table.f1()[x].lower - m).abs() < 1e-12 && (table.f1()[x].upper - m).abs() < 1e-12);
            prop_assert!((table.f2()[x].lower - s).abs() < 1e-9 && (table.f2()[x].upper - s).abs() < 1e-9);
        }
    }

    #[test]
    fn noisy_input_is_a_relabelled_environment(seed in any::<u64>(), nx in 1usize..6, nxi in 1usize..6) {
        // Bounds of f(x + ξ) under the noise law equal the bounds for an
        // environmental variable whose lattice column j holds x + ξ_j.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let design: Vec<f64> = (0..nx).map(|_| rng.random_range(-1.0..1.0)).collect();
        let offsets: Vec<f64> = (0..nxi).map(|_| rng.random_range(-0.3..0.3)).collect();
        let f = |z: f64| (3.0 * z).sin() + z * z;
        let half: Vec<f64> = (0..nx * nxi).map(|_| rng.random_range(0.0..0.5)).collect();
        let values: Vec<f64> = design.iter().flat_map(|&x| offsets.iter().map(move |&xi| f(x + xi))).collect();
        let pw = PointwiseBounds::new(
            nx,
            nxi,
            values.iter().zip(&half).map(|(v, h)| v - h).collect(),
            values.iter().zip(&half).map(|(v, h)| v + h).collect(),
        )
        .unwrap();
        let masses: Vec<f64> = (0..nxi).map(|_| rng.random_range(0.05..1.0)).collect();
        let noise = EnvDistribution::from_masses(offsets.iter().map(|&o| vec![o]).collect(), masses.clone()).unwrap();
        let env = EnvDistribution::from_masses(line(nxi), masses).unwrap();
        let a = noisy_input_bounds(0, &pw, &noise).unwrap();
        let b = RiskBoundTable::compute(0, &pw, &env).unwrap();
        prop_assert_eq!(a.f1(), b.f1());
        prop_assert_eq!(a.f2(), b.f2());
        assert_lift(&a, &values, noise.weights(), nxi)?;
    }
}

#[test]
fn single_precision_lift() {
    let pw = PointwiseBounds::<f32>::new(1, 3, vec![0.0, 0.5, -1.0], vec![0.2, 1.0, -0.5]).unwrap();
    let p = EnvDistribution::uniform(vec![vec![0.0f32], vec![1.0], vec![2.0]]).unwrap();
    let table = RiskBoundTable::compute(0, &pw, &p).unwrap();
    let f = [0.1f32, 0.7, -0.8];
    let mean = f.iter().sum::<f32>() / 3.0;
    let sd = (f.iter().map(|v| (v - mean) * (v - mean)).sum::<f32>() / 3.0).sqrt();
    assert!(table.f1()[0].contains(mean));
    assert!(table.f2()[0].contains(-sd));
}
