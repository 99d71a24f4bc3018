#![allow(dead_code)]

use qnormal_core::random::{generate_planted, PlantedInstance, RandomSpec};
use qnormal_core::{Complex64, ComplexMatrix};

/// Seeded ensemble of planted instances with dimensions cycling through
/// `dims`.
pub fn ensemble(count: usize, base_seed: u64, dims: std::ops::RangeInclusive<usize>) -> Vec<PlantedInstance> {
    let span = dims.end() - dims.start() + 1;
    (0..count)
        .map(|k| {
            let spec = RandomSpec::new(dims.start() + k % span, base_seed + k as u64);
            generate_planted(&spec).expect("feasible spec")
        })
        .collect()
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `P·diag(λ)·P⁻¹` with `P = [[1, 1/√2], [0, 1/√2]]`.
pub fn planted_2x2(l1: Complex64, l2: Complex64) -> ComplexMatrix {
    let r = 0.5f64.sqrt();
    let p = ComplexMatrix::from_real_rows(&[vec![1.0, r], vec![0.0, r]]).unwrap();
    let p_inv = ComplexMatrix::from_real_rows(&[vec![1.0, -1.0], vec![0.0, 2f64.sqrt()]]).unwrap();
    let d = ComplexMatrix::from_diagonal(&[l1, l2]);
    &(&p * &d) * &p_inv
}

/// Greedy nearest matching; returns the worst distance.
pub fn match_spectra(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

/// Roots of the characteristic polynomial of a matrix of dimension ≤ 3,
/// from its invariants, by closed-form formulas polished with Newton steps.
pub fn charpoly_roots(m: &ComplexMatrix) -> Vec<Complex64> {
    let n = m.dim();
    let e = |i: usize, j: usize| m[(i, j)];
    match n {
        1 => vec![e(0, 0)],
        2 => {
            let tr = e(0, 0) + e(1, 1);
            let det = e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0);
            let disc = (tr * tr - det * 4.0).sqrt();
            vec![(tr + disc) / 2.0, (tr - disc) / 2.0]
        }
        3 => {
            // λ³ + a λ² + b λ + c
            let a = -(e(0, 0) + e(1, 1) + e(2, 2));
            let b = e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0) + e(0, 0) * e(2, 2) - e(0, 2) * e(2, 0) + e(1, 1) * e(2, 2)
                - e(1, 2) * e(2, 1);
            let det = e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
                - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
                + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
            let cc = -det;
            // depressed cubic t³ + p t + q with λ = t − a/3
            let p = b - a * a / 3.0;
            let q = a * a * a * (2.0 / 27.0) - a * b / 3.0 + cc;
            let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
            let mut u3 = -q / 2.0 + disc;
            if u3.norm() < (-q / 2.0 - disc).norm() {
                u3 = -q / 2.0 - disc;
            }
            let omega = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
            let u = u3.powf(1.0 / 3.0);
            let mut roots: Vec<Complex64> = (0..3)
                .map(|k| {
                    let uk = u * omega.powi(k);
                    let t = if uk.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        uk - p / (uk * 3.0)
                    };
                    t - a / 3.0
                })
                .collect();
            for r in roots.iter_mut() {
                for _ in 0..3 {
                    let f = ((*r + a) * *r + b) * *r + cc;
                    let df = (*r * 3.0 + a * 2.0) * *r + b;
                    if df.norm() > 1e-300 {
                        *r -= f / df;
                    }
                }
            }
            roots
        }
        _ => panic!("charpoly_roots supports dim <= 3"),
    }
}
