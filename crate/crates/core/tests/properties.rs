use std::f64::consts::PI;

use gdls_core::crb::crb_frequencies;
use gdls_core::model::{
    add_noise, build_manifold, circular_distance, elevation_to_frequency, frequency_to_elevation,
    steering_derivative, steering_vector, synthesize, wrap_unit, ComplexAmplitudes, FrequencyVector,
    Snapshot, TomoGeometry, C64,
};
use gdls_core::objective::{basin_radius, evaluate, ls_amplitudes, projection_energy, sad};
use gdls_core::solvers::{gdls, match_frequencies, GdlsConfig};
use proptest::prelude::*;

const N: usize = 16;

/// `l` frequencies on the circle with every circular gap above `min_sep`.
fn separated(l: usize, min_sep: f64) -> impl Strategy<Value = Vec<f64>> {
    let slack = (1.0 - l as f64 * min_sep).max(0.0) / l as f64;
    (0.0..1.0f64, prop::collection::vec(1e-3..slack, l)).prop_map(move |(start, extra)| {
        let mut f = start;
        extra
            .iter()
            .map(|e| {
                let v = wrap_unit(f);
                f += min_sep + e;
                v
            })
            .collect()
    })
}

fn amplitudes(l: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((0.5..20.0f64, 0.0..1.0f64), l)
        .prop_map(|v| v.into_iter().map(|(m, p)| C64::from_polar(m, 2.0 * PI * p)).collect())
}

fn noisy(f: &[f64], c: &[C64], n: usize, snr_db: f64, seed: u64) -> Snapshot {
    let x = synthesize(
        &FrequencyVector::new(f.to_vec()).unwrap(),
        &ComplexAmplitudes::new(c.to_vec()),
        n,
    )
    .unwrap();
    add_noise(&x, snr_db, seed).unwrap()
}

/// A signal instance plus an independent set of trial frequencies.
fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<C64>, Vec<f64>, u64)> {
    let min_sep = 2.0 / (N as f64 - 1.0) + 1e-3;
    (1usize..=4).prop_flat_map(move |l| {
        (separated(l, min_sep), amplitudes(l), separated(l, min_sep), any::<u64>())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn steering_vectors_have_unit_modulus_entries(f in -3.0..3.0f64, n in 1usize..64) {
        let a = steering_vector(f, n);
        prop_assert_eq!(a.len(), n);
        for v in &a {
            prop_assert!((v.norm() - 1.0).abs() < 1e-12);
        }
        let energy: f64 = a.iter().map(|v| v.norm_sqr()).sum();
        prop_assert!((energy - n as f64).abs() < 1e-9);
    }

    #[test]
    fn steering_derivative_matches_central_difference(f in 0.0..1.0f64, n in 2usize..40) {
        let h = 1e-6;
        let (plus, minus) = (steering_vector(f + h, n), steering_vector(f - h, n));
        for (k, d) in steering_derivative(f, n).iter().enumerate() {
            let fd = (plus[k] - minus[k]) / (2.0 * h);
            prop_assert!((fd - d).norm() <= 1e-5 * d.norm().max(1.0), "k = {}", k);
        }
    }

    #[test]
    fn synthesis_is_linear_in_amplitudes(
        f in separated(3, 0.05),
        c1 in amplitudes(3),
        c2 in amplitudes(3),
        alpha in -3.0..3.0f64,
    ) {
        let fv = FrequencyVector::new(f).unwrap();
        let mix: Vec<C64> = c1.iter().zip(&c2).map(|(a, b)| a * alpha + b).collect();
        let lhs = synthesize(&fv, &ComplexAmplitudes::new(mix), N).unwrap();
        let x1 = synthesize(&fv, &ComplexAmplitudes::new(c1), N).unwrap();
        let x2 = synthesize(&fv, &ComplexAmplitudes::new(c2), N).unwrap();
        for ((l, a), b) in lhs.samples().iter().zip(x1.samples()).zip(x2.samples()) {
            prop_assert!((l - (a * alpha + b)).norm() < 1e-9 * (1.0 + l.norm()));
        }
    }

    #[test]
    fn elevation_frequency_round_trip(frac in 0.0..0.999f64) {
        let g = TomoGeometry::ku_band_reference();
        let s = frac * g.ambiguity_span();
        let back = frequency_to_elevation(elevation_to_frequency(s, &g), &g);
        prop_assert!((back - s).abs() < 1e-9 * g.ambiguity_span());
    }

    #[test]
    fn gradient_matches_central_difference((f_true, c, f, seed) in instance()) {
        let y = noisy(&f_true, &c, N, 20.0, seed);
        let fv = FrequencyVector::new(f.clone()).unwrap();
        let eval = evaluate(&y, &fv).unwrap();
        let h = 1e-6;
        for l in 0..f.len() {
            let shifted = |d: f64| {
                let mut g = f.clone();
                g[l] += d;
                evaluate(&y, &FrequencyVector::new(g).unwrap()).unwrap().cost
            };
            let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
            let g = eval.gradient[l];
            // Cost roundoff over 2h is the floor below which no difference quotient resolves.
            let floor = 1e-16 * y.energy() / h;
            prop_assert!(
                (g - fd).abs() <= 1e-5 * g.abs().max(fd.abs()) + floor,
                "l = {}: analytic {} vs fd {}", l, g, fd
            );
        }
    }

    #[test]
    fn cost_plus_projection_energy_is_signal_energy((f_true, c, f, seed) in instance()) {
        let y = noisy(&f_true, &c, N, 10.0, seed);
        let fv = FrequencyVector::new(f).unwrap();
        let eval = evaluate(&y, &fv).unwrap();
        let energy = y.energy();
        let proj = projection_energy(&y, &fv).unwrap();
        prop_assert!((eval.cost + proj - energy).abs() <= 1e-10 * energy);
        prop_assert!(eval.cost >= 0.0 && eval.cost <= energy * (1.0 + 1e-12));
        prop_assert!((eval.cost - eval.residual.energy()).abs() <= 1e-10 * energy);
    }

    #[test]
    fn residual_is_orthogonal_to_the_manifold((f_true, c, f, seed) in instance()) {
        let y = noisy(&f_true, &c, N, 10.0, seed);
        let fv = FrequencyVector::new(f).unwrap();
        let a = build_manifold(&fv, N);
        let chat = ls_amplitudes(&y, &a).unwrap();
        let fitted = synthesize(&fv, &chat, N).unwrap();
        let norm = y.energy().sqrt();
        for l in 0..fv.len() {
            let col = a.columns().column(l);
            let dot: C64 = col
                .iter()
                .zip(y.samples().iter().zip(fitted.samples()))
                .map(|(ak, (yk, xk))| ak.conj() * (yk - xk))
                .sum();
            prop_assert!(dot.norm() < 1e-8 * norm);
        }
    }

    #[test]
    fn sad_matches_steering_correlation(f in 0.0..1.0f64, g in 0.0..1.0f64, n in 2usize..64) {
        let (a, b) = (steering_vector(f, n), steering_vector(g, n));
        let corr: C64 = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum();
        let s = sad(PI * circular_distance(f, g), n).abs();
        prop_assert!((corr.norm() - s).abs() <= 1e-9 * (n as f64));
    }

    #[test]
    fn permuting_frequencies_permutes_gradient_and_amplitudes((f_true, c, f, seed) in instance()) {
        let y = noisy(&f_true, &c, N, 20.0, seed);
        let base = evaluate(&y, &FrequencyVector::new(f.clone()).unwrap()).unwrap();
        let mut rev = f.clone();
        rev.reverse();
        let flipped = evaluate(&y, &FrequencyVector::new(rev).unwrap()).unwrap();
        let l = f.len();
        prop_assert!((base.cost - flipped.cost).abs() <= 1e-10 * y.energy());
        let gscale = base.gradient.iter().fold(1.0f64, |m, g| m.max(g.abs()));
        for i in 0..l {
            prop_assert!((base.gradient[i] - flipped.gradient[l - 1 - i]).abs() <= 1e-8 * gscale);
            let (a, b) = (base.amplitudes.as_slice()[i], flipped.amplitudes.as_slice()[l - 1 - i]);
            prop_assert!((a - b).norm() <= 1e-8 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn descent_never_increases_cost((f_true, c, f, seed) in instance()) {
        let y = noisy(&f_true, &c, N, 15.0, seed);
        let init = FrequencyVector::new(f).unwrap();
        let mut cfg = GdlsConfig::for_samples(N, init.len());
        cfg.record_trajectory = true;
        cfg.max_iterations = 300;
        let start = evaluate(&y, &init).unwrap().cost;
        let out = gdls(&y, &init, &cfg).unwrap();
        prop_assert!(out.final_cost <= start);
        let traj = out.trajectory.unwrap();
        for w in traj.windows(2) {
            prop_assert!(w[1].1 <= w[0].1, "cost rose at iteration {}", w[1].0);
        }
        let again = evaluate(&y, &out.frequencies).unwrap().cost;
        prop_assert!((again - out.final_cost).abs() <= 1e-10 * y.energy().max(1e-300));
    }

    #[test]
    fn crb_is_phase_invariant(f in separated(3, 0.1), c in amplitudes(3), rot in 0.0..1.0f64) {
        let fv = FrequencyVector::new(f).unwrap();
        let turn = C64::from_polar(1.0, 2.0 * PI * rot);
        let rotated: Vec<C64> = c.iter().map(|v| v * turn).collect();
        let a = crb_frequencies(&fv, &ComplexAmplitudes::new(c), N, 20.0).unwrap();
        let b = crb_frequencies(&fv, &ComplexAmplitudes::new(rotated), N, 20.0).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(*x > 0.0);
            prop_assert!((x - y).abs() <= 1e-8 * x);
        }
    }

    #[test]
    fn matching_undoes_any_permutation(f in separated(4, 0.05), perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle()) {
        let truth = FrequencyVector::new(f.clone()).unwrap();
        let est = FrequencyVector::new(perm.iter().map(|&i| f[i]).collect()).unwrap();
        let m = match_frequencies(&est, &truth);
        prop_assert!(m.max_error < 1e-15);
        for (l, &e) in m.est_index.iter().enumerate() {
            prop_assert_eq!(perm[e], l);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn noiseless_descent_inside_the_basin_recovers_the_truth(
        f in separated(2, 2.0 / (N as f64 - 1.0) + 1e-3),
        c in amplitudes(2),
        offsets in prop::collection::vec(-1.0..1.0f64, 2),
    ) {
        let radius = basin_radius(N) / 2.0;
        let truth = FrequencyVector::new(f.clone()).unwrap();
        let y = synthesize(&truth, &ComplexAmplitudes::new(c), N).unwrap();
        let init = FrequencyVector::new(
            f.iter().zip(&offsets).map(|(v, o)| wrap_unit(v + 0.99 * radius * o)).collect(),
        ).unwrap();
        let mut cfg = GdlsConfig::for_samples(N, 2);
        cfg.max_iterations = 20_000;
        let out = gdls(&y, &init, &cfg).unwrap();
        let m = match_frequencies(&out.frequencies, &truth);
        prop_assert!(m.max_error < 1e-6, "max error {}", m.max_error);
    }
}
