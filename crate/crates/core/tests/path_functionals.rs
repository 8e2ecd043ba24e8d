use affine2f::asymptotics::moments_by_simulation;
use affine2f::estimate::{denom_ab, denom_lse, denom_mtheta};
use affine2f::experiment::diagnostics::mean;
use affine2f::model::{MomentKind, ModelParams};
use affine2f::sim::{simulate_stationary_start, GridSpec, RngStream, SamplePath, Scheme};
use affine2f::stats::{ito_x_dx, stieltjes_sum, stieltjes_x_dx, sufficient_stats, sufficient_stats_from, time_integral};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn unit() -> ModelParams {
    ModelParams::new(1.0, 1.0, 1.0, 1.0).unwrap()
}

/// Every `k`-th grid point of `path`.
fn subsample(v: &[f64], k: usize) -> Vec<f64> {
    v.iter().step_by(k).copied().collect()
}

fn stationary(p: &ModelParams, t: f64, dt: f64, seed: u64, id: u64) -> SamplePath {
    simulate_stationary_start(p, GridSpec::new(t, dt).unwrap(), 5.0, Scheme::Exact, RngStream::new(seed, id)).unwrap()
}

fn rms(xs: &[f64]) -> f64 {
    mean(&xs.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt()
}

#[test]
fn inverse_y_stieltjes_sum_refines_like_sqrt_dt() {
    let p = unit();
    // Differences between observing the same path at spacing h and h/2.
    let gaps: Vec<(f64, f64)> = (0..200u64)
        .into_par_iter()
        .map(|i| {
            let path = stationary(&p, 10.0, 1.25e-3, 31, i);
            let at = |k: usize| {
                let y = subsample(&path.y, k);
                let inv: Vec<f64> = y.iter().map(|v| 1.0 / v).collect();
                stieltjes_sum(&inv, &y).unwrap()
            };
            (at(8) - at(4), at(2) - at(1))
        })
        .collect();
    let coarse = rms(&gaps.iter().map(|g| g.0).collect::<Vec<_>>());
    let fine = rms(&gaps.iter().map(|g| g.1).collect::<Vec<_>>());
    // A 4x step reduction should shrink the gap by about sqrt(4) = 2.
    let ratio = coarse / fine;
    assert!((1.5..3.0).contains(&ratio), "ratio {ratio} ({coarse} vs {fine})");
}

#[test]
fn sufficient_stats_converge_under_refinement() {
    let p = unit();
    let errs: Vec<[[f64; 13]; 2]> = (0..50u64)
        .into_par_iter()
        .map(|i| {
            let path = stationary(&p, 10.0, 1e-3, 32, i);
            let at = |k: usize| {
                let s = sufficient_stats_from(&subsample(&path.y, k), &subsample(&path.x, k), 1e-3 * k as f64).unwrap();
                let v = serde_json::to_value(s).unwrap();
                let mut out = [0.0; 13];
                for (slot, (_, val)) in out.iter_mut().zip(v.as_object().unwrap()) {
                    *slot = val.as_f64().unwrap();
                }
                out
            };
            let (fine, mid, coarse) = (at(1), at(10), at(100));
            let mut e = [[0.0; 13]; 2];
            for j in 0..13 {
                e[0][j] = (coarse[j] - fine[j]).powi(2);
                e[1][j] = (mid[j] - fine[j]).powi(2);
            }
            e
        })
        .collect();
    for j in 0..13 {
        let coarse: f64 = errs.iter().map(|e| e[0][j]).sum();
        let mid: f64 = errs.iter().map(|e| e[1][j]).sum();
        assert!(mid <= coarse, "field {j}: {mid} > {coarse}");
    }
}

#[test]
fn ito_identity_agrees_with_raw_sum_at_fine_step() {
    let p = unit();
    let pairs: Vec<(f64, f64)> = (0..200u64)
        .into_par_iter()
        .map(|i| {
            let path = stationary(&p, 10.0, 1e-3, 33, i);
            (ito_x_dx(&path), stieltjes_x_dx(&path))
        })
        .collect();
    let diff = rms(&pairs.iter().map(|(a, b)| a - b).collect::<Vec<_>>());
    let size = rms(&pairs.iter().map(|(a, _)| *a).collect::<Vec<_>>());
    assert!(diff < 0.05 * size, "rms difference {diff} vs rms value {size}");
}

#[test]
fn left_rule_and_trapezoid_differ_at_order_dt() {
    let p = unit();
    let path = stationary(&p, 10.0, 1e-3, 34, 0);
    let gap = |k: usize| {
        let y = subsample(&path.y, k);
        let dt = 1e-3 * k as f64;
        let trap: f64 = y.windows(2).map(|w| 0.5 * dt * (w[0] + w[1])).sum();
        (trap - time_integral(&y, dt)).abs()
    };
    let (g100, g10) = (gap(100), gap(10));
    assert!((g100 / g10 - 10.0).abs() < 1e-6 * 10.0 || g10 == 0.0, "{g100} vs {g10}");
}

#[test]
fn ergodic_average_of_x2_over_y() {
    let p = unit();
    let path = stationary(&p, 100.0, 1e-2, 35, 0);
    let s = sufficient_stats(&path).unwrap();
    let reference = moments_by_simulation(&p, 1e4, 1e-2, 100.0, RngStream::new(36, 0)).unwrap();
    let target = reference.simulated.get(MomentKind::Ex2OverY).unwrap();
    let avg = s.int_x2_over_y_ds / s.t;
    assert!((avg / target - 1.0).abs() < 0.15, "{avg} vs {target}");
}

#[test]
fn positivity_conditions_hold_on_random_paths() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let draws: Vec<ModelParams> = (0..1000)
        .map(|_| {
            ModelParams::new(
                rng.random_range(0.6..3.0),
                rng.random_range(0.3..3.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(0.3..3.0),
            )
            .unwrap()
        })
        .collect();
    let margins: Vec<[f64; 4]> = draws
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let path = stationary(p, 20.0, 1e-2, 38, i as u64);
            let s = sufficient_stats(&path).unwrap();
            [
                s.int_x2_over_y_ds,
                denom_ab(&s) / (s.int_y_ds * s.int_inv_y_ds),
                denom_mtheta(&s) / (s.int_x2_over_y_ds * s.int_inv_y_ds),
                denom_lse(&s) / (s.t * s.int_x2_ds),
            ]
        })
        .collect();
    for j in 0..4 {
        let min = margins.iter().map(|m| m[j]).fold(f64::INFINITY, f64::min);
        assert!(min > 0.0, "condition {j}: smallest relative margin {min}");
    }
}
