//! Independent reference computations shared by the oracle tests and the
//! acceptance runner.

use bayeslens::lenses::filter_step;
use bayeslens::support::finite_invert;
use bayeslens::*;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

const TOL: f64 = 1e-12;

fn dirichlet(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

fn sample(rng: &mut ChaCha8Rng, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Largest entrywise gap between lens filtering and the forward algorithm
/// over `chains` random 4-state HMMs with `len` observations each. Also
/// compares accumulated log-likelihoods.
pub fn hmm_max_error(seed: u64, chains: usize, len: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (states, symbols) = (4, 3);
    let x = FinObject::indexed(states).unwrap();
    let y = FinObject::new(["u", "v", "w"]).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..chains {
        let init = dirichlet(&mut rng, states);
        let trans: Vec<Vec<f64>> = (0..states).map(|_| dirichlet(&mut rng, states)).collect();
        let emit: Vec<Vec<f64>> = (0..states).map(|_| dirichlet(&mut rng, symbols)).collect();

        let mut hidden = sample(&mut rng, &init);
        let mut obs = Vec::with_capacity(len);
        for _ in 0..len {
            hidden = sample(&mut rng, &trans[hidden]);
            obs.push(sample(&mut rng, &emit[hidden]));
        }

        let dynamics = StochMap::from_rows(x.clone(), x.clone(), trans.clone()).unwrap();
        let observe = StochMap::from_rows(x.clone(), y.clone(), emit.clone()).unwrap();
        let mut belief = StochMap::state(x.clone(), init.clone()).unwrap();
        let mut alpha = init.clone();
        let (mut lens_ll, mut forward_ll) = (0.0, 0.0);
        for &o in &obs {
            let step = filter_step::<FinStoch64>(&belief, &dynamics, &observe, &o, &TOL).unwrap();
            belief = step.belief;
            lens_ll += step.log_predictive;

            let predicted: Vec<f64> = (0..states)
                .map(|j| (0..states).map(|i| alpha[i] * trans[i][j]).sum())
                .collect();
            let joint: Vec<f64> = (0..states).map(|j| predicted[j] * emit[j][o]).collect();
            let z: f64 = joint.iter().sum();
            forward_ll += z.ln();
            alpha = joint.iter().map(|v| v / z).collect();

            for (a, b) in belief.probs().iter().zip(&alpha) {
                worst = worst.max((a - b).abs());
            }
        }
        worst = worst.max((lens_ll - forward_ll).abs());
    }
    worst
}

/// Largest gap between lens filtering on the local-level model and the
/// scalar Kalman recursion, over mean, variance and log predictive density.
pub fn kalman_max_error(seed: u64, len: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (q, r) = (0.3, 0.8);
    let one = GaussObject::new(1);
    let noisy = |v: f64| {
        GaussMap::new(one.clone(), one.clone(), DMatrix::identity(1, 1), DVector::zeros(1), DMatrix::from_element(1, 1, v))
            .unwrap()
    };
    let (dynamics, observe) = (noisy(q), noisy(r));
    let (mut m, mut p) = (0.3, 2.0);
    let mut belief = GaussMap::state(DVector::from_element(1, m), DMatrix::from_element(1, 1, p)).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..len {
        let y: f64 = rng.random_range(-3.0..3.0);
        let step = filter_step::<Gauss64>(&belief, &dynamics, &observe, &DVector::from_element(1, y), &TOL).unwrap();
        belief = step.belief;

        let prior_var = p + q;
        let s = prior_var + r;
        let gain = prior_var / s;
        let log_pred = -0.5 * ((2.0 * std::f64::consts::PI * s).ln() + (y - m).powi(2) / s);
        m += gain * (y - m);
        p = (1.0 - gain) * prior_var;

        worst = worst
            .max((belief.mean()[0] - m).abs())
            .max((belief.cov()[(0, 0)] - p).abs())
            .max((step.log_predictive - log_pred).abs());
    }
    worst
}

/// Gaps in posterior mean and variance between Gaussian inversion and a
/// discretised finite inversion on a grid over [-8, 8] with step 1e-3, for
/// `problems` random scalar conjugate problems.
///
/// The finite model observes "hit" with probability proportional to the
/// Gaussian likelihood of the observed value, so its posterior given "hit"
/// is the discretised Gaussian posterior.
pub fn grid_max_error(seed: u64, problems: usize) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = 1e-3;
    let grid: Vec<f64> = (0..=16000).map(|k| -8.0 + k as f64 * step).collect();
    let x = FinObject::indexed(grid.len()).unwrap();
    let outcome = FinObject::new(["hit", "miss"]).unwrap();
    let (mut mean_err, mut var_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..problems {
        let m0: f64 = rng.random_range(-2.0..2.0);
        let v0: f64 = rng.random_range(0.3..2.0);
        let a: f64 = rng.random_range(0.5..1.5);
        let b: f64 = rng.random_range(-1.0..1.0);
        let r: f64 = rng.random_range(0.3..2.0);
        let obs = a * m0 + b + rng.random_range(-1.0..1.0);

        let prior = GaussMap::state(DVector::from_element(1, m0), DMatrix::from_element(1, 1, v0)).unwrap();
        let one = GaussObject::new(1);
        let f = GaussMap::new(one.clone(), one, DMatrix::from_element(1, 1, a), DVector::from_element(1, b), DMatrix::from_element(1, 1, r))
            .unwrap();
        let posterior = DVector::from_element(1, obs);
        let posterior = GaussMap::dirac(GaussObject::new(1), posterior)
            .unwrap()
            .compose(&f.invert(&prior, TOL).unwrap())
            .unwrap();

        let weights: Vec<f64> = grid.iter().map(|t| (-(t - m0).powi(2) / (2.0 * v0)).exp()).collect();
        let total: f64 = weights.iter().sum();
        let pi = StochMap::state(x.clone(), weights.iter().map(|w| w / total).collect()).unwrap();
        // Unnormalised likelihood scaled into [0, 1].
        let hit = |t: f64| (-(obs - a * t - b).powi(2) / (2.0 * r)).exp();
        let rows = grid.iter().map(|&t| vec![hit(t), 1.0 - hit(t)]).collect();
        let lik = StochMap::from_rows(x.clone(), outcome.clone(), rows).unwrap();
        let dagger = finite_invert(&lik, &pi, &TOL).unwrap();
        let post = dagger.row(0);
        let mean: f64 = grid.iter().zip(post).map(|(t, p)| t * p).sum();
        let var: f64 = grid.iter().zip(post).map(|(t, p)| (t - mean).powi(2) * p).sum();

        mean_err = mean_err.max((mean - posterior.mean()[0]).abs());
        var_err = var_err.max((var - posterior.cov()[(0, 0)]).abs());
    }
    (mean_err, var_err)
}
