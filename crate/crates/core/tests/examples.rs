//! Worked examples with known answers, one block per operation.

use argmin_lab_core::asymptotics::{
    bernoulli_lindeberg, cox_conditions, logistic_condition, logsumexp_expand, poisson_condition,
    sandwich_with, LindebergOptions, Variability,
};
use argmin_lab_core::convex::{
    argmin_nearness_bound, solve_nonsmooth, solve_smooth, FnObjective, L1Objective, QuadraticModel,
    DEFAULT_GRID_POINTS,
};
use argmin_lab_core::estimators::*;
use argmin_lab_core::simulation::{
    population_projection, DesignSpec, Link, MeanFunction, ScenarioConfig,
};
use argmin_lab_core::{Error, Matrix, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn v(x: &[f64]) -> Vector {
    Vector::from_row_slice(x)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn loc(y: &[f64]) -> Dataset {
    Dataset::location(y.to_vec()).unwrap()
}

fn ones(n: usize) -> Matrix {
    Matrix::from_element(n, 1, 1.0)
}

/// Dense 1-D grid minimiser.
fn grid_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> f64 {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n)
        .map(|i| lo + i as f64 * step)
        .fold((f64::INFINITY, lo), |b, t| {
            let y = f(t);
            if y < b.0 {
                (y, t)
            } else {
                b
            }
        })
        .1
}

#[test]
fn smooth_solver_examples() {
    let half_norm = FnObjective::twice_differentiable(
        2,
        |b: &Vector| 0.5 * b.norm_squared(),
        |b: &Vector| b.clone(),
        |_: &Vector| Matrix::identity(2, 2),
    );
    let r = solve_smooth(&half_norm, &v(&[3.0, -7.0]), 1e-12).unwrap();
    assert!(r.argmin.norm() < 1e-10 && r.value.abs() < 1e-18);

    let q = QuadraticModel::new(Matrix::identity(2, 2), v(&[1.0, 2.0]), 0.0).unwrap();
    let r = solve_smooth(&q, &Vector::zeros(2), 1e-12).unwrap();
    assert!((r.argmin - v(&[-1.0, -2.0])).norm() < 1e-10);

    let sep = Dataset::binary(Matrix::from_row_slice(2, 1, &[-1.0, 1.0]), vec![0.0, 1.0]).unwrap();
    assert!(matches!(
        fit_logistic(&sep),
        Err(Error::MonotoneObjective(_))
    ));
}

#[test]
fn nonsmooth_solver_examples() {
    let median = |y: &[f64]| {
        let obj = L1Objective::least_absolute(ones(y.len()), v(y)).unwrap();
        solve_nonsmooth(&obj, &Vector::zeros(1), 1e-10)
            .unwrap()
            .argmin[0]
    };
    assert!(close(median(&[1.0, 2.0, 9.0]), 2.0, 1e-9));
    assert!(close(median(&[0.0, 10.0]), 5.0, 1e-9));

    let x = Matrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
    let y = [1.0, 2.0, 3.0];
    let obj = L1Objective::least_absolute(x.clone(), v(&y)).unwrap();
    let b = solve_nonsmooth(&obj, &Vector::zeros(2), 1e-10)
        .unwrap()
        .argmin;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=1000 {
        for j in 0..=1000 {
            let (b1, b2) = (-5.0 + 0.01 * i as f64, -5.0 + 0.01 * j as f64);
            let s: f64 = (0..3)
                .map(|k| (y[k] - b1 * x[(k, 0)] - b2 * x[(k, 1)]).abs())
                .sum();
            if s < best.0 - 1e-12 {
                best = (s, b1, b2);
            }
        }
    }
    assert!(close(b[0], 1.0, 1e-8) && close(b[1], 2.0, 1e-8));
    assert!(close(best.1, 1.0, 0.011) && close(best.2, 2.0, 0.011));
}

#[test]
fn nearness_examples() {
    let b = QuadraticModel::new(Matrix::identity(1, 1), Vector::zeros(1), 0.0).unwrap();
    let r = argmin_nearness_bound(&b, &b, 0.5, DEFAULT_GRID_POINTS).unwrap();
    assert!(
        r.delta_n == 0.0 && close(r.h_n, 0.125, 1e-15) && r.argmin_distance < 1e-8 && r.bound_holds
    );

    let shifted = QuadraticModel::new(Matrix::identity(1, 1), Vector::zeros(1), 3.0).unwrap();
    let r = argmin_nearness_bound(&shifted, &b, 0.5, DEFAULT_GRID_POINTS).unwrap();
    assert!(close(r.delta_n, 3.0, 1e-12) && r.argmin_distance < 1e-8 && r.bound_holds);

    // ½s² + 0.05 sin(20 s) is not convex, so only the implication is checked,
    // against a dense grid for the argmin.
    let a = FnObjective::value_only(1, |s: &Vector| {
        0.5 * s[0] * s[0] + 0.05 * (20.0 * s[0]).sin()
    });
    let r = argmin_nearness_bound(&a, &b, 0.5, 10_001).unwrap();
    assert!(r.delta_n <= 0.05 + 1e-12);
    let dense = grid_min(|s| 0.5 * s * s + 0.05 * (20.0 * s).sin(), -2.0, 2.0, 1e-5);
    assert!(dense.abs() <= 0.5);
}

#[test]
fn quantile_examples() {
    let q = |y: &[f64], p: f64| fit_quantile(&loc(y), p).unwrap().beta_hat[0];
    assert_eq!(q(&[1.0, 2.0, 9.0], 0.5), 2.0);
    assert_eq!(q(&[0.0, 10.0], 0.5), 5.0);
    // np = 1 is an integer: every point of [1, 2] minimises, the midpoint is returned.
    let t = q(&[1.0, 2.0, 3.0, 4.0], 0.25);
    assert_eq!(t, 1.5);
    let y = [1.0, 2.0, 3.0, 4.0];
    let loss = |t: f64| {
        y.iter()
            .map(|&v| quantile_check_loss(v, t, 0.25))
            .sum::<f64>()
    };
    assert!(close(loss(t), loss(grid_min(loss, 0.0, 5.0, 1e-3)), 1e-12));
}

#[test]
fn l_alpha_examples() {
    let f = |y: &[f64], a: f64| fit_l_alpha(&loc(y), a).unwrap().beta_hat[0];
    assert!(close(f(&[1.0, 2.0, 3.0], 2.0), 2.0, 1e-9));
    assert!(close(f(&[0.0, 1.0], 1.5), 0.5, 1e-9));
    let t = f(&[0.0, 0.0, 1.0], 1.5);
    let g = grid_min(
        |t| 2.0 * t.abs().powf(1.5) + (1.0 - t).abs().powf(1.5),
        0.0,
        0.5,
        1e-7,
    );
    assert!(t > 0.0 && t < 0.5 && close(t, g, 1e-6), "{t} {g}");
}

#[test]
fn least_squares_examples() {
    let d = Dataset::continuous(ones(3), vec![1.0, 2.0, 3.0]).unwrap();
    assert!(close(fit_ols(&d).unwrap().beta_hat[0], 2.0, 1e-12));
    let d = Dataset::continuous(Matrix::identity(2, 2), vec![3.0, 5.0]).unwrap();
    assert!((fit_ols(&d).unwrap().beta_hat - v(&[3.0, 5.0])).norm() < 1e-12);
}

#[test]
fn lad_examples() {
    let d = Dataset::continuous(ones(3), vec![1.0, 2.0, 9.0]).unwrap();
    assert!(close(fit_lad(&d).unwrap().beta_hat[0], 2.0, 1e-8));
    let d = Dataset::continuous(
        Matrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]),
        vec![1.0, 2.0, 3.0],
    )
    .unwrap();
    assert!((fit_lad(&d).unwrap().beta_hat - v(&[1.0, 2.0])).norm() < 1e-8);
    let d = Dataset::continuous(ones(4), vec![1.0, 2.0, 3.0, 1e6]).unwrap();
    assert!(close(fit_lad(&d).unwrap().beta_hat[0], 2.5, 1e-8));
}

#[test]
fn logistic_examples() {
    let y: Vec<f64> = (0..10).map(|i| f64::from(i < 3)).collect();
    let d = Dataset::binary(ones(10), y).unwrap();
    assert!(close(
        fit_logistic(&d).unwrap().beta_hat[0],
        (0.3f64 / 0.7).ln(),
        1e-8
    ));

    // Frequencies 2/10 at x = −1 and 9/10 at x = +1.
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for (x, hits) in [(-1.0, 2), (1.0, 9)] {
        for k in 0..10 {
            rows.extend([1.0, x]);
            y.push(f64::from(k < hits));
        }
    }
    let d = Dataset::binary(Matrix::from_row_slice(20, 2, &rows), y).unwrap();
    let b = fit_logistic(&d).unwrap().beta_hat;
    assert!(
        close(b[0], 0.4055, 1e-4) && close(b[1], 1.7918, 1e-4),
        "{b}"
    );
}

#[test]
fn poisson_examples() {
    let d = Dataset::count(ones(2), vec![2, 4]).unwrap();
    assert!(close(fit_poisson(&d).unwrap().beta_hat[0], 3f64.ln(), 1e-9));
    let d = Dataset::count(ones(2), vec![0, 0]).unwrap();
    assert!(matches!(fit_poisson(&d), Err(Error::MonotoneObjective(_))));
    // z ∈ {0, 1}, y = (1, 3) with y ≈ e rounded.
    let d = Dataset::count(Matrix::from_row_slice(2, 1, &[0.0, 1.0]), vec![1, 3]).unwrap();
    let b = fit_poisson(&d).unwrap().beta_hat[0];
    let nll = |b: f64| (b.exp() - 3.0 * b) + 1.0;
    assert!(close(b, grid_min(nll, -5.0, 5.0, 1e-6), 1e-6), "{b}");
}

#[test]
fn cox_examples() {
    let rec = |t: f64, e: bool| SurvivalRecord { time: t, event: e };
    let d = Dataset::survival(
        Matrix::from_row_slice(2, 1, &[0.0, 1.0]),
        vec![rec(1.0, true), rec(2.0, false)],
    )
    .unwrap();
    assert!(matches!(fit_cox(&d), Err(Error::MonotoneObjective(_))));

    let z = [0.0, 1.0, 0.0, 1.0];
    let d = Dataset::survival(
        Matrix::from_row_slice(4, 1, &z),
        (1..=4).map(|t| rec(t as f64, true)).collect(),
    )
    .unwrap();
    let b = fit_cox(&d).unwrap().beta_hat[0];
    let log_pl = |b: f64| -> f64 {
        (0..4)
            .map(|i| b * z[i] - (i..4).map(|j| (b * z[j]).exp()).sum::<f64>().ln())
            .sum()
    };
    assert!(
        close(b, grid_min(|b| -log_pl(b), -5.0, 5.0, 1e-5), 1e-4),
        "{b}"
    );

    let d = Dataset::survival(
        Matrix::from_element(3, 1, 2.0),
        (1..=3).map(|t| rec(t as f64, true)).collect(),
    )
    .unwrap();
    assert!(matches!(fit_cox(&d), Err(Error::RankDeficient)));
}

#[test]
fn exp_hazard_examples() {
    let rec = |t: f64, e: bool| SurvivalRecord { time: t, event: e };
    let d = Dataset::survival(ones(2), vec![rec(1.0, true), rec(2.0, true)]).unwrap();
    let b = fit_exp_hazard(&d, &Baseline::Constant(1.0), None)
        .unwrap()
        .beta_hat[0];
    assert!(close(b, (2.0f64 / 3.0).ln(), 1e-9));
    let d = Dataset::survival(ones(2), vec![rec(1.0, false), rec(2.0, false)]).unwrap();
    assert!(matches!(
        fit_exp_hazard(&d, &Baseline::Constant(1.0), None),
        Err(Error::MonotoneObjective(_))
    ));

    let z = [0.5, -1.0, 2.0];
    let t = [1.0, 0.5, 0.2];
    let d = Dataset::survival(
        Matrix::from_row_slice(3, 1, &z),
        vec![rec(t[0], true), rec(t[1], true), rec(t[2], false)],
    )
    .unwrap();
    let b = fit_exp_hazard(&d, &Baseline::Constant(1.0), None)
        .unwrap()
        .beta_hat[0];
    let nll = |b: f64| (0..3).map(|i| (b * z[i]).exp() * t[i]).sum::<f64>() - b * (z[0] + z[1]);
    assert!(close(b, grid_min(nll, -5.0, 5.0, 1e-6), 1e-5), "{b}");
}

#[test]
fn double_exponential_examples() {
    let f = fit_double_exponential(&loc(&[1.0, 2.0, 3.0])).unwrap();
    assert!(close(f.mu_hat, 2.0, 1e-12) && close(f.tau_hat, 2.0 / 3.0, 1e-12));
    let f = fit_double_exponential(&loc(&[0.0, 10.0])).unwrap();
    assert!(close(f.mu_hat, 5.0, 1e-12) && close(f.tau_hat, 5.0, 1e-12));
    assert!(matches!(
        fit_double_exponential(&loc(&[1.0, 1.0])),
        Err(Error::DegenerateData(_))
    ));
}

#[test]
fn markov_examples() {
    let m = |p: &[usize]| {
        fit_markov_pl(
            &Dataset::markov(p.to_vec(), 2).unwrap(),
            CouplingModel::Agreement,
        )
    };
    assert!(matches!(
        m(&[1, 1, 1, 1, 1]),
        Err(Error::MonotoneObjective(_))
    ));
    assert!(matches!(
        m(&[1, 2, 1, 2, 1]),
        Err(Error::MonotoneObjective(_))
    ));
}

#[test]
fn posterior_examples() {
    let s = posterior_mean_1d(&loc(&[-1.0, 0.0, 1.0]), &Prior::flat()).unwrap();
    assert!(s.theta_star.abs() < 1e-9 && s.gap < 1e-8);

    let y = [0.0, 0.0, 1.0];
    let s = posterior_mean_1d(&loc(&y), &Prior::flat()).unwrap();
    let (mut m0, mut m1) = (0.0, 0.0);
    let h = 1e-4;
    for i in 0..=400_000 {
        let t = -20.0 + i as f64 * h;
        let w = (-y.iter().map(|v| (v - t).abs()).sum::<f64>()).exp();
        m0 += w;
        m1 += w * t;
    }
    assert!(
        close(s.theta_star, m1 / m0, 1e-6),
        "{} {}",
        s.theta_star,
        m1 / m0
    );
}

#[test]
fn expansion_examples() {
    let r = logsumexp_expand(&[1.0, 2.0, 3.0], &[0.7, 0.7, 0.7], 1.3).unwrap();
    assert!(r.remainder.abs() < 1e-14 && r.quadratic.abs() < 1e-14);

    let t = 0.3f64;
    let r = logsumexp_expand(&[1.0, 1.0], &[0.0, 1.0], t).unwrap();
    let expected = ((1.0 + t.exp()) / 2.0).ln() - 0.15 - 0.01125;
    assert!(
        close(r.linear, 0.5, 1e-15) && close(r.quadratic, 0.25, 1e-15) && close(r.mu, 0.5, 1e-15)
    );
    assert!(close(r.remainder, expected, 1e-15) && r.bounds_hold());
}

#[test]
fn lindeberg_examples() {
    let opts = LindebergOptions::default();
    let n = 400;
    let z = vec![2.0 / (n as f64).sqrt(); n];
    let r = bernoulli_lindeberg(&z, &vec![0.5; n], &opts).unwrap();
    // After standardisation |z_i| = 1/√n·2·… stays below every δ with n > 4/δ².
    let i = r.delta_grid.iter().position(|&d| d == 0.2).unwrap();
    assert_eq!(r.n_values[i], 0.0);

    let r = bernoulli_lindeberg(&[2.0], &[0.5], &opts).unwrap();
    let i = r.delta_grid.iter().position(|&d| d == 1.0).unwrap();
    assert!(close(r.n_values[i], 1.0, 1e-12) && !r.passes);

    // Gaussian design, n = 1000, p = 3. Standardised rows have norm near
    // √(p / (n q(1−q))) ≈ 0.11, so the tail mass is checked at δ = 0.5.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = Matrix::from_fn(1000, 3, |_, _| rng.sample::<f64, _>(StandardNormal));
    let beta = v(&[0.1, 0.2, -0.3]);
    let r = logistic_condition(
        &x,
        &beta,
        &LindebergOptions {
            delta: 0.5,
            ..opts.clone()
        },
    )
    .unwrap();
    assert!(
        r.n_at_delta < 0.01 && r.invariants_hold(),
        "{}",
        r.n_at_delta
    );
    let total = logistic_condition(
        &x,
        &beta,
        &LindebergOptions {
            delta: 1e-9,
            ..opts.clone()
        },
    )
    .unwrap();
    assert!(close(total.n_at_delta, 3.0, 1e-9));

    let mut x = Matrix::from_element(50, 1, 0.01);
    x[(0, 0)] = 100.0;
    assert!(!poisson_condition(&x, &v(&[0.0]), &opts).unwrap().passes);
}

#[test]
fn sandwich_examples() {
    // Orthonormal-style design, homoscedastic residuals ±1: σ̂² (X'X)⁻¹.
    let x = Matrix::from_row_slice(4, 2, &[1.0, 1.0, 1.0, -1.0, 1.0, 1.0, 1.0, -1.0]);
    let d = Dataset::continuous(x, vec![3.0, 1.0, 1.0, -1.0]).unwrap();
    let b = fit_ols(&d).unwrap().beta_hat;
    let s = sandwich_with(&Model::Ols, &d, &b, Variability::Model).unwrap();
    let c = s.assembled().unwrap();
    // Residuals are ±1, σ̂² = 4/(4−2) = 2 and X'X = 4I.
    assert!(
        close(c[(0, 0)], 0.5, 1e-12) && close(c[(1, 1)], 0.5, 1e-12) && c[(0, 1)].abs() < 1e-12
    );

    let rec = |t: f64| SurvivalRecord {
        time: t,
        event: true,
    };
    let d = Dataset::survival(
        Matrix::from_element(3, 1, 1.0),
        vec![rec(1.0), rec(2.0), rec(3.0)],
    )
    .unwrap();
    assert!(matches!(
        sandwich_with(&Model::Cox, &d, &v(&[0.0]), Variability::Model),
        Err(Error::SingularInformation)
    ));
}

#[test]
fn cox_condition_examples() {
    let rec = |t: f64| SurvivalRecord {
        time: t,
        event: true,
    };
    let d = Dataset::survival(
        Matrix::from_element(3, 1, 1.0),
        vec![rec(1.0), rec(2.0), rec(3.0)],
    )
    .unwrap();
    let c = cox_conditions(&d, &v(&[0.3]), &[0.5, 1.5]).unwrap();
    assert!(c.j.iter().all(|m| m[(0, 0)].abs() < 1e-15));
    // Two subjects, z = (0, 1), β = 0, both at risk: n⁻¹ Σ (z − z̄)² = ½·(¼ + ¼) = ¼… times risk mass ½.
    let d = Dataset::survival(
        Matrix::from_row_slice(2, 1, &[0.0, 1.0]),
        vec![rec(1.0), rec(2.0)],
    )
    .unwrap();
    let c = cox_conditions(&d, &v(&[0.0]), &[0.5]).unwrap();
    assert!(close(c.j[0][(0, 0)], 0.25, 1e-15));
}

#[test]
fn projection_examples() {
    let mut s = ScenarioConfig {
        model: Model::Logistic,
        n: 100,
        replications: 100,
        theta0: vec![],
        design: DesignSpec::Discrete {
            support: vec![vec![1.0, -1.0], vec![1.0, 1.0]],
            weights: vec![1.0, 1.0],
            fixed: false,
        },
        mean: MeanFunction::Linear,
        scale: Default::default(),
        link: Link::Table {
            values: vec![0.2, 0.9],
        },
        error: argmin_lab_core::distributions::ErrorLaw::Normal,
        seed: 0,
        censoring: None,
        states: 2,
    };
    let b = population_projection(&s).unwrap();
    assert!(close(b[0], 0.4055, 1e-4) && close(b[1], 1.7918, 1e-4));

    s.model = Model::Ols;
    s.link = Link::Logistic;
    s.design = DesignSpec::Discrete {
        support: vec![vec![1.0, -1.0], vec![1.0, 0.0], vec![1.0, 1.0]],
        weights: vec![1.0, 1.0, 1.0],
        fixed: false,
    };
    s.mean = MeanFunction::Polynomial {
        coefficients: vec![0.0, 0.0, 1.0],
    };
    let b = population_projection(&s).unwrap();
    assert!(b[1].abs() < 1e-12 && close(b[0], 2.0 / 3.0, 1e-12));

    s.model = Model::Lad;
    s.theta0 = vec![0.0];
    s.design = DesignSpec::Discrete {
        support: vec![vec![1.0]],
        weights: vec![1.0],
        fixed: false,
    };
    s.mean = MeanFunction::Polynomial {
        coefficients: vec![3.5],
    };
    assert!(close(population_projection(&s).unwrap()[0], 3.5, 1e-8));
}
