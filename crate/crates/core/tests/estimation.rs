use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sml_volterra::adaptive::params::gradient_power_estimate;
use sml_volterra::adaptive::step_bound;
use sml_volterra::estimation::moments::{lag_product_moment, standard_normal_moment};
use sml_volterra::estimation::{
    curvature_trace, default_init, gaussian_correlations, max_curvature_eigenvalue, mse,
    normal_residual, steepest_descent, steepest_descent_until, CONVERGENCE_RESIDUAL,
};
use sml_volterra::experiments::plants::random_decomposable_plant;
use sml_volterra::volterra::sml_output;
use sml_volterra::{DelayLine, Error, Plant, RankOneKernel};

fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

#[test]
fn gaussian_moments_match_sampling() {
    assert_eq!(standard_normal_moment(4), 3.0);
    assert_eq!(standard_normal_moment(6), 15.0);
    assert_eq!(standard_normal_moment(5), 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x = normals(&mut rng, 1_000_000);
    let m4 = x.iter().map(|v| v.powi(4)).sum::<f64>() / x.len() as f64;
    assert!((m4 - 3.0).abs() < 0.03, "{m4}");
    // E[u0² u1²] = 1 and E[u0³ u1] = 0 over a white line.
    assert_eq!(lag_product_moment(&[0, 0, 1, 1]), 1.0);
    assert_eq!(lag_product_moment(&[0, 0, 0, 1]), 0.0);
    assert_eq!(lag_product_moment(&[2, 2, 2, 2]), 3.0);
}

#[test]
fn exact_mse_matches_monte_carlo() {
    let plant = RankOneKernel::new(vec![vec![0.8, -0.3, 0.4], vec![0.5, 0.6, -0.2]]).unwrap();
    let w = RankOneKernel::new(vec![vec![0.5, 0.1, 0.0], vec![0.3, 0.9, 0.2]]).unwrap();
    let noise = 0.05;
    let c = gaussian_correlations(&Plant::RankOne(plant.clone()), noise).unwrap();
    let exact = mse(&w, &c).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut line = DelayLine::new(3).unwrap();
    let n = 1_000_000;
    let mut acc = 0.0;
    for _ in 0..n {
        line.push(StandardNormal.sample(&mut rng));
        let v: f64 = StandardNormal.sample(&mut rng);
        let u = line.regressor();
        let e = sml_output(u, &plant).unwrap() + noise.sqrt() * v - sml_output(u, &w).unwrap();
        acc += e * e;
    }
    let mc = acc / n as f64;
    assert!((mc - exact).abs() < 0.01 * exact, "exact {exact}, sampled {mc}");
}

#[test]
fn curvature_trace_matches_its_estimate() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for order in 1..=3 {
        let p = random_decomposable_plant(order, 4, &mut rng).unwrap();
        let exact = curvature_trace(&p);
        let mc = gradient_power_estimate(&p, 400_000, 3);
        assert!((mc - exact).abs() < 0.03 * exact, "K={order}: {exact} vs {mc}");
    }
}

#[test]
fn descent_reaches_the_floor_and_diverges_past_two_over_lambda() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let p = random_decomposable_plant(2, 4, &mut rng).unwrap();
    let c = gaussian_correlations(&Plant::RankOne(p.clone()), 1e-3).unwrap();
    let mu = step_bound(&p, 20_000, 1).unwrap();
    let init = default_init(2, 4).unwrap();
    let t = steepest_descent_until(&c, mu, 100_000, &init, CONVERGENCE_RESIDUAL).unwrap();
    let w = t.final_kernel(2);
    assert!((t.final_mse() - 1e-3).abs() < 1e-9);
    assert!(normal_residual(&w, &c).unwrap() < 1e-6);
    assert!(t.converged_at.is_some());

    // The minimizers form a curve (a w_1, w_2 / a). Its flattest point is the
    // balanced one; 2/λ_max there separates convergence from escape.
    let (n1, n2) = (norm(w.factor(0)), norm(w.factor(1)));
    let a = (n2 / n1).sqrt();
    let balanced = RankOneKernel::new(vec![
        w.factor(0).iter().map(|x| x * a).collect(),
        w.factor(1).iter().map(|x| x / a).collect(),
    ])
    .unwrap();
    let edge = 2.0 / max_curvature_eigenvalue(&balanced);
    assert!(edge > mu);
    let t = steepest_descent(&c, 0.9 * edge, 5000, &init).unwrap();
    assert!((t.final_mse() - 1e-3).abs() < 1e-8);
    match steepest_descent(&c, 2.5 * edge, 20_000, &balanced) {
        Err(Error::Diverged { .. }) => {}
        other => panic!("expected divergence, got {:?}", other.map(|t| t.final_mse())),
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn descent_trace_shape() {
    let p = RankOneKernel::new(vec![vec![1.0, 0.5], vec![0.2, -0.4]]).unwrap();
    let c = gaussian_correlations(&Plant::RankOne(p), 0.0).unwrap();
    let t = steepest_descent(&c, 0.01, 10, &default_init(2, 2).unwrap()).unwrap();
    assert_eq!(t.len(), 11);
    assert_eq!(t.iterates[0], vec![1.0, 0.0, 0.0, 0.0]);
    assert!(t.mse.windows(2).all(|w| w[1] <= w[0]));
    let csv = t.to_csv_string();
    assert!(csv.starts_with("iteration,mse,residual\n"));
    assert_eq!(csv.lines().count(), 12);
}
