use oilcast_core::network::{Activation, Layout, Network};
use oilcast_core::trainer::{fit, Algorithm, Batch, TrainOptions};

fn sine_grid() -> (Vec<f64>, Vec<f64>) {
    let x: Vec<f64> = (0..200).map(|i| i as f64 * 2.0 * std::f64::consts::PI / 199.0).collect();
    let y = x.iter().map(|t| t.sin()).collect();
    (x, y)
}

#[test]
fn gradient_descent_needs_more_iterations_than_lm() {
    let (x, y) = sine_grid();
    let layout = Layout::new(1, 8, 1, Activation::Tanh).unwrap();
    for seed in 0..5 {
        let lm_opts = TrainOptions { max_iterations: 30, ..Default::default() };
        let lm = fit(Network::init(layout, seed), Batch::new(&x, &y), &lm_opts).unwrap();
        let lm_loss = *lm.loss_curve.last().unwrap();

        let gd_opts = TrainOptions { algorithm: Algorithm::Gd, max_iterations: 2000, ..lm_opts };
        let gd = fit(Network::init(layout, seed), Batch::new(&x, &y), &gd_opts).unwrap();
        let reached = gd.loss_curve.iter().position(|&l| l <= lm_loss);
        assert!(
            reached.is_none_or(|it| it > lm.iterations_used),
            "seed {seed}: gd reached {lm_loss:e} at {reached:?}, lm used {}",
            lm.iterations_used
        );
    }
}

#[test]
fn training_is_deterministic() {
    let (x, y) = sine_grid();
    let layout = Layout::new(1, 4, 1, Activation::Logistic).unwrap();
    let opts = TrainOptions { max_iterations: 40, ..Default::default() };
    let a = fit(Network::init(layout, 5), Batch::new(&x, &y), &opts).unwrap();
    let b = fit(Network::init(layout, 5), Batch::new(&x, &y), &opts).unwrap();
    assert_eq!(a, b);
}
