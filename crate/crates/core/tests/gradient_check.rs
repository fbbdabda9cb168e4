mod support;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn jacobian_and_gradient_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..50 {
        let (net, inputs, targets) = support::random_instance(&mut rng);
        let (jac, grad) = support::finite_difference_errors(&net, &inputs, &targets);
        assert!(jac < 1e-6, "case {case}: jacobian relative error {jac:e}");
        assert!(grad < 1e-6, "case {case}: gradient relative error {grad:e}");
    }
}

#[test]
fn gradient_is_jacobian_transpose_times_residuals() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let (net, inputs, targets) = support::random_instance(&mut rng);
        let jac = net.jacobian(&inputs).unwrap();
        let r = nalgebra::DVector::from_vec(net.residuals(&inputs, &targets).unwrap());
        let expect = jac.tr_mul(&r);
        let grad = net.gradient(&inputs, &targets).unwrap();
        for (g, e) in grad.iter().zip(expect.iter()) {
            assert!((g - e).abs() <= 1e-12 * e.abs().max(1.0));
        }
    }
}
