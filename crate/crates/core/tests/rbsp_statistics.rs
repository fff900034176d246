use blindqc::plus_state;
use blindqc::qsim::fidelity;
use blindqc::rbsp::{run_rbsp, ChannelModel, RbspParams, ServerStrategy};
use blindqc::seed::trial_rng;

#[test]
fn honest_client_angle_is_uniform() {
    let params = RbspParams::new(1000, ChannelModel::new(0.5).unwrap(), ServerStrategy::Honest);
    let trials = 4000u64;
    let mut counts = [0u64; 8];
    for i in 0..trials {
        let out = run_rbsp(&params, &mut trial_rng(2024, i)).unwrap();
        if out.aborted {
            continue;
        }
        let theta = out.theta_client.unwrap();
        counts[theta.index() as usize] += 1;
        if !out.fail_event {
            let f = fidelity(out.server_qubit.as_ref().unwrap(), &plus_state(theta)).unwrap();
            assert!(f > 1.0 - 1e-9);
        }
    }
    let kept: u64 = counts.iter().sum();
    assert!(kept as f64 > 0.99 * trials as f64);
    let expected = kept as f64 / 8.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 7 degrees of freedom; 24.32 is the 0.999 quantile.
    assert!(chi2 < 24.32, "χ² = {chi2}, counts = {counts:?}");
}
