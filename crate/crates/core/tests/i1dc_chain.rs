use blindqc::i1dc::{client_theta, run_i1dc, run_i1dc_forced, t_from_s};
use blindqc::qsim::fidelity;
use blindqc::seed::rng_from_seed;
use blindqc::{plus_state, Angle8};
use rand::Rng;

fn exhaustive(k: usize) {
    let total = 8usize.pow(k as u32);
    for code in 0..total {
        let sigmas: Vec<Angle8> = (0..k).map(|i| Angle8::new(((code >> (3 * i)) & 7) as i64)).collect();
        let mut mass = 0.0;
        for branch in 0..(1usize << (k - 1)) {
            let s: Vec<bool> = (0..k - 1).map(|i| (branch >> i) & 1 == 1).collect();
            let Some((state, p)) = run_i1dc_forced(&sigmas, &s).unwrap() else {
                continue;
            };
            mass += p;
            let theta = client_theta(&sigmas, &t_from_s(&s)).unwrap();
            let f = fidelity(&state, &plus_state(theta)).unwrap();
            assert!(f >= 1.0 - 1e-9, "σ={sigmas:?} s={s:?} f={f}");
        }
        assert!((mass - 1.0).abs() < 1e-12);
    }
}

#[test]
fn every_branch_of_two_and_three_qubit_chains() {
    exhaustive(2);
    exhaustive(3);
}

#[test]
fn random_chains_up_to_ten_qubits() {
    let mut rng = rng_from_seed(0x1dc);
    for _ in 0..1000 {
        let k = rng.random_range(1..=10);
        let sigmas: Vec<Angle8> = (0..k).map(|_| Angle8::new(rng.random_range(0..8))).collect();
        let r = run_i1dc(&sigmas, &mut rng).unwrap();
        assert_eq!(r.t_bits, t_from_s(&r.s_bits));
        let theta = client_theta(&sigmas, &r.t_bits).unwrap();
        let f = fidelity(&r.final_state, &plus_state(theta)).unwrap();
        assert!(f >= 1.0 - 1e-9, "σ={sigmas:?} f={f}");
    }
}
