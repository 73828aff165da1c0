use proptest::prelude::*;
use uwb_sdp::decoder::nn_objective;
use uwb_sdp::system_model::build_code_matrices;
use uwb_sdp::{
    build_volterra, decode_exhaustive, encode_affine, encode_recursive, lift_to_sdp,
    model_decision, solve_sdp, synth_response, ChannelRealization, DecodingProblem, PulseSpec,
    SdpStatus, SolverSettings, SystemConfig, Tap,
};

fn signs(len: impl Into<prop::collection::SizeRange>) -> impl Strategy<Value = Vec<i8>> {
    prop::collection::vec(prop::bool::ANY.prop_map(|b| if b { 1i8 } else { -1 }), len)
}

/// Reference timing with an arbitrary amplitude code.
fn config(nb: usize, amplitude_code: Vec<i8>) -> SystemConfig {
    let np = amplitude_code.len();
    let hop = 8.0 / np as f64;
    SystemConfig::new(nb, 8.0, 8.0, amplitude_code, vec![hop; np]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recursive_and_affine_encoders_agree(
        (code, d) in (prop::sample::select(vec![2usize, 4, 6]), 1usize..12)
            .prop_flat_map(|(np, nb)| (signs(np), signs(nb)))
    ) {
        let cfg = config(d.len(), code);
        let codes = build_code_matrices(&cfg);
        prop_assert_eq!(encode_recursive(&d, &cfg), encode_affine(&d, &codes));
    }

    #[test]
    fn encoded_pulses_carry_data_in_consecutive_pairs(
        (code, d) in (prop::sample::select(vec![2usize, 4]), 1usize..10)
            .prop_flat_map(|(np, nb)| (signs(np), signs(nb)))
    ) {
        let cfg = config(d.len(), code.clone());
        let a = encode_recursive(&d, &cfg);
        let np = code.len();
        prop_assert_eq!(a[0], 1);
        for (n, &dn) in d.iter().enumerate() {
            for j in (0..np).step_by(2) {
                let k = n * np + j;
                prop_assert_eq!(a[k + 1], a[k] * code[j] * dn);
            }
        }
    }

    #[test]
    fn tap_list_round_trip(
        taps in prop::collection::vec((0.0f64..300.0, -2.0f64..2.0), 1..30)
    ) {
        let mut taps: Vec<Tap> = taps.into_iter().map(|(delay, amplitude)| Tap { delay, amplitude }).collect();
        taps.sort_by(|a, b| a.delay.total_cmp(&b.delay));
        let real = ChannelRealization { taps };
        let back = ChannelRealization::from_tap_list(&real.to_tap_list()).unwrap();
        prop_assert_eq!(back, real);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// The relaxation never exceeds the integer optimum, and the lifted
    /// integer optimum is feasible for it.
    #[test]
    fn relaxation_lower_bounds_enumeration(
        d in signs(4),
        taps in prop::collection::vec((0.0f64..12.0, -1.0f64..1.0), 1..5),
        noise in prop::collection::vec(-0.05f64..0.05, 4),
    ) {
        let mut taps: Vec<Tap> = taps.into_iter().map(|(delay, amplitude)| Tap { delay, amplitude }).collect();
        taps.sort_by(|a, b| a.delay.total_cmp(&b.delay));
        let g = synth_response(&ChannelRealization { taps }, &PulseSpec::default());
        let model = build_volterra(&g, &SystemConfig::reference().with_symbols(4).unwrap());
        let scale = g.energy().max(1e-12);
        let z: Vec<f64> = model_decision(&encode_recursive(&d, &model.config), &model)
            .iter()
            .zip(&noise)
            .map(|(v, e)| v + e * scale)
            .collect();
        let prob = DecodingProblem::new(z, &model).unwrap();
        let best = decode_exhaustive(&prob).unwrap();
        let inst = lift_to_sdp(&prob);
        let sol = solve_sdp(&inst.sdp, &SolverSettings::default()).unwrap();
        prop_assert_eq!(sol.status, SdpStatus::Optimal);
        prop_assert!(inst.unscale(sol.objective) <= best.objective + 1e-6 * (1.0 + best.objective));
        let u = inst.lift_vector(&best.d_hat, &prob);
        let lifted = &u * u.transpose();
        let report = uwb_sdp::sdp::check_solution(&inst.sdp, &lifted).unwrap();
        prop_assert!(report.max_abs_residual < 1e-9);
        prop_assert!((inst.unscale(report.objective) - nn_objective(&best.d_hat, &prob)).abs()
            <= 1e-9 * (1.0 + best.objective));
    }
}
