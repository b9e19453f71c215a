use doslab::bqpcount::{accepting_dimension, amplify_spectrum, VerifierInstance};
use doslab::numkit::eigvalsh;
use doslab::numkit::random::{random_hermitian, seeded};
use doslab::qcirc::{omega, plant_verifier, realify, Circuit, Gate, GateKind};
use proptest::prelude::*;

fn gate_strategy(qubits: usize) -> impl Strategy<Value = Gate> {
    (0..GateKind::NAMED.len(), 0..qubits, 1..qubits).prop_map(move |(k, a, off)| {
        let kind = GateKind::NAMED[k];
        let b = (a + off) % qubits;
        let targets: Vec<usize> = if kind.arity() == Some(2) {
            vec![a, b]
        } else {
            vec![a]
        };
        Gate::named(kind, &targets).unwrap()
    })
}

fn circuit_strategy() -> impl Strategy<Value = Circuit> {
    (2usize..=4)
        .prop_flat_map(|m| {
            (
                Just(m),
                1..=m,
                prop::collection::vec(gate_strategy(m), 1..6),
            )
        })
        .prop_map(|(m, n, gates)| Circuit::new(m, n, gates).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_format_round_trips(c in circuit_strategy()) {
        prop_assert_eq!(Circuit::parse(&c.serialize()).unwrap(), c);
    }

    #[test]
    fn omega_spectrum_lies_in_unit_interval(c in circuit_strategy()) {
        let w = omega(&c);
        prop_assert!(w.max_asymmetry() < 1e-12);
        let spec = eigvalsh(&w).unwrap();
        prop_assert!(spec[0] >= -1e-12 && spec[spec.len() - 1] <= 1.0 + 1e-12);
    }

    #[test]
    fn realification_keeps_the_real_part_of_omega(c in circuit_strategy()) {
        let r = realify(&c).unwrap();
        prop_assert!(r.is_real());
        let want = omega(&c);
        let got = omega(&r);
        // the extra qubit is an ancilla, so Ω lives on the same inputs
        prop_assert_eq!(got.dim(), want.dim());
        for i in 0..want.dim() {
            for j in 0..want.dim() {
                prop_assert!((got[(i, j)].re - want[(i, j)].re).abs() < 1e-10);
                prop_assert!(got[(i, j)].im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn planted_count_is_exact(n in 1usize..=4, frac in 0.0f64..=1.0, t_pad in 0usize..3, seed in any::<u64>()) {
        let d = (frac * (1usize << n) as f64).round() as usize;
        let p = plant_verifier(n, d, t_pad, 0.0, seed).unwrap();
        let v = VerifierInstance::new(omega(&p.circuit), n, 0.75, 0.25).unwrap();
        prop_assert_eq!(accepting_dimension(&v).unwrap().dim_accept, d);
    }

    #[test]
    fn amplification_keeps_the_count(seed in any::<u64>(), r in 2u32..8) {
        let mut rng = seeded(seed);
        let h = random_hermitian(&mut rng, 8);
        // squash into [0, 1] away from the window (0.3, 0.7)
        let sq = eigvalsh(&h).unwrap();
        let (lo, hi) = (sq[0], sq[7]);
        let w = doslab::numkit::spectral_function(&h, |l| {
            let x = (l - lo) / (hi - lo + 1e-12);
            if x < 0.5 { 0.3 * x } else { 0.7 + 0.3 * x }
        }).unwrap();
        let v = VerifierInstance::new(w, 3, 0.7, 0.3).unwrap();
        let before = accepting_dimension(&v).unwrap().dim_accept;
        let amp = amplify_spectrum(&v, r).unwrap();
        prop_assert_eq!(accepting_dimension(&amp).unwrap().dim_accept, before);
        prop_assert!((amp.omega().trace().re - before as f64).abs() < 8.0 * 2f64.powi(-(r as i32)) + 1e-9);
    }
}
