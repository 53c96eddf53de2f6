mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stripforge::{brute_force_solve, check_all, solve, Circuit, Mode, SolveConfig, Status};

fn agree(circuit: &Circuit, cfg: &SolveConfig, label: &str) {
    let oracle = brute_force_solve(circuit, cfg).unwrap();
    for mode in [Mode::TwoPhase, Mode::OnePhase] {
        let got = solve(circuit, &cfg.clone().with_mode(mode)).unwrap();
        assert_eq!(
            got.objective,
            oracle.objective,
            "{label} {mode} on {}x{}: {}",
            cfg.grid.max_strips,
            cfg.grid.max_positions,
            stripforge::circuit_to_json(circuit)
        );
        assert_eq!(
            got.status == Status::Optimal,
            oracle.status == Status::Optimal
        );
        if let Some(layout) = &got.layout {
            assert!(check_all(circuit, layout, &cfg.span_rules()).is_empty());
        }
        for w in got.trace.windows(2) {
            assert!(w[1] < w[0], "trace not strictly improving: {:?}", got.trace);
        }
    }
}

#[test]
fn two_pin_circuits_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..150 {
        let circuit = common::random_circuit(&mut rng, 3);
        let grid = common::random_grid(&mut rng, circuit.pin_total(), 2e6);
        agree(&circuit, &SolveConfig::new(grid), &format!("case {case}"));
    }
}

#[test]
fn unsigned_span_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..60 {
        let circuit = common::random_circuit(&mut rng, 3);
        let grid = common::random_grid(&mut rng, circuit.pin_total(), 1e6);
        agree(
            &circuit,
            &SolveConfig::new(grid).with_unsigned_span(true),
            &format!("unsigned case {case}"),
        );
    }
}

#[test]
fn multi_pin_circuits_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for case in 0..120 {
        let circuit = loop {
            let c = common::random_mixed_circuit(&mut rng);
            if c.pin_total() <= 6 {
                break c;
            }
        };
        let grid = common::random_grid(&mut rng, circuit.pin_total(), 2e6);
        agree(
            &circuit,
            &SolveConfig::new(grid),
            &format!("mixed case {case}"),
        );
    }
}
