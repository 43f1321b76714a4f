use pecbound::gf::{gf_solve, Field};
use pecbound::rational::ratio;
use pecbound::scheme::{self, Scheme, SchemeConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn within_sigmas(observed: f64, p: f64, n: f64, sigmas: f64) -> bool {
    let se = (p * (1.0 - p) / n).sqrt();
    (observed - p).abs() <= sigmas * se
}

#[test]
fn phase_counts_follow_the_erasure_law() {
    let e1 = 0.5;
    let mut config = SchemeConfig::new(ratio(1, 2), ratio(9, 10), 20_000);
    config.seed = 7;
    let mut p1 = 0usize;
    let mut d1 = 0usize;
    let trials = 4;
    for t in 0..trials {
        let r = scheme::run_two_phase_trial(&config, t).unwrap();
        p1 += r.p1 + r.p2;
        d1 += r.direct_t1 + r.direct_t2;
    }
    let slots = (2 * config.n * trials) as f64;
    assert!(within_sigmas(p1 as f64 / slots, (1.0 - e1) * e1, slots, 3.0), "P fraction {}", p1 as f64 / slots);
    assert!(within_sigmas(d1 as f64 / slots, 1.0 - e1, slots, 3.0), "direct fraction {}", d1 as f64 / slots);
}

#[test]
fn small_fields_waste_more_receptions() {
    let run = |q: usize| {
        let mut config = SchemeConfig::new(ratio(1, 2), ratio(9, 10), 400);
        config.q = q;
        config.rank_margin = 0;
        config.trials = 30;
        config.seed = 3;
        scheme::simulate(&config, Scheme::TwoPhase).unwrap()
    };
    let small = run(16);
    let large = run(256);
    let wasted = |s: &scheme::SimulationSummary| {
        s.reports.iter().map(|r| r.non_innovative_t1 + r.non_innovative_t2).sum::<usize>()
    };
    assert!(wasted(&small) > wasted(&large), "{} vs {}", wasted(&small), wasted(&large));
    assert!(small.decode_failures > large.decode_failures, "{} vs {}", small.decode_failures, large.decode_failures);
}

fn full_rank_frequency(q: usize, n: usize, trials: usize, seed: u64) -> f64 {
    let field = Field::new(q).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut full = 0;
    for _ in 0..trials {
        let matrix: Vec<Vec<u8>> = (0..n).map(|_| (0..n).map(|_| field.random(&mut rng)).collect()).collect();
        let rhs: Vec<Vec<u8>> = (0..n).map(|_| vec![rng.random_range(0..q as u16) as u8]).collect();
        if gf_solve(&field, &matrix, &rhs, n).unwrap().solution.is_some() {
            full += 1;
        }
    }
    full as f64 / trials as f64
}

fn full_rank_probability(q: usize, n: usize) -> f64 {
    (1..=n).map(|k| 1.0 - (q as f64).powi(-(k as i32))).product()
}

#[test]
fn random_square_matrices_are_invertible_at_the_predicted_rate() {
    let trials = 400;
    for (q, seed) in [(2, 11), (4, 12), (256, 13)] {
        let p = full_rank_probability(q, 50);
        let f = full_rank_frequency(q, 50, trials, seed);
        assert!(within_sigmas(f, p, trials as f64, 4.0) || (f - p).abs() < 0.01, "q={q}: {f} vs {p}");
    }
    assert!(full_rank_frequency(256, 50, trials, 14) >= 1.0 - 50.0 / 256.0);
}

#[test]
fn solved_systems_reproduce_the_right_hand_side() {
    let field = Field::new(256).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let n = 20;
    let x: Vec<Vec<u8>> = (0..n).map(|_| (0..4).map(|_| rng.random()).collect()).collect();
    let matrix: Vec<Vec<u8>> = (0..n + 5).map(|_| (0..n).map(|_| field.random(&mut rng)).collect()).collect();
    let rhs: Vec<Vec<u8>> = matrix
        .iter()
        .map(|row| {
            let mut b = vec![0u8; 4];
            for (c, xi) in row.iter().zip(&x) {
                field.axpy(&mut b, *c, xi);
            }
            b
        })
        .collect();
    let sol = gf_solve(&field, &matrix, &rhs, n).unwrap();
    assert_eq!(sol.rank, n);
    assert_eq!(sol.solution.unwrap(), x);
}
