use coinsim::document::Machine;
use coinsim::expr::parse_relation;
use coinsim::montecarlo::{simulate, MonteCarloConfig};
use coinsim::pushdown::{
    alpha_fixed_point, build_gamma_pda, build_sqrt_pda, build_transient_ladder_pda, pda_value,
    verify_algebraic, AlphaOptions, Method, PushdownCoinAutomaton, Transition,
};
use coinsim::Error;
use proptest::prelude::*;

fn random_machine(max_stack: usize) -> impl Strategy<Value = PushdownCoinAutomaton> {
    (2usize..4, 1usize..=max_stack).prop_flat_map(|(states, stack)| {
        let push = prop::collection::vec(0..stack, 0..3);
        let transition = (0..states, push).prop_map(|(next, push)| Transition::new(next, push));
        let count = states * 2 * stack;
        (
            prop::collection::vec(transition, count),
            prop::collection::vec(0u32..2, states),
            0..states,
        )
            .prop_map(move |(transitions, labels, start)| {
                let names = (0..stack).map(|b| format!("s{b}")).collect();
                let finals = labels.into_iter().map(Some).collect();
                PushdownCoinAutomaton::new(2, names, start, vec![0], transitions, finals).unwrap()
            })
    })
}

fn all_pairs() -> AlphaOptions {
    AlphaOptions {
        all_pairs: true,
        ..AlphaOptions::default()
    }
}

/// Words over `0..stack` of length 1 to 3.
fn short_words(stack: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0..stack).map(|b| vec![b]).collect();
    let mut frontier = out.clone();
    for _ in 1..3 {
        frontier = frontier
            .iter()
            .flat_map(|w| (0..stack).map(move |b| [w.as_slice(), &[b]].concat()))
            .collect();
        out.extend(frontier.iter().cloned());
    }
    out
}

/// Probability of emptying a one-symbol stack of height `h` in each state
/// within `steps` moves, and the mass still running afterwards.
fn bounded_first_passage(
    m: &PushdownCoinAutomaton,
    p: f64,
    start: usize,
    h: usize,
    steps: usize,
) -> (Vec<f64>, f64) {
    let n = m.state_count();
    let max_height = h + 2 * steps + 1;
    let mut mass = vec![vec![0.0; max_height + 1]; n];
    mass[start][h] = 1.0;
    let mut done = vec![0.0; n];
    for _ in 0..steps {
        let mut next = vec![vec![0.0; max_height + 1]; n];
        for (s, row) in mass.iter().enumerate() {
            for (height, &w) in row.iter().enumerate() {
                if w == 0.0 || height == 0 {
                    continue;
                }
                for (a, q) in [(0, 1.0 - p), (1, p)] {
                    let t = m.transition(s, a, 0);
                    let nh = height - 1 + t.push.len();
                    if nh == 0 {
                        done[t.next] += w * q;
                    } else {
                        next[t.next][nh] += w * q;
                    }
                }
            }
        }
        mass = next;
    }
    let alive = mass.iter().flatten().sum();
    (done, alive)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn word_transfer_equals_path_enumeration(m in random_machine(2), p in 0.1f64..0.9) {
        let Ok(sys) = alpha_fixed_point(&m, &[1.0 - p, p], &all_pairs()) else { return Ok(()) };
        let n = m.state_count();
        for word in short_words(m.stack_size()) {
            let matrix = sys.word_transfer(&word);
            let sys = &sys;
            for s in 0..n {
                for t in 0..n {
                    // sum over intermediate state sequences
                    let mut paths = vec![(s, 1.0)];
                    for &b in &word {
                        paths = paths
                            .iter()
                            .flat_map(|&(u, w)| (0..n).map(move |v| (v, w * sys.alpha(b, u, v))))
                            .collect();
                    }
                    let direct: f64 = paths.iter().filter(|(v, _)| *v == t).map(|(_, w)| w).sum();
                    prop_assert!((matrix[(s, t)] - direct).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn alpha_brackets_bounded_enumeration(m in random_machine(1), p in 0.1f64..0.9) {
        let Ok(sys) = alpha_fixed_point(&m, &[1.0 - p, p], &all_pairs()) else { return Ok(()) };
        for h in 1..=2 {
            let word = vec![0; h];
            let matrix = sys.word_transfer(&word);
            let (done, alive) = bounded_first_passage(&m, p, m.start(), h, 400);
            for (t, &d) in done.iter().enumerate() {
                let a = matrix[(m.start(), t)];
                prop_assert!(d <= a + 1e-9, "h={h} t={t}: {d} > {a}");
                prop_assert!(a <= d + alive + 1e-9, "h={h} t={t}: {a} > {d} + {alive}");
            }
        }
    }

    #[test]
    fn newton_agrees_with_plain_iteration(m in random_machine(2), p in 0.1f64..0.9) {
        let kleene = AlphaOptions { method: Method::Kleene, iter_cap: 200_000, tol: 1e-14, ..all_pairs() };
        let (Ok(a), Ok(b)) = (
            alpha_fixed_point(&m, &[1.0 - p, p], &kleene),
            alpha_fixed_point(&m, &[1.0 - p, p], &all_pairs()),
        ) else {
            return Ok(());
        };
        // slow plain convergence means a near-critical system; compare loosely there
        let tol = if a.iterations() > 10_000 { 1e-5 } else { 1e-9 };
        let n = m.state_count();
        for b_sym in 0..m.stack_size() {
            for s in 0..n {
                for t in 0..n {
                    let (x, y) = (a.alpha(b_sym, s, t), b.alpha(b_sym, s, t));
                    prop_assert!((x - y).abs() < tol, "({b_sym},{s},{t}): {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn iterates_increase_with_tighter_tolerance(m in random_machine(2), p in 0.1f64..0.9) {
        let loose = AlphaOptions { method: Method::Kleene, tol: 1e-3, ..all_pairs() };
        let tight = AlphaOptions { method: Method::Kleene, tol: 1e-10, iter_cap: 200_000, ..all_pairs() };
        let (Ok(a), Ok(b)) = (
            alpha_fixed_point(&m, &[1.0 - p, p], &loose),
            alpha_fixed_point(&m, &[1.0 - p, p], &tight),
        ) else {
            return Ok(());
        };
        let n = m.state_count();
        for b_sym in 0..m.stack_size() {
            for s in 0..n {
                for t in 0..n {
                    let (x, y) = (a.alpha(b_sym, s, t), b.alpha(b_sym, s, t));
                    prop_assert!(x <= y + 1e-15 && y <= 1.0);
                }
            }
        }
    }
}

fn grid() -> impl Iterator<Item = f64> {
    (1..10).map(|j| j as f64 / 10.0)
}

#[test]
fn gamma_satisfies_its_quadratic() {
    let m = build_gamma_pda();
    for p in grid() {
        let gamma = pda_value(&m, p, &AlphaOptions::default()).unwrap().value;
        let g = (1.0 - p) / 2.0;
        let residual = 2.0 * g * gamma * gamma - 2.0 * gamma + 1.0;
        assert!(residual.abs() <= 1e-8, "p={p}: {residual:e}");
    }
}

#[test]
fn goodness_is_certified_on_the_grid() {
    for m in [build_gamma_pda(), build_sqrt_pda()] {
        for p in grid() {
            let v = pda_value(&m, p, &AlphaOptions::default()).unwrap();
            assert!(v.min_goodness.unwrap().sum >= 1.0 - 1e-9, "p={p}");
        }
    }
}

#[test]
fn sqrt_values_satisfy_relation() {
    let m = build_sqrt_pda();
    let values: Vec<(f64, f64)> = grid()
        .map(|p| (p, pda_value(&m, p, &AlphaOptions::default()).unwrap().value))
        .collect();
    let good = verify_algebraic(&values, &parse_relation("f^2 - p").unwrap(), 1e-9).unwrap();
    assert!(good.passed, "{:?}", good.residuals);
    let bad = verify_algebraic(&values, &parse_relation("f - p").unwrap(), 1e-9).unwrap();
    assert!(!bad.passed && bad.max_residual > 0.1);
}

#[test]
fn transient_ladder_fails_to_halt() {
    let m = build_transient_ladder_pda();
    let err = pda_value(&m, 0.5, &AlphaOptions::default()).unwrap_err();
    assert!(matches!(err, Error::NotAlmostSurelyHalting { sum, .. } if sum < 1.0 - 1e-6));
    let mut cfg = MonteCarloConfig::new(0.5, 2_000, 42);
    cfg.step_cap = Some(100_000);
    let r = simulate(&Machine::Pushdown(m), &cfg).unwrap();
    assert!(r.did_not_halt_rate > 0.2, "{}", r.did_not_halt_rate);
}

/// Fixed-point value against the sampled frequency. The full-size runs live
/// in the acceptance target; this keeps `cargo test` quick.
#[test]
fn gamma_value_matches_monte_carlo() {
    const N: u64 = 20_000;
    let m = build_gamma_pda();
    let machine = Machine::Pushdown(m.clone());
    for p in [0.3, 0.5, 0.7] {
        let f = pda_value(&m, p, &AlphaOptions::default()).unwrap().value;
        let r = simulate(&machine, &MonteCarloConfig::new(p, N, 42).with_target(f)).unwrap();
        let n = r.n_trials as f64;
        let est = r.estimate.unwrap();
        assert!(
            (est - f).abs() <= 4.0 * (f * (1.0 - f) / n).sqrt(),
            "p={p}: {est} vs {f}"
        );
    }
}
