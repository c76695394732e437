//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any hard criterion fails. Criterion 7 is reported but never
//! fails the run, because its outcome hinges on the unmeasured curvature
//! `alpha`.

use std::f64::consts::E;
use std::fs;
use std::process::{Command, ExitCode, Stdio};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use prosumer_core::{
    base_demand, contract_payment_value, contract_range, draw_population, lottery_marginal_utility,
    lottery_utility, mean_contracts, optimal_contract_eut, optimal_contract_pt,
    optimal_lottery_sellback, penetration_sweep, realtime_sellback, run_contract_simulation_with,
    run_lottery_simulation_with, run_simulation, sellback_order_preserved, ContractTerms,
    Execution, GenerationModel, LotteryConfig, LotteryScale, LotterySpec, MarketScenario,
    Mechanism, ProsumerProfile, RealTimeBounds, SimulationResult, SolutionMethod,
    ValueFunctionParams, WeightFunctionParams,
};

const SEEDS: u64 = 20;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

/// Criterion number, name, time budget and check.
type Criterion = (u8, &'static str, Duration, fn() -> Outcome);

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(0x5eed);
    r.set_stream(stream);
    r
}

fn uniform_profile(omega: f64, alpha: f64, lo: f64, width: f64) -> ProsumerProfile {
    let s = omega / alpha;
    ProsumerProfile::new(
        omega,
        alpha,
        GenerationModel::uniform(s + lo, s + lo + width).unwrap(),
    )
    .unwrap()
}

fn prelec(gamma: f64) -> WeightFunctionParams {
    WeightFunctionParams::prelec(gamma).unwrap()
}

fn contract(ps: f64, pe: f64) -> Mechanism {
    Mechanism::Contract(ContractTerms::new(ps, pe).unwrap())
}

fn lottery(prize: f64) -> Mechanism {
    Mechanism::Lottery(LotteryConfig {
        prize,
        scale: LotteryScale::PerProsumer(0.1),
    })
}

fn grid(start: f64, stop: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|i| {
            if i + 1 == steps {
                stop
            } else {
                start + (stop - start) * i as f64 / (steps - 1) as f64
            }
        })
        .collect()
}

/// Seed-averaged result of `f` over the reference community.
fn seed_mean(mechanism: Mechanism, f: impl Fn(&SimulationResult) -> f64) -> f64 {
    (0..SEEDS)
        .map(|seed| {
            let s = MarketScenario {
                seed,
                mechanism,
                ..MarketScenario::default()
            };
            f(&run_simulation(&s).unwrap())
        })
        .sum::<f64>()
        / SEEDS as f64
}

fn weighting_suite() -> Outcome {
    let w = prelec(0.5);
    let fixed = (w.weight(1.0 / E).unwrap() - 1.0 / E).abs();
    let mut pattern_errors = 0;
    let mut round_trip: f64 = 0.0;
    for i in 1..=1000 {
        let q = i as f64 / 1001.0;
        let d = w.weight(q).unwrap() - q;
        let expected_over = q < 1.0 / E;
        if (expected_over && d <= 0.0) || (!expected_over && d >= 0.0) {
            pattern_errors += 1;
        }
        round_trip = round_trip.max((w.weight_inverse(w.weight(q).unwrap()).unwrap() - q).abs());
    }
    Outcome::new(
        fixed <= 1e-12 && pattern_errors == 0 && round_trip <= 1e-10,
        format!(
            "fixed-point error {fixed:.1e}, {pattern_errors} sign-pattern violations on 1000 points, \
             max round-trip error {round_trip:.1e}"
        ),
    )
}

fn closed_form_vs_grid() -> Outcome {
    let mut r = rng(2);
    let step = 1e-4;
    let mut worst: f64 = 0.0;
    let mut misses = 0;
    for _ in 0..100 {
        let p = uniform_profile(
            r.random_range(3.0..7.0),
            r.random_range(0.5..2.0),
            r.random_range(0.0..0.5),
            r.random_range(0.2..1.5),
        );
        let ps = r.random_range(0.2..2.0);
        let terms = ContractTerms::new(ps, ps * r.random_range(1.1..3.0)).unwrap();
        let v = ValueFunctionParams::linear(r.random_range(1.0..3.0)).unwrap();
        let w = prelec(r.random_range(0.3..0.9));
        let c = optimal_contract_pt(&p, &terms, &v, &w).unwrap();
        assert_eq!(c.method, SolutionMethod::ClosedForm);
        let (lo, hi) = contract_range(&p, &terms);
        let lo = lo.max(0.0);
        let n = ((hi - lo) / step).ceil() as usize;
        let mut best = (lo, f64::NEG_INFINITY);
        for i in 0..=n {
            let x = (lo + i as f64 * step).min(hi);
            let e = contract_payment_value(&p, &terms, &v, &w, x).unwrap();
            if e > best.1 {
                best = (x, e);
            }
        }
        let gap = (best.0 - c.amount).abs();
        worst = worst.max(gap);
        if gap > 2.0 * step {
            misses += 1;
        }
    }
    Outcome::new(
        misses == 0,
        format!(
            "100 scenarios, {misses} beyond 2 grid steps, worst gap {:.2} steps",
            worst / step
        ),
    )
}

fn eut_reduction() -> Outcome {
    let mut r = rng(3);
    let mut exact = true;
    for _ in 0..1000 {
        let (omega, alpha) = (r.random_range(3.0..7.0), r.random_range(0.5..2.0));
        let (lo, width) = (r.random_range(0.0..0.5), r.random_range(0.2..1.5));
        let p = uniform_profile(omega, alpha, lo, width);
        let ps = r.random_range(0.2..2.0);
        let pe = ps * r.random_range(1.1..3.0);
        let terms = ContractTerms::new(ps, pe).unwrap();
        let reduced = optimal_contract_pt(
            &p,
            &terms,
            &ValueFunctionParams::linear(1.0).unwrap(),
            &WeightFunctionParams::Identity,
        )
        .unwrap()
        .amount;
        let g = p.generation();
        let (z_lo, z_hi) = contract_range(&p, &terms);
        let formula = (g.s_min() + ps / pe * (g.s_max() - g.s_min()) + (pe - omega) / alpha)
            .clamp(z_lo.max(0.0), z_hi);
        exact &= reduced == formula && reduced == optimal_contract_eut(&p, &terms).unwrap().amount;
    }

    // Monte Carlo newsvendor: realised payment p_s C - p_e (C - z)⁺ with z
    // the real-time response, against the risk-neutral valuation.
    let (omega, alpha) = (5.0, 1.0);
    let p = uniform_profile(omega, alpha, 0.0, 0.5);
    let terms = ContractTerms::new(1.0, 3.5).unwrap();
    let (ps, pe) = (1.0, 3.5);
    let (lo, hi) = contract_range(&p, &terms);
    let mut r = rng(33);
    let mut worst_z: f64 = 0.0;
    for k in 0..5 {
        let c = lo + (hi - lo) * (k as f64 + 0.5) / 5.0;
        let n = 1_000_000;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..n {
            let s: f64 = omega / alpha + 0.5 * r.random::<f64>();
            let z = c.clamp(s - omega / alpha, s - (omega - pe) / alpha);
            let pay = ps * c - pe * (c - z).max(0.0);
            sum += pay;
            sum_sq += pay * pay;
        }
        let mean = sum / n as f64;
        let se = ((sum_sq / n as f64 - mean * mean) / n as f64).sqrt();
        let exact_value = contract_payment_value(
            &p,
            &terms,
            &ValueFunctionParams::risk_neutral(),
            &WeightFunctionParams::Identity,
            c,
        )
        .unwrap();
        worst_z = worst_z.max((mean - exact_value).abs() / se);
    }
    Outcome::new(
        exact && worst_z <= 3.0,
        format!(
            "closed form reproduced bit for bit on 1000 scenarios: {exact}; \
             Monte Carlo (1e6 samples x 5 contracts) worst deviation {worst_z:.2} standard errors"
        ),
    )
}

fn contract_orderings() -> Outcome {
    let mut r = rng(4);
    let draw_profile = |r: &mut ChaCha8Rng| {
        uniform_profile(
            r.random_range(3.0..7.0),
            r.random_range(0.5..3.0),
            r.random_range(0.0..0.5),
            r.random_range(0.1..2.0),
        )
    };
    let mut c1_violations = 0;
    for _ in 0..10_000 {
        let p = draw_profile(&mut r);
        let pe = r.random_range(0.5..6.0);
        let ps = r.random_range(0.001..1.0) * pe / E;
        let terms = ContractTerms::new(ps, pe).unwrap();
        let v = ValueFunctionParams::linear(r.random_range(1.0001..4.0)).unwrap();
        let w = prelec(r.random_range(0.2..0.95));
        let pt = optimal_contract_pt(&p, &terms, &v, &w).unwrap().amount;
        let eut = optimal_contract_eut(&p, &terms).unwrap().amount;
        if pt >= eut {
            c1_violations += 1;
        }
    }

    let (mut c2_checked, mut c2_violations) = (0, 0);
    for _ in 0..10_000 {
        let p = draw_profile(&mut r);
        let ps = r.random_range(0.1..3.0);
        let terms = ContractTerms::new(ps, ps * r.random_range(1.05..4.0)).unwrap();
        let v = ValueFunctionParams::linear(r.random_range(1.0..4.0)).unwrap();
        let w = prelec(r.random_range(0.2..0.95));
        let pt = optimal_contract_pt(&p, &terms, &v, &w).unwrap().amount;
        let eut = optimal_contract_eut(&p, &terms).unwrap().amount;
        if eut < pt {
            continue;
        }
        c2_checked += 1;
        let g = p.generation();
        let s = g.s_min() + (g.s_max() - g.s_min()) * r.random::<f64>();
        if !sellback_order_preserved(&p, &terms, s, eut, pt).unwrap() {
            c2_violations += 1;
        }
    }

    // One constructed instance per placement of the two contracts relative
    // to the real-time interval [z1, z2].
    let p = uniform_profile(5.0, 1.0, 0.0, 0.5);
    let terms = ContractTerms::new(1.0, 3.5).unwrap();
    let s = 5.25;
    let b = RealTimeBounds::new(&p, &terms, s);
    let (z1, z2) = (b.z1, b.z2);
    let cases = [
        ("both below z1", 0.5 * z1, 0.9 * z1),
        ("straddling z1", 0.5 * z1, 0.5 * (z1 + z2)),
        ("both inside", z1 + 0.2 * (z2 - z1), z1 + 0.7 * (z2 - z1)),
        ("straddling z2", 0.5 * (z1 + z2), z2 + 1.0),
        ("both above z2", z2 + 0.5, z2 + 1.0),
        ("spanning the interval", 0.5 * z1, z2 + 1.0),
    ];
    let mut case_failures = Vec::new();
    for (name, pt, eut) in cases {
        let ok = sellback_order_preserved(&p, &terms, s, eut, pt).unwrap()
            && realtime_sellback(&p, &terms, s, eut).unwrap()
                >= realtime_sellback(&p, &terms, s, pt).unwrap();
        if !ok {
            case_failures.push(name);
        }
    }
    Outcome::new(
        c1_violations == 0 && c2_violations == 0 && case_failures.is_empty(),
        format!(
            "C_PT < C_EUT violated {c1_violations}/10000; z ordering violated {c2_violations}/{c2_checked}; \
             constructed cases failing: {}",
            if case_failures.is_empty() { "none".to_string() } else { case_failures.join(", ") }
        ),
    )
}

fn lottery_monotonicity() -> Outcome {
    let prizes = [0.0, 100.0, 400.0, 1000.0, 2000.0];
    let mut r = rng(5);
    let (mut strict_violations, mut saturated_pairs, mut worst_foc, mut worst_grid): (
        usize,
        usize,
        f64,
        f64,
    ) = (0, 0, 0.0, 0.0);
    for k in 0..1000 {
        let omega = r.random_range(4.0..7.0);
        let alpha = r.random_range(0.8..1.25);
        let p = uniform_profile(omega, alpha, 0.0, 0.5);
        let s = omega / alpha + 0.5 * r.random::<f64>();
        let m = r.random_range(2e-5..6e-5);
        let w = prelec(r.random_range(0.3..0.7));
        let mut previous: Option<f64> = None;
        for (j, &prize) in prizes.iter().enumerate() {
            let spec = LotterySpec::new(prize, m).unwrap();
            let z = optimal_lottery_sellback(&p, &spec, &w, s).unwrap();
            if let Some(z0) = previous {
                if z0 < s {
                    if z <= z0 {
                        strict_violations += 1;
                    }
                } else {
                    saturated_pairs += 1;
                    if z != s {
                        strict_violations += 1;
                    }
                }
            }
            previous = Some(z);
            if prize > 0.0 && z > 0.0 && z < s {
                worst_foc =
                    worst_foc.max(lottery_marginal_utility(&p, &spec, &w, s, z).unwrap().abs());
            }
            // grid oracle on the first 100 scenarios, one prize level each
            if k < 100 && j == 1 + k % 4 {
                let step = 1e-5;
                let n = (s / step).ceil() as usize;
                let mut best = (0.0, f64::NEG_INFINITY);
                for i in 0..=n {
                    let x = (i as f64 * step).min(s);
                    let u = lottery_utility(&p, &spec, &w, s, x).unwrap();
                    if u > best.1 {
                        best = (x, u);
                    }
                }
                worst_grid = worst_grid.max((best.0 - z).abs());
            }
        }
    }
    Outcome::new(
        strict_violations == 0 && worst_foc <= 1e-8 && worst_grid <= 1e-4,
        format!(
            "1000 scenarios x 5 prizes: {strict_violations} monotonicity violations \
             ({saturated_pairs} pairs already saturated at z = s); max |FOC| {worst_foc:.1e}; \
             max grid gap {worst_grid:.1e} on 100 scenarios"
        ),
    )
}

fn sign_claims() -> Outcome {
    let high: Vec<f64> = grid(2.05, 3.5, 30)
        .into_iter()
        .map(|pe| seed_mean(contract(2.0, pe), |r| r.savings))
        .collect();
    let low: Vec<(f64, f64)> = grid(2.0, 3.5, 7)
        .into_iter()
        .map(|pe| (pe, seed_mean(contract(1.0, pe), |r| r.savings)))
        .collect();
    let best_contract = low.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
    let prizes: Vec<(f64, f64)> = grid(0.0, 5000.0, 11)
        .into_iter()
        .map(|prize| (prize, seed_mean(lottery(prize), |r| r.savings)))
        .collect();
    let (best_prize, best_lottery) = prizes.iter().copied().fold(
        (0.0, f64::NEG_INFINITY),
        |a, b| if b.1 > a.1 { b } else { a },
    );

    let levels = [1000, 2000, 3000, 4000];
    let mut z = [0.0; 4];
    let mut d = [0.0; 4];
    for seed in 0..SEEDS {
        let s = MarketScenario {
            seed,
            mechanism: lottery(5000.0),
            ..MarketScenario::default()
        };
        for (i, l) in penetration_sweep(&s, &levels).unwrap().iter().enumerate() {
            z[i] += l.result.total_sellback / SEEDS as f64;
            d[i] += l.result.net_demand / SEEDS as f64;
        }
    }
    let z_rising = z.windows(2).all(|w| w[1] > w[0]);
    let negative = d.iter().any(|&x| x < 0.0);

    let max_high = high.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_low = low.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    Outcome::new(
        max_high < 0.0 && min_low > 0.0 && best_lottery > best_contract && z_rising && negative,
        format!(
            "p_s=2 savings max {max_high:.0} (<0); p_s=1 savings min {min_low:.0} (>0); best lottery {best_lottery:.0} \
             at R={best_prize} vs best contract {best_contract:.0}; penetration Z {:.0}/{:.0}/{:.0}/{:.0}, \
             D at n=4000 {:.0}",
            z[0], z[1], z[2], z[3], d[3]
        ),
    )
}

fn ratio_row(alpha: f64) -> Vec<f64> {
    let s = MarketScenario {
        alpha,
        ..MarketScenario::default()
    };
    let pop = draw_population(&s).unwrap();
    grid(0.25, 1.25, 5)
        .into_iter()
        .map(|ps| {
            mean_contracts(
                &pop,
                &ContractTerms::new(ps, 3.5).unwrap(),
                &ValueFunctionParams::linear(2.0).unwrap(),
                &prelec(0.5),
            )
            .unwrap()
            .ratio()
        })
        .collect()
}

fn ratio_check() -> (Outcome, String) {
    let at_default = ratio_row(1.0);
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.3}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let sensitivity = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|&a| {
            let row = ratio_row(a);
            format!(
                "alpha={a}: max {:.3}",
                row.iter().copied().fold(0.0, f64::max)
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    (
        Outcome::new(
            at_default.iter().all(|&x| x <= 0.9),
            format!("PT/EUT mean contract ratio over p_s 0.25..1.25 at alpha=1: {}", fmt(&at_default)),
        ),
        format!(
            "the shared (p_e - omega)/alpha offset dominates at small alpha; ratio by alpha: {sensitivity}"
        ),
    )
}

fn accounting_and_determinism() -> Outcome {
    let mut identities = true;
    let mut parallel_matches = true;
    for seed in 0..3 {
        for mechanism in [
            contract(1.0, 3.5),
            contract(2.0, 2.5),
            lottery(0.0),
            lottery(1500.0),
        ] {
            let s = MarketScenario {
                seed,
                mechanism,
                ..MarketScenario::default()
            };
            let (seq, par) = match mechanism {
                Mechanism::Contract(_) => (
                    run_contract_simulation_with(&s, Execution::Sequential).unwrap(),
                    run_contract_simulation_with(&s, Execution::Parallel).unwrap(),
                ),
                Mechanism::Lottery(_) => (
                    run_lottery_simulation_with(&s, Execution::Sequential).unwrap(),
                    run_lottery_simulation_with(&s, Execution::Parallel).unwrap(),
                ),
            };
            parallel_matches &= seq == par;
            identities &= seq.net_demand == seq.base_demand - seq.total_sellback
                && seq.savings
                    == s.cost.eval(seq.base_demand)
                        - s.cost.eval(seq.net_demand)
                        - seq.incentive_cost;
        }
    }

    let dir = tempfile::TempDir::new().unwrap();
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_prosumer-market"))
            .current_dir(dir.path())
            .args(args)
            .stdout(Stdio::null())
            .status()
            .unwrap()
            .success()
    };
    let mut cli_identical = true;
    for experiment in ["lottery-sweep", "penalty-sweep", "contract-compare"] {
        let ok = run(&[experiment, "--seed", "5", "--out", "a"])
            && run(&[experiment, "--seed", "5", "--out", "b"])
            && run(&[experiment, "--config", "a/manifest.toml", "--out", "c"]);
        let table = format!("{experiment}.csv");
        let read = |d: &str| fs::read(dir.path().join(d).join(&table)).unwrap_or_default();
        cli_identical &=
            ok && !read("a").is_empty() && read("a") == read("b") && read("a") == read("c");
    }
    Outcome::new(
        identities && parallel_matches && cli_identical,
        format!(
            "accounting identities exact: {identities}; parallel == sequential: {parallel_matches}; \
             CLI tables byte-identical across reruns and manifest replay: {cli_identical}"
        ),
    )
}

fn population_checks() -> Outcome {
    let mut b = 0.0;
    let mut z = 0.0;
    for seed in 0..SEEDS {
        let s = MarketScenario {
            seed,
            mechanism: lottery(0.0),
            ..MarketScenario::default()
        };
        b += base_demand(&s, &draw_population(&s).unwrap());
        z += run_simulation(&s).unwrap().total_sellback;
    }
    let (b, z) = (b / SEEDS as f64, z / SEEDS as f64);
    let expected_z = 2500.0 * 0.25;
    let (eb, ez) = (b / 26250.0 - 1.0, z / expected_z - 1.0);
    Outcome::new(
        eb.abs() < 0.01 && ez.abs() < 0.01,
        format!(
            "mean B {b:.1} vs 26250 ({:+.2}%); mean R=0 sell-back {z:.2} vs {expected_z} ({:+.2}%)",
            100.0 * eb,
            100.0 * ez
        ),
    )
}

fn timed(budget: Duration, f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let start = Instant::now();
    let mut o = f();
    let elapsed = start.elapsed();
    if elapsed > budget {
        o.pass = false;
        o.detail
            .push_str(&format!("; exceeded time budget {budget:?}"));
    }
    (o, elapsed)
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let criteria: [Criterion; 8] = [
        (1, "weighting function", secs(1), weighting_suite),
        (
            2,
            "closed-form contract vs grid search",
            secs(120),
            closed_form_vs_grid,
        ),
        (3, "expected-utility reduction", secs(60), eut_reduction),
        (4, "contract orderings", secs(30), contract_orderings),
        (
            5,
            "lottery monotonicity in the prize",
            secs(120),
            lottery_monotonicity,
        ),
        (6, "market sign claims", secs(300), sign_claims),
        (
            8,
            "accounting and determinism",
            secs(120),
            accounting_and_determinism,
        ),
        (9, "analytic population checks", secs(30), population_checks),
    ];
    let mut hard_failures = Vec::new();
    for (id, name, budget, f) in criteria {
        let (o, elapsed) = timed(budget, f);
        println!(
            "criterion {id}: {} {name}: {} [{:.2} s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64()
        );
        if !o.pass {
            hard_failures.push(id);
        }
        if id == 6 {
            let start = Instant::now();
            let (o, caveat) = ratio_check();
            println!(
                "criterion 7: {} PT contracts at least 10% below EUT: {} [{:.2} s]",
                if o.pass { "PASS" } else { "FAIL (soft)" },
                o.detail,
                start.elapsed().as_secs_f64()
            );
            println!("criterion 7: note: {caveat}");
        }
    }
    if hard_failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("hard acceptance failures: {hard_failures:?}");
        ExitCode::FAILURE
    }
}
