//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

mod common;

use std::time::{Duration, Instant};

use common::{props, GAMMAS};
use netcontest::design::{design_max_effort_equal, design_max_effort_general, design_max_welfare, verify_design};
use netcontest::endogenous::{aggregate_contest, endogenous_equilibrium, verify_endogenous};
use netcontest::oracle::{cross_validate, Verdict};
use netcontest::repro::{
    case_hub_spoke, case_multiple_eq, case_star_cycle, case_star_line, case_two_node, compare_case, default_corpus,
    hub_spoke_l2, hub_spoke_l2_trig, multiple_eq_game, two_node_thresholds, WorkedCase,
};
use netcontest::sweep::{sweep, Grid, SweepOutput, SweepParameter, SweepSpec};
use netcontest::{kkt_residual, payoffs, solve, EffortProfile, VerificationReport};
use rayon::prelude::*;

const EXACT_TOL: f64 = 1e-9;
const DESIGN_TOL: f64 = 1e-8;
const ENDOGENOUS_TOL: f64 = 1e-12;
const ORACLE_TOL: f64 = 1e-4;
const TIME_BUDGET: Duration = Duration::from_secs(1);
const PROPERTY_CASES: u64 = 200;
const RANDOM_ORACLE_GAMES: u64 = 50;

#[derive(Default)]
struct Board {
    failed: usize,
    total: usize,
}

impl Board {
    fn line(&mut self, name: &str, passed: bool, detail: impl AsRef<str>) {
        self.total += 1;
        if !passed {
            self.failed += 1;
        }
        println!("[{}] {name}: {}", if passed { "PASS" } else { "FAIL" }, detail.as_ref());
    }

    fn report(&mut self, name: &str, report: &VerificationReport) {
        let detail = match report.failures().next() {
            None => "all checks pass".to_string(),
            Some(_) => report.failures().map(|c| format!("{} ({})", c.name, c.detail)).collect::<Vec<_>>().join("; "),
        };
        self.line(name, report.passed(), detail);
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// Solves a case and compares every stored closed form.
fn case_matches(case: &WorkedCase, tol: f64) -> (bool, String) {
    match solve(&case.game) {
        Ok(r) => {
            let checks = compare_case(case, &r, tol);
            let worst = checks.iter().map(|c| c.error).fold(0.0, f64::max);
            let bad: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.quantity.as_str()).collect();
            (bad.is_empty(), format!("{} quantities, max error {worst:.2e}{}", checks.len(), fail_list(&bad)))
        }
        Err(e) => (false, format!("solve failed: {e}")),
    }
}

fn fail_list(bad: &[&str]) -> String {
    if bad.is_empty() {
        String::new()
    } else {
        format!(", failing {bad:?}")
    }
}

fn exact_examples(b: &mut Board) {
    println!("-- 1. exact examples");
    let start = Instant::now();
    for m in [4usize, 5, 7, 8, 10] {
        let game = case_star_cycle(m).unwrap().game;
        let mf = m as f64;
        let (p, total) = (mf / (mf + 3.0), 3.0 * mf * mf / ((mf + 3.0) * (mf + 3.0)));
        let pay = [mf.powi(3) / ((mf + 3.0) * (mf + 3.0)), 9.0 * mf / ((mf + 3.0) * (mf + 3.0))];
        let ok = solve(&game).map(|r| {
            r.probs.p1.iter().all(|x| close(*x, p, EXACT_TOL))
                && r.total_efforts.iter().all(|t| close(*t, total, EXACT_TOL))
                && close(r.payoffs[0], pay[0], EXACT_TOL)
                && close(r.payoffs[1], pay[1], EXACT_TOL)
        });
        b.line(&format!("star vs cycle m={m}"), ok.unwrap_or(false), format!("p1 = {p:.6}, totals {total:.6}"));
    }

    let ok = solve(&case_star_line().game).map(|r| {
        close(r.profile.e1[0], 41.0 / 36.0, EXACT_TOL)
            && close(r.profile.e2[1], 41.0 / 72.0, EXACT_TOL)
            && close(r.profile.e2[3], 41.0 / 72.0, EXACT_TOL)
            && close(r.payoffs[0], 73.0 / 36.0, EXACT_TOL)
            && close(r.payoffs[1], 25.0 / 36.0, EXACT_TOL)
    });
    b.line("star vs line m=5", ok.unwrap_or(false), "efforts 41/36, 41/72; payoffs 73/36, 25/36");

    let (l1, l2) = two_node_thresholds(1.0, 2.0);
    let l1_closed = 3.0 * (7.0 - 33f64.sqrt()) / 8.0;
    b.line(
        "two-node thresholds",
        close(l1, l1_closed, 1e-15) && close(l2, 9.0, 1e-15),
        format!("L1 = {l1:.12}, L2 = {l2}"),
    );
    for lambda in [0.0, 0.2, 0.6, 2.0, 9.0, 12.0] {
        let case = case_two_node(1.0, 2.0, lambda).unwrap();
        let (ok, detail) = case_matches(&case, EXACT_TOL);
        b.line(&format!("two-node lambda={lambda} ({})", case.regime.as_deref().unwrap_or("-")), ok, detail);
    }
    let step = 0.05;
    let spec = SweepSpec {
        base_game: case_two_node(1.0, 2.0, 0.0).unwrap().game,
        parameter: SweepParameter::RhoEntry { player: 2, from: 1, to: 2 },
        grid: Grid::Range { start: 0.0, stop: 12.0, step },
        outputs: vec![SweepOutput::Supports],
        tol: None,
    };
    let flags = sweep(&spec, 0).map(|t| t.support_changes()).unwrap_or_default();
    let ok = flags.len() == 2 && (flags[0] - l1).abs() <= step && (flags[1] - l2).abs() <= step;
    b.line("two-node sweep support flags", ok, format!("flags at {flags:?}, step {step}"));

    let hub = case_hub_spoke(10, 0.05).unwrap();
    let l1 = hub.threshold("L1").unwrap_or(f64::NAN);
    b.line("hub-spoke L1", close(l1, 0.1, 1e-15), format!("L1 = {l1}"));
    let (bis, trig) = (hub_spoke_l2(10), hub_spoke_l2_trig(10));
    let cubic = 8.0 * bis.powi(3) + 23.0 * bis * bis + 6.0 * bis - 1.0;
    b.line(
        "hub-spoke L2",
        close(bis, trig, 1e-12) && close(bis, 0.114453, 1e-5) && cubic.abs() < 1e-12,
        format!("bisection {bis:.12}, trigonometric {trig:.12}, cubic residual {cubic:.1e}"),
    );
    for lambda in [0.05, 0.113, 0.5] {
        let case = case_hub_spoke(10, lambda).unwrap();
        let (ok, detail) = case_matches(&case, EXACT_TOL);
        b.line(&format!("hub-spoke lambda={lambda} ({})", case.regime.as_deref().unwrap_or("-")), ok, detail);
    }

    let game = multiple_eq_game();
    let ok = solve(&game).map(|r| {
        r.total_efforts.iter().all(|t| close(*t, 17.0 / 36.0, EXACT_TOL))
            && close(r.payoffs[0], 61.0 / 36.0, EXACT_TOL)
            && close(r.payoffs[1], 13.0 / 36.0, EXACT_TOL)
            && r.multiplicity
    });
    b.line("multiple equilibria outcome", ok.unwrap_or(false), "totals 17/36, payoffs 61/36 and 13/36, flag raised");
    for mu in [0.8, 0.9, 1.0] {
        let case = case_multiple_eq(mu).unwrap();
        let values = |v: &Option<Vec<netcontest::repro::Expected>>| {
            v.as_ref().map(|v| v.iter().map(|x| x.value()).collect::<Vec<f64>>()).unwrap_or_default()
        };
        let profile = EffortProfile::new(values(&case.expected.e1), values(&case.expected.e2));
        let r = kkt_residual(&case.game, &profile).unwrap_or(f64::INFINITY);
        b.line(&format!("multiple equilibria profile mu={mu}"), r <= EXACT_TOL, format!("kkt residual {r:.2e}"));
    }
    let elapsed = start.elapsed();
    b.line("exact examples runtime", elapsed < TIME_BUDGET, format!("{elapsed:.2?}"));
}

fn design(b: &mut Board) {
    println!("-- 2. design");
    let start = Instant::now();
    let (c1, c2) = (1.0, 2.0);
    for m in [2usize, 3, 5, 8] {
        let values = vec![1.0; m];
        let base = design_max_effort_equal(c1, c2, &values, 0.0).unwrap();
        b.report(&format!("max effort m={m}"), &verify_design(&base, c1, c2, 1.0, &values).unwrap());
        b.line(&format!("max effort m={m} handicap"), close(base.handicap, m as f64, 1e-12), format!("{}", base.handicap));
        let cont = design_max_effort_equal(c1, c2, &values, 1.0).unwrap();
        let expected = m as f64 * (1.0 + (m as f64 - 1.0));
        let same = match (solve(&base.game(1.0, [c1, c2], values.clone())), solve(&cont.game(1.0, [c1, c2], values.clone()))) {
            (Ok(a), Ok(x)) => {
                a.probs.p1.iter().zip(&x.probs.p1).all(|(p, q)| close(*p, *q, DESIGN_TOL))
                    && (0..2).all(|i| {
                        close(a.total_efforts[i], x.total_efforts[i], DESIGN_TOL)
                            && close(a.payoffs[i], x.payoffs[i], DESIGN_TOL)
                    })
            }
            _ => false,
        };
        b.line(
            &format!("continuum m={m}"),
            same && close(cont.handicap, expected, 1e-9),
            format!("handicap {} (expected {expected}), outcomes identical: {same}", cont.handicap),
        );
    }
    for values in [vec![1.0, 1.0, 2.0, 3.0, 5.0], vec![1.0, 2.0]] {
        for c2 in [1.2, 3.0] {
            let d = design_max_effort_general(c1, c2, &values, None).unwrap();
            b.report(&format!("general construction v={values:?} c2={c2}"), &verify_design(&d, c1, c2, 1.0, &values).unwrap());
        }
    }
    for eps in [0.1, 0.01] {
        let values = vec![1.0; 4];
        let d = design_max_welfare(c1, c2, 1.0, &values, eps).unwrap();
        b.report(
            &format!("max welfare epsilon={eps} (lambda {:.6})", d.parameters["lambda_eps"]),
            &verify_design(&d, c1, c2, 1.0, &values).unwrap(),
        );
    }
    let elapsed = start.elapsed();
    b.line("design runtime", elapsed < TIME_BUDGET, format!("{elapsed:.2?}"));
}

fn endogenous(b: &mut Board) {
    println!("-- 3. endogenous networks");
    let values = vec![1.0; 8];
    for (c1, c2) in [(1.0, 1.0), (1.0, 2.0)] {
        for gamma in [1.0, 0.5] {
            let name = format!("out-star c=({c1},{c2}) gamma={gamma}");
            let p = endogenous_equilibrium(&values, c1, c2, gamma, 0, 0).unwrap();
            b.report(&name, &verify_endogenous(&p, &values, c1, c2, gamma).unwrap());
            let agg = aggregate_contest(c1, c2, gamma, 8.0).unwrap();
            let direct = payoffs(&p.game(&values, c1, c2, gamma), &p.profile()).unwrap();
            let gap = (direct[0] - agg.payoffs[0]).abs().max((direct[1] - agg.payoffs[1]).abs());
            b.line(&format!("{name} payoffs"), gap <= ENDOGENOUS_TOL, format!("max gap {gap:.1e}"));
        }
    }
}

fn property_suites(b: &mut Board) {
    println!("-- 4. property suites ({PROPERTY_CASES} random games each)");
    for (name, check) in props::ALL {
        let failures: Vec<String> = (0..PROPERTY_CASES)
            .into_par_iter()
            .filter_map(|seed| {
                let m = 1 + (seed % 6) as usize;
                let gamma = GAMMAS[(seed / 6 % 3) as usize];
                check(seed, m, gamma).err().map(|e| format!("seed {seed} m {m} gamma {gamma}: {e}"))
            })
            .collect();
        let detail = match failures.first() {
            None => format!("{PROPERTY_CASES} cases"),
            Some(first) => format!("{} failures, first {first}", failures.len()),
        };
        b.line(name, failures.is_empty(), detail);
    }
}

fn oracle_agreement(b: &mut Board) {
    println!("-- 5. oracle agreement");
    let outcomes: Vec<(String, Verdict, f64)> = default_corpus()
        .into_par_iter()
        .map(|case| match solve(&case.game) {
            Ok(r) => {
                let a = cross_validate(&case.game, &r, ORACLE_TOL);
                let worst = a.totals_diff.max(a.probs_diff).max(a.payoffs_diff).max(a.y_contested_diff);
                (case.id, a.verdict, worst)
            }
            Err(_) => (case.id, Verdict::Inconclusive, f64::NAN),
        })
        .collect();
    for (id, verdict, worst) in outcomes {
        b.line(&format!("oracle on {id}"), verdict == Verdict::Agree, format!("{verdict:?}, max gap {worst:.1e}"));
    }
    let failures: Vec<String> = (0..RANDOM_ORACLE_GAMES)
        .into_par_iter()
        .filter_map(|seed| {
            let m = 1 + (seed % 6) as usize;
            let gamma = GAMMAS[(seed % 3) as usize];
            props::oracle_agreement(10_000 + seed, m, gamma).err().map(|e| format!("seed {seed}: {e}"))
        })
        .collect();
    b.line(
        &format!("oracle on {RANDOM_ORACLE_GAMES} random games"),
        failures.is_empty(),
        failures.first().cloned().unwrap_or_else(|| format!("tolerance {ORACLE_TOL}")),
    );
}

fn main() {
    let mut b = Board::default();
    exact_examples(&mut b);
    design(&mut b);
    endogenous(&mut b);
    property_suites(&mut b);
    oracle_agreement(&mut b);
    println!("acceptance: {} of {} lines pass", b.total - b.failed, b.total);
    if b.failed > 0 {
        std::process::exit(1);
    }
}
