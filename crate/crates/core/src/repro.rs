//! Worked examples with their closed-form equilibria, run as a regression corpus.

use std::fmt::{self, Write as _};

use num_rational::Rational64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ContestError, Result};
use crate::game::{ContestGame, Spillovers};
use crate::oracle::{self, Verdict};
use crate::solver::{self, EquilibriumReport, SupportPair};

/// An expected number: exact where the closed form is rational.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Expected {
    Exact(Rational64),
    Approx(f64),
}

impl Expected {
    pub fn value(self) -> f64 {
        match self {
            Expected::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            Expected::Approx(x) => x,
        }
    }
}

fn q(n: i64, d: i64) -> Expected {
    Expected::Exact(Rational64::new(n, d))
}

fn x(v: f64) -> Expected {
    Expected::Approx(v)
}

fn approx_all(v: &[f64]) -> Vec<Expected> {
    v.iter().map(|&a| x(a)).collect()
}

/// Closed-form quantities for a case; absent entries are not checked.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExpectedOutcome {
    pub e1: Option<Vec<Expected>>,
    pub e2: Option<Vec<Expected>>,
    pub mu1: Option<Vec<Expected>>,
    pub mu2: Option<Vec<Expected>>,
    pub p1: Option<Vec<Expected>>,
    pub totals: Option<[Expected; 2]>,
    pub payoffs: Option<[Expected; 2]>,
    pub supports: Option<SupportPair>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorkedCase {
    pub id: String,
    pub game: ContestGame,
    pub expected: ExpectedOutcome,
    /// Named thresholds such as `L1`, `L2`.
    pub regime_info: Vec<(String, f64)>,
    pub regime: Option<String>,
    /// Efforts are not unique; only outcome statistics are compared.
    pub multiplicity_expected: bool,
    /// Extra consistency findings attached at construction.
    pub notes: Vec<String>,
}

impl WorkedCase {
    fn new(id: impl Into<String>, game: ContestGame, expected: ExpectedOutcome) -> Self {
        WorkedCase {
            id: id.into(),
            game,
            expected,
            regime_info: Vec::new(),
            regime: None,
            multiplicity_expected: false,
            notes: Vec::new(),
        }
    }

    pub fn threshold(&self, name: &str) -> Option<f64> {
        self.regime_info.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

fn unit_game(m: usize, rho1: Spillovers, rho2: Spillovers) -> ContestGame {
    ContestGame::new(1.0, [1.0, 1.0], vec![1.0; m], rho1, rho2)
}

/// Undirected star with centre `centre`, unit weights.
pub fn star(m: usize, centre: usize) -> Spillovers {
    Spillovers::from_fn(m, |k, l| if k != l && (k == centre || l == centre) { 1.0 } else { 0.0 })
}

/// Undirected cycle `1 - 2 - ... - m - 1`, unit weights.
pub fn cycle(m: usize) -> Spillovers {
    Spillovers::from_fn(m, |k, l| {
        if k != l && ((k + 1) % m == l || (l + 1) % m == k) {
            1.0
        } else {
            0.0
        }
    })
}

/// Undirected path `1 - 2 - ... - m`, unit weights.
pub fn line(m: usize) -> Spillovers {
    Spillovers::from_fn(m, |k, l| if k.abs_diff(l) == 1 { 1.0 } else { 0.0 })
}

/// Out-star from `hub` to every other battlefield with weight `lambda`.
pub fn out_star(m: usize, hub: usize, lambda: f64) -> Spillovers {
    Spillovers::from_fn(m, |k, l| if k == hub && l != hub { lambda } else { 0.0 })
}

pub fn two_node_thresholds(c1: f64, c2: f64) -> (f64, f64) {
    let s = c1 + c2;
    let l1 = s * (c1 + 3.0 * c2 - (s * (c1 + 5.0 * c2)).sqrt()) / (2.0 * c2 * c2);
    let l2 = (s / c1).powi(2);
    (l1, l2)
}

/// Closed-form two-node efforts and rates for one regime.
fn two_node_regime(c1: f64, c2: f64, lambda: f64, regime: u8) -> ExpectedOutcome {
    let (e1, e2, mu1, mu2) = match regime {
        1 => {
            let d = (c1 + (1.0 - lambda) * c2).powi(2);
            let s = (c1 + c2).powi(2);
            (
                [(1.0 - lambda) * c2 / d, c2 / s],
                [c1 / d, c1 / s - lambda * c1 / d],
                [1.0, 1.0],
                [1.0 - lambda, 1.0],
            )
        }
        2 => {
            let r = lambda.sqrt();
            let d = (c1 * (1.0 + lambda) + c2).powi(2);
            (
                [
                    (c2 + r * (r - 1.0) * c1) * (1.0 + r) / d,
                    (c2 - (r - 1.0) * c1) * r * (1.0 + r) / d,
                ],
                [(1.0 + r).powi(2) * c1 / d, 0.0],
                [1.0, 1.0],
                [
                    (c2 + r * (r - 1.0) * c1) / ((1.0 + r) * c2),
                    (c2 - (r - 1.0) * c1) / (r * (1.0 + r) * c2),
                ],
            )
        }
        _ => {
            let s = (c1 + c2).powi(2);
            let (_, l2) = two_node_thresholds(c1, c2);
            ([c2 / s, 0.0], [c1 / s, 0.0], [1.0, l2 / lambda], [1.0, 0.0])
        }
    };
    let y1 = e1;
    let y2 = [e2[0], lambda * e2[0] + e2[1]];
    let p1: Vec<f64> = (0..2).map(|k| y1[k] / (y1[k] + y2[k])).collect();
    ExpectedOutcome {
        e1: Some(approx_all(&e1)),
        e2: Some(approx_all(&e2)),
        mu1: Some(approx_all(&mu1)),
        mu2: Some(approx_all(&mu2)),
        totals: Some([x(e1[0] + e1[1]), x(e2[0] + e2[1])]),
        payoffs: Some([
            x(p1[0] + p1[1] - c1 * (e1[0] + e1[1])),
            x(2.0 - p1[0] - p1[1] - c2 * (e2[0] + e2[1])),
        ]),
        p1: Some(approx_all(&p1)),
        supports: None,
    }
}

/// Two battlefields; player 2 spills `lambda` from battlefield 1 to 2.
pub fn case_two_node(c1: f64, c2: f64, lambda: f64) -> Result<WorkedCase> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(ContestError::InvalidArgument(format!("lambda must be >= 0, got {lambda}")));
    }
    let (l1, l2) = two_node_thresholds(c1, c2);
    let regime = if lambda < l1 {
        1
    } else if lambda < l2 {
        2
    } else {
        3
    };
    let mut rho2 = Spillovers::zeros(2);
    rho2.set(0, 1, lambda);
    let game = ContestGame::new(1.0, [c1, c2], vec![1.0, 1.0], Spillovers::zeros(2), rho2);
    let mut case = WorkedCase::new(
        format!("two-node c=({c1},{c2}) lambda={lambda}"),
        game,
        two_node_regime(c1, c2, lambda, regime),
    );
    case.regime_info = vec![("L1".into(), l1), ("L2".into(), l2)];
    case.regime = Some(format!("regime {regime}"));
    Ok(case)
}

/// Star (centre 1) against a cycle, unit weights, `m >= 4`.
pub fn case_star_cycle(m: usize) -> Result<WorkedCase> {
    if m < 4 {
        return Err(ContestError::InvalidArgument(format!("star vs cycle needs m >= 4, got {m}")));
    }
    let mi = m as i64;
    let d = (mi + 3) * (mi + 3);
    let mut e1 = vec![q(0, 1); m];
    e1[0] = q(3 * mi * mi, d);
    let expected = ExpectedOutcome {
        e1: Some(e1),
        e2: Some(vec![q(3 * mi, d); m]),
        mu1: Some(vec![q(1, mi); m]),
        mu2: Some(vec![q(1, 3); m]),
        p1: Some(vec![q(mi, mi + 3); m]),
        totals: Some([q(3 * mi * mi, d), q(3 * mi * mi, d)]),
        payoffs: Some([q(mi * mi * mi, d), q(9 * mi, d)]),
        supports: Some(SupportPair::new(vec![0], (0..m).collect())),
    };
    let mut case = WorkedCase::new(format!("star-cycle m={m}"), unit_game(m, star(m, 0), cycle(m)), expected);
    if m.is_multiple_of(3) {
        case.multiplicity_expected = true;
        case.notes.push("I + rho2 is singular; efforts are not unique".into());
    }
    Ok(case)
}

/// Star (centre 1) against the line 1-2-3-4-5.
pub fn case_star_line() -> WorkedCase {
    let z = q(0, 1);
    let a = q(41, 72);
    let expected = ExpectedOutcome {
        e1: Some(vec![q(41, 36), z, z, z, z]),
        e2: Some(vec![z, a, z, a, z]),
        mu1: Some(vec![q(8, 41), q(8, 41), q(9, 41), q(8, 41), q(8, 41)]),
        mu2: Some(vec![q(16, 41), q(16, 41), q(9, 41), q(16, 41), q(16, 41)]),
        p1: Some(vec![q(2, 3), q(2, 3), q(1, 2), q(2, 3), q(2, 3)]),
        totals: Some([q(41, 36), q(41, 36)]),
        payoffs: Some([q(73, 36), q(25, 36)]),
        supports: Some(SupportPair::new(vec![0], vec![1, 3])),
    };
    WorkedCase::new("star-line m=5", unit_game(5, star(5, 0), line(5)), expected)
}

/// Positive root of `(n-2) x^3 + (2n+3) x^2 + (n-4) x = 1`, by bisection on `[1/n, 1]`.
pub fn hub_spoke_l2(n: usize) -> f64 {
    let nf = n as f64;
    let f = |x: f64| (nf - 2.0) * x.powi(3) + (2.0 * nf + 3.0) * x * x + (nf - 4.0) * x - 1.0;
    let (mut lo, mut hi) = (1.0 / nf, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Trigonometric closed form of the same root.
pub fn hub_spoke_l2_trig(n: usize) -> f64 {
    let nf = n as f64;
    let a = nf * nf + 30.0 * nf - 15.0;
    let arg = (nf.powi(3) - 63.0 * nf * nf - 117.0 * nf + 135.0) / a.powf(1.5);
    2.0 * a.sqrt() * (arg.asin() / 3.0 + std::f64::consts::PI / 3.0).sin() / (3.0 * (nf - 2.0))
        - (2.0 * nf + 3.0) / (3.0 * (nf - 2.0))
}

/// Player 1's efforts, rates and win probabilities in one hub-spoke regime;
/// player 2's follow by swapping battlefields 1 and 2.
fn hub_spoke_player1(n: usize, lambda: f64, regime: u8) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let nf = n as f64;
    let mut e = vec![0.0; n];
    let mut mu = vec![0.0; n];
    let mut p = vec![0.5; n];
    match regime {
        1 => {
            let d = 2.0 - (nf - 1.0) * lambda;
            e[0] = 1.0 / (d * d);
            e[1] = (1.0 - nf * lambda) / (d * d);
            let spoke = 0.25 - lambda / (d * d);
            e.iter_mut().skip(2).for_each(|x| *x = spoke);
            mu.iter_mut().for_each(|x| *x = 1.0);
            mu[0] = 1.0 - (nf - 1.0) * lambda;
            p[0] = 1.0 / d;
            p[1] = (1.0 - (nf - 1.0) * lambda) / d;
        }
        2 => {
            let w = 1.0 - (nf - 2.0) * lambda;
            let d = (1.0 + lambda).powi(2) * w;
            e[0] = 2.0 * lambda / d;
            let spoke = 0.25 - 2.0 * lambda * lambda / d;
            e.iter_mut().skip(2).for_each(|x| *x = spoke);
            mu.iter_mut().for_each(|x| *x = 1.0);
            mu[0] = w / 2.0;
            mu[1] = w / (2.0 * lambda);
            p[0] = 1.0 / (1.0 + lambda);
            p[1] = lambda / (1.0 + lambda);
        }
        _ => {
            let d = 2.0 * (nf + 2.0) * lambda + (nf - 2.0) * (1.0 + lambda * lambda);
            e[0] = (nf - 2.0) / 4.0 + 2.0 * lambda / (1.0 + lambda).powi(2);
            mu.iter_mut().for_each(|x| *x = (1.0 + lambda).powi(2) / (lambda * d));
            mu[0] = 4.0 * lambda / d;
            mu[1] = 4.0 / d;
            p[0] = 1.0 / (1.0 + lambda);
            p[1] = lambda / (1.0 + lambda);
        }
    }
    (e, mu, p)
}

fn swap12(v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    out.swap(0, 1);
    out
}

fn hub_spoke_expected(n: usize, lambda: f64, regime: u8) -> ExpectedOutcome {
    let (e1, mu1, p1) = hub_spoke_player1(n, lambda, regime);
    let total: f64 = e1.iter().sum();
    let prize: f64 = p1.iter().sum();
    let pay = prize - total;
    let (on1, on2): (Vec<usize>, Vec<usize>) = match regime {
        1 => ((0..n).collect(), (0..n).collect()),
        2 => ((0..n).filter(|&k| k != 1).collect(), (0..n).filter(|&k| k != 0).collect()),
        _ => (vec![0], vec![1]),
    };
    ExpectedOutcome {
        e2: Some(approx_all(&swap12(&e1))),
        mu2: Some(approx_all(&swap12(&mu1))),
        e1: Some(approx_all(&e1)),
        mu1: Some(approx_all(&mu1)),
        p1: Some(approx_all(&p1)),
        totals: Some([x(total), x(total)]),
        payoffs: Some([x(pay), x(pay)]),
        supports: Some(SupportPair::new(on1, on2)),
    }
}

/// Two hub-spoke networks over `n` battlefields, hubs 1 and 2, weight `lambda`.
pub fn case_hub_spoke(n: usize, lambda: f64) -> Result<WorkedCase> {
    if n < 3 || lambda.is_nan() || lambda < 0.0 {
        return Err(ContestError::InvalidArgument(format!(
            "hub-spoke needs n >= 3 and lambda >= 0, got n={n}, lambda={lambda}"
        )));
    }
    let l1 = 1.0 / n as f64;
    let l2 = hub_spoke_l2(n);
    let regime = if lambda < l1 {
        1
    } else if lambda < l2 {
        2
    } else {
        3
    };
    let game = unit_game(n, out_star(n, 0, lambda), out_star(n, 1, lambda));
    let mut case = WorkedCase::new(
        format!("hub-spoke n={n} lambda={lambda}"),
        game,
        hub_spoke_expected(n, lambda, regime),
    );
    case.regime_info = vec![("L1".into(), l1), ("L2".into(), l2)];
    case.regime = Some(format!("regime {regime}"));
    for (name, t, below, above) in [("L1", l1, 1, 2), ("L2", l2, 2, 3)] {
        if (lambda - t).abs() <= 1e-12 * t.max(1.0) {
            case.regime = Some(format!("regime boundary {name}"));
            let a = hub_spoke_player1(n, t, below).0;
            let b = hub_spoke_player1(n, t, above).0;
            let gap = crate::linalg::max_abs_diff(&a, &b);
            case.notes.push(format!("regime formulas at {name} differ by {gap:.2e}"));
        }
    }
    Ok(case)
}

/// The three-battlefield game with a continuum of equilibria, parameterized by `mu_2^3`.
pub fn case_multiple_eq(mu_param: f64) -> Result<WorkedCase> {
    if !(mu_param > 0.75 && mu_param < 4.5) {
        return Err(ContestError::InvalidArgument(format!(
            "parameter must lie in (3/4, 9/2), got {mu_param}"
        )));
    }
    let t = mu_param;
    let expected = ExpectedOutcome {
        e1: Some(approx_all(&[
            (18.0 - 4.0 * t) / (45.0 * t),
            (53.0 * t - 36.0) / (180.0 * t),
            (4.0 * t - 3.0) / (15.0 * t),
        ])),
        e2: Some(vec![q(2, 9), q(1, 4), q(0, 1)]),
        mu1: Some(vec![q(1, 2), q(1, 1), q(0, 1)]),
        mu2: Some(vec![q(1, 1), q(1, 1), x(t)]),
        p1: Some(vec![q(2, 3), q(1, 2), q(1, 1)]),
        totals: Some([q(17, 36), q(17, 36)]),
        payoffs: Some([q(61, 36), q(13, 36)]),
        supports: Some(SupportPair::new(vec![0, 1, 2], vec![0, 1])),
    };
    let mut case = WorkedCase::new(format!("multiple-eq mu={t}"), multiple_eq_game(), expected);
    case.multiplicity_expected = true;
    Ok(case)
}

pub fn multiple_eq_game() -> ContestGame {
    let rho1 = Spillovers::from_rows(&[
        vec![0.0, 0.5, 3.0],
        vec![0.0, 0.0, 0.0],
        vec![2.0, 0.0, 0.0],
    ])
    .expect("square");
    unit_game(3, rho1, Spillovers::zeros(3))
}

/// The regression corpus.
pub fn default_corpus() -> Vec<WorkedCase> {
    let mut out = Vec::new();
    for &lambda in &[0.0, 0.2, 0.6, 2.0, 9.0, 12.0] {
        out.push(case_two_node(1.0, 2.0, lambda).expect("valid"));
    }
    for &m in &[4, 5, 6, 7, 8, 10] {
        out.push(case_star_cycle(m).expect("valid"));
    }
    out.push(case_star_line());
    for &lambda in &[0.05, 0.1, 0.113, 0.5, 2.0] {
        out.push(case_hub_spoke(10, lambda).expect("valid"));
    }
    out.push(case_multiple_eq(1.0).expect("valid"));
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantityCheck {
    pub case: String,
    pub quantity: String,
    pub expected: f64,
    pub actual: f64,
    pub error: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseSummary {
    pub id: String,
    pub regime: Option<String>,
    pub passed: bool,
    pub method: Option<solver::SolveMethod>,
    pub multiplicity: Option<bool>,
    pub kkt_residual: Option<f64>,
    pub oracle: Option<Verdict>,
    pub error: Option<String>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub tolerance: f64,
    pub cases: Vec<CaseSummary>,
    pub checks: Vec<QuantityCheck>,
}

impl CorpusReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("corpus serialization is infallible")
    }
}

impl fmt::Display for CorpusReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<36} {:<20} {:<15} {:>10}  result", "case", "regime", "method", "kkt")?;
        for c in &self.cases {
            let method = c.method.map(|m| format!("{m:?}")).unwrap_or_else(|| "-".into());
            let kkt = c.kkt_residual.map(|r| format!("{r:.1e}")).unwrap_or_else(|| "-".into());
            writeln!(
                f,
                "{:<36} {:<20} {:<15} {:>10}  {}",
                c.id,
                c.regime.as_deref().unwrap_or("-"),
                method,
                kkt,
                if c.passed { "PASS" } else { "FAIL" }
            )?;
        }
        for q in self.checks.iter().filter(|q| !q.passed) {
            writeln!(
                f,
                "  FAIL {} {}: expected {:.15e}, got {:.15e} (err {:.2e})",
                q.case, q.quantity, q.expected, q.actual, q.error
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusOptions {
    pub tol: f64,
    pub oracle: bool,
    pub oracle_tol: f64,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        CorpusOptions { tol: 1e-9, oracle: true, oracle_tol: 1e-4 }
    }
}

fn push_vec(out: &mut Vec<QuantityCheck>, id: &str, name: &str, exp: &Option<Vec<Expected>>, act: &[f64], tol: f64) {
    if let Some(exp) = exp {
        for (k, (e, a)) in exp.iter().zip(act).enumerate() {
            push(out, id, &format!("{name}[{}]", k + 1), e.value(), *a, tol);
        }
    }
}

fn push(out: &mut Vec<QuantityCheck>, id: &str, name: &str, expected: f64, actual: f64, tol: f64) {
    let error = (expected - actual).abs();
    out.push(QuantityCheck {
        case: id.to_string(),
        quantity: name.to_string(),
        expected,
        actual,
        error,
        passed: error <= tol,
    });
}

/// Compares a report against a case's closed forms.
pub fn compare_case(case: &WorkedCase, report: &EquilibriumReport, tol: f64) -> Vec<QuantityCheck> {
    let id = case.id.as_str();
    let exp = &case.expected;
    let mut out = Vec::new();
    push_vec(&mut out, id, "p1", &exp.p1, &report.probs.p1, tol);
    for (i, name) in ["total1", "total2"].iter().enumerate() {
        if let Some(t) = &exp.totals {
            push(&mut out, id, name, t[i].value(), report.total_efforts[i], tol);
        }
    }
    for (i, name) in ["payoff1", "payoff2"].iter().enumerate() {
        if let Some(t) = &exp.payoffs {
            push(&mut out, id, name, t[i].value(), report.payoffs[i], tol);
        }
    }
    if !case.multiplicity_expected {
        push_vec(&mut out, id, "e1", &exp.e1, &report.profile.e1, tol);
        push_vec(&mut out, id, "e2", &exp.e2, &report.profile.e2, tol);
        push_vec(&mut out, id, "mu1", &exp.mu1, &report.mu1, tol);
        push_vec(&mut out, id, "mu2", &exp.mu2, &report.mu2, tol);
    }
    out
}

fn run_case(case: &WorkedCase, opts: &CorpusOptions) -> (CaseSummary, Vec<QuantityCheck>) {
    let mut summary = CaseSummary {
        id: case.id.clone(),
        regime: case.regime.clone(),
        passed: false,
        method: None,
        multiplicity: None,
        kkt_residual: None,
        oracle: None,
        error: None,
        notes: case.notes.clone(),
    };
    let report = match solver::solve(&case.game) {
        Ok(r) => r,
        Err(e) => {
            summary.error = Some(e.to_string());
            return (summary, Vec::new());
        }
    };
    let checks = compare_case(case, &report, opts.tol);
    summary.method = Some(report.method);
    summary.multiplicity = Some(report.multiplicity);
    summary.kkt_residual = Some(report.kkt_residual);
    let mut ok = checks.iter().all(|c| c.passed);
    if case.multiplicity_expected && !report.multiplicity {
        summary.notes.push("multiplicity flag not raised".into());
        ok = false;
    }
    if opts.oracle {
        let agreement = oracle::cross_validate(&case.game, &report, opts.oracle_tol);
        summary.oracle = Some(agreement.verdict);
        if agreement.verdict != Verdict::Agree {
            ok = false;
        }
    }
    summary.passed = ok;
    (summary, checks)
}

/// Solves every case, compares with the closed forms and optionally
/// cross-checks with best-response dynamics. Cases run in parallel.
pub fn run_corpus(cases: &[WorkedCase], opts: &CorpusOptions) -> CorpusReport {
    let results: Vec<_> = cases.par_iter().map(|c| run_case(c, opts)).collect();
    let mut report = CorpusReport { tolerance: opts.tol, cases: Vec::new(), checks: Vec::new() };
    for (summary, checks) in results {
        report.cases.push(summary);
        report.checks.extend(checks);
    }
    report
}

pub fn run_all(tolerance: f64) -> CorpusReport {
    run_corpus(&default_corpus(), &CorpusOptions { tol: tolerance, ..CorpusOptions::default() })
}

/// Finds a case in the default corpus by id prefix.
pub fn find_cases(prefix: &str) -> Vec<WorkedCase> {
    default_corpus().into_iter().filter(|c| c.id.starts_with(prefix)).collect()
}

/// One-line description of each default case.
pub fn list_cases() -> String {
    let mut out = String::new();
    for c in default_corpus() {
        let _ = writeln!(out, "{}", c.id);
    }
    out
}
