//! Parameter sweeps: one certified solve per grid point, tabulated.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ContestError, Result};
use crate::game::{ContestGame, Player};
use crate::solver::{solve_with, EquilibriumReport, SolveOptions, SupportPair};

/// Which scalar of the base game a sweep varies. Players are numbered 1 and 2
/// and battlefields from 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SweepParameter {
    /// One entry `rho_player[from][to]`.
    RhoEntry { player: usize, from: usize, to: usize },
    /// Every listed player's base network scaled by the grid value, so the
    /// base network acts as a pattern of unit weights.
    RhoWeight { players: Vec<usize> },
    Cost { player: usize },
    Gamma,
}

/// Grid values, either listed or as an inclusive range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Grid {
    pub fn points(&self) -> Result<Vec<f64>> {
        match *self {
            Grid::Values(ref v) => Ok(v.clone()),
            Grid::Range { start, stop, step } => {
                if !(step > 0.0 && start.is_finite() && stop.is_finite()) || stop < start {
                    return Err(ContestError::InvalidArgument(format!(
                        "bad grid range start {start}, stop {stop}, step {step}"
                    )));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                Ok((0..=n).map(|i| start + i as f64 * step).collect())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOutput {
    Efforts,
    Probs,
    Totals,
    /// Sum of both players' totals.
    Aggregate,
    Payoffs,
    Supports,
}

pub const ALL_OUTPUTS: [SweepOutput; 6] = [
    SweepOutput::Efforts,
    SweepOutput::Probs,
    SweepOutput::Totals,
    SweepOutput::Aggregate,
    SweepOutput::Payoffs,
    SweepOutput::Supports,
];

fn all_outputs() -> Vec<SweepOutput> {
    ALL_OUTPUTS.to_vec()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base_game: ContestGame,
    pub parameter: SweepParameter,
    pub grid: Grid,
    #[serde(default = "all_outputs")]
    pub outputs: Vec<SweepOutput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

impl SweepSpec {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    fn player(&self, n: usize) -> Result<Player> {
        Player::from_number(n)
            .ok_or_else(|| ContestError::InvalidArgument(format!("player must be 1 or 2, got {n}")))
    }

    /// The base game with the swept parameter set to `x`.
    pub fn game_at(&self, x: f64) -> Result<ContestGame> {
        let mut game = self.base_game.clone();
        let bad = |what: &str| ContestError::InvalidArgument(format!("{what} cannot take grid value {x}"));
        match self.parameter {
            SweepParameter::RhoEntry { player, from, to } => {
                let p = self.player(player)?;
                let m = game.m();
                if from == 0 || to == 0 || from > m || to > m || from == to {
                    return Err(ContestError::InvalidArgument(format!(
                        "rho entry ({from}, {to}) is not an off-diagonal entry of a {m}-battlefield game"
                    )));
                }
                if !(x >= 0.0 && x.is_finite()) {
                    return Err(bad("a spillover"));
                }
                game.rho_mut(p).set(from - 1, to - 1, x);
            }
            SweepParameter::RhoWeight { ref players } => {
                if players.is_empty() {
                    return Err(ContestError::InvalidArgument("rho_weight needs at least one player".into()));
                }
                if !(x >= 0.0 && x.is_finite()) {
                    return Err(bad("a spillover weight"));
                }
                for &n in players {
                    let p = self.player(n)?;
                    let scaled = game.rho(p).scaled(x);
                    *game.rho_mut(p) = scaled;
                }
            }
            SweepParameter::Cost { player } => {
                let p = self.player(player)?;
                if !(x > 0.0 && x.is_finite()) {
                    return Err(bad("a cost"));
                }
                game.costs[p.index()] = x;
            }
            SweepParameter::Gamma => {
                if !(x > 0.0 && x <= 1.0) {
                    return Err(bad("gamma"));
                }
                game.gamma = x;
            }
        }
        Ok(game)
    }

    /// Checks the grid is nonempty and every point yields a valid game.
    pub fn validate(&self) -> Result<Vec<f64>> {
        let points = self.grid.points()?;
        if points.is_empty() {
            return Err(ContestError::InvalidArgument("sweep grid is empty".into()));
        }
        if self.outputs.is_empty() {
            return Err(ContestError::InvalidArgument("sweep requests no outputs".into()));
        }
        for &x in &points {
            self.game_at(x)?.ensure_valid()?;
        }
        Ok(points)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub value: f64,
    pub report: std::result::Result<EquilibriumReport, String>,
    /// Supports differ from the nearest earlier successful point.
    pub support_change: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub m: usize,
    pub outputs: Vec<SweepOutput>,
    pub rows: Vec<SweepRow>,
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_supports(s: &SupportPair) -> String {
    let join = |v: &[usize]| v.iter().map(|k| (k + 1).to_string()).collect::<Vec<_>>().join(" ");
    format!("{}|{}", join(&s.p1), join(&s.p2))
}

impl SweepTable {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["index".to_string(), "value".into(), "status".into(), "support_change".into()];
        let m = self.m;
        let per = |prefix: &'static str| (1..=m).map(move |k| format!("{prefix}_{k}"));
        for out in &self.outputs {
            match out {
                SweepOutput::Efforts => {
                    h.extend(per("e1"));
                    h.extend(per("e2"));
                }
                SweepOutput::Probs => h.extend(per("p1")),
                SweepOutput::Totals => h.extend(["total1".to_string(), "total2".into()]),
                SweepOutput::Aggregate => h.push("aggregate".into()),
                SweepOutput::Payoffs => h.extend(["payoff1".to_string(), "payoff2".into()]),
                SweepOutput::Supports => h.push("supports".into()),
            }
        }
        h
    }

    fn record(&self, row: &SweepRow) -> Vec<String> {
        let mut r = vec![
            row.index.to_string(),
            fmt_float(row.value),
            match &row.report {
                Ok(_) => "ok".to_string(),
                Err(e) => format!("error: {e}"),
            },
            u8::from(row.support_change).to_string(),
        ];
        let nan = |n: usize| std::iter::repeat_n("NaN".to_string(), n);
        for out in &self.outputs {
            match (&row.report, out) {
                (Ok(rep), SweepOutput::Efforts) => {
                    r.extend(rep.profile.e1.iter().chain(&rep.profile.e2).map(|&x| fmt_float(x)))
                }
                (Ok(rep), SweepOutput::Probs) => r.extend(rep.probs.p1.iter().map(|&x| fmt_float(x))),
                (Ok(rep), SweepOutput::Totals) => r.extend(rep.total_efforts.iter().map(|&x| fmt_float(x))),
                (Ok(rep), SweepOutput::Aggregate) => {
                    r.push(fmt_float(rep.total_efforts[0] + rep.total_efforts[1]))
                }
                (Ok(rep), SweepOutput::Payoffs) => r.extend(rep.payoffs.iter().map(|&x| fmt_float(x))),
                (Ok(rep), SweepOutput::Supports) => r.push(fmt_supports(&rep.supports)),
                (Err(_), SweepOutput::Efforts) => r.extend(nan(2 * self.m)),
                (Err(_), SweepOutput::Probs) => r.extend(nan(self.m)),
                (Err(_), SweepOutput::Totals | SweepOutput::Payoffs) => r.extend(nan(2)),
                (Err(_), SweepOutput::Aggregate) => r.extend(nan(1)),
                (Err(_), SweepOutput::Supports) => r.push(String::new()),
            }
        }
        r
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.header()).expect("writing to memory");
        for row in &self.rows {
            w.write_record(self.record(row)).expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("flushing to memory")).expect("csv output is utf-8")
    }

    /// Numeric column by header name; failed rows give NaN.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let pos = self.header().iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|row| self.record(row)[pos].parse().unwrap_or(f64::NAN)).collect())
    }

    /// Grid values where the support flag is raised.
    pub fn support_changes(&self) -> Vec<f64> {
        self.rows.iter().filter(|r| r.support_change).map(|r| r.value).collect()
    }
}

/// Solves every grid point with at most `jobs` worker threads (0 uses the
/// default pool); rows keep grid order.
pub fn sweep(spec: &SweepSpec, jobs: usize) -> Result<SweepTable> {
    let points = spec.validate()?;
    let opts = SolveOptions { tol: spec.tol, ..SolveOptions::default() };
    let run = || -> Vec<std::result::Result<EquilibriumReport, String>> {
        points
            .par_iter()
            .map(|&x| {
                let game = spec.game_at(x).map_err(|e| e.to_string())?;
                solve_with(&game, &opts).map_err(|e| e.to_string())
            })
            .collect()
    };
    let results = if jobs == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| ContestError::InvalidArgument(format!("cannot start {jobs} workers: {e}")))?
            .install(run)
    };
    let mut last: Option<SupportPair> = None;
    let rows = points
        .into_iter()
        .zip(results)
        .enumerate()
        .map(|(index, (value, report))| {
            let mut support_change = false;
            if let Ok(rep) = &report {
                support_change = last.as_ref().is_some_and(|prev| *prev != rep.supports);
                last = Some(rep.supports.clone());
            }
            SweepRow { index, value, report, support_change }
        })
        .collect();
    Ok(SweepTable { m: spec.base_game.m(), outputs: spec.outputs.clone(), rows })
}
