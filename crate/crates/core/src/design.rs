//! Spillover networks that maximise total effort or welfare, and their
//! certification against the solver.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{ContestError, Result};
use crate::game::{ContestGame, Spillovers};
use crate::solver::{self, POSITIVITY};
use crate::verify::VerificationReport;

/// Tolerance on probabilities and totals in [`verify_design`].
pub const DESIGN_TOL: f64 = 1e-8;
/// Tolerance on `mu2 = (c1/c2) mu1` for the general construction.
pub const RATE_TOL: f64 = 1e-9;
/// Bisection stops once the bracket on `lambda_eps` is this narrow.
pub const BISECTION_WIDTH: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DesignTarget {
    MaxEffortEqual,
    MaxEffortGeneral,
    MaxWelfare,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignedNetworks {
    pub rho1: Spillovers,
    pub rho2: Spillovers,
    pub parameters: BTreeMap<String, f64>,
    pub handicap: f64,
    pub target: DesignTarget,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl DesignedNetworks {
    fn new(rho1: Spillovers, rho2: Spillovers, target: DesignTarget) -> Self {
        let handicap = rho2.total() - rho1.total();
        DesignedNetworks { rho1, rho2, parameters: BTreeMap::new(), handicap, target, notes: Vec::new() }
    }

    fn param(mut self, name: &str, value: f64) -> Self {
        self.parameters.insert(name.to_string(), value);
        self
    }

    /// The game played on these networks.
    pub fn game(&self, gamma: f64, costs: [f64; 2], values: Vec<f64>) -> ContestGame {
        ContestGame::new(gamma, costs, values, self.rho1.clone(), self.rho2.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("design serialization is infallible")
    }
}

/// Sum of all entries of `rho2 - rho1`.
pub fn handicap(rho1: &Spillovers, rho2: &Spillovers) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(ContestError::DimensionMismatch {
            what: "rho2",
            expected: rho1.dim(),
            actual: rho2.dim(),
        });
    }
    Ok(rho2.total() - rho1.total())
}

fn check_costs(c1: f64, c2: f64) -> Result<()> {
    if !(c1 > 0.0 && c1.is_finite() && c2.is_finite()) {
        return Err(ContestError::InvalidArgument(format!("costs must be positive, got ({c1}, {c2})")));
    }
    if c2 < c1 {
        return Err(ContestError::InvalidArgument(format!(
            "designs assume c2 >= c1 (got c1 = {c1}, c2 = {c2}); swap the players"
        )));
    }
    Ok(())
}

fn check_values(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(ContestError::InvalidArgument("at least one battlefield is required".into()));
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(ContestError::InvalidArgument(format!("battlefield values must be positive, got {v}")));
    }
    Ok(())
}

fn common_value(values: &[f64], hint: &str) -> Result<f64> {
    check_values(values)?;
    let v = values[0];
    if values.iter().any(|&x| x != v) {
        return Err(ContestError::InvalidArgument(format!(
            "battlefield values differ; {hint}"
        )));
    }
    Ok(v)
}

/// Weight of player 2's complete network that equalises the rates when
/// player 1's complete network has weight `lambda1`.
pub fn equal_prize_lambda2(c1: f64, c2: f64, m: usize, lambda1: f64) -> f64 {
    (c2 / c1) * lambda1 + (c2 - c1) / (c1 * (m as f64 - 1.0))
}

/// Complete networks with weights `lambda1` and [`equal_prize_lambda2`];
/// `lambda1 = 0` leaves player 1's network empty.
pub fn design_max_effort_equal(c1: f64, c2: f64, values: &[f64], lambda1: f64) -> Result<DesignedNetworks> {
    check_costs(c1, c2)?;
    common_value(values, "use design_max_effort_general for unequal prizes")?;
    let m = values.len();
    if m < 2 {
        return Err(ContestError::InvalidArgument("at least two battlefields are required".into()));
    }
    if !(lambda1 >= 0.0 && lambda1.is_finite()) {
        return Err(ContestError::InvalidArgument(format!("lambda1 must be nonnegative, got {lambda1}")));
    }
    let lambda2 = equal_prize_lambda2(c1, c2, m, lambda1);
    Ok(DesignedNetworks::new(
        Spillovers::complete(m, lambda1),
        Spillovers::complete(m, lambda2),
        DesignTarget::MaxEffortEqual,
    )
    .param("lambda1", lambda1)
    .param("lambda2", lambda2))
}

/// `p1 p2` on every battlefield when player 1 has no links and player 2 a
/// complete network of weight `lambda`.
pub fn welfare_q(c1: f64, c2: f64, m: usize, gamma: f64, lambda: f64) -> f64 {
    let x = (1.0 + (m as f64 - 1.0) * lambda) * c1 / c2;
    1.0 / (x.powf(gamma) + x.powf(-gamma) + 2.0)
}

/// Combined equilibrium total effort of the welfare design.
pub fn welfare_total(c1: f64, c2: f64, m: usize, gamma: f64, v: f64, lambda: f64) -> f64 {
    gamma * m as f64 * v * (1.0 / c1 + 1.0 / c2) * welfare_q(c1, c2, m, gamma, lambda)
}

/// Smallest complete-network weight for player 2 that pushes the combined
/// total effort below `epsilon`, with player 1's network empty.
pub fn design_max_welfare(c1: f64, c2: f64, gamma: f64, values: &[f64], epsilon: f64) -> Result<DesignedNetworks> {
    check_costs(c1, c2)?;
    let v = common_value(values, "the welfare design needs equal prizes")?;
    let m = values.len();
    if m < 2 {
        return Err(ContestError::InvalidArgument("at least two battlefields are required".into()));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(ContestError::InvalidArgument(format!("gamma must lie in (0, 1], got {gamma}")));
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(ContestError::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let total = |lambda: f64| welfare_total(c1, c2, m, gamma, v, lambda);
    let mut notes = Vec::new();
    let lambda = if total(0.0) < epsilon {
        notes.push(format!(
            "epsilon {epsilon} exceeds the no-spillover total {}; empty networks suffice",
            total(0.0)
        ));
        0.0
    } else {
        // total is largest where player 2's rate matches player 1's and
        // decreasing beyond that point
        let mut lo = ((c2 - c1) / ((m as f64 - 1.0) * c1)).max(0.0);
        let mut hi = lo.max(1.0);
        while total(hi) >= epsilon {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(ContestError::InvalidArgument(format!("no finite weight reaches epsilon {epsilon}")));
            }
        }
        while hi - lo > BISECTION_WIDTH * hi.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if total(mid) < epsilon {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    let mut out = DesignedNetworks::new(
        Spillovers::zeros(m),
        Spillovers::complete(m, lambda),
        DesignTarget::MaxWelfare,
    )
    .param("lambda_eps", lambda)
    .param("epsilon", epsilon)
    .param("total", total(lambda));
    out.notes = notes;
    Ok(out)
}

/// Range of player 1's weight for one group of the general construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Admissible {
    /// `[0, upper)`.
    Bounded { upper: f64 },
    /// `(lower, inf)`.
    Above { lower: f64 },
}

impl Admissible {
    pub fn contains(&self, lambda: f64) -> bool {
        match *self {
            Admissible::Bounded { upper } => (0.0..upper).contains(&lambda),
            Admissible::Above { lower } => lambda > lower && lambda.is_finite(),
        }
    }

    pub fn default_choice(&self) -> f64 {
        match *self {
            Admissible::Bounded { upper } => 0.5 * upper,
            Admissible::Above { lower } => 1.5 * lower,
        }
    }
}

impl std::fmt::Display for Admissible {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Admissible::Bounded { upper } => write!(f, "[0, {upper})"),
            Admissible::Above { lower } => write!(f, "({lower}, inf)"),
        }
    }
}

/// Shape of a group in the general construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupShape {
    Pair,
    /// All six links of the triangle at half weight.
    Triangle,
    /// The two smaller battlefields linked both ways at full weight, the
    /// largest one feeding both at half weight.
    FedPair,
    /// Triangle whose link weights make the values a stationary vector:
    /// every battlefield sends total weight `lambda` and receives
    /// `lambda` times its own value in value-weighted terms.
    WeightedTriangle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Group {
    /// Battlefields in ascending value order, 0-based in the caller's order.
    pub members: Vec<usize>,
    pub shape: GroupShape,
    pub admissible: Admissible,
    /// Links `(from, to, weight)` at unit scale.
    pub links: Vec<(usize, usize, f64)>,
}

/// Cost-ratio threshold selecting the shape of a group of three with
/// sorted values `a <= b <= h`.
pub fn triple_threshold(a: f64, b: f64, h: f64) -> f64 {
    (h + b + a) / (h + b - a)
}

fn pair_range(ratio: f64, a: f64, b: f64) -> Admissible {
    let t = (a + b) / b;
    if ratio < t {
        Admissible::Bounded { upper: t / ratio - 1.0 }
    } else {
        Admissible::Above { lower: b / a }
    }
}

fn triple_range(ratio: f64, a: f64, b: f64, h: f64) -> (GroupShape, Admissible) {
    let t = triple_threshold(a, b, h);
    if ratio < t {
        (GroupShape::Triangle, Admissible::Bounded { upper: t / ratio - 1.0 })
    } else if h <= a + b {
        (GroupShape::WeightedTriangle, Admissible::Above { lower: b / a })
    } else {
        (GroupShape::FedPair, Admissible::Above { lower: b / a })
    }
}

fn unit_links(shape: GroupShape, g: &[usize], values: &[f64]) -> Vec<(usize, usize, f64)> {
    match shape {
        GroupShape::Pair => vec![(g[0], g[1], 1.0), (g[1], g[0], 1.0)],
        GroupShape::Triangle => {
            let mut out = Vec::with_capacity(6);
            for &k in g {
                for &l in g {
                    if k != l {
                        out.push((k, l, 0.5));
                    }
                }
            }
            out
        }
        GroupShape::FedPair => {
            vec![(g[0], g[1], 1.0), (g[1], g[0], 1.0), (g[2], g[0], 0.5), (g[2], g[1], 0.5)]
        }
        GroupShape::WeightedTriangle => {
            let v = |k: usize| values[g[k]];
            let total = v(0) + v(1) + v(2);
            // symmetric flow between each pair, summing to each node's value
            let flow = |k: usize, l: usize| (total - 2.0 * v(3 - k - l)) / 2.0;
            let mut out = Vec::with_capacity(6);
            for k in 0..3 {
                for l in 0..3 {
                    if k != l {
                        out.push((g[k], g[l], flow(k, l) / v(k)));
                    }
                }
            }
            out
        }
    }
}

/// Groups of the general construction: consecutive pairs by ascending
/// value, the last group a triple when the count is odd.
pub fn general_groups(c1: f64, c2: f64, values: &[f64]) -> Result<Vec<Group>> {
    check_costs(c1, c2)?;
    check_values(values)?;
    let m = values.len();
    if m < 2 {
        return Err(ContestError::InvalidArgument("at least two battlefields are required".into()));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let ratio = c2 / c1;
    let r = m / 2;
    let mut groups = Vec::with_capacity(r);
    for l in 0..r {
        if l + 1 == r && m % 2 == 1 {
            let members = order[m - 3..].to_vec();
            let [a, b, h] = [values[members[0]], values[members[1]], values[members[2]]];
            let (shape, admissible) = triple_range(ratio, a, b, h);
            let links = unit_links(shape, &members, values);
            groups.push(Group { members, shape, admissible, links });
        } else {
            let members = order[2 * l..2 * l + 2].to_vec();
            let admissible = pair_range(ratio, values[members[0]], values[members[1]]);
            let links = unit_links(GroupShape::Pair, &members, values);
            groups.push(Group { members, shape: GroupShape::Pair, admissible, links });
        }
    }
    Ok(groups)
}

fn place(rho: &mut Spillovers, group: &Group, lambda: f64) {
    for &(k, l, w) in &group.links {
        rho.set(k, l, lambda * w);
    }
}

/// Block-diagonal networks over groups of two or three battlefields. One
/// weight per group for player 1 may be supplied; omitted weights take the
/// midpoint of a bounded range or 1.5 times the bound of a one-sided one.
pub fn design_max_effort_general(
    c1: f64,
    c2: f64,
    values: &[f64],
    lambda1_choices: Option<&[f64]>,
) -> Result<DesignedNetworks> {
    let groups = general_groups(c1, c2, values)?;
    if let Some(choices) = lambda1_choices {
        if choices.len() != groups.len() {
            return Err(ContestError::DimensionMismatch {
                what: "lambda1 choices",
                expected: groups.len(),
                actual: choices.len(),
            });
        }
    }
    let m = values.len();
    let (mut rho1, mut rho2) = (Spillovers::zeros(m), Spillovers::zeros(m));
    let mut params = BTreeMap::new();
    let mut notes = Vec::new();
    for (l, group) in groups.iter().enumerate() {
        let lambda1 = match lambda1_choices {
            Some(c) => c[l],
            None => group.admissible.default_choice(),
        };
        if !group.admissible.contains(lambda1) {
            return Err(ContestError::InvalidArgument(format!(
                "lambda1 for group {} ({:?}) is {lambda1}, outside its admissible range {}",
                l + 1,
                group.members.iter().map(|k| k + 1).collect::<Vec<_>>(),
                group.admissible
            )));
        }
        let lambda2 = (c2 / c1) * lambda1 + (c2 - c1) / c1;
        place(&mut rho1, group, lambda1);
        place(&mut rho2, group, lambda2);
        params.insert(format!("lambda1_{}", l + 1), lambda1);
        params.insert(format!("lambda2_{}", l + 1), lambda2);
        notes.push(format!(
            "group {}: battlefields {:?}, shape {:?}, range {}",
            l + 1,
            group.members.iter().map(|k| k + 1).collect::<Vec<_>>(),
            group.shape,
            group.admissible
        ));
    }
    let mut out = DesignedNetworks::new(rho1, rho2, DesignTarget::MaxEffortGeneral);
    out.parameters = params;
    out.notes = notes;
    Ok(out)
}

/// Solves the game on the designed networks and checks the design's claims:
/// an interior equilibrium with `p = 1/2` everywhere and per-player totals
/// `gamma * sum(v) / (4 c_i)` for the effort targets, combined total below
/// `epsilon` for the welfare target.
pub fn verify_design(
    networks: &DesignedNetworks,
    c1: f64,
    c2: f64,
    gamma: f64,
    values: &[f64],
) -> Result<VerificationReport> {
    let game = networks.game(gamma, [c1, c2], values.to_vec());
    game.ensure_valid()?;
    let report = solver::solve(&game)?;
    let mut out = VerificationReport::new();
    let min_effort = report.profile.e1.iter().chain(&report.profile.e2).fold(f64::INFINITY, |a, &x| a.min(x));
    out.check(
        "interior",
        min_effort > POSITIVITY,
        format!("smallest effort {min_effort:.3e}, method {:?}", report.method),
    );
    match networks.target {
        DesignTarget::MaxEffortEqual | DesignTarget::MaxEffortGeneral => {
            let worst = report.probs.p1.iter().map(|p| (p - 0.5).abs()).fold(0.0, f64::max);
            out.check("half probabilities", worst <= DESIGN_TOL, format!("max |p1 - 1/2| = {worst:.3e}"));
            let sum_v: f64 = values.iter().sum();
            out.close("total effort 1", report.total_efforts[0], gamma * sum_v / (4.0 * c1), DESIGN_TOL);
            out.close("total effort 2", report.total_efforts[1], gamma * sum_v / (4.0 * c2), DESIGN_TOL);
            if networks.target == DesignTarget::MaxEffortGeneral {
                let gap = report
                    .mu1
                    .iter()
                    .zip(&report.mu2)
                    .map(|(a, b)| (b - a * c1 / c2).abs())
                    .fold(0.0, f64::max);
                out.check("rate ratio", gap <= RATE_TOL, format!("max |mu2 - (c1/c2) mu1| = {gap:.3e}"));
            }
        }
        DesignTarget::MaxWelfare => {
            let combined = report.total_efforts[0] + report.total_efforts[1];
            match networks.parameters.get("epsilon") {
                Some(&eps) => out.check(
                    "combined total below epsilon",
                    combined < eps,
                    format!("{combined:.12e} vs {eps:.3e}"),
                ),
                None => out.check("combined total below epsilon", false, "design carries no epsilon"),
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn handicap_of_base_design() {
        let d = design_max_effort_equal(1.0, 2.0, &[1.0; 3], 0.0).unwrap();
        assert!((d.rho2.get(0, 1) - 0.5).abs() < 1e-15);
        assert_eq!(d.rho1.total(), 0.0);
        assert!((d.handicap - 3.0).abs() < 1e-12);
    }

    #[test]
    fn continuum_handicap() {
        let d = design_max_effort_equal(1.0, 2.0, &[1.0; 3], 1.0).unwrap();
        assert!((d.parameters["lambda2"] - 2.5).abs() < 1e-15);
        assert!((d.handicap - 9.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_costs_need_no_handicap() {
        let d = design_max_effort_equal(1.0, 1.0, &[2.0; 4], 0.0).unwrap();
        assert_eq!(d.rho1.total(), 0.0);
        assert_eq!(d.rho2.total(), 0.0);
        assert_eq!(d.handicap, 0.0);
    }

    #[test]
    fn equal_design_rejects_bad_input() {
        assert!(design_max_effort_equal(2.0, 1.0, &[1.0; 3], 0.0).unwrap_err().to_string().contains("swap"));
        assert!(design_max_effort_equal(1.0, 2.0, &[1.0, 2.0], 0.0).unwrap_err().to_string().contains("general"));
    }

    #[test]
    fn welfare_q_two_battlefields() {
        for lambda in [0.0, 0.5, 3.0] {
            let x: f64 = 1.0 + lambda;
            let q = 1.0 / (x + 1.0 / x + 2.0);
            assert!((welfare_q(1.0, 1.0, 2, 1.0, lambda) - q).abs() < 1e-15);
        }
    }

    #[test]
    fn welfare_large_epsilon_keeps_networks_empty() {
        let d = design_max_welfare(1.0, 1.0, 1.0, &[1.0, 1.0], f64::INFINITY).unwrap();
        assert_eq!(d.parameters["lambda_eps"], 0.0);
        assert_eq!(d.rho2.total(), 0.0);
        assert_eq!(d.notes.len(), 1);
    }

    #[test]
    fn welfare_bisection_is_tight() {
        let d = design_max_welfare(1.0, 1.0, 1.0, &[1.0, 1.0], 0.1).unwrap();
        let lambda = d.parameters["lambda_eps"];
        assert!(welfare_total(1.0, 1.0, 2, 1.0, 1.0, lambda) < 0.1);
        assert!(welfare_total(1.0, 1.0, 2, 1.0, 1.0, lambda - 1e-9) >= 0.1);
    }

    #[test]
    fn pair_range_bounds() {
        let groups = general_groups(1.0, 1.2, &[1.0, 2.0]).unwrap();
        assert_eq!(groups.len(), 1);
        match groups[0].admissible {
            Admissible::Bounded { upper } => assert!((upper - 0.25).abs() < 1e-12),
            other => panic!("unexpected range {other:?}"),
        }
    }

    #[test]
    fn triple_shape_switches_on_cost_ratio() {
        let groups = general_groups(1.0, 1.5, &[4.0, 1.0, 1.0]).unwrap();
        let g = &groups[0];
        assert_eq!(g.shape, GroupShape::FedPair);
        assert_eq!(g.members[2], 0);
        let d = design_max_effort_general(1.0, 1.5, &[4.0, 1.0, 1.0], None).unwrap();
        let lambda = d.parameters["lambda1_1"];
        assert!((d.rho1.get(0, 1) - lambda / 2.0).abs() < 1e-15);
        assert!((d.rho1.get(0, 2) - lambda / 2.0).abs() < 1e-15);
        assert!((d.rho1.get(1, 2) - lambda).abs() < 1e-15);
        assert_eq!(d.rho1.get(1, 0), 0.0);
        let groups = general_groups(1.0, 1.2, &[4.0, 1.0, 1.0]).unwrap();
        assert_eq!(groups[0].shape, GroupShape::Triangle);
    }

    #[test]
    fn general_rejects_out_of_range_choice() {
        let err = design_max_effort_general(1.0, 1.2, &[1.0, 2.0], Some(&[0.3])).unwrap_err();
        assert!(err.to_string().contains("admissible"));
        assert!(design_max_effort_general(1.0, 1.2, &[1.0, 2.0], Some(&[0.1])).is_ok());
    }

    #[test]
    fn handicap_dimension_mismatch() {
        assert!(handicap(&Spillovers::zeros(2), &Spillovers::zeros(3)).is_err());
        assert_eq!(handicap(&Spillovers::complete(3, 1.0), &Spillovers::complete(3, 1.0)).unwrap(), 0.0);
    }
}
