//! Per-day decomposition: jump detection, JWC estimation, bootstrap test
//! and selection of the continuous covariance for every configured pair,
//! plus multi-jump detection for tuples.

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;

use crate::bootstrap::{
    bootstrap_statistic, derive_seed, select_ic_star, BootstrapConfig, Classification, PairDayStats, TestOutcome,
};
use crate::error::{Error, Result};
use crate::events::{CoJumpRecord, DayDecomposition, Group, GroupDay};
use crate::jumps::{adjust_returns, cojump_variation, common_jump_indices, locate_jumps, realized_covariance};
use crate::jumps::{DetectionConfig, JumpSeries};
use crate::jwc::{jwc_integrated_covariance, IcMatrix};
use crate::market_data::ReturnPanel;

#[derive(Debug, Clone, Copy, Default)]
pub struct PipelineConfig {
    pub detection: DetectionConfig,
    pub bootstrap: BootstrapConfig,
    /// Master seed; each day and pair draws from a derived child seed.
    pub seed: u64,
}

/// Everything estimated for one day.
#[derive(Debug, Clone)]
pub struct DayAnalysis {
    pub date: NaiveDate,
    /// Instruments analysed, in panel order.
    pub instruments: Vec<String>,
    pub jumps: Vec<JumpSeries>,
    /// JWC integrated covariance of the jump-adjusted returns.
    pub ic: IcMatrix,
    pub pairs: Vec<DayDecomposition>,
    pub tests: Vec<TestOutcome>,
    pub tuples: Vec<GroupDay>,
}

/// Seed of the test for pair `pair_index` on `date`. Keyed by calendar date
/// so dropping other days leaves it unchanged.
pub fn pair_seed(master: u64, date: NaiveDate, pair_index: usize) -> u64 {
    derive_seed(master, &[date.num_days_from_ce() as u64, pair_index as u64])
}

fn member_indices(group: &Group, instruments: &[String]) -> Result<Vec<usize>> {
    group
        .members
        .iter()
        .map(|m| {
            instruments
                .iter()
                .position(|n| n == m)
                .ok_or_else(|| Error::InvalidInput(format!("instrument '{m}' of {group} not in panel")))
        })
        .collect()
}

fn records(panel: &ReturnPanel, indices: &[usize], jumps: &[&JumpSeries]) -> Vec<CoJumpRecord> {
    indices
        .iter()
        .map(|&i| CoJumpRecord {
            index: i,
            time: panel.interval_start(i),
            sizes: jumps.iter().map(|j| j.sizes()[i]).collect(),
        })
        .collect()
}

/// Decomposes one day for the given pairs and tuples.
pub fn analyze_day(panel: &ReturnPanel, pairs: &[Group], tuples: &[Group], config: &PipelineConfig) -> Result<DayAnalysis> {
    if let Some(p) = pairs.iter().find(|p| p.len() != 2) {
        return Err(Error::InvalidConfig(format!("pair {p} must have exactly two members")));
    }
    let mut used: Vec<String> = Vec::new();
    for name in pairs.iter().chain(tuples).flat_map(|g| &g.members) {
        if !used.contains(name) {
            used.push(name.clone());
        }
    }
    used.sort_by_key(|n| panel.index_of(n));
    let panel = panel.select(&used)?;
    let raw = panel.returns();

    let jumps = raw
        .iter()
        .map(|r| locate_jumps(r, &config.detection))
        .collect::<Result<Vec<_>>>()?;
    let adjusted = raw
        .iter()
        .zip(&jumps)
        .map(|(r, j)| adjust_returns(r, j))
        .collect::<Result<Vec<_>>>()?;
    let ic = jwc_integrated_covariance(&adjusted, &config.bootstrap.jwc)?;

    let mut decomps = Vec::with_capacity(pairs.len());
    let mut tests = Vec::with_capacity(pairs.len());
    for (k, pair) in pairs.iter().enumerate() {
        let idx = member_indices(pair, &used)?;
        let (a, b) = (idx[0], idx[1]);
        let qv = realized_covariance(&raw[a], &raw[b])?;
        let qv_diag = [realized_covariance(&raw[a], &raw[a])?, realized_covariance(&raw[b], &raw[b])?];
        let cojumps = cojump_variation(&jumps[a], &jumps[b])?;
        let stats = PairDayStats {
            len: panel.len(),
            qv,
            ic_11: ic.get(a, a),
            ic_22: ic.get(b, b),
            ic_12: ic.get(a, b),
            common_jump: !cojumps.events.is_empty(),
        };
        let outcome = bootstrap_statistic(&stats, &config.bootstrap, pair_seed(config.seed, panel.date(), k))?;
        let star = select_ic_star(&outcome, qv, ic.get(a, b));
        // The acceptance branch keeps the whole QV block so both
        // correlations stay on one scale.
        let keep_qv = !outcome.rejected && !star.inconclusive;
        let ic_diag = if keep_qv { qv_diag } else { [ic.get(a, a), ic.get(b, b)] };
        let is_cojump = outcome.classification == Classification::CoJump;
        let indices: Vec<usize> = cojumps.events.iter().map(|e| e.index).collect();
        decomps.push(DayDecomposition {
            date: panel.date(),
            pair: pair.clone(),
            qv,
            qv_diag,
            ic: star.value,
            ic_diag,
            cj: if is_cojump { cojumps.value } else { 0.0 },
            events: records(&panel, &indices, &[&jumps[a], &jumps[b]]),
            classification: outcome.classification,
            z: outcome.z,
            p_value: outcome.p_value,
        });
        tests.push(outcome);
    }

    let mut groups = Vec::with_capacity(tuples.len());
    for tuple in tuples {
        let idx = member_indices(tuple, &used)?;
        let series: Vec<&JumpSeries> = idx.iter().map(|&i| &jumps[i]).collect();
        let common = common_jump_indices(&series);
        let all_pairs_cojump = tuple.pairs().iter().all(|p| {
            pairs
                .iter()
                .zip(&decomps)
                .find(|(q, _)| same_pair(q, p))
                .is_some_and(|(_, d)| d.classification == Classification::CoJump)
        });
        let active = all_pairs_cojump && !common.is_empty();
        groups.push(GroupDay {
            date: panel.date(),
            group: tuple.clone(),
            active,
            events: if active { records(&panel, &common, &series) } else { Vec::new() },
        });
    }

    Ok(DayAnalysis {
        date: panel.date(),
        instruments: used,
        jumps,
        ic,
        pairs: decomps,
        tests,
        tuples: groups,
    })
}

fn same_pair(a: &Group, b: &Group) -> bool {
    let (x, y) = (&a.members, &b.members);
    (x[0] == y[0] && x[1] == y[1]) || (x[0] == y[1] && x[1] == y[0])
}

/// Pairs every tuple needs; the union with the configured pairs must be
/// tested for tuple classification.
pub fn required_pairs(pairs: &[Group], tuples: &[Group]) -> Vec<Group> {
    let mut out = pairs.to_vec();
    for p in tuples.iter().flat_map(Group::pairs) {
        if !out.iter().any(|q| same_pair(q, &p)) {
            out.push(p);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DayFailure {
    pub date: NaiveDate,
    pub error: String,
}

#[derive(Debug, Clone, Default)]
pub struct DecompositionRun {
    pub days: Vec<DayAnalysis>,
    pub failures: Vec<DayFailure>,
}

/// Analyses every panel; a failing day is recorded and skipped.
pub fn run_decomposition(
    panels: &[ReturnPanel],
    pairs: &[Group],
    tuples: &[Group],
    config: &PipelineConfig,
) -> DecompositionRun {
    let results: Vec<(NaiveDate, Result<DayAnalysis>)> = panels
        .par_iter()
        .map(|p| (p.date(), analyze_day(p, pairs, tuples, config)))
        .collect();
    let mut run = DecompositionRun::default();
    for (date, result) in results {
        match result {
            Ok(day) => run.days.push(day),
            Err(e) => run.failures.push(DayFailure {
                date,
                error: e.to_string(),
            }),
        }
    }
    run.days.sort_by_key(|d| d.date);
    run.failures.sort_by_key(|f| f.date);
    run
}
