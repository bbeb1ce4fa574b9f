//! Scoring event logs against scenario ground truth.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::FusionConfig;
use crate::error::{Error, Result};
use crate::model::IoIEvent;
use crate::par::Execution;
use crate::sim::{run_scenario, GroundTruth, Scenario};

/// Default half-width of the matching window, seconds.
pub const DEFAULT_WINDOW: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MatchCounts {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

impl std::ops::Add for MatchCounts {
    type Output = MatchCounts;

    fn add(self, o: MatchCounts) -> MatchCounts {
        MatchCounts {
            true_positives: self.true_positives + o.true_positives,
            false_positives: self.false_positives + o.false_positives,
            false_negatives: self.false_negatives + o.false_negatives,
        }
    }
}

/// Greedy one-to-one matching of events to truth entries.
///
/// Events are taken in time order; each claims the nearest unclaimed truth
/// entry for the same person within `±window` (earliest on ties).
pub fn match_events(events: &[IoIEvent], truth: &[GroundTruth], window: f64) -> MatchCounts {
    let mut order: Vec<usize> = (0..events.len()).collect();
    order.sort_by(|&a, &b| {
        events[a]
            .timestamp
            .seconds()
            .total_cmp(&events[b].timestamp.seconds())
    });
    let mut taken = vec![false; truth.len()];
    let mut tp = 0;
    for i in order {
        let e = &events[i];
        let t = e.timestamp.seconds();
        let mut best: Option<(usize, f64)> = None;
        for (j, g) in truth.iter().enumerate() {
            if taken[j] || g.person != e.track_id {
                continue;
            }
            let d = (g.onset - t).abs();
            if d > window {
                continue;
            }
            let better = match best {
                None => true,
                Some((k, bd)) => d < bd || (d == bd && g.onset < truth[k].onset),
            };
            if better {
                best = Some((j, d));
            }
        }
        if let Some((j, _)) = best {
            taken[j] = true;
            tp += 1;
        }
    }
    MatchCounts {
        true_positives: tp,
        false_positives: events.len() - tp,
        false_negatives: truth.len() - tp,
    }
}

/// Harmonic mean of two percentages; 0 when both are 0.
pub fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Detection scores in percent. A score whose denominator is zero is `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub counts: MatchCounts,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f_measure: Option<f64>,
}

fn percent(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| 100.0 * num as f64 / den as f64)
}

impl EvalReport {
    pub fn from_counts(counts: MatchCounts) -> Self {
        let precision = percent(
            counts.true_positives,
            counts.true_positives + counts.false_positives,
        );
        let recall = percent(
            counts.true_positives,
            counts.true_positives + counts.false_negatives,
        );
        let f = match (precision, recall) {
            (Some(p), Some(r)) => Some(f_measure(p, r)),
            _ => None,
        };
        EvalReport {
            counts,
            precision,
            recall,
            f_measure: f,
        }
    }

    pub fn evaluate(events: &[IoIEvent], truth: &[GroundTruth], window: f64) -> Self {
        Self::from_counts(match_events(events, truth, window))
    }
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.2}"))
}

const HEADER: [&str; 7] = ["", "TP", "FP", "FN", "Precision", "Recall", "F-measure"];

fn row(label: &str, r: &EvalReport) -> [String; 7] {
    [
        label.to_string(),
        r.counts.true_positives.to_string(),
        r.counts.false_positives.to_string(),
        r.counts.false_negatives.to_string(),
        cell(r.precision),
        cell(r.recall),
        cell(r.f_measure),
    ]
}

/// Aligned plain-text table, one row per labelled report.
pub fn render_table(rows: &[(&str, EvalReport)]) -> String {
    let cells: Vec<[String; 7]> = std::iter::once(HEADER.map(String::from))
        .chain(rows.iter().map(|(l, r)| row(l, r)))
        .collect();
    let mut width = [0; 7];
    for c in &cells {
        for (w, s) in width.iter_mut().zip(c) {
            *w = (*w).max(s.chars().count());
        }
    }
    let mut out = String::new();
    for c in &cells {
        let mut line = format!("{:<w$}", c[0], w = width[0]);
        for (s, w) in c.iter().zip(width).skip(1) {
            let _ = write!(line, "  {s:>w$}");
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// Comma-separated version of [`render_table`] with a `label` column.
pub fn render_csv(rows: &[(&str, EvalReport)]) -> String {
    let mut out = String::from("label,tp,fp,fn,precision,recall,f_measure\n");
    for (l, r) in rows {
        out.push_str(&row(l, r).join(","));
        out.push('\n');
    }
    out
}

/// Outcome of one scenario under both configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioScore {
    pub name: String,
    pub av_only: MatchCounts,
    pub full: MatchCounts,
}

/// Scores of a whole scenario directory, sorted by scenario name.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub scenarios: Vec<ScenarioScore>,
}

impl SuiteReport {
    pub fn av_only(&self) -> EvalReport {
        EvalReport::from_counts(
            self.scenarios
                .iter()
                .map(|s| s.av_only)
                .fold(Default::default(), |a, b| a + b),
        )
    }

    pub fn full(&self) -> EvalReport {
        EvalReport::from_counts(
            self.scenarios
                .iter()
                .map(|s| s.full)
                .fold(Default::default(), |a, b| a + b),
        )
    }

    pub fn rows(&self) -> [(&'static str, EvalReport); 2] {
        [("AV-IoI", self.av_only()), ("Full-IoI", self.full())]
    }
}

/// `.scn` files directly inside `dir`, sorted by file name.
pub fn scenario_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| p.is_file() && p.extension().is_some_and(|e| e == "scn"));
    files.sort();
    if files.is_empty() {
        return Err(Error::invalid(format!(
            "no .scn scenarios in {}",
            dir.display()
        )));
    }
    Ok(files)
}

/// Scores named scenarios with the vision-only path disabled and enabled.
///
/// Scenario runs are independent and may execute in parallel; the report
/// is ordered by name regardless.
pub fn run_suite(
    scenarios: &[(String, Scenario)],
    config: &FusionConfig,
    window: f64,
    exec: Execution,
) -> Result<SuiteReport> {
    let av_cfg = FusionConfig {
        enable_vision_path: false,
        ..config.clone()
    };
    let full_cfg = FusionConfig {
        enable_vision_path: true,
        ..config.clone()
    };
    let jobs: Vec<(usize, bool)> = (0..scenarios.len())
        .flat_map(|i| [(i, false), (i, true)])
        .collect();
    let counts = exec.map(&jobs, |&(i, full)| {
        let sc = &scenarios[i].1;
        let cfg = if full { &full_cfg } else { &av_cfg };
        run_scenario(sc, cfg, Execution::Sequential)
            .map(|out| match_events(&out.events, &sc.truth, window))
    });
    let counts = counts.into_iter().collect::<Result<Vec<_>>>()?;
    let mut scores: Vec<ScenarioScore> = counts
        .chunks(2)
        .zip(scenarios)
        .map(|(pair, (name, _))| ScenarioScore {
            name: name.clone(),
            av_only: pair[0],
            full: pair[1],
        })
        .collect();
    scores.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(SuiteReport { scenarios: scores })
}

/// Loads every scenario in `dir` and runs [`run_suite`].
pub fn run_suite_dir(
    dir: &Path,
    config: &FusionConfig,
    window: f64,
    exec: Execution,
) -> Result<SuiteReport> {
    let scenarios = scenario_files(dir)?
        .into_iter()
        .map(|p| {
            let name = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Scenario::load(&p).map(|sc| (name, sc))
        })
        .collect::<Result<Vec<_>>>()?;
    run_suite(&scenarios, config, window, exec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{IoIKind, StateKind, Timestamp, TrackId};
    use proptest::prelude::*;

    fn ev(person: TrackId, t: f64) -> IoIEvent {
        IoIEvent {
            kind: IoIKind::AudioVision,
            track_id: person,
            timestamp: Timestamp::new(t).unwrap(),
            state_path: vec![StateKind::Monitoring, StateKind::IoI],
        }
    }

    fn gt(person: TrackId, t: f64) -> GroundTruth {
        GroundTruth {
            person,
            onset: t,
            kind: IoIKind::AudioVision,
        }
    }

    /// Maximum one-to-one matching by exhaustive search.
    fn optimal_tp(events: &[IoIEvent], truth: &[GroundTruth], window: f64) -> usize {
        fn go(i: usize, e: &[IoIEvent], g: &[GroundTruth], used: &mut [bool], w: f64) -> usize {
            if i == e.len() {
                return 0;
            }
            let mut best = go(i + 1, e, g, used, w);
            for j in 0..g.len() {
                if !used[j]
                    && g[j].person == e[i].track_id
                    && (g[j].onset - e[i].timestamp.seconds()).abs() <= w
                {
                    used[j] = true;
                    best = best.max(1 + go(i + 1, e, g, used, w));
                    used[j] = false;
                }
            }
            best
        }
        go(0, events, truth, &mut vec![false; truth.len()], window)
    }

    #[test]
    fn spec_examples() {
        let c = match_events(&[ev(1, 5.0)], &[gt(1, 5.3)], 1.0);
        assert_eq!(
            (c.true_positives, c.false_positives, c.false_negatives),
            (1, 0, 0)
        );
        let c = match_events(&[ev(1, 5.0)], &[], 1.0);
        assert_eq!(
            (c.true_positives, c.false_positives, c.false_negatives),
            (0, 1, 0)
        );
        let events = [ev(1, 5.0), ev(1, 5.4)];
        let truth = [gt(1, 5.2)];
        let c = match_events(&events, &truth, 1.0);
        assert_eq!(
            (c.true_positives, c.false_positives, c.false_negatives),
            (1, 1, 0)
        );
        assert_eq!(optimal_tp(&events, &truth, 1.0), 1);
    }

    #[test]
    fn person_must_agree() {
        let c = match_events(&[ev(2, 5.0)], &[gt(1, 5.0)], 1.0);
        assert_eq!(
            (c.true_positives, c.false_positives, c.false_negatives),
            (0, 1, 1)
        );
    }

    #[test]
    fn window_edge_is_inclusive() {
        assert_eq!(
            match_events(&[ev(1, 2.0)], &[gt(1, 3.0)], 1.0).true_positives,
            1
        );
        assert_eq!(
            match_events(&[ev(1, 2.0)], &[gt(1, 3.01)], 1.0).true_positives,
            0
        );
    }

    #[test]
    fn table_one_arithmetic() {
        assert!((f_measure(86.36, 95.0) - 90.48).abs() <= 0.01);
        assert!((f_measure(82.35, 70.0) - 75.68).abs() <= 0.01);
        assert_eq!(f_measure(100.0, 100.0), 100.0);
        assert_eq!(f_measure(0.0, 0.0), 0.0);
    }

    #[test]
    fn report_percentages() {
        let r = EvalReport::evaluate(&[ev(1, 1.0), ev(1, 9.0)], &[gt(1, 1.2), gt(2, 4.0)], 1.0);
        assert_eq!(r.precision, Some(50.0));
        assert_eq!(r.recall, Some(50.0));
        assert_eq!(r.f_measure, Some(50.0));
        let perfect = EvalReport::evaluate(&[ev(1, 1.0)], &[gt(1, 1.0)], 1.0);
        assert_eq!(
            (perfect.precision, perfect.recall, perfect.f_measure),
            (Some(100.0), Some(100.0), Some(100.0))
        );
        let empty = EvalReport::evaluate(&[], &[], 1.0);
        assert_eq!(
            (empty.precision, empty.recall, empty.f_measure),
            (None, None, None)
        );
    }

    #[test]
    fn table_is_aligned() {
        let r = EvalReport::evaluate(&[ev(1, 1.0)], &[gt(1, 1.0), gt(1, 8.0)], 1.0);
        let t = render_table(&[("AV-IoI", r), ("Full-IoI", r)]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines.iter().all(|l| l.len() == lines[0].len()), "{t}");
        assert!(lines[2].starts_with("Full-IoI"));
        assert!(lines[1].ends_with("66.67"), "{t}");
        let csv = render_csv(&[("AV-IoI", r)]);
        assert_eq!(csv.lines().nth(1), Some("AV-IoI,1,0,1,100.00,50.00,66.67"));
    }

    type Marks = Vec<(u32, f64)>;

    fn instance() -> impl Strategy<Value = (Marks, Marks)> {
        (
            prop::collection::vec((1u32..3, 0.0f64..20.0), 0..6),
            prop::collection::vec((1u32..3, 0.0f64..20.0), 0..6),
        )
    }

    proptest! {
        #[test]
        fn f_measure_properties(p in 0.0f64..=100.0, r in 0.0f64..=100.0) {
            let f = f_measure(p, r);
            prop_assert!((f - f_measure(r, p)).abs() < 1e-12);
            prop_assert!(f >= p.min(r) - 1e-9 && f <= p.max(r) + 1e-9);
            prop_assert!((f_measure(p, p) - p).abs() < 1e-9);
        }

        #[test]
        fn counts_are_consistent_and_never_beat_optimum((e, g) in instance()) {
            let events: Vec<_> = e.iter().map(|&(p, t)| ev(p, t)).collect();
            let truth: Vec<_> = g.iter().map(|&(p, t)| gt(p, t)).collect();
            let c = match_events(&events, &truth, 1.0);
            prop_assert_eq!(c.true_positives + c.false_positives, events.len());
            prop_assert_eq!(c.true_positives + c.false_negatives, truth.len());
            prop_assert!(c.true_positives <= optimal_tp(&events, &truth, 1.0));
        }

        #[test]
        fn greedy_is_optimal_when_truths_are_spread(
            e in prop::collection::vec((1u32..3, 0usize..6, -1.0f64..1.0), 0..8),
        ) {
            // truths 2.5 s apart: each event can reach at most one of them
            let truth: Vec<_> = (0..6).flat_map(|k| [gt(1, 2.5 * k as f64 + 1.0), gt(2, 2.5 * k as f64 + 1.0)]).collect();
            let events: Vec<_> = e.iter().map(|&(p, k, d)| ev(p, 2.5 * k as f64 + 1.0 + d)).collect();
            prop_assert_eq!(match_events(&events, &truth, 1.0).true_positives, optimal_tp(&events, &truth, 1.0));
        }

        #[test]
        fn time_shift_invariance((e, g) in instance(), shift in 0.0f64..50.0) {
            // shifts by multiples of 1/8 s keep every sum exact
            let shift = (shift * 8.0).round() / 8.0;
            let q = |t: f64| (t * 8.0).round() / 8.0;
            let events: Vec<_> = e.iter().map(|&(p, t)| ev(p, q(t))).collect();
            let truth: Vec<_> = g.iter().map(|&(p, t)| gt(p, q(t))).collect();
            let moved_e: Vec<_> = e.iter().map(|&(p, t)| ev(p, q(t) + shift)).collect();
            let moved_g: Vec<_> = g.iter().map(|&(p, t)| gt(p, q(t) + shift)).collect();
            prop_assert_eq!(match_events(&events, &truth, 1.0), match_events(&moved_e, &moved_g, 1.0));
        }
    }
}
