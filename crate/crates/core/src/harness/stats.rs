use std::collections::BTreeMap;
use std::fmt::Write as _;

use statrs::distribution::{ContinuousCDF, StudentsT};

use super::records::EpisodeRecord;
use crate::error::{Error, Result};

/// Episodes averaged per run when judging a run's final performance.
pub const FINAL_WINDOW: usize = 100;

/// Trailing moving average; the first `window - 1` entries average over the
/// available prefix.
pub fn moving_average(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 {
        return Err(Error::Config("moving-average window must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(series.len());
    let mut sum = 0.0;
    for (i, &x) in series.iter().enumerate() {
        sum += x;
        if i >= window {
            sum -= series[i - window];
        }
        out.push(sum / (i + 1).min(window) as f64);
    }
    Ok(out)
}

/// A two-sample t-test of `mean(a) - mean(b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    pub p_two_sided: f64,
    /// p-value for the alternative `mean(a) < mean(b)`.
    pub p_less: f64,
    /// p-value for the alternative `mean(a) > mean(b)`.
    pub p_greater: f64,
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let ss = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, ss / (n - 1.0))
}

fn finish(diff: f64, se: f64, df: f64) -> TTest {
    let t = if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    };
    let (p_less, p_greater) = if t.is_infinite() {
        if t > 0.0 {
            (1.0, 0.0)
        } else {
            (0.0, 1.0)
        }
    } else {
        let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
        (dist.cdf(t), dist.cdf(-t))
    };
    TTest {
        t,
        df,
        p_two_sided: (2.0 * p_less.min(p_greater)).min(1.0),
        p_less,
        p_greater,
    }
}

fn check_samples(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "t-test needs at least 2 samples per group, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Student's t-test with pooled variance.
pub fn student_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    check_samples(a, b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let df = na + nb - 2.0;
    let pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / df;
    Ok(finish(ma - mb, (pooled * (1.0 / na + 1.0 / nb)).sqrt(), df))
}

/// Welch's unequal-variance t-test with Welch–Satterthwaite degrees of freedom.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    check_samples(a, b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (qa, qb) = (va / na, vb / nb);
    let se2 = qa + qb;
    let df = if se2 > 0.0 {
        se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0))
    } else {
        na + nb - 2.0
    };
    Ok(finish(ma - mb, se2.sqrt(), df))
}

/// Records regrouped as one reward series per run, indexed by episode.
#[derive(Debug, Clone, PartialEq)]
pub struct RunCurves {
    pub runs: BTreeMap<usize, Vec<f64>>,
    pub episodes: usize,
}

impl RunCurves {
    pub fn from_records(records: &[EpisodeRecord]) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::InsufficientData("no episode records".into()));
        }
        let mut grouped: BTreeMap<usize, BTreeMap<usize, f64>> = BTreeMap::new();
        for r in records {
            if grouped.entry(r.run_id).or_default().insert(r.episode, r.reward).is_some() {
                return Err(Error::Parse(format!(
                    "duplicate record for run {} episode {}",
                    r.run_id, r.episode
                )));
            }
        }
        let mut episodes = None;
        let mut runs = BTreeMap::new();
        for (run, eps) in grouped {
            let n = eps.len();
            if eps.keys().copied().ne(0..n) {
                return Err(Error::Parse(format!("run {run} does not cover episodes 0..{n}")));
            }
            match episodes {
                None => episodes = Some(n),
                Some(m) if m != n => {
                    return Err(Error::Parse(format!(
                        "run {run} has {n} episodes, other runs have {m}"
                    )))
                }
                Some(_) => {}
            }
            runs.insert(run, eps.into_values().collect());
        }
        Ok(RunCurves {
            runs,
            episodes: episodes.unwrap(),
        })
    }

    /// Per-episode mean across runs.
    pub fn averaged(&self) -> Vec<f64> {
        let n = self.runs.len() as f64;
        (0..self.episodes)
            .map(|e| self.runs.values().map(|c| c[e]).sum::<f64>() / n)
            .collect()
    }

    /// Mean over each run's last `window` episodes (all of them if shorter).
    pub fn final_means(&self, window: usize) -> Vec<(usize, f64)> {
        let w = window.min(self.episodes).max(1);
        self.runs
            .iter()
            .map(|(&run, c)| (run, c[c.len() - w..].iter().sum::<f64>() / w as f64))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentSummary {
    pub label: String,
    pub runs: usize,
    /// Mean across runs of the per-run final-window means.
    pub mean_final: f64,
    pub final_means: Vec<(usize, f64)>,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub a: AgentSummary,
    pub b: AgentSummary,
    pub episodes: usize,
    pub failure_threshold: f64,
    /// Pooled-variance test on the run-averaged learning curves.
    pub student: TTest,
    pub welch: TTest,
}

/// Compares two agents' learning curves: t-tests over the run-averaged
/// per-episode rewards, final-window means per run, and failure counts.
pub fn compare(
    label_a: &str,
    a: &[EpisodeRecord],
    label_b: &str,
    b: &[EpisodeRecord],
    failure_threshold: f64,
) -> Result<ComparisonReport> {
    let ca = RunCurves::from_records(a)?;
    let cb = RunCurves::from_records(b)?;
    if ca.episodes != cb.episodes {
        return Err(Error::InsufficientData(format!(
            "episode counts differ: {} vs {}",
            ca.episodes, cb.episodes
        )));
    }
    let (avg_a, avg_b) = (ca.averaged(), cb.averaged());
    let summary = |label: &str, curves: &RunCurves| {
        let final_means = curves.final_means(FINAL_WINDOW);
        AgentSummary {
            label: label.to_owned(),
            runs: curves.runs.len(),
            mean_final: final_means.iter().map(|(_, m)| m).sum::<f64>() / final_means.len() as f64,
            failures: final_means.iter().filter(|(_, m)| *m < failure_threshold).count(),
            final_means,
        }
    };
    Ok(ComparisonReport {
        a: summary(label_a, &ca),
        b: summary(label_b, &cb),
        episodes: ca.episodes,
        failure_threshold,
        student: student_t_test(&avg_a, &avg_b)?,
        welch: welch_t_test(&avg_a, &avg_b)?,
    })
}

impl ComparisonReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "episodes per run: {}", self.episodes).unwrap();
        for agent in [&self.a, &self.b] {
            writeln!(
                s,
                "{:>10}: runs {:>3}  mean final-{FINAL_WINDOW} reward {:>10.4}  failures {}/{} (threshold {})",
                agent.label, agent.runs, agent.mean_final, agent.failures, agent.runs, self.failure_threshold
            )
            .unwrap();
        }
        for (name, t) in [("student", &self.student), ("welch", &self.welch)] {
            writeln!(
                s,
                "{name:>10}: t = {:.4}  df = {:.1}  p(two-sided) = {:.4e}  p({} < {}) = {:.4e}",
                t.t, t.df, t.p_two_sided, self.a.label, self.b.label, t.p_less
            )
            .unwrap();
        }
        for agent in [&self.a, &self.b] {
            let mut sorted: Vec<f64> = agent.final_means.iter().map(|(_, m)| *m).collect();
            sorted.sort_by(f64::total_cmp);
            let list: Vec<String> = sorted.iter().map(|m| format!("{m:.2}")).collect();
            writeln!(s, "{:>10}: final means (ascending) {}", agent.label, list.join(" ")).unwrap();
        }
        s
    }

    /// Long-format CSV: `metric,agent,run_id,value`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("metric,agent,run_id,value\n");
        let mut row = |metric: &str, agent: &str, run: Option<usize>, value: f64| {
            let run = run.map(|r| r.to_string()).unwrap_or_default();
            writeln!(s, "{metric},{agent},{run},{value:.16e}").unwrap();
        };
        row("episodes", "", None, self.episodes as f64);
        row("failure_threshold", "", None, self.failure_threshold);
        for agent in [&self.a, &self.b] {
            row("runs", &agent.label, None, agent.runs as f64);
            row("mean_final", &agent.label, None, agent.mean_final);
            row("failures", &agent.label, None, agent.failures as f64);
            for &(run, m) in &agent.final_means {
                row("final_mean", &agent.label, Some(run), m);
            }
        }
        for (name, t) in [("student", &self.student), ("welch", &self.welch)] {
            row(&format!("{name}_t"), "", None, t.t);
            row(&format!("{name}_df"), "", None, t.df);
            row(&format!("{name}_p_two_sided"), "", None, t.p_two_sided);
            row(&format!("{name}_p_less"), "", None, t.p_less);
            row(&format!("{name}_p_greater"), "", None, t.p_greater);
        }
        s
    }
}
