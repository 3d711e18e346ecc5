use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::env::Terminal;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "run_id,episode,reward,steps,terminal";

/// How an episode ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EpisodeEnd {
    Goal,
    Collision,
    Timeout,
    /// Training stopped on a non-finite loss; the run is counted as failed.
    Diverged,
}

impl EpisodeEnd {
    pub fn as_str(self) -> &'static str {
        match self {
            EpisodeEnd::Goal => "goal",
            EpisodeEnd::Collision => "collision",
            EpisodeEnd::Timeout => "timeout",
            EpisodeEnd::Diverged => "diverged",
        }
    }

    pub fn from_terminal(t: Terminal) -> Option<Self> {
        match t {
            Terminal::None => None,
            Terminal::Goal => Some(EpisodeEnd::Goal),
            Terminal::Collision => Some(EpisodeEnd::Collision),
            Terminal::Timeout => Some(EpisodeEnd::Timeout),
        }
    }
}

impl fmt::Display for EpisodeEnd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EpisodeEnd {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "goal" => EpisodeEnd::Goal,
            "collision" => EpisodeEnd::Collision,
            "timeout" => EpisodeEnd::Timeout,
            "diverged" => EpisodeEnd::Diverged,
            other => return Err(Error::Parse(format!("unknown terminal tag `{other}`"))),
        })
    }
}

/// One row of the episode CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeRecord {
    pub run_id: usize,
    pub episode: usize,
    /// Sum of raw environment rewards.
    pub reward: f64,
    pub steps: usize,
    pub terminal: EpisodeEnd,
}

pub fn records_to_csv(records: &[EpisodeRecord]) -> String {
    let mut out = String::with_capacity(48 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{},{:.16e},{},{}",
            r.run_id, r.episode, r.reward, r.steps, r.terminal
        )
        .unwrap();
    }
    out
}

pub fn write_records(path: impl AsRef<Path>, records: &[EpisodeRecord]) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, records_to_csv(records)).map_err(|e| Error::io(path, e))
}

#[derive(Deserialize)]
struct Row {
    run_id: usize,
    episode: usize,
    reward: f64,
    steps: usize,
    terminal: String,
}

pub fn parse_records(text: &str) -> Result<Vec<EpisodeRecord>> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::Parse(format!(
            "unexpected CSV header `{}`, expected `{CSV_HEADER}`",
            header.join(",")
        )));
    }
    reader
        .deserialize::<Row>()
        .map(|row| {
            let row = row?;
            if !row.reward.is_finite() {
                return Err(Error::Parse(format!(
                    "non-finite reward in run {} episode {}",
                    row.run_id, row.episode
                )));
            }
            Ok(EpisodeRecord {
                run_id: row.run_id,
                episode: row.episode,
                reward: row.reward,
                steps: row.steps,
                terminal: row.terminal.parse()?,
            })
        })
        .collect()
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<EpisodeRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_records(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}
