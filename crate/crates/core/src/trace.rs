//! JSON-lines run traces.
//!
//! A trace starts with a `meta` record carrying the scenario, followed by the
//! tick-0 snapshot, one `tick` record per simulated tick, a `snapshot` record
//! every `snapshot_every` ticks, and always a final snapshot. Records are
//! written in tick order; the same scenario, seed and command log produce the
//! same bytes.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Snapshot, TickReport, WorldState};
use crate::scenario::{Scenario, SCHEMA_VERSION};

pub const DEFAULT_SNAPSHOT_EVERY: u64 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub schema_version: u32,
    pub scenario: Scenario,
    pub snapshot_every: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceRecord {
    Meta(Meta),
    Tick(TickReport),
    Snapshot(Snapshot),
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace I/O failed: {0}")]
    Io(#[from] io::Error),
    #[error("corrupt trace at record {line}: {message}")]
    Corrupt { line: usize, message: String },
}

/// Streams records to `out` as the run advances.
pub struct TraceWriter<W: Write> {
    out: W,
    every: u64,
    last_snapshot: Option<u64>,
}

impl<W: Write> TraceWriter<W> {
    /// Writes the `meta` record and the initial snapshot.
    pub fn new(out: W, scenario: &Scenario, snapshot_every: u64, initial: &WorldState) -> io::Result<Self> {
        let mut w = Self { out, every: snapshot_every.max(1), last_snapshot: None };
        w.write(&TraceRecord::Meta(Meta {
            schema_version: SCHEMA_VERSION,
            scenario: scenario.clone(),
            snapshot_every: w.every,
        }))?;
        w.snapshot(initial)?;
        Ok(w)
    }

    /// Records one completed tick; `state` is the world after it.
    pub fn tick(&mut self, report: &TickReport, state: &WorldState) -> io::Result<()> {
        self.write(&TraceRecord::Tick(report.clone()))?;
        if state.tick() % self.every == 0 {
            self.snapshot(state)?;
        }
        Ok(())
    }

    /// Writes the final snapshot (unless it was just written) and flushes.
    pub fn finish(mut self, state: &WorldState) -> io::Result<W> {
        if self.last_snapshot != Some(state.tick()) {
            self.snapshot(state)?;
        }
        self.out.flush()?;
        Ok(self.out)
    }

    fn snapshot(&mut self, state: &WorldState) -> io::Result<()> {
        self.last_snapshot = Some(state.tick());
        self.write(&TraceRecord::Snapshot(state.snapshot()))
    }

    fn write(&mut self, record: &TraceRecord) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, record)?;
        self.out.write_all(b"\n")
    }
}

/// A whole trace read back into memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub meta: Meta,
    pub ticks: Vec<TickReport>,
    pub snapshots: Vec<Snapshot>,
}

impl Trace {
    /// Parses and checks ordering; errors name the first bad record (1-based).
    pub fn read<R: BufRead>(input: R) -> Result<Trace, TraceError> {
        let mut meta = None;
        let mut ticks: Vec<TickReport> = Vec::new();
        let mut snapshots: Vec<Snapshot> = Vec::new();
        let mut line_no = 0;
        for line in input.lines() {
            let line = line?;
            line_no += 1;
            let corrupt = |message: String| TraceError::Corrupt { line: line_no, message };
            if line.trim().is_empty() {
                return Err(corrupt("blank record".into()));
            }
            let record: TraceRecord = serde_json::from_str(&line).map_err(|e| corrupt(e.to_string()))?;
            match (record, &meta) {
                (TraceRecord::Meta(m), None) => {
                    if m.schema_version != SCHEMA_VERSION {
                        return Err(corrupt(format!("unsupported schema_version {}", m.schema_version)));
                    }
                    meta = Some(m);
                }
                (TraceRecord::Meta(_), Some(_)) => return Err(corrupt("second meta record".into())),
                (_, None) => return Err(corrupt("trace must start with a meta record".into())),
                (TraceRecord::Tick(_), Some(_)) if snapshots.is_empty() => {
                    return Err(corrupt("missing initial snapshot".into()))
                }
                (TraceRecord::Tick(t), Some(_)) => {
                    let expected = ticks.len() as u64;
                    if t.tick != expected {
                        return Err(corrupt(format!("tick {} out of order, expected {expected}", t.tick)));
                    }
                    ticks.push(t);
                }
                (TraceRecord::Snapshot(s), Some(_)) => {
                    if s.tick != ticks.len() as u64 {
                        return Err(corrupt(format!("snapshot at tick {} after {} tick records", s.tick, ticks.len())));
                    }
                    snapshots.push(s);
                }
            }
        }
        let meta = meta.ok_or(TraceError::Corrupt { line: 1, message: "empty trace".into() })?;
        if snapshots.last().map(|s| s.tick) != Some(ticks.len() as u64) {
            return Err(TraceError::Corrupt { line: line_no + 1, message: "missing final snapshot".into() });
        }
        Ok(Trace { meta, ticks, snapshots })
    }

    pub fn final_snapshot(&self) -> &Snapshot {
        self.snapshots.last().expect("checked on read")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_is_corrupt() {
        match Trace::read(&b""[..]) {
            Err(TraceError::Corrupt { line: 1, message }) => assert_eq!(message, "empty trace"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn garbage_names_its_line() {
        let text = "{\"kind\":\"tick\",\"tick\":0}\n";
        match Trace::read(text.as_bytes()) {
            Err(TraceError::Corrupt { line: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
    }
}
