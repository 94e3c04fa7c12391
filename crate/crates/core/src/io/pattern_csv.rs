//! Pattern CSV: one `time_hours` column, metadata in `#` comment lines.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::pattern::PointPattern;

pub const TIME_COLUMN: &str = "time_hours";

/// Renders the pattern with `# key: value` metadata lines; `horizon` is always written.
///
/// Times use the shortest decimal form that parses back to the same `f64`.
pub fn pattern_to_csv(pattern: &PointPattern, meta: &[(&str, String)]) -> String {
    let mut s = String::new();
    for (k, v) in meta {
        let v = v.replace('\n', " ");
        writeln!(s, "# {k}: {v}").unwrap();
    }
    writeln!(s, "# horizon: {}", pattern.horizon()).unwrap();
    writeln!(s, "{TIME_COLUMN}").unwrap();
    for t in pattern.events() {
        writeln!(s, "{t}").unwrap();
    }
    s
}

pub fn write_pattern(path: &Path, pattern: &PointPattern, meta: &[(&str, String)]) -> Result<()> {
    std::fs::write(path, pattern_to_csv(pattern, meta))?;
    Ok(())
}

/// Parses a pattern CSV. The horizon comes from a `# horizon:` line unless given.
pub fn pattern_from_csv(text: &str, horizon: Option<f64>) -> Result<PointPattern> {
    let mut meta_horizon = None;
    let mut header_seen = false;
    let mut events = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            if let Some((k, v)) = c.split_once(':') {
                if k.trim() == "horizon" {
                    meta_horizon = Some(v.trim().parse::<f64>().map_err(|e| {
                        Error::Data(format!("line {}: bad horizon {:?}: {e}", i + 1, v.trim()))
                    })?);
                }
            }
            continue;
        }
        if !header_seen {
            let first = line.split(',').next().unwrap_or("").trim();
            if first != TIME_COLUMN {
                return Err(Error::Data(format!(
                    "line {}: expected header {TIME_COLUMN:?}, found {line:?}",
                    i + 1
                )));
            }
            header_seen = true;
            continue;
        }
        let cell = line.split(',').next().unwrap_or("").trim();
        let t: f64 = cell
            .parse()
            .map_err(|e| Error::Data(format!("line {}: bad time {cell:?}: {e}", i + 1)))?;
        events.push(t);
    }
    if !header_seen {
        return Err(Error::Data(format!("missing {TIME_COLUMN:?} header")));
    }
    let horizon = horizon
        .or(meta_horizon)
        .ok_or_else(|| Error::Data("no horizon given and no `# horizon:` line".into()))?;
    PointPattern::new(events, horizon).map_err(|e| Error::Data(e.to_string()))
}

pub fn read_pattern(path: &Path, horizon: Option<f64>) -> Result<PointPattern> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?;
    pattern_from_csv(&text, horizon)
}
