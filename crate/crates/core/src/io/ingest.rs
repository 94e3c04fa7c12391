//! Event-table ingest: timestamps to jittered hours since the start of the year.

use std::collections::HashSet;
use std::io::Read;

use chrono::{Datelike, NaiveDate, NaiveDateTime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::config::EventFilter;
use crate::pattern::PointPattern;

pub const DATE_FORMAT: &str = "%m/%d/%Y %I:%M:%S %p";
const MAX_REJITTER_ROUNDS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedRow {
    /// 1-based line number in the file, header included.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: usize,
    pub retained: usize,
    pub skipped: Vec<SkippedRow>,
    /// Retained events sharing their minute with at least one other event.
    pub tied_before_jitter: usize,
    pub year: i32,
    pub horizon: f64,
    pub seed: u64,
}

pub fn parse_timestamp(s: &str) -> Result<NaiveDateTime> {
    NaiveDateTime::parse_from_str(s.trim(), DATE_FORMAT)
        .map_err(|e| Error::Data(format!("bad timestamp {s:?}: {e}")))
}

fn year_start(year: i32) -> Result<NaiveDateTime> {
    NaiveDate::from_ymd_opt(year, 1, 1)
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .ok_or_else(|| Error::Data(format!("invalid year {year}")))
}

/// Hours in the calendar year (8760, or 8784 in leap years).
pub fn hours_in_year(year: i32) -> Result<f64> {
    let span = year_start(year + 1)? - year_start(year)?;
    Ok(span.num_seconds() as f64 / 3600.0)
}

/// Hours elapsed since 00:00 on 1 January of `year`.
pub fn hours_since_year_start(ts: NaiveDateTime, year: i32) -> Result<f64> {
    Ok((ts - year_start(year)?).num_seconds() as f64 / 3600.0)
}

/// Adds `Unif(-jitter, jitter)` seconds to each time, re-drawing ties and
/// times outside `(0, horizon]` until the result is strictly increasing.
pub fn jitter_times(base: &[f64], jitter_seconds: f64, horizon: f64, seed: u64) -> Result<Vec<f64>> {
    if !(jitter_seconds >= 0.0 && jitter_seconds.is_finite()) {
        return Err(Error::Config(format!("jitter_seconds must be non-negative, got {jitter_seconds}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let j = jitter_seconds / 3600.0;
    let draw = |t: f64, rng: &mut ChaCha8Rng| {
        if j > 0.0 {
            t + rng.random_range(-j..j)
        } else {
            t
        }
    };
    let mut order: Vec<usize> = (0..base.len()).collect();
    order.sort_by(|&a, &b| base[a].total_cmp(&base[b]));
    let mut times: Vec<f64> = order.iter().map(|&i| draw(base[i], &mut rng)).collect();
    for _ in 0..MAX_REJITTER_ROUNDS {
        let mut idx: Vec<usize> = (0..times.len()).collect();
        idx.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
        let mut bad = Vec::new();
        for (k, &i) in idx.iter().enumerate() {
            let t = times[i];
            if !(t > 0.0 && t <= horizon) || (k > 0 && times[idx[k - 1]] == t) {
                bad.push(i);
            }
        }
        if bad.is_empty() {
            return Ok(idx.iter().map(|&i| times[i]).collect());
        }
        for i in bad {
            times[i] = draw(base[order[i]], &mut rng);
        }
    }
    Err(Error::Data(
        "could not separate tied or boundary event times; increase jitter_seconds".into(),
    ))
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::Data(format!("event table has no {name:?} column")))
}

/// Reads a crime-portal style table and returns the filtered, jittered pattern.
pub fn ingest_events<R: Read>(reader: R, filter: &EventFilter, seed: u64) -> Result<(PointPattern, IngestReport)> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let c_date = column(&headers, "Date")?;
    let c_district = if filter.district.is_some() { Some(column(&headers, "District")?) } else { None };
    let c_type = if filter.primary_types.is_empty() { None } else { Some(column(&headers, "Primary Type")?) };
    let types: HashSet<String> = filter.primary_types.iter().map(|s| s.trim().to_uppercase()).collect();

    let mut skipped = Vec::new();
    let mut stamps = Vec::new();
    let mut rows_read = 0;
    let mut year = filter.year;
    for rec in rdr.records() {
        rows_read += 1;
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                skipped.push(SkippedRow { line, reason: e.to_string() });
                continue;
            }
        };
        let line = rec.position().map_or(0, |p| p.line());
        let field = |c: usize| rec.get(c).map(str::trim);
        if let Some(c) = c_type {
            match field(c) {
                Some(t) if types.contains(&t.to_uppercase()) => {}
                Some(_) => continue,
                None => {
                    skipped.push(SkippedRow { line, reason: "missing Primary Type".into() });
                    continue;
                }
            }
        }
        if let (Some(c), Some(d)) = (c_district, filter.district) {
            match field(c).map(|s| s.parse::<u32>()) {
                Some(Ok(v)) if v == d => {}
                Some(Ok(_)) => continue,
                _ => {
                    skipped.push(SkippedRow { line, reason: format!("bad District {:?}", field(c).unwrap_or("")) });
                    continue;
                }
            }
        }
        let ts = match field(c_date).map(parse_timestamp) {
            Some(Ok(ts)) => ts,
            Some(Err(e)) => {
                skipped.push(SkippedRow { line, reason: e.to_string() });
                continue;
            }
            None => {
                skipped.push(SkippedRow { line, reason: "missing Date".into() });
                continue;
            }
        };
        let y = *year.get_or_insert(ts.year());
        if ts.year() != y {
            continue;
        }
        stamps.push(ts);
    }
    if stamps.is_empty() {
        return Err(Error::Data(format!(
            "no rows of {} passed the filters ({} skipped as unparseable)",
            filter.path.display(),
            skipped.len()
        )));
    }
    let year = year.unwrap();
    let horizon = hours_in_year(year)?;
    let mut base = stamps
        .iter()
        .map(|ts| hours_since_year_start(*ts, year))
        .collect::<Result<Vec<f64>>>()?;
    base.sort_by(f64::total_cmp);
    let tied = base
        .iter()
        .enumerate()
        .filter(|&(i, t)| (i > 0 && base[i - 1] == *t) || (i + 1 < base.len() && base[i + 1] == *t))
        .count();
    let times = jitter_times(&base, filter.jitter_seconds, horizon, seed)?;
    let pattern = PointPattern::new(times, horizon)?;
    let report = IngestReport {
        rows_read,
        retained: pattern.len(),
        skipped,
        tied_before_jitter: tied,
        year,
        horizon,
        seed,
    };
    Ok((pattern, report))
}

pub fn ingest_events_file(filter: &EventFilter, seed: u64) -> Result<(PointPattern, IngestReport)> {
    let f = std::fs::File::open(&filter.path)
        .map_err(|e| Error::Data(format!("cannot open {}: {e}", filter.path.display())))?;
    ingest_events(std::io::BufReader::new(f), filter, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE: &str = "\
ID,Date,Block,Primary Type,District
1,01/03/2018 03:09:00 AM,x,ASSAULT,11
2,01/03/2018 03:09:00 AM,x,ROBBERY,011
3,01/04/2018 11:00:00 PM,x,THEFT,11
4,01/05/2018 12:30:00 PM,x,HOMICIDE,7
5,not a date,x,ASSAULT,11
6,02/01/2018 12:00:00 AM,x,assault,11
";

    fn filter() -> EventFilter {
        let mut f = EventFilter::new("mem.csv");
        f.district = Some(11);
        f
    }

    #[test]
    fn hour_conversion() {
        let ts = parse_timestamp("01/03/2018 03:09:00 AM").unwrap();
        let h = hours_since_year_start(ts, 2018).unwrap();
        assert!((h - 51.15).abs() < 1e-12);
        assert_eq!(hours_in_year(2018).unwrap(), 8760.0);
        assert_eq!(hours_in_year(2020).unwrap(), 8784.0);
        let pm = parse_timestamp("01/01/2018 12:30:00 PM").unwrap();
        assert_eq!(hours_since_year_start(pm, 2018).unwrap(), 12.5);
    }

    #[test]
    fn filters_ties_and_bad_rows() {
        let (p, r) = ingest_events(TABLE.as_bytes(), &filter(), 3).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(r.tied_before_jitter, 2);
        assert_eq!(r.skipped.len(), 1);
        assert_eq!(r.skipped[0].line, 6);
        assert_eq!(r.horizon, 8760.0);
        let ev = p.events();
        assert!(ev[0] < ev[1]);
        assert!((ev[0] - 51.15).abs() <= 30.0 / 3600.0);
        assert!((ev[1] - 51.15).abs() <= 30.0 / 3600.0);
        let (again, _) = ingest_events(TABLE.as_bytes(), &filter(), 3).unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn all_filtered_is_an_error() {
        let mut f = filter();
        f.district = Some(99);
        assert!(matches!(ingest_events(TABLE.as_bytes(), &f, 0), Err(Error::Data(_))));
    }

    #[test]
    fn zero_jitter_with_ties_fails() {
        assert!(jitter_times(&[1.0, 1.0], 0.0, 10.0, 0).is_err());
        assert_eq!(jitter_times(&[1.0, 2.0], 0.0, 10.0, 0).unwrap(), vec![1.0, 2.0]);
    }
}
