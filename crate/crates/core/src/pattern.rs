//! Simple temporal point patterns on an observation window `(0, T]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered, tie-free event times observed on `(0, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPattern", into = "RawPattern")]
pub struct PointPattern {
    events: Vec<f64>,
    horizon: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPattern {
    events: Vec<f64>,
    horizon: f64,
}

impl TryFrom<RawPattern> for PointPattern {
    type Error = Error;

    fn try_from(raw: RawPattern) -> Result<Self> {
        PointPattern::new(raw.events, raw.horizon)
    }
}

impl From<PointPattern> for RawPattern {
    fn from(p: PointPattern) -> Self {
        RawPattern {
            events: p.events,
            horizon: p.horizon,
        }
    }
}

impl PointPattern {
    /// Builds a pattern, rejecting ties, unsorted input and times outside `(0, horizon]`.
    pub fn new(events: Vec<f64>, horizon: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidPattern(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        for (i, &t) in events.iter().enumerate() {
            if !(t.is_finite() && t > 0.0 && t <= horizon) {
                return Err(Error::InvalidPattern(format!(
                    "event {i} at {t} lies outside (0, {horizon}]"
                )));
            }
            if i > 0 && events[i - 1] >= t {
                return Err(Error::InvalidPattern(format!(
                    "events must be strictly increasing: t[{}] = {} >= t[{i}] = {t}",
                    i - 1,
                    events[i - 1]
                )));
            }
        }
        Ok(Self { events, horizon })
    }

    pub fn empty(horizon: f64) -> Result<Self> {
        Self::new(Vec::new(), horizon)
    }

    pub fn events(&self) -> &[f64] {
        &self.events
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Maximum likelihood rate of a homogeneous Poisson process, `n / T`.
    pub fn mle_rate(&self) -> f64 {
        self.events.len() as f64 / self.horizon
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if t.is_finite() && (0.0..=self.horizon).contains(&t) {
            Ok(())
        } else {
            Err(Error::OutOfWindow {
                t,
                horizon: self.horizon,
            })
        }
    }

    /// Number of events in the half-open interval `(a, b]`.
    pub fn count_in(&self, a: f64, b: f64) -> Result<usize> {
        self.check_time(a)?;
        self.check_time(b)?;
        if a > b {
            return Err(Error::InvalidInterval { a, b });
        }
        Ok(self.count_upto(b) - self.count_upto(a))
    }

    /// History strictly before `t`, i.e. `{t_k : t_k < t}`.
    pub fn history_before(&self, t: f64) -> Result<&[f64]> {
        self.check_time(t)?;
        Ok(&self.events[..self.count_before(t)])
    }

    /// Number of events strictly before `t` (no bounds check).
    #[inline]
    pub fn count_before(&self, t: f64) -> usize {
        self.events.partition_point(|&x| x < t)
    }

    /// Number of events at or before `t` (no bounds check).
    #[inline]
    pub fn count_upto(&self, t: f64) -> usize {
        self.events.partition_point(|&x| x <= t)
    }
}
