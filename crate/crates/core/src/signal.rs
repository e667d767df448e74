//! Uniformly sampled multi-channel traces and their affine normalization.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Discrete-time signal: one row per sample, one column per named channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    channels: Vec<String>,
    // row-major, len = steps * channels.len()
    values: Vec<f64>,
}

impl Trace {
    /// Builds a trace from rows of samples. Every row must have one value per channel.
    pub fn new(channels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::InvalidTrace("trace needs at least one channel".into()));
        }
        for (i, name) in channels.iter().enumerate() {
            if channels[..i].contains(name) {
                return Err(Error::InvalidTrace(format!("duplicate channel `{name}`")));
            }
        }
        let width = channels.len();
        let mut values = Vec::with_capacity(rows.len() * width);
        for (step, row) in rows.into_iter().enumerate() {
            if row.len() != width {
                return Err(Error::InvalidTrace(format!(
                    "step {step} has {} values, expected {width}",
                    row.len()
                )));
            }
            values.extend(row);
        }
        Ok(Self { channels, values })
    }

    /// Single-channel trace.
    pub fn from_samples(channel: impl Into<String>, samples: &[f64]) -> Self {
        Self {
            channels: vec![channel.into()],
            values: samples.to_vec(),
        }
    }

    pub fn channels(&self) -> &[String] {
        &self.channels
    }

    pub fn width(&self) -> usize {
        self.channels.len()
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.values.len() / self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn channel_index(&self, name: &str) -> Option<usize> {
        self.channels.iter().position(|c| c == name)
    }

    #[inline]
    pub fn value(&self, step: usize, channel: usize) -> f64 {
        self.values[step * self.channels.len() + channel]
    }

    pub fn set_value(&mut self, step: usize, channel: usize, v: f64) {
        let w = self.channels.len();
        self.values[step * w + channel] = v;
    }

    pub fn row(&self, step: usize) -> &[f64] {
        let w = self.channels.len();
        &self.values[step * w..(step + 1) * w]
    }

    pub fn column(&self, channel: usize) -> impl Iterator<Item = f64> + '_ {
        self.values
            .iter()
            .skip(channel)
            .step_by(self.channels.len())
            .copied()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.channels.len())
    }

    /// Reads the `t,<ch1>,<ch2>,...` CSV layout.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.get(0) != Some("t") || header.len() < 2 {
            return Err(Error::InvalidTrace(
                "header must be `t` followed by at least one channel name".into(),
            ));
        }
        let channels: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
        let mut rows = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::InvalidTrace(format!("row {}: {e}", i + 1)))?;
            let line = i + 2;
            if record.len() != header.len() {
                return Err(Error::InvalidTrace(format!(
                    "line {line}: {} cells, expected {}",
                    record.len(),
                    header.len()
                )));
            }
            let step: usize = record[0].parse().map_err(|_| {
                Error::InvalidTrace(format!("line {line}: step `{}` is not an integer", &record[0]))
            })?;
            if step != i {
                return Err(Error::InvalidTrace(format!(
                    "line {line}: step {step} out of sequence, expected {i}"
                )));
            }
            let row = record
                .iter()
                .skip(1)
                .map(|cell| {
                    cell.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                        Error::InvalidTrace(format!("line {line}: non-numeric cell `{cell}`"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::InvalidTrace("no data rows".into()));
        }
        Trace::new(channels, rows)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["t".to_string()];
        header.extend(self.channels.iter().cloned());
        w.write_record(&header)?;
        for (step, row) in self.rows().enumerate() {
            let mut rec = vec![step.to_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads a trace from a CSV file.
pub fn load_trace(path: impl AsRef<Path>) -> Result<Trace> {
    let file = std::fs::File::open(path)?;
    Trace::read_csv(std::io::BufReader::new(file))
}

pub fn save_trace(trace: &Trace, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    trace.write_csv(std::io::BufWriter::new(file))
}

/// Physical range `[min, max]` of one channel, mapped affinely onto `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelRange {
    pub min: f64,
    pub max: f64,
}

impl ChannelRange {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(Error::DegenerateRange {
                channel: String::new(),
                min,
                max,
            });
        }
        Ok(Self { min, max })
    }

    #[inline]
    pub fn normalize(&self, v: f64) -> f64 {
        2.0 * (v - self.min) / (self.max - self.min) - 1.0
    }

    #[inline]
    pub fn denormalize(&self, n: f64) -> f64 {
        (n + 1.0) * 0.5 * (self.max - self.min) + self.min
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.max - self.min)
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.max + self.min)
    }
}

/// Per-channel physical ranges.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NormalizationMap {
    ranges: BTreeMap<String, ChannelRange>,
}

impl NormalizationMap {
    pub fn insert(&mut self, channel: impl Into<String>, range: ChannelRange) {
        self.ranges.insert(channel.into(), range);
    }

    pub fn range(&self, channel: &str) -> Option<&ChannelRange> {
        self.ranges.get(channel)
    }

    fn check(&self) -> Result<()> {
        for (ch, r) in &self.ranges {
            if !(r.min.is_finite() && r.max.is_finite() && r.max > r.min) {
                return Err(Error::DegenerateRange {
                    channel: ch.clone(),
                    min: r.min,
                    max: r.max,
                });
            }
        }
        Ok(())
    }

    fn ranges_for(&self, trace: &Trace) -> Result<Vec<ChannelRange>> {
        self.check()?;
        trace
            .channels()
            .iter()
            .map(|ch| {
                self.ranges
                    .get(ch)
                    .copied()
                    .ok_or_else(|| Error::UnknownChannel(ch.clone()))
            })
            .collect()
    }

    /// Maps every channel of a physical trace onto `[-1, 1]`.
    ///
    /// Values outside a channel's range are rejected, not clamped.
    pub fn normalize(&self, raw: &Trace) -> Result<Trace> {
        let ranges = self.ranges_for(raw)?;
        let mut out = raw.clone();
        for step in 0..raw.len() {
            for (c, r) in ranges.iter().enumerate() {
                let v = raw.value(step, c);
                if !r.contains(v) {
                    return Err(Error::OutOfRange {
                        channel: raw.channels()[c].clone(),
                        step,
                        value: v,
                        min: r.min,
                        max: r.max,
                    });
                }
                out.set_value(step, c, r.normalize(v).clamp(-1.0, 1.0));
            }
        }
        Ok(out)
    }

    pub fn denormalize(&self, normalized: &Trace) -> Result<Trace> {
        let ranges = self.ranges_for(normalized)?;
        let mut out = normalized.clone();
        for step in 0..normalized.len() {
            for (c, r) in ranges.iter().enumerate() {
                out.set_value(step, c, r.denormalize(normalized.value(step, c)));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(entries: &[(&str, f64, f64)]) -> NormalizationMap {
        let mut m = NormalizationMap::default();
        for &(ch, lo, hi) in entries {
            m.insert(ch, ChannelRange::new(lo, hi).unwrap());
        }
        m
    }

    #[test]
    fn battery_and_position_examples() {
        let m = map(&[("battery", 0.0, 100.0), ("x", 0.0, 10.0)]);
        let raw = Trace::new(vec!["x".into(), "battery".into()], vec![vec![6.0, 80.0]]).unwrap();
        let n = m.normalize(&raw).unwrap();
        assert!((n.value(0, 1) - 0.6).abs() < 1e-12);
        assert!((n.value(0, 0) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn endpoints_map_to_unit_bounds() {
        let m = map(&[("s", -3.0, 5.0)]);
        let n = m.normalize(&Trace::from_samples("s", &[-3.0, 5.0, 1.0])).unwrap();
        assert_eq!(n.value(0, 0), -1.0);
        assert_eq!(n.value(1, 0), 1.0);
        assert_eq!(n.value(2, 0), 0.0);
    }

    #[test]
    fn out_of_range_reports_channel_and_step() {
        let m = map(&[("s", 0.0, 1.0)]);
        let err = m.normalize(&Trace::from_samples("s", &[0.5, 0.2, 1.5])).unwrap_err();
        match err {
            Error::OutOfRange { channel, step, .. } => {
                assert_eq!(channel, "s");
                assert_eq!(step, 2);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn degenerate_range_rejected() {
        assert!(ChannelRange::new(1.0, 1.0).is_err());
        let mut m = NormalizationMap::default();
        m.insert("s", ChannelRange { min: 2.0, max: 1.0 });
        assert!(matches!(
            m.normalize(&Trace::from_samples("s", &[1.5])),
            Err(Error::DegenerateRange { .. })
        ));
    }

    #[test]
    fn unknown_channel_rejected() {
        let m = map(&[("s", 0.0, 1.0)]);
        assert!(matches!(
            m.normalize(&Trace::from_samples("q", &[0.5])),
            Err(Error::UnknownChannel(_))
        ));
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = Trace::new(vec!["a".into(), "b".into()], vec![vec![1.0, 2.0], vec![1.0]]);
        assert!(err.is_err());
    }

    #[test]
    fn csv_two_rows_one_channel() {
        let t = Trace::read_csv("t,x\n0,0.5\n1,-0.25\n".as_bytes()).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.channels(), ["x"]);
        assert_eq!(t.value(1, 0), -0.25);
    }

    #[test]
    fn csv_errors() {
        assert!(Trace::read_csv("t,x\n".as_bytes()).is_err());
        assert!(Trace::read_csv("t,x\n0,abc\n".as_bytes()).is_err());
        assert!(Trace::read_csv("t,x,y\n0,1,2\n1,3\n".as_bytes()).is_err());
        assert!(Trace::read_csv("t,x\n0,1\n2,1\n".as_bytes()).is_err());
        assert!(Trace::read_csv("step,x\n0,1\n".as_bytes()).is_err());
    }

    #[test]
    fn csv_write_then_read() {
        let rows: Vec<Vec<f64>> = (0..5)
            .map(|k| vec![0.5 + k as f64, 5.0 - 0.3 * k as f64, 0.1 * k as f64 - 0.2])
            .collect();
        let t = Trace::new(vec!["x".into(), "y".into(), "theta".into()], rows).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = Trace::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, t);
    }
}
