//! Simulation reports: line-delimited records, CSV exports, and a summary
//! table.
//!
//! `report.jsonl` holds one `summary` record, then one `warning` record per
//! warning and one `hour` record per started hour. All times are written
//! with millisecond precision and stored that way in memory, so reading a
//! report back reproduces it exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::Deserialize;

use crate::detection_io::Camera;

use super::SimulationError;

/// One warning matched against ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct WarningRecord {
    pub warn_time: f64,
    pub camera: Camera,
    pub track_id: u64,
    /// Vehicle behind the warning; `None` for warnings raised by tracks built
    /// from false positives.
    pub vehicle_id: Option<u64>,
    pub pass_time: Option<f64>,
    /// Pre-warning time, `pass_time - warn_time`.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HourCount {
    pub hour: u64,
    pub without_filter: u64,
    pub with_filter: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub duration: f64,
    pub vehicles: u64,
    /// New-vehicle events that reached the flow check.
    pub warnings_without_filter: u64,
    pub warnings_with_filter: u64,
    pub spurious_warnings: u64,
    pub records: Vec<WarningRecord>,
    pub hourly: Vec<HourCount>,
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum Line {
    Summary {
        duration: f64,
        vehicles: u64,
        warnings_without_filter: u64,
        warnings_with_filter: u64,
        spurious_warnings: u64,
    },
    Warning {
        t: f64,
        camera: Camera,
        track: u64,
        vehicle: Option<u64>,
        pass_time: Option<f64>,
        delta: Option<f64>,
    },
    Hour {
        hour: u64,
        without_filter: u64,
        with_filter: u64,
    },
}

fn opt_u64(v: Option<u64>) -> String {
    v.map_or_else(|| "null".to_string(), |v| v.to_string())
}

fn opt_f64(v: Option<f64>) -> String {
    v.map_or_else(|| "null".to_string(), |v| format!("{v:.3}"))
}

impl SimulationReport {
    pub fn empty(duration: f64) -> Self {
        Self {
            duration,
            vehicles: 0,
            warnings_without_filter: 0,
            warnings_with_filter: 0,
            spurious_warnings: 0,
            records: Vec::new(),
            hourly: Vec::new(),
        }
    }

    /// `warnings_with_filter / warnings_without_filter`, or 0 without events.
    pub fn filter_ratio(&self) -> f64 {
        if self.warnings_without_filter == 0 {
            0.0
        } else {
            self.warnings_with_filter as f64 / self.warnings_without_filter as f64
        }
    }

    pub fn deltas(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().filter_map(|r| r.delta)
    }

    /// Pre-warning times in one-second bins `(bin_start, count)`, contiguous
    /// from the lowest to the highest occupied bin.
    pub fn histogram(&self) -> Vec<(i64, u64)> {
        let mut bins: BTreeMap<i64, u64> = BTreeMap::new();
        for d in self.deltas() {
            *bins.entry(d.floor() as i64).or_default() += 1;
        }
        let (Some((&lo, _)), Some((&hi, _))) = (bins.first_key_value(), bins.last_key_value())
        else {
            return Vec::new();
        };
        (lo..=hi)
            .map(|b| (b, bins.get(&b).copied().unwrap_or(0)))
            .collect()
    }

    pub fn peak_hour(&self) -> Option<&HourCount> {
        self.hourly.iter().max_by(|a, b| {
            a.without_filter
                .cmp(&b.without_filter)
                .then(b.hour.cmp(&a.hour))
        })
    }

    pub fn write_jsonl<W: Write>(&self, sink: &mut W) -> std::io::Result<()> {
        writeln!(
            sink,
            "{{\"type\":\"summary\",\"duration\":{:.3},\"vehicles\":{},\"warnings_without_filter\":{},\"warnings_with_filter\":{},\"spurious_warnings\":{}}}",
            self.duration,
            self.vehicles,
            self.warnings_without_filter,
            self.warnings_with_filter,
            self.spurious_warnings
        )?;
        for r in &self.records {
            writeln!(
                sink,
                "{{\"type\":\"warning\",\"t\":{:.3},\"camera\":\"{}\",\"track\":{},\"vehicle\":{},\"pass_time\":{},\"delta\":{}}}",
                r.warn_time,
                r.camera,
                r.track_id,
                opt_u64(r.vehicle_id),
                opt_f64(r.pass_time),
                opt_f64(r.delta)
            )?;
        }
        for h in &self.hourly {
            writeln!(
                sink,
                "{{\"type\":\"hour\",\"hour\":{},\"without_filter\":{},\"with_filter\":{}}}",
                h.hour, h.without_filter, h.with_filter
            )?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(source: R) -> Result<Self, SimulationError> {
        let mut report: Option<Self> = None;
        for (i, line) in source.lines().enumerate() {
            let line = line.map_err(|e| SimulationError::Io(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |m: String| SimulationError::Report(format!("line {}: {m}", i + 1));
            let parsed: Line = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
            match (parsed, report.as_mut()) {
                (
                    Line::Summary {
                        duration,
                        vehicles,
                        warnings_without_filter,
                        warnings_with_filter,
                        spurious_warnings,
                    },
                    None,
                ) => {
                    report = Some(Self {
                        vehicles,
                        warnings_without_filter,
                        warnings_with_filter,
                        spurious_warnings,
                        ..Self::empty(duration)
                    })
                }
                (Line::Summary { .. }, Some(_)) => return Err(bad("second summary record".into())),
                (_, None) => return Err(bad("record before summary".into())),
                (
                    Line::Warning {
                        t,
                        camera,
                        track,
                        vehicle,
                        pass_time,
                        delta,
                    },
                    Some(r),
                ) => r.records.push(WarningRecord {
                    warn_time: t,
                    camera,
                    track_id: track,
                    vehicle_id: vehicle,
                    pass_time,
                    delta,
                }),
                (
                    Line::Hour {
                        hour,
                        without_filter,
                        with_filter,
                    },
                    Some(r),
                ) => r.hourly.push(HourCount {
                    hour,
                    without_filter,
                    with_filter,
                }),
            }
        }
        report.ok_or_else(|| SimulationError::Report("no summary record".into()))
    }

    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("bin_start_s,count\n");
        for (bin, count) in self.histogram() {
            let _ = writeln!(out, "{bin},{count}");
        }
        out
    }

    pub fn hourly_csv(&self) -> String {
        let mut out = String::from("hour,without_filter,with_filter\n");
        for h in &self.hourly {
            let _ = writeln!(out, "{},{},{}", h.hour, h.without_filter, h.with_filter);
        }
        out
    }

    /// Human-readable summary table.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "duration             {:>10.1} s", self.duration);
        let _ = writeln!(s, "vehicles             {:>10}", self.vehicles);
        let _ = writeln!(
            s,
            "warnings w/o filter  {:>10}",
            self.warnings_without_filter
        );
        let _ = writeln!(s, "warnings with filter {:>10}", self.warnings_with_filter);
        let _ = writeln!(s, "filtered ratio       {:>10.3}", self.filter_ratio());
        let _ = writeln!(s, "spurious warnings    {:>10}", self.spurious_warnings);
        let _ = writeln!(s);
        let _ = writeln!(s, "hour  without   with  with/min");
        for h in &self.hourly {
            let _ = writeln!(
                s,
                "{:>4}  {:>7}  {:>5}  {:>8.2}",
                h.hour,
                h.without_filter,
                h.with_filter,
                h.with_filter as f64 / 60.0
            );
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "pre-warning (s)  count");
        for (bin, count) in self.histogram() {
            let _ = writeln!(s, "{:>6} - {:<6}  {count}", bin, bin + 1);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SimulationReport {
        SimulationReport {
            duration: 7200.0,
            vehicles: 5,
            warnings_without_filter: 4,
            warnings_with_filter: 2,
            spurious_warnings: 1,
            records: vec![
                WarningRecord {
                    warn_time: 12.033,
                    camera: Camera::Front,
                    track_id: 1,
                    vehicle_id: Some(0),
                    pass_time: Some(17.5),
                    delta: Some(5.467),
                },
                WarningRecord {
                    warn_time: 99.9,
                    camera: Camera::Rear,
                    track_id: 8,
                    vehicle_id: None,
                    pass_time: None,
                    delta: None,
                },
                WarningRecord {
                    warn_time: 130.0,
                    camera: Camera::Rear,
                    track_id: 9,
                    vehicle_id: Some(3),
                    pass_time: Some(133.2),
                    delta: Some(3.2),
                },
            ],
            hourly: vec![
                HourCount {
                    hour: 0,
                    without_filter: 3,
                    with_filter: 2,
                },
                HourCount {
                    hour: 1,
                    without_filter: 1,
                    with_filter: 0,
                },
            ],
        }
    }

    #[test]
    fn jsonl_round_trip() {
        let r = sample();
        let mut buf = Vec::new();
        r.write_jsonl(&mut buf).unwrap();
        let back = SimulationReport::read_jsonl(buf.as_slice()).unwrap();
        assert_eq!(back, r);
        let mut again = Vec::new();
        back.write_jsonl(&mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn histogram_is_contiguous() {
        assert_eq!(sample().histogram(), vec![(3, 1), (4, 0), (5, 1)]);
        assert_eq!(
            sample().histogram_csv(),
            "bin_start_s,count\n3,1\n4,0\n5,1\n"
        );
    }

    #[test]
    fn empty_report() {
        let r = SimulationReport::empty(60.0);
        assert!(r.histogram().is_empty());
        assert_eq!(r.filter_ratio(), 0.0);
        assert_eq!(r.histogram_csv(), "bin_start_s,count\n");
        let mut buf = Vec::new();
        r.write_jsonl(&mut buf).unwrap();
        assert_eq!(SimulationReport::read_jsonl(buf.as_slice()).unwrap(), r);
    }

    #[test]
    fn malformed_reports() {
        assert!(SimulationReport::read_jsonl("".as_bytes()).is_err());
        assert!(SimulationReport::read_jsonl(
            "{\"type\":\"hour\",\"hour\":0,\"without_filter\":0,\"with_filter\":0}\n".as_bytes()
        )
        .is_err());
        assert!(SimulationReport::read_jsonl("not json\n".as_bytes()).is_err());
    }
}
