//! Recurrent disengagement-events data.
//!
//! Time is measured in days since the study start: day `d` (1-based) covers
//! the interval `(d − 1, d]`, and an event reported on calendar date `D` sits
//! at `t = D − study_start + 1`. Daily mileage is kept in k-miles/day.
//!
//! Input schemas:
//!
//! ```text
//! events.csv   vin,date              one row per disengagement, ISO-8601 date
//! mileage.csv  vin,year,month,miles  statute miles driven in that month
//! ```

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Datelike, Months, NaiveDate};
use serde::Deserialize;

use crate::error::{Error, Result};

/// One disengagement event.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub unit_id: String,
    pub event_day: f64,
}

/// A maximal run of days with identical mileage, covering `(start, end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MileageRun {
    pub start: usize,
    pub end: usize,
    pub miles: f64,
}

/// Daily mileage history of one unit, one entry per day in k-miles/day.
#[derive(Debug, Clone, PartialEq)]
pub struct MileageProfile {
    unit_id: String,
    daily: Vec<f64>,
    runs: Vec<MileageRun>,
}

impl MileageProfile {
    pub fn new(unit_id: impl Into<String>, daily: Vec<f64>) -> Result<Self> {
        let unit_id = unit_id.into();
        if let Some((day, v)) = daily
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::Data(format!(
                "unit {unit_id}: daily mileage on day {} is {v}; must be finite and >= 0",
                day + 1
            )));
        }
        let runs = compute_runs(&daily);
        Ok(Self {
            unit_id,
            daily,
            runs,
        })
    }

    /// Same daily mileage on every day.
    pub fn constant(unit_id: impl Into<String>, miles_per_day: f64, days: usize) -> Result<Self> {
        Self::new(unit_id, vec![miles_per_day; days])
    }

    pub fn unit_id(&self) -> &str {
        &self.unit_id
    }

    pub fn daily(&self) -> &[f64] {
        &self.daily
    }

    pub fn days(&self) -> usize {
        self.daily.len()
    }

    pub fn runs(&self) -> &[MileageRun] {
        &self.runs
    }

    /// Mileage in effect at time `t ∈ (0, days]`.
    pub fn at(&self, t: f64) -> Option<f64> {
        if !(t > 0.0) {
            return None;
        }
        let day = t.ceil() as usize;
        self.daily.get(day.checked_sub(1)?).copied()
    }

    pub(crate) fn with_id(&self, unit_id: impl Into<String>) -> Self {
        Self {
            unit_id: unit_id.into(),
            daily: self.daily.clone(),
            runs: self.runs.clone(),
        }
    }
}

fn compute_runs(daily: &[f64]) -> Vec<MileageRun> {
    let mut runs: Vec<MileageRun> = Vec::new();
    for (day, &v) in daily.iter().enumerate() {
        match runs.last_mut() {
            Some(run) if run.miles == v => run.end = day + 1,
            _ => runs.push(MileageRun {
                start: day,
                end: day + 1,
                miles: v,
            }),
        }
    }
    runs
}

/// Events and mileage of one unit over the historical window.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitHistory {
    unit_id: String,
    event_days: Vec<f64>,
    mileage: MileageProfile,
}

impl UnitHistory {
    /// Builds a unit history; event days are sorted ascending.
    pub fn new(
        unit_id: impl Into<String>,
        mut event_days: Vec<f64>,
        mileage: MileageProfile,
    ) -> Self {
        event_days.sort_by(f64::total_cmp);
        Self {
            unit_id: unit_id.into(),
            event_days,
            mileage,
        }
    }

    pub fn unit_id(&self) -> &str {
        &self.unit_id
    }

    pub fn event_days(&self) -> &[f64] {
        &self.event_days
    }

    pub fn event_count(&self) -> usize {
        self.event_days.len()
    }

    pub fn mileage(&self) -> &MileageProfile {
        &self.mileage
    }
}

/// Recurrent-events dataset over the historical window `[0, τ_h]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentDataset {
    horizon_days: f64,
    units: Vec<UnitHistory>,
}

impl RecurrentDataset {
    pub fn new(horizon_days: f64, units: Vec<UnitHistory>) -> Result<Self> {
        if !(horizon_days.is_finite() && horizon_days >= 0.0) {
            return Err(Error::Domain {
                what: "horizon_days",
                value: horizon_days,
                expected: "finite, >= 0",
            });
        }
        let days = horizon_days.ceil() as usize;
        let mut seen = BTreeSet::new();
        for u in &units {
            if !seen.insert(u.unit_id.as_str()) {
                return Err(Error::Data(format!("duplicate unit {}", u.unit_id)));
            }
            if u.mileage.days() != days {
                return Err(Error::Data(format!(
                    "unit {}: mileage covers {} days, horizon needs {days}",
                    u.unit_id,
                    u.mileage.days()
                )));
            }
            if let Some(&t) = u
                .event_days
                .iter()
                .find(|&&t| !(t > 0.0 && t <= horizon_days))
            {
                return Err(Error::Data(format!(
                    "unit {}: event at day {t} outside (0, {horizon_days}]",
                    u.unit_id
                )));
            }
        }
        Ok(Self {
            horizon_days,
            units,
        })
    }

    pub fn horizon_days(&self) -> f64 {
        self.horizon_days
    }

    pub fn units(&self) -> &[UnitHistory] {
        &self.units
    }

    pub fn total_events(&self) -> usize {
        self.units.iter().map(UnitHistory::event_count).sum()
    }

    /// Events flattened into records, ordered by unit then day.
    pub fn events(&self) -> Vec<EventRecord> {
        self.units
            .iter()
            .flat_map(|u| {
                u.event_days.iter().map(move |&d| EventRecord {
                    unit_id: u.unit_id.clone(),
                    event_day: d,
                })
            })
            .collect()
    }
}

/// Statute miles driven by one unit in one calendar month.
#[derive(Debug, Clone, PartialEq)]
pub struct MonthlyMileage {
    pub unit_id: String,
    pub year: i32,
    pub month: u32,
    pub miles: f64,
}

pub fn days_in_month(year: i32, month: u32) -> Option<u32> {
    let first = NaiveDate::from_ymd_opt(year, month, 1)?;
    let next = first.checked_add_months(Months::new(1))?;
    Some((next - first).num_days() as u32)
}

#[inline]
fn daily_kmiles(miles: f64, days: u32) -> f64 {
    miles / f64::from(days) / 1000.0
}

/// Spreads monthly totals evenly over the days of each month and aligns the
/// result to the study window starting at `study_start` (day 1).
///
/// Days without a monthly record get zero mileage. Months entirely outside
/// the window are ignored.
pub fn derive_daily_mileage(
    monthly: &[MonthlyMileage],
    study_start: NaiveDate,
    horizon_days: f64,
) -> Result<Vec<MileageProfile>> {
    if !(horizon_days.is_finite() && horizon_days >= 0.0) {
        return Err(Error::Domain {
            what: "horizon_days",
            value: horizon_days,
            expected: "finite, >= 0",
        });
    }
    let days = horizon_days.ceil() as usize;
    let mut per_unit: BTreeMap<&str, BTreeMap<(i32, u32), f64>> = BTreeMap::new();
    for rec in monthly {
        if !(rec.miles.is_finite() && rec.miles >= 0.0) {
            return Err(Error::Data(format!(
                "unit {} {}-{:02}: miles must be finite and >= 0, got {}",
                rec.unit_id, rec.year, rec.month, rec.miles
            )));
        }
        if days_in_month(rec.year, rec.month).is_none() {
            return Err(Error::Data(format!(
                "unit {}: invalid month {}-{}",
                rec.unit_id, rec.year, rec.month
            )));
        }
        let months = per_unit.entry(rec.unit_id.as_str()).or_default();
        if months.insert((rec.year, rec.month), rec.miles).is_some() {
            return Err(Error::Data(format!(
                "unit {}: duplicate record for {}-{:02}",
                rec.unit_id, rec.year, rec.month
            )));
        }
    }

    per_unit
        .into_iter()
        .map(|(unit, months)| {
            let mut daily = vec![0.0; days];
            let mut date = study_start;
            for slot in daily.iter_mut() {
                let key = (date.year(), date.month());
                if let Some(&miles) = months.get(&key) {
                    // days_in_month validated above for every stored key
                    *slot = daily_kmiles(miles, days_in_month(key.0, key.1).unwrap_or(30));
                }
                date = date
                    .succ_opt()
                    .ok_or_else(|| Error::Data("date overflow".into()))?;
            }
            MileageProfile::new(unit, daily)
        })
        .collect()
}

#[derive(Debug, Deserialize)]
struct EventRow {
    vin: String,
    date: String,
}

#[derive(Debug, Deserialize)]
struct MileageRow {
    vin: String,
    year: i32,
    month: u32,
    miles: f64,
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn check_headers(rdr: &mut csv::Reader<&[u8]>, source_name: &str, expected: &[&str]) -> Result<()> {
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(source_name, 1, e.to_string()))?;
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(Error::parse(
            source_name,
            1,
            format!(
                "expected header `{}`, got `{}`",
                expected.join(","),
                got.join(",")
            ),
        ));
    }
    Ok(())
}

fn record_line(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, csv::Position::line)
}

/// Parses the mileage CSV (`vin,year,month,miles`).
pub fn parse_monthly_mileage(mileage_csv: &str) -> Result<Vec<MonthlyMileage>> {
    const SRC: &str = "mileage";
    let mut rdr = csv_reader(mileage_csv);
    check_headers(&mut rdr, SRC, &["vin", "year", "month", "miles"])?;
    let headers = rdr
        .headers()
        .cloned()
        .map_err(|e| Error::parse(SRC, 1, e.to_string()))?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, csv::Position::line);
            Error::parse(SRC, line, e.to_string())
        })?;
        let line = record_line(&rec);
        let row: MileageRow = rec
            .deserialize(Some(&headers))
            .map_err(|e| Error::parse(SRC, line, e.to_string()))?;
        if !(row.miles.is_finite() && row.miles >= 0.0) {
            return Err(Error::parse(
                SRC,
                line,
                format!("miles must be finite and >= 0, got {}", row.miles),
            ));
        }
        if days_in_month(row.year, row.month).is_none() {
            return Err(Error::parse(
                SRC,
                line,
                format!("invalid month {}-{}", row.year, row.month),
            ));
        }
        out.push(MonthlyMileage {
            unit_id: row.vin,
            year: row.year,
            month: row.month,
            miles: row.miles,
        });
    }
    Ok(out)
}

/// Parses the events CSV (`vin,date`) into day indices relative to `study_start`.
pub fn parse_event_records(
    events_csv: &str,
    study_start: NaiveDate,
    horizon_days: f64,
) -> Result<Vec<(u64, EventRecord)>> {
    const SRC: &str = "events";
    let mut rdr = csv_reader(events_csv);
    check_headers(&mut rdr, SRC, &["vin", "date"])?;
    let headers = rdr
        .headers()
        .cloned()
        .map_err(|e| Error::parse(SRC, 1, e.to_string()))?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, csv::Position::line);
            Error::parse(SRC, line, e.to_string())
        })?;
        let line = record_line(&rec);
        let row: EventRow = rec
            .deserialize(Some(&headers))
            .map_err(|e| Error::parse(SRC, line, e.to_string()))?;
        let date = NaiveDate::parse_from_str(&row.date, "%Y-%m-%d")
            .map_err(|e| Error::parse(SRC, line, format!("bad date `{}`: {e}", row.date)))?;
        let day = (date - study_start).num_days() + 1;
        let day = day as f64;
        if !(day > 0.0 && day <= horizon_days) {
            return Err(Error::parse(
                SRC,
                line,
                format!(
                    "event date {} is day {day}, outside the study window (0, {horizon_days}]",
                    row.date
                ),
            ));
        }
        out.push((
            line,
            EventRecord {
                unit_id: row.vin,
                event_day: day,
            },
        ));
    }
    Ok(out)
}

/// Parses both input files into a dataset over `(0, horizon_days]`.
///
/// Units that appear only in the mileage file have no events; events for a
/// unit missing from the mileage file are rejected.
pub fn parse_events(
    events_csv: &str,
    mileage_csv: &str,
    study_start: NaiveDate,
    horizon_days: f64,
) -> Result<RecurrentDataset> {
    if !(horizon_days.is_finite() && horizon_days > 0.0) {
        return Err(Error::Domain {
            what: "horizon_days",
            value: horizon_days,
            expected: "finite, > 0",
        });
    }
    let monthly = parse_monthly_mileage(mileage_csv)?;
    let profiles = derive_daily_mileage(&monthly, study_start, horizon_days)?;
    let mut events: BTreeMap<String, Vec<f64>> = profiles
        .iter()
        .map(|p| (p.unit_id().to_string(), Vec::new()))
        .collect();
    for (line, ev) in parse_event_records(events_csv, study_start, horizon_days)? {
        match events.get_mut(&ev.unit_id) {
            Some(days) => days.push(ev.event_day),
            None => {
                return Err(Error::parse(
                    "events",
                    line,
                    format!("unit {} has no mileage records", ev.unit_id),
                ))
            }
        }
    }
    let units = profiles
        .into_iter()
        .map(|p| {
            let days = events.remove(p.unit_id()).unwrap_or_default();
            UnitHistory::new(p.unit_id().to_string(), days, p)
        })
        .collect();
    RecurrentDataset::new(horizon_days, units)
}

/// Serializes events to the `vin,date` schema. Event days must be whole days.
pub fn write_events_csv(data: &RecurrentDataset, study_start: NaiveDate) -> Result<String> {
    let mut out = String::from("vin,date\n");
    for u in data.units() {
        for &d in u.event_days() {
            if d.fract() != 0.0 {
                return Err(Error::Data(format!(
                    "unit {}: event day {d} is not a whole day",
                    u.unit_id()
                )));
            }
            let date = study_start
                .checked_add_days(chrono::Days::new(d as u64 - 1))
                .ok_or_else(|| Error::Data("date overflow".into()))?;
            out.push_str(&format!("{},{}\n", u.unit_id(), date.format("%Y-%m-%d")));
        }
    }
    Ok(out)
}

/// Smallest adjustment of `v · days · 1000` that the parser maps back to `v`.
fn monthly_total_for(v: f64, days: u32) -> f64 {
    let base = v * f64::from(days) * 1000.0;
    if daily_kmiles(base, days) == v {
        return base;
    }
    let mut up = base;
    let mut down = base;
    for _ in 0..8 {
        up = up.next_up();
        if daily_kmiles(up, days) == v {
            return up;
        }
        down = down.next_down();
        if down >= 0.0 && daily_kmiles(down, days) == v {
            return down;
        }
    }
    base
}

/// Serializes mileage to the `vin,year,month,miles` schema.
///
/// Each profile must be constant within every calendar month it covers;
/// partial months at either end of the window are written as full-month
/// totals at the same daily rate.
pub fn write_mileage_csv(data: &RecurrentDataset, study_start: NaiveDate) -> Result<String> {
    let mut out = String::from("vin,year,month,miles\n");
    for u in data.units() {
        let mut months: Vec<((i32, u32), f64)> = Vec::new();
        let mut date = study_start;
        for &v in u.mileage().daily() {
            let key = (date.year(), date.month());
            match months.last() {
                Some((k, prev)) if *k == key => {
                    if *prev != v {
                        return Err(Error::Data(format!(
                            "unit {}: mileage varies within {}-{:02}",
                            u.unit_id(),
                            key.0,
                            key.1
                        )));
                    }
                }
                _ => months.push((key, v)),
            }
            date = date
                .succ_opt()
                .ok_or_else(|| Error::Data("date overflow".into()))?;
        }
        for ((year, month), v) in months {
            let days = days_in_month(year, month).unwrap_or(30);
            let total = monthly_total_for(v, days);
            out.push_str(&format!("{},{year},{month},{total}\n", u.unit_id()));
        }
    }
    Ok(out)
}
