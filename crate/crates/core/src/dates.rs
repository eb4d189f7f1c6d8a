//! Date serials: day 0 is 1899-12-30, so 2013-10-01 is 41548.
//!
//! Serials below 61 fall in the 1900 leap-year anomaly zone and are rejected.

use chrono::{Datelike, Duration, NaiveDate};

pub const MIN_SERIAL: i64 = 61;
/// 9999-12-31.
pub const MAX_SERIAL: i64 = 2_958_465;

fn epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(1899, 12, 30).expect("valid epoch")
}

pub fn serial_to_date(serial: f64) -> Option<NaiveDate> {
    if !serial.is_finite() {
        return None;
    }
    let day = serial.floor() as i64;
    if !(MIN_SERIAL..=MAX_SERIAL).contains(&day) {
        return None;
    }
    epoch().checked_add_signed(Duration::days(day))
}

pub fn date_to_serial(date: NaiveDate) -> Option<f64> {
    let day = (date - epoch()).num_days();
    (MIN_SERIAL..=MAX_SERIAL).contains(&day).then_some(day as f64)
}

pub fn ymd_to_serial(year: i32, month: u32, day: u32) -> Option<f64> {
    NaiveDate::from_ymd_opt(year, month, day).and_then(date_to_serial)
}

pub fn serial_to_iso(serial: f64) -> Option<String> {
    if serial.fract() != 0.0 {
        return None;
    }
    serial_to_date(serial).map(|d| d.format("%Y-%m-%d").to_string())
}

/// Parses `YYYY-MM-DD`.
pub fn parse_iso(s: &str) -> Option<f64> {
    let s = s.trim();
    if s.len() != 10 || s.as_bytes()[4] != b'-' || s.as_bytes()[7] != b'-' {
        return None;
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(date_to_serial)
}

/// Last day of the month `months` away from `serial`'s month.
pub fn eomonth(serial: f64, months: i64) -> Option<f64> {
    let d = serial_to_date(serial)?;
    let total = d.year() as i64 * 12 + (d.month0() as i64) + months + 1;
    let (y, m0) = (total.div_euclid(12), total.rem_euclid(12));
    let first_of_next = NaiveDate::from_ymd_opt(i32::try_from(y).ok()?, m0 as u32 + 1, 1)?;
    date_to_serial(first_of_next.pred_opt()?)
}

/// Calendar date with spreadsheet-style month and day overflow.
pub fn date_from_parts(year: i64, month: i64, day: i64) -> Option<f64> {
    let total = year * 12 + (month - 1);
    let (y, m0) = (total.div_euclid(12), total.rem_euclid(12));
    let first = NaiveDate::from_ymd_opt(i32::try_from(y).ok()?, m0 as u32 + 1, 1)?;
    date_to_serial(first.checked_add_signed(Duration::days(day - 1))?)
}

pub fn year(serial: f64) -> Option<f64> {
    serial_to_date(serial).map(|d| f64::from(d.year()))
}

pub fn month(serial: f64) -> Option<f64> {
    serial_to_date(serial).map(|d| f64::from(d.month()))
}

pub fn day(serial: f64) -> Option<f64> {
    serial_to_date(serial).map(|d| f64::from(d.day()))
}
