//! Calendar helpers shared by every stage.
//!
//! All modeled years have exactly 365 days: February 29 is dropped so every
//! hourly table has 8760 rows.

use chrono::{Datelike, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

pub const HOURS_PER_YEAR: usize = 8760;
pub const DAYS_PER_YEAR: usize = 365;

/// Projection years reported in summary tables.
pub const SNAPSHOT_YEARS: [i32; 7] = [2020, 2025, 2030, 2035, 2040, 2045, 2050];

pub const TRAINING_FIRST_YEAR: i32 = 2014;
pub const TRAINING_LAST_YEAR: i32 = 2019;
pub const REFERENCE_YEAR: i32 = 2015;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DayType {
    Weekday,
    Weekend,
}

impl DayType {
    pub fn of(date: NaiveDate) -> DayType {
        match date.weekday() {
            Weekday::Sat | Weekday::Sun => DayType::Weekend,
            _ => DayType::Weekday,
        }
    }

    pub fn index(self) -> usize {
        match self {
            DayType::Weekday => 0,
            DayType::Weekend => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DayType::Weekday => "weekday",
            DayType::Weekend => "weekend",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Season {
    Summer,
    Winter,
}

impl Season {
    pub fn as_str(self) -> &'static str {
        match self {
            Season::Summer => "summer",
            Season::Winter => "winter",
        }
    }
}

/// Month-based season calendar. Months listed in `summer_months` are summer,
/// every other month is winter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeasonCalendar {
    pub summer_months: Vec<u32>,
}

impl Default for SeasonCalendar {
    fn default() -> Self {
        SeasonCalendar { summer_months: (4..=9).collect() }
    }
}

impl SeasonCalendar {
    pub fn season(&self, date: NaiveDate) -> Season {
        if self.summer_months.contains(&date.month()) {
            Season::Summer
        } else {
            Season::Winter
        }
    }
}

pub fn is_leap_day(date: NaiveDate) -> bool {
    date.month() == 2 && date.day() == 29
}

/// The 365 modeled days of `year`, in order.
pub fn model_days(year: i32) -> Vec<NaiveDate> {
    let start = NaiveDate::from_ymd_opt(year, 1, 1).expect("valid year");
    start
        .iter_days()
        .take_while(|d| d.year() == year)
        .filter(|d| !is_leap_day(*d))
        .collect()
}

/// Every calendar day in `[first, last]`, inclusive, leap days included.
pub fn days_between(first: NaiveDate, last: NaiveDate) -> Vec<NaiveDate> {
    first.iter_days().take_while(|d| *d <= last).collect()
}

/// The same month and day in another year. Only called with non-leap dates.
pub fn same_day_in(date: NaiveDate, year: i32) -> NaiveDate {
    NaiveDate::from_ymd_opt(year, date.month(), date.day())
        .expect("month/day exists in every year once Feb 29 is excluded")
}

pub fn training_days() -> Vec<NaiveDate> {
    days_between(
        NaiveDate::from_ymd_opt(TRAINING_FIRST_YEAR, 1, 1).unwrap(),
        NaiveDate::from_ymd_opt(TRAINING_LAST_YEAR, 12, 31).unwrap(),
    )
}
