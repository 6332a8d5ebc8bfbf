//! GEFCom-shaped file ingestion.
//!
//! Wide input files carry one row per entity-day with 24 hour columns:
//! `zone_id,year,month,day,h1,…,h24` for loads, `station_id,…` for
//! temperatures. Cells may be double-quoted with thousands separators
//! ("3,417"); blank cells are explicit gaps. The canonical output format is
//! long: `entity_id,timestamp_iso8601,value` with one row per hour.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use chrono::{Duration, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::HourlySeries;
use crate::stats::{summarize, SeriesSummary};

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

/// What a wide file describes; fixes the required entity header and
/// whether negative readings are legal (temperatures may dip below zero,
/// raw loads may not).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    Load,
    Temperature,
}

impl SeriesKind {
    fn entity_header(self) -> &'static str {
        match self {
            SeriesKind::Load => "zone_id",
            SeriesKind::Temperature => "station_id",
        }
    }
}

/// On-disk layout detected from a file's header line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    Wide(SeriesKind),
    Long,
}

/// Reads the header line and decides which reader applies.
pub fn detect_format(path: &Path) -> Result<FileFormat> {
    let file = File::open(path)?;
    let mut header = String::new();
    BufReader::new(file).read_line(&mut header)?;
    let header = header.trim_end();
    if header.starts_with("zone_id,year,month,day,h1") {
        Ok(FileFormat::Wide(SeriesKind::Load))
    } else if header.starts_with("station_id,year,month,day,h1") {
        Ok(FileFormat::Wide(SeriesKind::Temperature))
    } else if header.starts_with("entity_id,timestamp") {
        Ok(FileFormat::Long)
    } else {
        Err(Error::Parse {
            path: path.display().to_string(),
            line: 1,
            message: format!("unrecognized header `{header}`"),
        })
    }
}

/// Loads a data file of either layout.
pub fn read_series_file(path: &Path) -> Result<Vec<HourlySeries>> {
    match detect_format(path)? {
        FileFormat::Wide(kind) => parse_wide_csv(path, kind),
        FileFormat::Long => read_long_csv(path),
    }
}

/// Parses a wide file into one hourly series per entity.
///
/// Dates must be strictly increasing per entity. A skipped day keeps the
/// hourly grid intact by becoming 24 explicit gaps; a repeated or backwards
/// date is an ordering error.
pub fn parse_wide_csv(path: &Path, kind: SeriesKind) -> Result<Vec<HourlySeries>> {
    let file = File::open(path)?;
    parse_wide_reader(file, &path.display().to_string(), kind)
}

struct EntityBuilder {
    entity_id: String,
    start_date: NaiveDate,
    last_date: NaiveDate,
    values: Vec<Option<f64>>,
}

fn parse_wide_reader<R: Read>(
    reader: R,
    path: &str,
    kind: SeriesKind,
) -> Result<Vec<HourlySeries>> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_string(),
        line,
        message,
    };

    let mut csv = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    {
        let headers = csv.headers().map_err(|e| parse_err(1, e.to_string()))?;
        let mut expected = vec![
            kind.entity_header().to_string(),
            "year".into(),
            "month".into(),
            "day".into(),
        ];
        expected.extend((1..=24).map(|h| format!("h{h}")));
        let got: Vec<&str> = headers.iter().collect();
        if got != expected.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(parse_err(
                1,
                format!("expected header `{}`, got `{}`", expected.join(","), got.join(",")),
            ));
        }
    }

    let mut order: Vec<String> = Vec::new();
    let mut builders: std::collections::HashMap<String, EntityBuilder> =
        std::collections::HashMap::new();

    for record in csv.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, csv::Position::line);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, csv::Position::line);
        if record.len() != 28 {
            return Err(parse_err(
                line,
                format!("expected 28 fields, got {}", record.len()),
            ));
        }

        let entity = record[0].trim().to_string();
        if entity.is_empty() {
            return Err(parse_err(line, "empty entity id".into()));
        }
        let year: i32 = parse_int(&record[1], "year", line, path)?;
        let month: u32 = parse_int(&record[2], "month", line, path)?;
        let day: u32 = parse_int(&record[3], "day", line, path)?;
        let date = NaiveDate::from_ymd_opt(year, month, day).ok_or_else(|| {
            parse_err(line, format!("invalid calendar date {year}-{month}-{day}"))
        })?;

        let mut day_values = Vec::with_capacity(24);
        for (h, field) in record.iter().skip(4).enumerate() {
            let cell = parse_cell(field).map_err(|msg| {
                parse_err(line, format!("hour column h{}: {msg}", h + 1))
            })?;
            if kind == SeriesKind::Load {
                if let Some(v) = cell {
                    if v < 0.0 {
                        return Err(parse_err(
                            line,
                            format!("negative load {v} in column h{}", h + 1),
                        ));
                    }
                }
            }
            day_values.push(cell);
        }

        match builders.get_mut(&entity) {
            None => {
                order.push(entity.clone());
                builders.insert(
                    entity.clone(),
                    EntityBuilder {
                        entity_id: entity,
                        start_date: date,
                        last_date: date,
                        values: day_values,
                    },
                );
            }
            Some(b) => {
                if date <= b.last_date {
                    return Err(Error::Ordering {
                        entity: b.entity_id.clone(),
                        message: format!(
                            "{path}:{line}: date {date} does not follow {}",
                            b.last_date
                        ),
                    });
                }
                let skipped = (date - b.last_date).num_days() - 1;
                for _ in 0..skipped * 24 {
                    b.values.push(None);
                }
                b.last_date = date;
                b.values.extend(day_values);
            }
        }
    }

    order
        .into_iter()
        .map(|id| {
            let b = builders.remove(&id).expect("builder exists for ordered id");
            HourlySeries::with_gaps(
                b.entity_id,
                b.start_date.and_hms_opt(0, 0, 0).expect("midnight exists"),
                b.values,
            )
        })
        .collect()
}

fn parse_int<T: std::str::FromStr>(field: &str, name: &str, line: u64, path: &str) -> Result<T> {
    field.trim().parse().map_err(|_| Error::Parse {
        path: path.to_string(),
        line,
        message: format!("invalid {name} `{field}`"),
    })
}

/// One numeric cell: blank means gap, thousands separators are stripped.
fn parse_cell(field: &str) -> std::result::Result<Option<f64>, String> {
    let trimmed = field.trim();
    if trimmed.is_empty() {
        return Ok(None);
    }
    let cleaned: String = trimmed.chars().filter(|&c| c != ',').collect();
    cleaned
        .parse::<f64>()
        .map(Some)
        .map_err(|_| format!("invalid numeric value `{field}`"))
}

/// One wide output row: an entity-day with its 24 hour cells.
#[derive(Debug, Clone, PartialEq)]
pub struct WideRow {
    pub entity_id: String,
    pub date: NaiveDate,
    pub values: [Option<f64>; 24],
}

/// Re-pivots a series into wide rows. The series must start at midnight and
/// span whole days. Days that were gap-filled during parsing come back as
/// blank rows.
pub fn to_wide_rows(series: &HourlySeries) -> Result<Vec<WideRow>> {
    let start = series.start();
    if start.time() != chrono::NaiveTime::from_hms_opt(0, 0, 0).expect("midnight") {
        return Err(Error::domain(format!(
            "series {} does not start at midnight",
            series.entity_id()
        )));
    }
    if series.len() % 24 != 0 {
        return Err(Error::domain(format!(
            "series {} does not span whole days ({} hours)",
            series.entity_id(),
            series.len()
        )));
    }
    Ok(series
        .values()
        .chunks(24)
        .enumerate()
        .map(|(d, chunk)| {
            let mut values = [None; 24];
            values.copy_from_slice(chunk);
            WideRow {
                entity_id: series.entity_id().to_string(),
                date: (start + Duration::days(d as i64)).date(),
                values,
            }
        })
        .collect())
}

/// Writes series in the canonical long layout.
pub fn write_long_csv<W: Write>(writer: &mut W, series: &[HourlySeries]) -> Result<()> {
    writeln!(writer, "entity_id,timestamp_iso8601,value")?;
    for s in series {
        for (i, v) in s.values().iter().enumerate() {
            let ts = s.timestamp_at(i).format(TIMESTAMP_FORMAT);
            match v {
                Some(x) => writeln!(writer, "{},{},{}", s.entity_id(), ts, x)?,
                None => writeln!(writer, "{},{},", s.entity_id(), ts)?,
            }
        }
    }
    Ok(())
}

pub fn write_long_csv_file(path: &Path, series: &[HourlySeries]) -> Result<()> {
    let mut file = std::io::BufWriter::new(File::create(path)?);
    write_long_csv(&mut file, series)
}

/// Reads the canonical long layout back. Rows per entity must be
/// consecutive hours; gaps appear as rows with an empty value field.
pub fn read_long_csv(path: &Path) -> Result<Vec<HourlySeries>> {
    let file = File::open(path)?;
    read_long_reader(file, &path.display().to_string())
}

fn read_long_reader<R: Read>(reader: R, path: &str) -> Result<Vec<HourlySeries>> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_string(),
        line,
        message,
    };
    let mut csv = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    {
        let headers = csv.headers().map_err(|e| parse_err(1, e.to_string()))?;
        let got: Vec<&str> = headers.iter().collect();
        if got != ["entity_id", "timestamp_iso8601", "value"] {
            return Err(parse_err(1, format!("unexpected header `{}`", got.join(","))));
        }
    }

    struct LongBuilder {
        start: NaiveDateTime,
        last: NaiveDateTime,
        values: Vec<Option<f64>>,
    }
    let mut order: Vec<String> = Vec::new();
    let mut builders: std::collections::HashMap<String, LongBuilder> =
        std::collections::HashMap::new();

    for record in csv.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, csv::Position::line);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, csv::Position::line);
        if record.len() != 3 {
            return Err(parse_err(line, format!("expected 3 fields, got {}", record.len())));
        }
        let entity = record[0].trim().to_string();
        let ts = NaiveDateTime::parse_from_str(record[1].trim(), TIMESTAMP_FORMAT)
            .map_err(|e| parse_err(line, format!("invalid timestamp `{}`: {e}", &record[1])))?;
        let value = parse_cell(&record[2]).map_err(|msg| parse_err(line, msg))?;

        match builders.get_mut(&entity) {
            None => {
                order.push(entity.clone());
                builders.insert(
                    entity,
                    LongBuilder {
                        start: ts,
                        last: ts,
                        values: vec![value],
                    },
                );
            }
            Some(b) => {
                if ts - b.last != Duration::hours(1) {
                    return Err(Error::Ordering {
                        entity,
                        message: format!(
                            "{path}:{line}: timestamp {ts} does not follow {} by one hour",
                            b.last
                        ),
                    });
                }
                b.last = ts;
                b.values.push(value);
            }
        }
    }

    order
        .into_iter()
        .map(|id| {
            let b = builders.remove(&id).expect("builder exists for ordered id");
            HourlySeries::with_gaps(id, b.start, b.values)
        })
        .collect()
}

/// Descriptive statistics of one series' present readings.
pub fn zone_statistics(series: &HourlySeries, outlier_floor: f64) -> Result<SeriesSummary> {
    let present: Vec<f64> = series.present().map(|(_, v)| v).collect();
    if present.is_empty() {
        return Err(Error::domain(format!(
            "series {} has no present readings",
            series.entity_id()
        )));
    }
    summarize(&present, series.gap_count(), outlier_floor)
}

/// One sensitivity choice: how much hourly power a single household is
/// assumed able to draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityEntry {
    pub delta_f: f64,
    pub label: String,
}

/// The fixed sensitivity choices with their justifications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityCatalog {
    pub entries: Vec<SensitivityEntry>,
}

impl SensitivityCatalog {
    pub fn get(&self, label: &str) -> Option<&SensitivityEntry> {
        self.entries.iter().find(|e| e.label == label)
    }
}

/// The four published sensitivities. The percentile entries come from the
/// CER household data set, which cannot be redistributed, so the values are
/// fixed constants rather than recomputed statistics.
pub fn sensitivity_catalog() -> SensitivityCatalog {
    SensitivityCatalog {
        entries: vec![
            SensitivityEntry {
                delta_f: 7.57,
                label: "90th percentile hourly demand".into(),
            },
            SensitivityEntry {
                delta_f: 10.05,
                label: "99th percentile hourly demand".into(),
            },
            SensitivityEntry {
                delta_f: 15.36,
                label: "highest recorded hourly demand".into(),
            },
            SensitivityEntry {
                delta_f: 48.0,
                label: "German fused maximum".into(),
            },
        ],
    }
}

/// Peak power a German household can draw before the fuse trips:
/// 230 V · 1.10 overvoltage · 63 A · 3 phases ≈ 48 kW.
pub fn fused_household_peak_kw() -> f64 {
    230.0 * 1.10 * 63.0 * 3.0 / 1000.0
}
