//! Map CSV files.
//!
//! ```text
//! rpm\torque,0,50,100,...
//! 0,0.55,0.55,0.55,...
//! 50,0.55,0.61,0.67,...
//! ```
//!
//! The header carries the torque axis, the first column the speed axis.

use std::fs;
use std::path::Path;

use super::{EfficiencyMap, MapMode};
use crate::error::{Error, Result};

pub const CORNER_MARKER: &str = "rpm\\torque";

impl EfficiencyMap {
    pub fn parse_csv(text: &str, mode: MapMode) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());

        let mut torque_axis: Option<Vec<f64>> = None;
        let mut speed_axis = Vec::new();
        let mut rows = Vec::new();
        let mut last_line = 0;

        for record in reader.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                Error::parse(line, None, e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line());
            last_line = line;
            if record.iter().all(str::is_empty) {
                continue;
            }
            match &torque_axis {
                None => {
                    if record.get(0) != Some(CORNER_MARKER) {
                        return Err(Error::parse(
                            line,
                            Some(1),
                            format!("expected corner cell `{CORNER_MARKER}`"),
                        ));
                    }
                    let axis = parse_axis(&record, line, 1)?;
                    torque_axis = Some(axis);
                }
                Some(torque) => {
                    if record.len() != torque.len() + 1 {
                        return Err(Error::parse(
                            line,
                            None,
                            format!("expected {} fields, found {}", torque.len() + 1, record.len()),
                        ));
                    }
                    let rpm = parse_field(&record, line, 0)?;
                    if speed_axis.is_empty() && rpm != 0.0 {
                        return Err(Error::parse(line, Some(1), "speed axis must start at 0"));
                    }
                    if let Some(&prev) = speed_axis.last() {
                        if !(rpm > prev) {
                            return Err(Error::parse(
                                line,
                                Some(1),
                                format!("speed axis not increasing ({prev} then {rpm})"),
                            ));
                        }
                    }
                    speed_axis.push(rpm);
                    let mut row = Vec::with_capacity(torque.len());
                    for col in 1..record.len() {
                        let eta = parse_field(&record, line, col)?;
                        if !(0.0..=mode.ceiling()).contains(&eta) {
                            return Err(Error::parse(
                                line,
                                Some(col + 1),
                                format!("efficiency {eta} outside [0, {}] for {mode:?} maps", mode.ceiling()),
                            ));
                        }
                        row.push(eta);
                    }
                    rows.push(row);
                }
            }
        }

        let torque_axis = torque_axis.ok_or_else(|| Error::parse(1, None, "missing header row"))?;
        if speed_axis.len() < 2 {
            return Err(Error::parse(last_line.max(1), None, "need at least 2 speed rows"));
        }
        EfficiencyMap::new(mode, speed_axis, torque_axis, rows)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CORNER_MARKER);
        for t in self.torque_axis() {
            out.push(',');
            out.push_str(&t.to_string());
        }
        out.push('\n');
        for (rpm, row) in self.speed_axis().iter().zip(self.rows()) {
            out.push_str(&rpm.to_string());
            for v in row {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

fn parse_field(record: &csv::StringRecord, line: u64, col: usize) -> Result<f64> {
    let raw = record.get(col).unwrap_or("");
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(
            line,
            Some(col + 1),
            format!("`{raw}` is not a finite number"),
        )),
    }
}

fn parse_axis(record: &csv::StringRecord, line: u64, first_col: usize) -> Result<Vec<f64>> {
    let mut axis: Vec<f64> = Vec::with_capacity(record.len());
    for col in first_col..record.len() {
        let v = parse_field(record, line, col)?;
        match axis.last() {
            None if v != 0.0 => return Err(Error::parse(line, Some(col + 1), "torque axis must start at 0")),
            Some(&prev) if !(v > prev) => {
                return Err(Error::parse(
                    line,
                    Some(col + 1),
                    format!("torque axis not increasing ({prev} then {v})"),
                ))
            }
            _ => axis.push(v),
        }
    }
    if axis.len() < 2 {
        return Err(Error::parse(line, None, "need at least 2 torque columns"));
    }
    Ok(axis)
}

pub fn load_map(path: &Path, mode: MapMode) -> Result<EfficiencyMap> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    EfficiencyMap::parse_csv(&text, mode)
}

pub fn save_map(map: &EfficiencyMap, path: &Path) -> Result<()> {
    fs::write(path, map.to_csv()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::efficiency_map::{synthesize_braking_map, MapSynthesisSpec};

    #[test]
    fn round_trip_is_bit_exact() {
        let map = synthesize_braking_map(&MapSynthesisSpec::braking_default()).unwrap();
        let back = EfficiencyMap::parse_csv(&map.to_csv(), MapMode::Braking).unwrap();
        assert_eq!(map, back);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let map = EfficiencyMap::uniform(MapMode::Motoring, 0.89, 1600.0, 1250.0).unwrap();
        save_map(&map, &path).unwrap();
        assert_eq!(load_map(&path, MapMode::Motoring).unwrap(), map);
        assert!(matches!(
            load_map(&dir.path().join("missing.csv"), MapMode::Motoring),
            Err(Error::Io { .. })
        ));
    }

    fn parse_err(text: &str) -> (u64, Option<usize>) {
        match EfficiencyMap::parse_csv(text, MapMode::Motoring) {
            Err(Error::Parse { location, .. }) => (location.line, location.column),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn errors_point_at_the_cell() {
        assert_eq!(parse_err("rpm\\torque,0,10\n0,0.5,0.5\n100,0.5,abc\n"), (3, Some(3)));
        assert_eq!(parse_err("rpm\\torque,0,10\n0,0.5,0.5\n100,0.5\n"), (3, None));
        assert_eq!(parse_err("speed,0,10\n0,0.5,0.5\n100,0.5,0.5\n"), (1, Some(1)));
        assert_eq!(parse_err("rpm\\torque,0,10,5\n"), (1, Some(4)));
        assert_eq!(parse_err("rpm\\torque,0,10\n0,0.5,0.5\n0,0.5,0.5\n"), (3, Some(1)));
        assert_eq!(parse_err("rpm\\torque,0,10\n0,0.5,0.5\n100,0.5,0.97\n"), (3, Some(3)));
        assert_eq!(parse_err("rpm\\torque,0,10\n0,0.5,0.5\n"), (2, None));
        assert_eq!(parse_err(""), (1, None));
    }

    #[test]
    fn tolerates_whitespace_and_comments() {
        let text = "# bench data\nrpm\\torque, 0, 10\n0, 0.5, 0.6\n\n100, 0.7, 0.8\n";
        let map = EfficiencyMap::parse_csv(text, MapMode::Motoring).unwrap();
        assert_eq!(map.value(1, 1), 0.8);
    }
}
