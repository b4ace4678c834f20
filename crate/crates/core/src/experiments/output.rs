//! CSV form of experiment records.

use std::path::Path;

use super::ExperimentRecord;
use crate::error::{Error, Result};

pub const RECORDS_HEADER: &str =
    "n,N,input_distance,output_distance,vorticity_distance,ratio,particle_separation,separation_bound,supports_disjoint";

fn csv_error(e: csv::Error) -> Error {
    match e.position() {
        Some(p) => Error::Config {
            line: p.line() as usize,
            message: e.to_string(),
        },
        None => Error::Format(e.to_string()),
    }
}

pub fn records_to_csv(records: &[ExperimentRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    if records.is_empty() {
        w.write_record(RECORDS_HEADER.split(','))
            .expect("in-memory write");
    }
    // Serialization writes the header from the field names on the first record.
    for r in records {
        w.serialize(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("ASCII output")
}

pub fn write_records_csv(path: impl AsRef<Path>, records: &[ExperimentRecord]) -> Result<()> {
    std::fs::write(path, records_to_csv(records))?;
    Ok(())
}

/// Parses the CSV written by [`write_records_csv`]; errors carry the 1-based line.
pub fn parse_records_csv(text: &str) -> Result<Vec<ExperimentRecord>> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = r
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_string)
        .collect();
    if header.join(",") != RECORDS_HEADER {
        return Err(Error::Config {
            line: 1,
            message: format!("unexpected header {:?}", header.join(",")),
        });
    }
    r.deserialize().map(|rec| rec.map_err(csv_error)).collect()
}

pub fn read_records_csv(path: impl AsRef<Path>) -> Result<Vec<ExperimentRecord>> {
    parse_records_csv(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_including_nan() {
        let a = ExperimentRecord {
            n: 2,
            big_n: 128,
            input_distance: 0.1,
            output_distance: 1.0 / 3.0,
            vorticity_distance: 2e-17,
            ratio: 10.0 / 3.0,
            particle_separation: 0.5,
            separation_bound: 0.25,
            supports_disjoint: true,
        };
        let recs = vec![a, ExperimentRecord::failed(4, 256)];
        let back = parse_records_csv(&records_to_csv(&recs)).unwrap();
        assert_eq!(back[0], a);
        assert!(back[1].is_failed() && back[1].n == 4 && back[1].big_n == 256);
    }

    #[test]
    fn header_always_written() {
        assert_eq!(records_to_csv(&[]).trim(), RECORDS_HEADER);
        let one = records_to_csv(&[ExperimentRecord::failed(1, 128)]);
        assert_eq!(one.lines().next(), Some(RECORDS_HEADER));
    }

    #[test]
    fn schema_errors_have_lines() {
        let bad = format!("{RECORDS_HEADER}\n1,128,0,0,0,0,0,0,true\n1,128,0,0\n");
        match parse_records_csv(&bad) {
            Err(Error::Config { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(parse_records_csv("n,N\n").is_err());
    }
}
