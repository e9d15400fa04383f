//! `t,x` CSV files for sample paths.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::SamplePath;

/// Writes `t,x` rows with 17 significant digits and LF line endings.
pub fn write_path_csv<W: Write>(path: &SamplePath, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["t", "x"])?;
    for (t, x) in path.times().iter().zip(path.values()) {
        w.write_record([format!("{t:.16e}"), format!("{x:.16e}")])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_path_csv<R: Read>(input: R) -> Result<SamplePath> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = r.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "x" {
        return Err(Error::InvalidInput(format!(
            "expected header `t,x`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("row {}: not a number: `{s}`", line + 2)))
        };
        times.push(parse(&record[0])?);
        values.push(parse(&record[1])?);
    }
    SamplePath::new(times, values)
}

pub fn write_path_file(path: &SamplePath, file: &Path) -> Result<()> {
    write_path_csv(path, std::io::BufWriter::new(File::create(file)?))
}

pub fn read_path_file(file: &Path) -> Result<SamplePath> {
    read_path_csv(std::io::BufReader::new(File::open(file)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_and_line_endings() {
        let p = SamplePath::new(vec![0.0, 0.5], vec![0.0, -1.25]).unwrap();
        let mut buf = Vec::new();
        write_path_csv(&p, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,x\n"));
        assert!(!text.contains('\r'));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn rejects_wrong_header() {
        assert!(read_path_csv("a,b\n0,0\n".as_bytes()).is_err());
        assert!(read_path_csv("t,x\n0,zz\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_lossless(
            steps in proptest::collection::vec(1e-9f64..10.0, 1..40),
            values in proptest::collection::vec(-1e12f64..1e12, 41),
        ) {
            let mut t = 0.0;
            let times: Vec<f64> = std::iter::once(0.0).chain(steps.iter().map(|d| { t += d; t })).collect();
            let vals = values[..times.len()].to_vec();
            let p = SamplePath::new(times, vals).unwrap();
            let mut buf = Vec::new();
            write_path_csv(&p, &mut buf).unwrap();
            let q = read_path_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(p, q);
        }
    }
}
