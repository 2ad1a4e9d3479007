//! Sweep tables on disk.
//!
//! The format is a fixed five-column CSV, `r,t,engine,phase,param`, with
//! floats printed at 17 significant digits so a write/read cycle is
//! lossless bit for bit. The label columns reuse the `Display`/`FromStr`
//! grammar of the engine and field types; none of those labels can
//! contain a comma, so no quoting is needed.

use std::io::{Read, Write};
use std::str::FromStr;

use crate::fields::{FieldError, ParamMap, PhaseFn};
use crate::passage::Engine;
use crate::scaling::ScalingSample;

pub const SWEEP_HEADER: &str = "r,t,engine,phase,param";

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("missing header row")]
    MissingHeader,
    #[error("expected header '{SWEEP_HEADER}', found '{found}'")]
    BadHeader { found: String },
    #[error("line {line}: expected 5 fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: cannot parse number from '{text}'")]
    BadNumber { line: usize, text: String },
    #[error("line {line}: {source}")]
    BadLabel { line: usize, source: FieldError },
}

/// One parsed data row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub r: f64,
    pub t: f64,
    pub engine: Engine,
    pub phase: PhaseFn,
    pub param: ParamMap,
}

/// A parsed sweep file.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn rows(&self) -> &[SweepRow] {
        &self.rows
    }

    /// Just the `(r, t)` columns, ready for fitting.
    pub fn samples(&self) -> Vec<ScalingSample> {
        self.rows
            .iter()
            .map(|row| ScalingSample { r: row.r, t: row.t })
            .collect()
    }
}

/// Write samples measured by `engine` on the field `(phase, param)`.
pub fn write_sweep_csv<W: Write>(
    mut out: W,
    samples: &[ScalingSample],
    engine: Engine,
    phase: &PhaseFn,
    param: &ParamMap,
) -> Result<(), CsvError> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for s in samples {
        writeln!(out, "{:.16e},{:.16e},{engine},{phase},{param}", s.r, s.t)?;
    }
    Ok(())
}

fn parse_number(text: &str, line: usize) -> Result<f64, CsvError> {
    f64::from_str(text).map_err(|_| CsvError::BadNumber {
        line,
        text: text.to_owned(),
    })
}

fn parse_label<T>(text: &str, line: usize) -> Result<T, CsvError>
where
    T: FromStr<Err = FieldError>,
{
    text.parse()
        .map_err(|source| CsvError::BadLabel { line, source })
}

/// Read a sweep file back. Blank lines are skipped; errors carry 1-based
/// line numbers.
pub fn read_sweep_csv<R: Read>(mut input: R) -> Result<SweepTable, CsvError> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(CsvError::MissingHeader);
    };
    let header = header.trim_end_matches('\r');
    if header != SWEEP_HEADER {
        return Err(CsvError::BadHeader {
            found: header.to_owned(),
        });
    }
    let mut rows = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let raw = raw.trim_end_matches('\r');
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 5 {
            return Err(CsvError::FieldCount {
                line,
                found: fields.len(),
            });
        }
        rows.push(SweepRow {
            r: parse_number(fields[0], line)?,
            t: parse_number(fields[1], line)?,
            engine: parse_label(fields[2], line)?,
            phase: parse_label(fields[3], line)?,
            param: parse_label(fields[4], line)?,
        });
    }
    Ok(SweepTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let samples = vec![
            ScalingSample {
                r: std::f64::consts::PI * 1e-7,
                t: 1.0 / 3.0,
            },
            ScalingSample {
                r: 2.0f64.powi(-40),
                t: 1e-300,
            },
            ScalingSample {
                r: 0.1,
                t: 9.87654321012345e12,
            },
        ];
        let phase = PhaseFn::power(1.5).unwrap();
        let param = ParamMap::even_power(2).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &samples, Engine::Ode, &phase, &param).unwrap();
        let table = read_sweep_csv(buf.as_slice()).unwrap();
        assert_eq!(table.rows().len(), samples.len());
        for (row, s) in table.rows().iter().zip(&samples) {
            assert_eq!(row.r.to_bits(), s.r.to_bits());
            assert_eq!(row.t.to_bits(), s.t.to_bits());
            assert_eq!(row.engine, Engine::Ode);
            assert_eq!(row.phase, phase);
            assert_eq!(row.param, param);
        }
        assert_eq!(table.samples()[1].r, samples[1].r);
    }

    #[test]
    fn output_bytes_are_pinned() {
        let samples = vec![ScalingSample { r: 1e-3, t: 2.0 }];
        let mut buf = Vec::new();
        write_sweep_csv(
            &mut buf,
            &samples,
            Engine::Quadrature,
            &PhaseFn::Quadratic,
            &ParamMap::Identity,
        )
        .unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "r,t,engine,phase,param\n\
             1.0000000000000000e-3,2.0000000000000000e0,quadrature,quadratic,identity\n"
        );
    }

    #[test]
    fn pendulum_labels_survive() {
        let samples = vec![ScalingSample { r: 1e-2, t: 43.1 }];
        let phase = PhaseFn::pendulum_wave(0.5).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(
            &mut buf,
            &samples,
            Engine::Quadrature,
            &phase,
            &ParamMap::Identity,
        )
        .unwrap();
        let table = read_sweep_csv(buf.as_slice()).unwrap();
        assert_eq!(table.rows()[0].phase, phase);
        assert_eq!(table.rows()[0].param, ParamMap::Identity);
    }

    #[test]
    fn header_is_checked() {
        assert!(matches!(
            read_sweep_csv("".as_bytes()).unwrap_err(),
            CsvError::MissingHeader
        ));
        let err = read_sweep_csv("r,t,engine\n".as_bytes()).unwrap_err();
        match err {
            CsvError::BadHeader { found } => assert_eq!(found, "r,t,engine"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn data_errors_carry_line_numbers() {
        let text = "r,t,engine,phase,param\n1e-3,2.0,quadrature\n";
        match read_sweep_csv(text.as_bytes()).unwrap_err() {
            CsvError::FieldCount { line, found } => {
                assert_eq!(line, 2);
                assert_eq!(found, 3);
            }
            other => panic!("unexpected error {other:?}"),
        }

        let text = "r,t,engine,phase,param\n\
                    1e-3,2.0,quadrature,quadratic,identity\n\
                    oops,2.0,quadrature,quadratic,identity\n";
        match read_sweep_csv(text.as_bytes()).unwrap_err() {
            CsvError::BadNumber { line, text } => {
                assert_eq!(line, 3);
                assert_eq!(text, "oops");
            }
            other => panic!("unexpected error {other:?}"),
        }

        let text = "r,t,engine,phase,param\n1e-3,2.0,midpoint,quadratic,identity\n";
        match read_sweep_csv(text.as_bytes()).unwrap_err() {
            CsvError::BadLabel { line, source } => {
                assert_eq!(line, 2);
                assert!(matches!(source, FieldError::Parse { kind: "engine", .. }));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn blank_lines_and_crlf_are_tolerated() {
        let text = "r,t,engine,phase,param\r\n1e-3,2.0,ode,power:2,identity\r\n\r\n";
        let table = read_sweep_csv(text.as_bytes()).unwrap();
        assert_eq!(table.rows().len(), 1);
        assert_eq!(table.rows()[0].engine, Engine::Ode);
    }
}
