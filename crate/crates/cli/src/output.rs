//! CSV and JSON writers for sweep data.

use std::fs::File;
use std::io::{self, BufWriter, Write};

use serde::Serialize;

use crate::{Failure, Format, SweepConfig, SCHEMA, VERSION};

pub struct Sink<'a, T: Serialize> {
    pub header: &'a [&'a str],
    pub csv_rows: Vec<String>,
    pub json_rows: &'a T,
}

/// Seventeen significant digits in scientific notation.
pub fn number(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_row(values: &[f64], tail: &[&str]) -> String {
    values.iter().map(|&v| number(v)).chain(tail.iter().map(|s| s.to_string())).collect::<Vec<_>>().join(",")
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    schema: &'a str,
    version: &'a str,
    command: &'a str,
    grid: usize,
    seed: u64,
    rows: &'a T,
}

fn render<T: Serialize>(w: &mut dyn Write, cfg: &SweepConfig, sink: &Sink<T>) -> io::Result<()> {
    match cfg.format {
        Format::Csv => {
            writeln!(w, "{}", cfg.provenance())?;
            writeln!(w, "{}", sink.header.join(","))?;
            for row in &sink.csv_rows {
                writeln!(w, "{row}")?;
            }
        }
        Format::Json => {
            let doc = Document {
                schema: SCHEMA,
                version: VERSION,
                command: cfg.command,
                grid: cfg.grid,
                seed: cfg.seed,
                rows: sink.json_rows,
            };
            serde_json::to_writer_pretty(&mut *w, &doc)?;
            writeln!(w)?;
        }
    }
    w.flush()
}

pub fn write_output<T: Serialize>(cfg: &SweepConfig, sink: Sink<T>) -> Result<(), Failure> {
    match &cfg.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            render(&mut BufWriter::new(file), cfg, &sink).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
        }
        None => render(&mut io::stdout().lock(), cfg, &sink).map_err(|e| Failure::Io(e.to_string())),
    }
}
