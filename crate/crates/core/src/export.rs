//! CSV, JSON and plot-table output of a run.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::ExportError;
use crate::runner::RunResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExportError + '_ {
    move |source| ExportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn csv_header(arms: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=arms).map(|i| format!("k_{i}")));
    h.push("K0".into());
    h.push("K1".into());
    h.extend((1..=arms).map(|i| format!("beta_{i}")));
    h.extend((1..=arms).map(|i| format!("alpha_{i}")));
    h.push("tdelta_y".into());
    h.push("flags".into());
    h
}

pub fn write_csv<W: Write>(result: &RunResult, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(result.config.manipulators.len()))?;
    for s in &result.samples {
        let mut rec = vec![fmt_f64(s.time)];
        rec.extend(s.k.iter().copied().map(fmt_f64));
        rec.push(fmt_f64(s.k0_total));
        rec.push(fmt_f64(s.k1_total));
        rec.extend(s.beta.iter().copied().map(fmt_f64));
        rec.extend(s.alpha.iter().copied().map(fmt_f64));
        rec.push(fmt_f64(s.t_delta[1]));
        rec.push(
            s.flags
                .iter()
                .map(|f| f.as_str())
                .collect::<Vec<_>>()
                .join(";"),
        );
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn export(result: &RunResult, format: Format, path: &Path) -> Result<(), ExportError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    match format {
        Format::Csv => write_csv(result, &mut out).map_err(|e| ExportError::Encode {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, result).map_err(|e| ExportError::Encode {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
            out.write_all(b"\n").map_err(io_err(path))?;
        }
    }
    out.flush().map_err(io_err(path))
}

pub fn read_json(path: &Path) -> Result<RunResult, ExportError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| ExportError::Encode {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Whitespace-separated `t K0 K1` table with `#` comment lines; the
/// feasibility threshold K = 1 is recorded in the header.
pub fn emit_plot_data(result: &RunResult, path: &Path) -> Result<(), ExportError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    let mut body = String::new();
    body.push_str("# group capability without (K0) and with (K1) counterbalance moment\n");
    body.push_str("# reference: K = 1\n");
    body.push_str("# t K0 K1\n");
    for s in &result.samples {
        body.push_str(&format!(
            "{} {} {}\n",
            fmt_f64(s.time),
            fmt_f64(s.k0_total),
            fmt_f64(s.k1_total)
        ));
    }
    out.write_all(body.as_bytes()).map_err(io_err(path))?;
    out.flush().map_err(io_err(path))
}

/// Paths written by [`write_all`].
#[derive(Debug, Clone)]
pub struct OutputFiles {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub plot: PathBuf,
}

/// Writes `capability.csv`, `capability.json` and `capability_plot.dat`.
pub fn write_all(result: &RunResult, dir: &Path) -> Result<OutputFiles, ExportError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let files = OutputFiles {
        csv: dir.join("capability.csv"),
        json: dir.join("capability.json"),
        plot: dir.join("capability_plot.dat"),
    };
    export(result, Format::Csv, &files.csv)?;
    export(result, Format::Json, &files.json)?;
    emit_plot_data(result, &files.plot)?;
    Ok(files)
}
