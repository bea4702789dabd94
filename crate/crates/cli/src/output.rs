use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use serde_json::Value;

use crate::cli::Format;

/// What a subcommand produces, rendered three ways.
pub struct Report {
    pub payload: Value,
    pub text: String,
    pub csv: String,
    /// Text output is itself CSV; skip the comment header.
    pub raw_text: bool,
}

#[derive(Serialize)]
pub struct Envelope<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub timestamp: String,
    pub config: &'a Value,
    pub payload: &'a Value,
}

/// RFC 3339 time of the run, pinned by `SOURCE_DATE_EPOCH` when set.
pub fn timestamp() -> Result<String> {
    let now = match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(s) => {
            let secs: i64 = s
                .trim()
                .parse()
                .with_context(|| format!("SOURCE_DATE_EPOCH={s:?} is not an integer"))?;
            DateTime::<Utc>::from_timestamp(secs, 0).context("SOURCE_DATE_EPOCH out of range")?
        }
        Err(_) => Utc::now(),
    };
    Ok(now.to_rfc3339_opts(SecondsFormat::Secs, true))
}

pub fn render(report: &Report, format: Format, command: &str, config: &Value) -> Result<String> {
    Ok(match format {
        Format::Json => {
            let env = Envelope {
                tool: "q8",
                version: env!("CARGO_PKG_VERSION"),
                command: command.to_string(),
                timestamp: timestamp()?,
                config,
                payload: &report.payload,
            };
            let mut s = serde_json::to_string_pretty(&env)?;
            s.push('\n');
            s
        }
        Format::Csv => report.csv.clone(),
        Format::Text if report.raw_text => report.text.clone(),
        Format::Text => format!(
            "# q8 {} {command}\n# config {}\n{}",
            env!("CARGO_PKG_VERSION"),
            serde_json::to_string(config)?,
            report.text
        ),
    })
}

pub fn emit(body: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, body).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// Left-aligned columns separated by two spaces.
pub fn table<S: AsRef<str>>(headers: &[&str], rows: &[Vec<S>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.as_ref().chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut s = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ");
        s.truncate(s.trim_end().len());
        s.push('\n');
        s
    };
    let mut out = line(headers.to_vec());
    for r in rows {
        out.push_str(&line(r.iter().map(AsRef::as_ref).collect()));
    }
    out
}

pub fn csv_string<S: AsRef<str>>(headers: &[&str], rows: &[Vec<S>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(headers)?;
    for r in rows {
        w.write_record(r.iter().map(AsRef::as_ref))?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// CSV from serialisable records; the header comes from the field names.
pub fn csv_records<T: Serialize>(records: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
