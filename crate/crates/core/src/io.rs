//! Delimited-text tick files: an optional block of `#` comment lines, the
//! header `time,price`, then one `time,price` observation per line.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::series::TickSeries;

pub const TICK_HEADER: &str = "time,price";

pub fn read_ticks<R: BufRead>(reader: R) -> Result<TickSeries> {
    let mut times = Vec::new();
    let mut prices = Vec::new();
    let mut seen_header = false;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !seen_header {
            if line.replace(' ', "") != TICK_HEADER {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected header `{TICK_HEADER}`, found `{line}`"),
                });
            }
            seen_header = true;
            continue;
        }
        let mut fields = line.split(',');
        let (Some(t), Some(p), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::Parse {
                line: lineno,
                message: "expected exactly two fields".into(),
            });
        };
        let parse = |s: &str, what: &str| -> Result<f64> {
            let v: f64 = s.trim().parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid {what} `{}`", s.trim()),
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Parse {
                    line: lineno,
                    message: format!("non-finite {what}"),
                })
            }
        };
        let t = parse(t, "time")?;
        let p = parse(p, "price")?;
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Parse {
                line: lineno,
                message: format!("time {t} outside [0, 1]"),
            });
        }
        if let Some(&prev) = times.last() {
            if t <= prev {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("time {t} does not increase (previous {prev})"),
                });
            }
        }
        times.push(t);
        prices.push(p);
    }
    if !seen_header {
        return Err(Error::Parse {
            line: 0,
            message: format!("missing header `{TICK_HEADER}`"),
        });
    }
    TickSeries::new(times, prices)
}

/// Writes the series, preceded by `# <comment>` when given.
///
/// Values use Rust's shortest round-trip formatting, so reading the file
/// back reproduces the series bit for bit.
pub fn write_ticks<W: Write>(mut out: W, series: &TickSeries, comment: Option<&str>) -> Result<()> {
    if let Some(c) = comment {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "{TICK_HEADER}")?;
    for (t, p) in series.times().iter().zip(series.prices()) {
        writeln!(out, "{t:?},{p:?}")?;
    }
    Ok(())
}
