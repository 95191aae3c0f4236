//! Plain-text solution dumps.
//!
//! ```text
//! floquet-solution 1
//! alpha <α> mode <A|B> k <k> period <Λ> height <H> residual <r>
//! values <n>
//! <re> <im>            (n lines, one per mesh node)
//! rayleigh <2M+1>
//! <re> <im>            (orders -M..=M)
//! incident <count>
//! <j> <re> <im>        (downward coefficients of a Mode A problem)
//! ```

use std::io::{BufRead, Write};

use num_complex::Complex64;

use super::{Mode, QPSolution};
use crate::error::{Error, Result};
use crate::fields::WaveParams;

const MAGIC: &str = "floquet-solution 1";

pub fn write_solution<W: Write>(sol: &QPSolution, mut out: W) -> Result<()> {
    writeln!(out, "{MAGIC}")?;
    writeln!(
        out,
        "alpha {:e} mode {} k {:e} period {:e} height {:e} residual {:e}",
        sol.alpha,
        sol.mode,
        sol.params.k(),
        sol.params.period(),
        sol.height,
        sol.residual
    )?;
    writeln!(out, "values {}", sol.values.len())?;
    for v in &sol.values {
        writeln!(out, "{:e} {:e}", v.re, v.im)?;
    }
    writeln!(out, "rayleigh {}", sol.rayleigh.len())?;
    for v in &sol.rayleigh {
        writeln!(out, "{:e} {:e}", v.re, v.im)?;
    }
    writeln!(out, "incident {}", sol.incident.len())?;
    for (j, v) in &sol.incident {
        writeln!(out, "{j} {:e} {:e}", v.re, v.im)?;
    }
    Ok(())
}

fn parse_err(line: usize, what: &str) -> Error {
    Error::Parse(format!("solution line {line}: {what}"))
}

pub fn read_solution<R: BufRead>(input: R) -> Result<QPSolution> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = || -> Result<(usize, String)> {
        match lines.next() {
            Some((i, l)) => Ok((i, l?)),
            None => Err(Error::Parse("unexpected end of solution file".into())),
        }
    };
    let (n, magic) = next()?;
    if magic.trim() != MAGIC {
        return Err(parse_err(n, "not a floquet solution file"));
    }
    let (n, header) = next()?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    let field = |key: &str| -> Result<&str> {
        parts
            .iter()
            .position(|&p| p == key)
            .and_then(|i| parts.get(i + 1).copied())
            .ok_or_else(|| parse_err(n, &format!("missing {key}")))
    };
    let num = |key: &str| -> Result<f64> { field(key)?.parse().map_err(|_| parse_err(n, &format!("bad {key}"))) };
    let alpha = num("alpha")?;
    let mode: Mode = field("mode")?.parse()?;
    let params = WaveParams::new(num("k")?, num("period")?)?;
    let height = num("height")?;
    let residual = num("residual")?;
    // rows of `<re> <im>`, or `<j> <re> <im>` when indexed
    let mut block = |key: &str, indexed: bool| -> Result<Vec<(i64, Complex64)>> {
        let (n, head) = next()?;
        let count: usize = head
            .strip_prefix(key)
            .and_then(|rest| rest.trim().parse().ok())
            .ok_or_else(|| parse_err(n, &format!("expected `{key} <count>`")))?;
        (0..count)
            .map(|_| {
                let (n, line) = next()?;
                let mut it = line.split_whitespace();
                let j = if indexed {
                    it.next().and_then(|t| t.parse::<i64>().ok())
                } else {
                    Some(0)
                };
                let mut num = || it.next().and_then(|t| t.parse::<f64>().ok());
                match (j, num(), num()) {
                    (Some(j), Some(re), Some(im)) => Ok((j, Complex64::new(re, im))),
                    _ => Err(parse_err(n, &format!("malformed {key} row"))),
                }
            })
            .collect()
    };
    let plain = |rows: Vec<(i64, Complex64)>| rows.into_iter().map(|r| r.1).collect::<Vec<_>>();
    let values = plain(block("values", false)?);
    let rayleigh = plain(block("rayleigh", false)?);
    if rayleigh.len() % 2 != 1 {
        return Err(Error::Parse("rayleigh block must hold 2M+1 coefficients".into()));
    }
    let incident = block("incident", true)?;
    Ok(QPSolution {
        alpha,
        mode,
        params,
        height,
        values,
        rayleigh,
        incident,
        residual,
    })
}
