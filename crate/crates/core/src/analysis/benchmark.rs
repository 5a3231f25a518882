//! Parsers for the stock HPL and STREAM result printouts.

use super::{AnalysisError, BenchmarkRecord, Throughput};

/// Extracts one record per result line (`WR..`, `WC..` ...) of an HPL run.
///
/// Result lines look like
/// `WR11C2R4  40704  192  2  2  24105.00  1.8600e+00`
/// (T/V, N, NB, P, Q, time in seconds, GFLOP/s).
pub fn parse_hpl_output(text: &str, nodes_used: u32) -> Result<Vec<BenchmarkRecord>, AnalysisError> {
    let mut out = Vec::new();
    for line in text.lines() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [tv, n, nb, p, q, time, gflops] = fields[..] else {
            continue;
        };
        if !(tv.starts_with('W') && tv.len() > 2 && n.bytes().all(|b| b.is_ascii_digit())) {
            continue;
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| AnalysisError::InvalidInput(format!("bad number {s:?} in HPL line {line:?}")))
        };
        let mut rec = BenchmarkRecord::flops("hpl", num(gflops)? * 1e9, nodes_used)?
            .with_config("T/V", tv)
            .with_config("N", n)
            .with_config("NB", nb)
            .with_config("P", p)
            .with_config("Q", q);
        rec.runtime = Some(super::Runtime { mean: num(time)?, stddev: 0.0 });
        out.push(rec);
    }
    if out.is_empty() {
        return Err(AnalysisError::InvalidInput("no HPL result lines found".into()));
    }
    Ok(out)
}

/// Extracts the best-rate line of each STREAM kernel (`Copy:`, `Scale:`, `Add:`, `Triad:`).
///
/// STREAM reports MB/s with 1 MB = 10^6 bytes.
pub fn parse_stream_output(text: &str) -> Result<Vec<BenchmarkRecord>, AnalysisError> {
    let mut out = Vec::new();
    for line in text.lines() {
        let mut it = line.split_whitespace();
        let Some(label) = it.next() else { continue };
        let Some(kernel) = label.strip_suffix(':') else { continue };
        let kernel = kernel.to_ascii_lowercase();
        if !matches!(kernel.as_str(), "copy" | "scale" | "add" | "triad") {
            continue;
        }
        let Some(rate) = it.next().and_then(|s| s.parse::<f64>().ok()) else {
            continue;
        };
        out.push(BenchmarkRecord::new(kernel, Throughput::BytesPerSec(rate * 1e6), 1)?);
    }
    if out.is_empty() {
        return Err(AnalysisError::InvalidInput("no STREAM kernel lines found".into()));
    }
    Ok(out)
}
