use std::io::Write;

use super::SweepResult;
use crate::error::Result;

/// Column order of the CSV output.
pub const CSV_HEADER: [&str; 8] = [
    "algo",
    "ebn0_db",
    "ber",
    "sum_rate_bits",
    "avg_iterations",
    "convergence_rate",
    "trials",
    "seed",
];

pub fn write_csv<W: Write>(rows: &[SweepResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty-printed JSON array with the same fields as the CSV.
pub fn write_json<W: Write>(rows: &[SweepResult], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    writeln!(out)?;
    Ok(())
}
