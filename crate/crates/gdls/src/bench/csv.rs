use std::io::Write;

use super::SeriesResult;

/// Full round-trip precision (17 significant digits).
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `series` as CSV: `# key = value` metadata lines (the caller's
/// provenance first, then the sweep notes), a header row, then one row per
/// record. LF line endings.
pub fn write_series_csv<W: Write>(
    series: &SeriesResult,
    metadata: &[(String, String)],
    mut w: W,
) -> std::io::Result<()> {
    for (k, v) in metadata.iter().chain(&series.notes) {
        writeln!(w, "# {k} = {v}")?;
    }
    writeln!(w, "# swept_variable = {}", series.variable)?;
    writeln!(w, "swept_value,method,metric,trials,stderr")?;
    for r in &series.records {
        writeln!(
            w,
            "{},{},{},{},{}",
            format_float(r.swept_value),
            r.method,
            format_float(r.metric),
            r.trials,
            format_float(r.stderr)
        )?;
    }
    Ok(())
}
