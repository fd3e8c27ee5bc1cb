// SPDX-License-Identifier: Apache-2.0

//! Plain CSV output shared by the dump routines: comma separated, `\n` line
//! endings, one header row, floats with 17 significant digits.

use std::io::{self, Write};

/// Formats a float with 17 significant digits, independent of locale.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `header` followed by `rows`; each row is already split into cells.
pub fn write_csv<W: Write>(
    mut out: W,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> io::Result<()> {
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()
}
