//! Column-tagged time series and its CSV surface.
//!
//! The CSV dialect is deliberately tiny: a block of `# key=value` metadata
//! lines, one header line of unit-suffixed column names, then data rows.
//! Floats are rendered with 17 significant digits so that parsing a file
//! back reproduces the original values bit for bit.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use super::ScenarioError;

/// One column of a result series. `T` is mandatory and always first; the
/// loss columns exist only when a loss model is part of the scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Column {
    /// Sample time [ps].
    T,
    /// Radiative decay rate Γ_rad(t) [1/ns].
    GammaRad,
    /// Excited-state population N₂(t) (normalized).
    N2,
    /// Lossless detected intensity I(t) = Γ_rad·N₂ [1/ns].
    Intensity,
    /// Detected intensity including free-carrier absorption [1/ns].
    IntensityLossy,
    /// Cavity resonance shift S(t) in linewidths.
    SShift,
    /// Relative linewidth γ(t)/γᵢ = 1 + a·S(t).
    GammaOverGammaI,
}

impl Column {
    /// Every column, in canonical output order.
    pub const ALL: [Column; 7] = [
        Column::T,
        Column::GammaRad,
        Column::N2,
        Column::Intensity,
        Column::IntensityLossy,
        Column::SShift,
        Column::GammaOverGammaI,
    ];

    /// The short name used in scenario documents (`output.columns`).
    pub fn config_name(self) -> &'static str {
        match self {
            Column::T => "t",
            Column::GammaRad => "gamma_rad",
            Column::N2 => "n2",
            Column::Intensity => "intensity",
            Column::IntensityLossy => "intensity_lossy",
            Column::SShift => "s_shift",
            Column::GammaOverGammaI => "gamma_over_gamma_i",
        }
    }

    /// The unit-suffixed name used in CSV headers.
    pub fn header_name(self) -> &'static str {
        match self {
            Column::T => "t_ps",
            Column::GammaRad => "gamma_rad_per_ns",
            Column::N2 => "n2",
            Column::Intensity => "intensity_per_ns",
            Column::IntensityLossy => "intensity_lossy_per_ns",
            Column::SShift => "s_shift",
            Column::GammaOverGammaI => "gamma_over_gamma_i",
        }
    }

    /// Inverse of [`Column::config_name`].
    pub fn from_config_name(name: &str) -> Option<Column> {
        Column::ALL.into_iter().find(|c| c.config_name() == name)
    }

    /// Inverse of [`Column::header_name`].
    pub fn from_header_name(name: &str) -> Option<Column> {
        Column::ALL.into_iter().find(|c| c.header_name() == name)
    }

    /// True for the columns that only exist alongside a loss model.
    pub fn requires_loss(self) -> bool {
        matches!(
            self,
            Column::IntensityLossy | Column::SShift | Column::GammaOverGammaI
        )
    }
}

/// A computed scenario result: provenance metadata plus tabular samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    /// Ordered `key=value` provenance (scenario hash, engine, tolerances, …).
    pub metadata: Vec<(String, String)>,
    /// The meaning of each entry of a row, in row order.
    pub columns: Vec<Column>,
    /// Data rows; every row has exactly `columns.len()` entries and the
    /// time column is strictly increasing.
    pub rows: Vec<Vec<f64>>,
}

impl TimeSeries {
    /// Position of `c` among the columns, if present.
    pub fn column_index(&self, c: Column) -> Option<usize> {
        self.columns.iter().position(|&x| x == c)
    }

    /// Copy of one column's values, if present.
    pub fn column_values(&self, c: Column) -> Option<Vec<f64>> {
        let i = self.column_index(c)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Checks the structural invariants: a leading time column, strictly
    /// increasing times, and rectangular rows.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.columns.first() != Some(&Column::T) {
            return Err(ScenarioError::Validation(
                "time series must carry the t column first".into(),
            ));
        }
        let width = self.columns.len();
        let mut prev = f64::NEG_INFINITY;
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != width {
                return Err(ScenarioError::Validation(format!(
                    "row {i} has {} entries, header has {width}",
                    row.len()
                )));
            }
            if !(row[0] > prev) {
                return Err(ScenarioError::Validation(format!(
                    "time column not strictly increasing at row {i} (t={})",
                    row[0]
                )));
            }
            prev = row[0];
        }
        Ok(())
    }
}

/// Formats one float with 17 significant digits — enough for an exact f64
/// round trip through text.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the series to any byte sink in the CSV dialect described at the
/// top of this module.
pub fn write_csv_to(ts: &TimeSeries, w: &mut impl Write) -> io::Result<()> {
    for (k, v) in &ts.metadata {
        writeln!(w, "# {k}={v}")?;
    }
    let header: Vec<&str> = ts.columns.iter().map(|c| c.header_name()).collect();
    writeln!(w, "{}", header.join(","))?;
    for row in &ts.rows {
        let fields: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

/// Renders the series to an in-memory CSV string (used for stdout output
/// and byte-exact comparisons).
pub fn csv_string(ts: &TimeSeries) -> String {
    let mut buf = Vec::new();
    write_csv_to(ts, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV output is ASCII")
}

/// Writes the series to a file, creating or truncating it.
pub fn write_csv(ts: &TimeSeries, path: &Path) -> Result<(), ScenarioError> {
    let file = std::fs::File::create(path)?;
    let mut w = io::BufWriter::new(file);
    write_csv_to(ts, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Parses a CSV document produced by [`write_csv_to`] back into a series,
/// checking all structural invariants. Lossless: parsed values equal the
/// originals bit for bit.
pub fn read_csv(text: &str) -> Result<TimeSeries, ScenarioError> {
    let mut metadata = Vec::new();
    let mut lines = text.lines().peekable();
    while let Some(line) = lines.peek() {
        let Some(rest) = line.strip_prefix('#') else {
            break;
        };
        let rest = rest.trim_start();
        let (k, v) = rest
            .split_once('=')
            .ok_or_else(|| ScenarioError::Csv(format!("metadata line without '=': {line:?}")))?;
        metadata.push((k.to_string(), v.to_string()));
        lines.next();
    }
    let header = lines
        .next()
        .ok_or_else(|| ScenarioError::Csv("missing header line".into()))?;
    let mut columns = Vec::new();
    for name in header.split(',') {
        let c = Column::from_header_name(name.trim())
            .ok_or_else(|| ScenarioError::Csv(format!("unknown column {name:?} in header")))?;
        columns.push(c);
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::with_capacity(columns.len());
        for field in line.split(',') {
            let x: f64 = field.trim().parse().map_err(|e| {
                ScenarioError::Csv(format!("bad float {field:?} on data line {lineno}: {e}"))
            })?;
            row.push(x);
        }
        rows.push(row);
    }
    let ts = TimeSeries {
        metadata,
        columns,
        rows,
    };
    ts.validate()?;
    Ok(ts)
}
