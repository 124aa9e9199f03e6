//! Labeled amplitude samples grouped into range cells, and their CSV form.
//!
//! The CSV has the header `cell_id,label,amplitude` and one sample per row.
//! Rows for a cell need not be contiguous; cells keep the order in which
//! their id first appears.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 3] = ["cell_id", "label", "amplitude"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellLabel {
    #[serde(rename = "clutter")]
    ClutterOnly,
    #[serde(rename = "primary")]
    Primary,
    #[serde(rename = "secondary")]
    Secondary,
}

impl CellLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            CellLabel::ClutterOnly => "clutter",
            CellLabel::Primary => "primary",
            CellLabel::Secondary => "secondary",
        }
    }
}

impl fmt::Display for CellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CellLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "clutter" => Ok(CellLabel::ClutterOnly),
            "primary" => Ok(CellLabel::Primary),
            "secondary" => Ok(CellLabel::Secondary),
            other => Err(Error::Schema(format!("unknown cell label `{other}`"))),
        }
    }
}

/// Amplitude samples from one range cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub cell_id: u64,
    pub label: CellLabel,
    pub amplitudes: Vec<f64>,
    pub source: String,
}

impl SampleSet {
    pub fn new(cell_id: u64, label: CellLabel, amplitudes: Vec<f64>, source: impl Into<String>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::DegenerateData(format!("cell {cell_id} has no samples")));
        }
        if let Some((i, a)) = amplitudes
            .iter()
            .enumerate()
            .find(|(_, a)| !(a.is_finite() && **a >= 0.0))
        {
            return Err(Error::DegenerateData(format!(
                "cell {cell_id}: sample {i} is {a}, amplitudes must be finite and >= 0"
            )));
        }
        Ok(SampleSet {
            cell_id,
            label,
            amplitudes,
            source: source.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.amplitudes.iter().sum::<f64>() / self.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub cells: Vec<SampleSet>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, cells: Vec<SampleSet>) -> Result<Self> {
        let mut seen = HashMap::new();
        for c in &cells {
            if seen.insert(c.cell_id, ()).is_some() {
                return Err(Error::Schema(format!("duplicate cell id {}", c.cell_id)));
            }
        }
        let primaries = cells.iter().filter(|c| c.label == CellLabel::Primary).count();
        if primaries > 1 {
            return Err(Error::Schema(format!("{primaries} primary cells, at most one allowed")));
        }
        Ok(Dataset {
            name: name.into(),
            cells,
        })
    }

    pub fn primary(&self) -> Option<&SampleSet> {
        self.cells.iter().find(|c| c.label == CellLabel::Primary)
    }

    pub fn clutter_cells(&self) -> impl Iterator<Item = &SampleSet> {
        self.cells.iter().filter(|c| c.label == CellLabel::ClutterOnly)
    }

    /// All clutter-only amplitudes, concatenated in cell order.
    pub fn clutter_amplitudes(&self) -> Vec<f64> {
        self.clutter_cells()
            .flat_map(|c| c.amplitudes.iter().copied())
            .collect()
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::from_csv_str(&text, &name, &path.display().to_string())
    }

    /// Parses the CSV text; `origin` names the input in error messages and
    /// becomes each cell's `source`.
    pub fn from_csv_str(text: &str, name: &str, origin: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut records = reader.records();

        let header = match records.next() {
            None => return Err(Error::Schema(format!("{origin}: empty file, expected header"))),
            Some(r) => r.map_err(|e| parse_error(origin, 1, e.to_string()))?,
        };
        if header.iter().collect::<Vec<_>>() != CSV_HEADER {
            return Err(Error::Schema(format!(
                "{origin}: header must be `{}`, got `{}`",
                CSV_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }

        let mut order: Vec<u64> = Vec::new();
        let mut cells: HashMap<u64, (CellLabel, Vec<f64>)> = HashMap::new();
        for record in records {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line() as usize);
                parse_error(origin, line, e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            if record.len() == 1 && record[0].is_empty() {
                continue;
            }
            if record.len() != 3 {
                return Err(parse_error(
                    origin,
                    line,
                    format!("expected 3 fields, got {}", record.len()),
                ));
            }
            let cell_id: u64 = record[0]
                .parse()
                .map_err(|_| parse_error(origin, line, format!("bad cell_id `{}`", &record[0])))?;
            let label: CellLabel = record[1].parse().map_err(|e| match e {
                Error::Schema(msg) => Error::Schema(format!("{origin}:{line}: {msg}")),
                other => other,
            })?;
            let amplitude: f64 = record[2]
                .parse()
                .map_err(|_| parse_error(origin, line, format!("bad amplitude `{}`", &record[2])))?;
            if !(amplitude.is_finite() && amplitude >= 0.0) {
                return Err(parse_error(
                    origin,
                    line,
                    format!("amplitude {amplitude} must be finite and >= 0"),
                ));
            }
            let entry = cells.entry(cell_id).or_insert_with(|| {
                order.push(cell_id);
                (label, Vec::new())
            });
            if entry.0 != label {
                return Err(Error::Schema(format!(
                    "{origin}:{line}: cell {cell_id} labeled both `{}` and `{label}`",
                    entry.0
                )));
            }
            entry.1.push(amplitude);
        }
        if order.is_empty() {
            return Err(Error::Schema(format!("{origin}: no data rows")));
        }
        let sets = order
            .into_iter()
            .map(|id| {
                let (label, amps) = cells.remove(&id).expect("cell recorded in order");
                SampleSet::new(id, label, amps, origin)
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(name, sets)
    }

    /// CSV text; amplitudes use the shortest representation that parses back
    /// to the same `f64`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(16 * self.cells.iter().map(SampleSet::len).sum::<usize>());
        out.push_str(&CSV_HEADER.join(","));
        out.push('\n');
        for cell in &self.cells {
            for a in &cell.amplitudes {
                out.push_str(&format!("{},{},{}\n", cell.cell_id, cell.label, a));
            }
        }
        out
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }
}

fn parse_error(origin: &str, line: usize, msg: String) -> Error {
    Error::Parse {
        path: origin.to_string(),
        line,
        msg,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Divide by the largest amplitude.
    #[default]
    MaxAbs,
    /// Divide by the root mean square amplitude.
    RootMeanSquare,
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "max-abs" | "maxabs" | "max" => Ok(Normalization::MaxAbs),
            "rms" | "root-mean-square" => Ok(Normalization::RootMeanSquare),
            other => Err(Error::Config(format!("unknown normalization `{other}`"))),
        }
    }
}

fn scale_of(amplitudes: &[f64], mode: Normalization) -> Result<f64> {
    let scale = match mode {
        Normalization::MaxAbs => amplitudes.iter().fold(0.0f64, |m, &a| m.max(a)),
        Normalization::RootMeanSquare => {
            (amplitudes.iter().map(|a| a * a).sum::<f64>() / amplitudes.len() as f64).sqrt()
        }
    };
    if scale > 0.0 && scale.is_finite() {
        Ok(scale)
    } else {
        Err(Error::DegenerateData(format!("cannot normalize: scale is {scale}")))
    }
}

/// Rescales a cell so its maximum (or RMS) amplitude is 1.
pub fn normalize(set: &SampleSet, mode: Normalization) -> Result<SampleSet> {
    let scale = scale_of(&set.amplitudes, mode).map_err(|e| match e {
        Error::DegenerateData(m) => Error::DegenerateData(format!("cell {}: {m}", set.cell_id)),
        other => other,
    })?;
    Ok(SampleSet {
        amplitudes: set.amplitudes.iter().map(|a| a / scale).collect(),
        ..set.clone()
    })
}

/// Rescales every cell by one common factor taken from the pooled
/// clutter-only cells (all cells if there are none), so target and clutter
/// amplitudes stay comparable.
pub fn normalize_dataset(data: &Dataset, mode: Normalization) -> Result<Dataset> {
    let mut pooled = data.clutter_amplitudes();
    if pooled.is_empty() {
        pooled = data.cells.iter().flat_map(|c| c.amplitudes.iter().copied()).collect();
    }
    let scale = scale_of(&pooled, mode)?;
    Ok(Dataset {
        name: data.name.clone(),
        cells: data
            .cells
            .iter()
            .map(|c| SampleSet {
                amplitudes: c.amplitudes.iter().map(|a| a / scale).collect(),
                ..c.clone()
            })
            .collect(),
    })
}
