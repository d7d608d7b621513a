//! Input/target datasets and their CSV form.
//!
//! CSV layout: a header row `x1,..,xn,y` for convex data or `z1,..,zn,w` for
//! log-log data, followed by one row per sample. UTF-8, `.` as the decimal
//! separator. Row numbers in errors count data rows from 1.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which space the data lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    /// Inputs `x ∈ ℝⁿ`, targets `y ∈ ℝ`, fitted by LSE models.
    Convex,
    /// Inputs `z > 0`, targets `w > 0`, fitted by GPOS models.
    LogLog,
}

impl Space {
    fn input_prefix(self) -> char {
        match self {
            Space::Convex => 'x',
            Space::LogLog => 'z',
        }
    }

    fn target_name(self) -> &'static str {
        match self {
            Space::Convex => "y",
            Space::LogLog => "w",
        }
    }
}

impl std::str::FromStr for Space {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "convex" => Ok(Space::Convex),
            "loglog" => Ok(Space::LogLog),
            other => Err(Error::input(format!("unknown space {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    inputs: Vec<f64>,
    targets: Vec<f64>,
    space: Space,
}

impl Dataset {
    /// Builds a dataset from row-major inputs.
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<f64>, space: Space) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::input("dataset is empty"));
        }
        Error::check_dim(inputs.len(), targets.len())?;
        let dim = inputs[0].len();
        if dim == 0 {
            return Err(Error::input("dataset inputs have zero columns"));
        }
        let mut flat = Vec::with_capacity(dim * inputs.len());
        for row in &inputs {
            Error::check_dim(dim, row.len())?;
            flat.extend_from_slice(row);
        }
        Self::from_flat(dim, flat, targets, space)
    }

    pub(crate) fn from_flat(
        dim: usize,
        inputs: Vec<f64>,
        targets: Vec<f64>,
        space: Space,
    ) -> Result<Self> {
        let data = Self {
            dim,
            inputs,
            targets,
            space,
        };
        for i in 0..data.len() {
            data.validate_row(i)?;
        }
        Ok(data)
    }

    fn validate_row(&self, i: usize) -> Result<()> {
        let row = self.input(i);
        let y = self.targets[i];
        if row
            .iter()
            .chain(std::iter::once(&y))
            .any(|v| !v.is_finite())
        {
            return Err(Error::Schema {
                row: Some(i + 1),
                message: "non-finite value".into(),
            });
        }
        if self.space == Space::LogLog && row.iter().chain(std::iter::once(&y)).any(|v| *v <= 0.0) {
            return Err(Error::Input(format!(
                "row {}: log-log data must be strictly positive",
                i + 1
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn inputs(&self) -> impl Iterator<Item = &[f64]> {
        self.inputs.chunks_exact(self.dim)
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// The rows at `indices`, in order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::input("selection is empty"));
        }
        let mut inputs = Vec::with_capacity(indices.len() * self.dim);
        let mut targets = Vec::with_capacity(indices.len());
        for &i in indices {
            inputs.extend_from_slice(self.input(i));
            targets.push(self.targets[i]);
        }
        Ok(Self {
            dim: self.dim,
            inputs,
            targets,
            space: self.space,
        })
    }

    /// Entry-wise log of inputs and targets; log-log data becomes convex data.
    pub fn log_transform(&self) -> Result<Self> {
        if self.space != Space::LogLog {
            return Err(Error::input("log transform needs log-log data"));
        }
        Ok(Self {
            dim: self.dim,
            inputs: self.inputs.iter().map(|v| v.ln()).collect(),
            targets: self.targets.iter().map(|v| v.ln()).collect(),
            space: Space::Convex,
        })
    }

    /// Inputs and targets divided by `divisor` (the temperature pre-scaling).
    pub fn scaled_down(&self, divisor: f64) -> Self {
        Self {
            dim: self.dim,
            inputs: self.inputs.iter().map(|v| v / divisor).collect(),
            targets: self.targets.iter().map(|v| v / divisor).collect(),
            space: self.space,
        }
    }

    /// Reinterprets the same numbers in another space, revalidating.
    pub fn with_space(self, space: Space) -> Result<Self> {
        Self::from_flat(self.dim, self.inputs, self.targets, space)
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers().map_err(csv_schema)?.clone();
        let (space, dim) = parse_header(&headers)?;

        let mut inputs = Vec::new();
        let mut targets = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let row = i + 1;
            let record = record.map_err(|e| Error::Schema {
                row: Some(row),
                message: e.to_string(),
            })?;
            if record.len() != dim + 1 {
                return Err(Error::Schema {
                    row: Some(row),
                    message: format!("expected {} fields, found {}", dim + 1, record.len()),
                });
            }
            for (j, field) in record.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| Error::Schema {
                    row: Some(row),
                    message: format!("column {}: cannot parse {field:?} as a number", j + 1),
                })?;
                if j < dim {
                    inputs.push(v);
                } else {
                    targets.push(v);
                }
            }
        }
        if targets.is_empty() {
            return Err(Error::Schema {
                row: None,
                message: "no data rows".into(),
            });
        }
        Self::from_flat(dim, inputs, targets, space)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.dim)
            .map(|j| format!("{}{j}", self.space.input_prefix()))
            .collect();
        header.push(self.space.target_name().to_string());
        wtr.write_record(&header).map_err(csv_io)?;
        for (x, y) in self.inputs().zip(&self.targets) {
            let fields: Vec<String> = x
                .iter()
                .chain(std::iter::once(y))
                .map(|v| format!("{v:?}"))
                .collect();
            wtr.write_record(&fields).map_err(csv_io)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

fn parse_header(headers: &csv::StringRecord) -> Result<(Space, usize)> {
    let bad = |message: String| Error::Schema { row: None, message };
    if headers.len() < 2 {
        return Err(bad(
            "header needs at least one input column and a target".into()
        ));
    }
    let target = &headers[headers.len() - 1];
    let space = match target {
        "y" => Space::Convex,
        "w" => Space::LogLog,
        other => return Err(bad(format!("last column must be y or w, found {other:?}"))),
    };
    let dim = headers.len() - 1;
    for (j, name) in headers.iter().take(dim).enumerate() {
        let expected = format!("{}{}", space.input_prefix(), j + 1);
        if name != expected {
            return Err(bad(format!(
                "column {} should be {expected}, found {name:?}",
                j + 1
            )));
        }
    }
    Ok((space, dim))
}

fn csv_schema(e: csv::Error) -> Error {
    Error::Schema {
        row: None,
        message: e.to_string(),
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
