use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{PipelineError, Result};
use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Categorical,
    Numeric,
    Target,
    Id,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
}

impl ColumnSpec {
    pub fn new(name: &str, kind: ColumnKind) -> Self {
        Self { name: name.to_string(), kind }
    }
}

/// Column layout of an input CSV. Exactly one column must be the target;
/// rows whose target equals `positive_label` get label 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<ColumnSpec>,
    pub positive_label: String,
}

impl Schema {
    /// The public Telco customer churn layout.
    pub fn telco() -> Self {
        use ColumnKind::*;
        let cols = [
            ("customerID", Id),
            ("gender", Categorical),
            ("SeniorCitizen", Categorical),
            ("Partner", Categorical),
            ("Dependents", Categorical),
            ("tenure", Numeric),
            ("PhoneService", Categorical),
            ("MultipleLines", Categorical),
            ("InternetService", Categorical),
            ("OnlineSecurity", Categorical),
            ("OnlineBackup", Categorical),
            ("DeviceProtection", Categorical),
            ("TechSupport", Categorical),
            ("StreamingTV", Categorical),
            ("StreamingMovies", Categorical),
            ("Contract", Categorical),
            ("PaperlessBilling", Categorical),
            ("PaymentMethod", Categorical),
            ("MonthlyCharges", Numeric),
            ("TotalCharges", Numeric),
            ("Churn", Target),
        ];
        Self {
            columns: cols.iter().map(|&(n, k)| ColumnSpec::new(n, k)).collect(),
            positive_label: "Yes".to_string(),
        }
    }

    pub fn target(&self) -> Result<&ColumnSpec> {
        let mut targets = self.columns.iter().filter(|c| c.kind == ColumnKind::Target);
        match (targets.next(), targets.next()) {
            (Some(t), None) => Ok(t),
            _ => Err(PipelineError::BadSchema("schema needs exactly one target column".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ColumnData {
    Text(Vec<String>),
    Numeric(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    pub data: ColumnData,
}

impl Column {
    pub fn numeric(&self) -> Option<&[f64]> {
        match &self.data {
            ColumnData::Numeric(v) => Some(v),
            ColumnData::Text(_) => None,
        }
    }

    pub fn text(&self) -> Option<&[String]> {
        match &self.data {
            ColumnData::Text(v) => Some(v),
            ColumnData::Numeric(_) => None,
        }
    }

    /// Distinct values in first-appearance order.
    pub fn categories(&self) -> Vec<String> {
        let mut seen = Vec::new();
        if let Some(values) = self.text() {
            for v in values {
                if !seen.contains(v) {
                    seen.push(v.clone());
                }
            }
        }
        seen
    }
}

/// Typed table. Columns follow schema order regardless of file order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub columns: Vec<Column>,
    pub rows: usize,
    pub positive_label: String,
    /// Blank numeric cells per column, read as 0.
    pub blank_numeric: Vec<(String, usize)>,
}

pub fn load_csv(path: &Path, schema: &Schema) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| PipelineError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    read_csv(file, schema)
}

/// Parses CSV text with a header row against `schema`.
pub fn read_csv<R: Read>(reader: R, schema: &Schema) -> Result<Dataset> {
    schema.target()?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| PipelineError::Csv(e.to_string()))?.clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(PipelineError::EmptyFile);
    }
    let positions: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h.trim(), i)).collect();
    let mut layout = Vec::with_capacity(schema.columns.len());
    for spec in &schema.columns {
        let pos = *positions
            .get(spec.name.as_str())
            .ok_or_else(|| PipelineError::MissingColumn(spec.name.clone()))?;
        layout.push(pos);
    }

    let mut text: Vec<Vec<String>> = vec![Vec::new(); schema.columns.len()];
    let mut nums: Vec<Vec<f64>> = vec![Vec::new(); schema.columns.len()];
    let mut blanks = vec![0usize; schema.columns.len()];
    let mut rows = 0;
    for (r, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| PipelineError::Csv(e.to_string()))?;
        for (c, (spec, &pos)) in schema.columns.iter().zip(&layout).enumerate() {
            let cell = record.get(pos).unwrap_or("").trim();
            if spec.kind == ColumnKind::Numeric {
                if cell.is_empty() {
                    blanks[c] += 1;
                    nums[c].push(0.0);
                } else {
                    let v: f64 = cell.parse().map_err(|_| PipelineError::UnparsableCell {
                        row: r,
                        column: spec.name.clone(),
                        value: cell.to_string(),
                    })?;
                    if !v.is_finite() {
                        return Err(PipelineError::UnparsableCell {
                            row: r,
                            column: spec.name.clone(),
                            value: cell.to_string(),
                        });
                    }
                    nums[c].push(v);
                }
            } else {
                text[c].push(cell.to_string());
            }
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(PipelineError::EmptyFile);
    }

    let columns = schema
        .columns
        .iter()
        .zip(text.into_iter().zip(nums))
        .map(|(spec, (t, n))| Column {
            name: spec.name.clone(),
            kind: spec.kind,
            data: if spec.kind == ColumnKind::Numeric {
                ColumnData::Numeric(n)
            } else {
                ColumnData::Text(t)
            },
        })
        .collect();
    let blank_numeric = schema
        .columns
        .iter()
        .zip(blanks)
        .filter(|(_, b)| *b > 0)
        .map(|(s, b)| (s.name.clone(), b))
        .collect();
    Ok(Dataset {
        columns,
        rows,
        positive_label: schema.positive_label.clone(),
        blank_numeric,
    })
}

impl Dataset {
    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn without_column(&self, name: &str) -> Self {
        let mut out = self.clone();
        out.columns.retain(|c| c.name != name);
        out
    }

    /// Feature columns: everything except id and target.
    pub fn feature_columns(&self) -> impl Iterator<Item = &Column> {
        self.columns
            .iter()
            .filter(|c| matches!(c.kind, ColumnKind::Categorical | ColumnKind::Numeric))
    }

    pub fn labels(&self) -> Result<Vec<u8>> {
        let target = self
            .columns
            .iter()
            .find(|c| c.kind == ColumnKind::Target)
            .ok_or_else(|| PipelineError::BadSchema("dataset has no target column".into()))?;
        let values = target.text().expect("target columns hold text");
        Ok(values.iter().map(|v| u8::from(*v == self.positive_label)).collect())
    }

    /// Numeric view of all feature columns: numeric columns as is,
    /// categorical columns as first-appearance category codes (binary
    /// columns become 0/1).
    pub fn numeric_encode(&self) -> Result<FeatureMatrix> {
        let cols: Vec<(String, Vec<f64>)> = self
            .feature_columns()
            .map(|c| match &c.data {
                ColumnData::Numeric(v) => (c.name.clone(), v.clone()),
                ColumnData::Text(v) => {
                    let cats = c.categories();
                    let codes = v
                        .iter()
                        .map(|s| cats.iter().position(|x| x == s).unwrap_or(0) as f64)
                        .collect();
                    (c.name.clone(), codes)
                }
            })
            .collect();
        self.assemble(cols)
    }

    /// Indicator columns for each listed categorical column, one per category
    /// in first-appearance order; numeric columns pass through.
    pub fn one_hot(&self, columns: &[String]) -> Result<FeatureMatrix> {
        for name in columns {
            let col = self.column(name).ok_or_else(|| PipelineError::UnknownColumn(name.clone()))?;
            if col.kind != ColumnKind::Categorical {
                return Err(PipelineError::NotCategorical(name.clone()));
            }
        }
        let mut out = Vec::new();
        for c in self.feature_columns() {
            match &c.data {
                ColumnData::Numeric(v) => out.push((c.name.clone(), v.clone())),
                ColumnData::Text(v) => {
                    if !columns.contains(&c.name) {
                        return Err(PipelineError::NotCategorical(format!(
                            "{} is categorical but not listed for one-hot encoding",
                            c.name
                        )));
                    }
                    for cat in c.categories() {
                        let ind = v.iter().map(|s| f64::from(u8::from(*s == cat))).collect();
                        out.push((format!("{}={}", c.name, cat), ind));
                    }
                }
            }
        }
        self.assemble(out)
    }

    /// Names of all categorical feature columns.
    pub fn categorical_names(&self) -> Vec<String> {
        self.columns
            .iter()
            .filter(|c| c.kind == ColumnKind::Categorical)
            .map(|c| c.name.clone())
            .collect()
    }

    fn assemble(&self, cols: Vec<(String, Vec<f64>)>) -> Result<FeatureMatrix> {
        let d = cols.len();
        let mut data = vec![0.0; self.rows * d];
        for (j, (_, v)) in cols.iter().enumerate() {
            for (i, &x) in v.iter().enumerate() {
                data[i * d + j] = x;
            }
        }
        let names = cols.into_iter().map(|(n, _)| n).collect();
        Ok(FeatureMatrix::new(self.rows, d, data, names, self.labels()?)?)
    }
}
