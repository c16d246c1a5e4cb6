use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Test error rates of several models on several datasets, plus each
/// dataset's class count.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultsTable {
    pub models: Vec<String>,
    pub datasets: Vec<String>,
    /// `errors[d][m]`: error of model `m` on dataset `d`.
    pub errors: Vec<Vec<f64>>,
    pub classes: Vec<usize>,
}

impl ResultsTable {
    pub fn new(
        models: Vec<String>,
        datasets: Vec<String>,
        errors: Vec<Vec<f64>>,
        classes: Vec<usize>,
    ) -> Result<Self> {
        if models.is_empty() || datasets.is_empty() {
            return Err(Error::data("results table needs at least one model and one dataset"));
        }
        if errors.len() != datasets.len() || classes.len() != datasets.len() {
            return Err(Error::data("results table rows do not match the dataset list"));
        }
        for (d, row) in errors.iter().enumerate() {
            if row.len() != models.len() {
                return Err(Error::data(format!("{}: {} errors for {} models", datasets[d], row.len(), models.len())));
            }
            if let Some(e) = row.iter().find(|e| !(0.0..=1.0).contains(*e)) {
                return Err(Error::data(format!("{}: error rate {e} outside [0, 1]", datasets[d])));
            }
            if classes[d] < 2 {
                return Err(Error::data(format!("{}: class count {} below 2", datasets[d], classes[d])));
            }
        }
        Ok(ResultsTable { models, datasets, errors, classes })
    }

    /// Parses a results CSV (header `dataset,<model>...`) and a class-count
    /// CSV with a `classes` column keyed by `dataset` or `name`.
    pub fn parse(results_csv: &str, results_name: &str, classes_csv: &str, classes_name: &str) -> Result<Self> {
        let counts = parse_class_counts(classes_csv, classes_name)?;
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(results_csv.as_bytes());
        let header = reader.headers()?.clone();
        if header.len() < 2 {
            return Err(Error::Parse {
                source_name: results_name.into(),
                line: 1,
                message: "need a dataset column and at least one model column".into(),
            });
        }
        let models: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut datasets = Vec::new();
        let mut errors = Vec::new();
        let mut classes = Vec::new();
        for record in reader.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let err = |message: String| Error::Parse {
                source_name: results_name.into(),
                line,
                message,
            };
            if record.len() != header.len() {
                return Err(err(format!("{} fields, header has {}", record.len(), header.len())));
            }
            let name = record[0].to_string();
            let row = record
                .iter()
                .skip(1)
                .zip(&models)
                .map(|(f, m)| {
                    if f.is_empty() {
                        return Err(err(format!("missing value for {m}")));
                    }
                    f.parse::<f64>().map_err(|_| err(format!("non-numeric value '{f}' for {m}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let c = *counts
                .get(&name)
                .ok_or_else(|| err(format!("no class count for dataset {name} in {classes_name}")))?;
            datasets.push(name);
            errors.push(row);
            classes.push(c);
        }
        ResultsTable::new(models, datasets, errors, classes)
    }

    pub fn load(results: &Path, classes: &Path) -> Result<Self> {
        let read = |p: &Path| fs::read_to_string(p).map_err(|e| Error::io(p, e));
        ResultsTable::parse(
            &read(results)?,
            &results.display().to_string(),
            &read(classes)?,
            &classes.display().to_string(),
        )
    }

    /// The bundled 44-dataset, 11-model fixture.
    pub fn bundled() -> Self {
        ResultsTable::parse(super::BUNDLED_RESULTS_CSV, "bundled_results.csv", super::UCR_CLASSES_CSV, "ucr_classes.csv")
            .expect("bundled fixture parses")
    }

    pub fn model_index(&self, name: &str) -> Result<usize> {
        self.models
            .iter()
            .position(|m| m == name)
            .ok_or_else(|| Error::invalid(format!("unknown model {name}")))
    }

    /// Error column of one model.
    pub fn column(&self, model: usize) -> Vec<f64> {
        self.errors.iter().map(|row| row[model]).collect()
    }
}

pub fn parse_class_counts(text: &str, source_name: &str) -> Result<HashMap<String, usize>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    let key = header
        .iter()
        .position(|h| h == "dataset")
        .or_else(|| header.iter().position(|h| h == "name"));
    let value = header.iter().position(|h| h == "classes");
    let (Some(key), Some(value)) = (key, value) else {
        return Err(Error::Parse {
            source_name: source_name.into(),
            line: 1,
            message: "header needs a dataset (or name) column and a classes column".into(),
        });
    };
    let mut out = HashMap::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let c: usize = record.get(value).unwrap_or("").parse().map_err(|_| Error::Parse {
            source_name: source_name.into(),
            line,
            message: format!("bad class count '{}'", record.get(value).unwrap_or("")),
        })?;
        out.insert(record.get(key).unwrap_or("").to_string(), c);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_fixture_shape() {
        let t = ResultsTable::bundled();
        assert_eq!(t.models.len(), 11);
        assert_eq!(t.datasets.len(), 44);
        assert_eq!(t.models[9], "FCN");
    }

    #[test]
    fn parse_errors_name_the_line() {
        let meta = "dataset,classes\na,2\nb,3\n";
        let e = ResultsTable::parse("dataset,M1,M2\na,0.1,0.2\nb,0.1,x\n", "r.csv", meta, "m.csv").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        let e = ResultsTable::parse("dataset,M1,M2\na,0.1,\n", "r.csv", meta, "m.csv").unwrap_err();
        assert!(e.to_string().contains("missing value"), "{e}");
        let e = ResultsTable::parse("dataset,M1\nc,0.1\n", "r.csv", meta, "m.csv").unwrap_err();
        assert!(e.to_string().contains("no class count"), "{e}");
        assert!(ResultsTable::parse("dataset,M1\na,1.5\n", "r.csv", meta, "m.csv").is_err());
        assert!(ResultsTable::parse("dataset,M1\na,0.5\n", "r.csv", "dataset,classes\na,1\n", "m.csv").is_err());
    }

    #[test]
    fn metadata_accepts_name_key() {
        let m = parse_class_counts("dataset,name,classes\nx,Coffee,2\n", "m").unwrap();
        assert_eq!(m.get("x"), Some(&2));
        let m = parse_class_counts("name,classes\nCoffee,2\n", "m").unwrap();
        assert_eq!(m.get("Coffee"), Some(&2));
    }
}
