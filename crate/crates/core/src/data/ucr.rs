use std::fs;
use std::path::{Path, PathBuf};

use super::{DatasetSplit, Labeled};
use crate::error::{Error, Result};
use crate::numerics::Tensor;

struct RawSplit {
    labels: Vec<f64>,
    values: Vec<f64>,
    rows: usize,
    len: usize,
}

/// Parses one UCR text file: one series per line, label first. Fields are
/// comma-separated when the first data line contains a comma, otherwise
/// whitespace-separated.
fn parse_split(text: &str, source_name: &str) -> Result<RawSplit> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .peekable();
    let comma = lines.peek().map(|(_, l)| l.contains(',')).unwrap_or(false);
    let mut out = RawSplit {
        labels: Vec::new(),
        values: Vec::new(),
        rows: 0,
        len: 0,
    };
    for (idx, line) in lines {
        let lineno = idx + 1;
        let err = |message: String| Error::Parse {
            source_name: source_name.to_string(),
            line: lineno,
            message,
        };
        let fields: Vec<&str> = if comma {
            line.split(',').map(str::trim).collect()
        } else {
            line.split_whitespace().collect()
        };
        if fields.len() < 2 {
            return Err(err("need a label and at least one value".into()));
        }
        let mut parsed = Vec::with_capacity(fields.len());
        for f in &fields {
            let v: f64 = f
                .parse()
                .map_err(|_| err(format!("non-numeric field '{f}'")))?;
            if !v.is_finite() {
                return Err(err(format!("missing or non-finite value '{f}'")));
            }
            parsed.push(v);
        }
        let len = parsed.len() - 1;
        if out.rows == 0 {
            out.len = len;
        } else if len != out.len {
            return Err(err(format!("ragged row: {len} values, expected {}", out.len)));
        }
        out.labels.push(parsed[0]);
        out.values.extend_from_slice(&parsed[1..]);
        out.rows += 1;
    }
    if out.rows == 0 {
        return Err(Error::data(format!("{source_name}: no series")));
    }
    Ok(out)
}

/// Builds a split from the text of the two UCR files, remapping labels to
/// `0..C` by ascending original value.
pub fn parse_ucr(name: &str, train_text: &str, test_text: &str) -> Result<DatasetSplit> {
    let train = parse_split(train_text, &format!("{name}_TRAIN"))?;
    let test = parse_split(test_text, &format!("{name}_TEST"))?;
    if train.len != test.len {
        return Err(Error::data(format!(
            "{name}: train series have length {}, test series {}",
            train.len, test.len
        )));
    }
    let mut label_values = train.labels.clone();
    label_values.sort_by(f64::total_cmp);
    label_values.dedup();
    if label_values.len() < 2 {
        return Err(Error::data(format!(
            "{name}: training split has a single class"
        )));
    }
    let remap = |labels: &[f64], which: &str| -> Result<Vec<usize>> {
        labels
            .iter()
            .map(|l| {
                label_values
                    .iter()
                    .position(|v| v == l)
                    .ok_or_else(|| Error::data(format!("{name}: {which} label {l} not present in training split")))
            })
            .collect()
    };
    Ok(DatasetSplit {
        name: name.to_string(),
        train: Labeled {
            labels: remap(&train.labels, "test")?,
            series: Tensor::new(vec![train.rows, train.len], train.values)?,
        },
        test: Labeled {
            labels: remap(&test.labels, "test")?,
            series: Tensor::new(vec![test.rows, test.len], test.values)?,
        },
        classes: label_values.len(),
        label_values,
        normalization: None,
    })
}

/// Locates `<name>_TRAIN` / `<name>_TEST` (optionally with `.txt`, `.tsv`
/// or `.csv`), directly in `dir` or in `dir/<name>/`.
pub fn ucr_paths(dir: &Path, name: &str) -> Result<(PathBuf, PathBuf)> {
    let find = |suffix: &str| -> Option<PathBuf> {
        for base in [dir.to_path_buf(), dir.join(name)] {
            for ext in ["", ".txt", ".tsv", ".csv"] {
                let p = base.join(format!("{name}_{suffix}{ext}"));
                if p.is_file() {
                    return Some(p);
                }
            }
        }
        None
    };
    match (find("TRAIN"), find("TEST")) {
        (Some(tr), Some(te)) => Ok((tr, te)),
        (None, _) => Err(Error::data(format!("missing file {name}_TRAIN under {}", dir.display()))),
        (_, None) => Err(Error::data(format!("missing file {name}_TEST under {}", dir.display()))),
    }
}

pub fn load_ucr(dir: &Path, name: &str) -> Result<DatasetSplit> {
    let (train_path, test_path) = ucr_paths(dir, name)?;
    let read = |p: &Path| fs::read_to_string(p).map_err(|e| Error::io(p, e));
    parse_ucr(name, &read(&train_path)?, &read(&test_path)?)
}

fn format_label(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.16e}")
    }
}

fn write_split(path: &Path, part: &Labeled, label_values: &[f64]) -> Result<()> {
    let mut text = String::new();
    for (i, &label) in part.labels.iter().enumerate() {
        text.push_str(&format_label(label_values[label]));
        for v in part.series.row(i) {
            text.push(',');
            text.push_str(&format!("{v:.16e}"));
        }
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `<dir>/<name>_TRAIN` and `<dir>/<name>_TEST`, comma-separated,
/// values at 17 significant digits.
pub fn save_ucr(split: &DatasetSplit, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let train = dir.join(format!("{}_TRAIN", split.name));
    let test = dir.join(format!("{}_TEST", split.name));
    write_split(&train, &split.train, &split.label_values)?;
    write_split(&test, &split.test, &split.label_values)?;
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_label_remap() {
        let s = parse_ucr("x", "-1,0.5,0.3\n1,1,2\n", "1,0,0\n-1,2,2\n").unwrap();
        assert_eq!(s.train.labels, vec![0, 1]);
        assert_eq!(s.train.series.row(0), &[0.5, 0.3]);
        assert_eq!(s.test.labels, vec![1, 0]);
        assert_eq!(s.label_values, vec![-1.0, 1.0]);
    }

    #[test]
    fn whitespace_variant() {
        let s = parse_ucr("x", "  2.0000e+00   1.5  2.5\n 1.0 3 4\n", "1 0 0\n").unwrap();
        assert_eq!(s.classes, 2);
        assert_eq!(s.train.labels, vec![1, 0]);
        assert_eq!(s.train.series.row(0), &[1.5, 2.5]);
    }

    #[test]
    fn error_cases() {
        let ragged = parse_ucr("x", "1,1,2\n2,1\n", "1,0,0\n");
        assert!(matches!(ragged, Err(Error::Parse { line: 2, .. })));
        let bad = parse_ucr("x", "1,1,2\n2,a,3\n", "1,0,0\n");
        assert!(matches!(bad, Err(Error::Parse { line: 2, .. })));
        assert!(parse_ucr("x", "1,1,2\n1,3,4\n", "1,0,0\n").is_err());
        assert!(parse_ucr("x", "1,1,2\n2,3,4\n", "3,0,0\n").is_err());
        assert!(parse_ucr("x", "1,1,2\n2,3,4\n", "1,0,0,0\n").is_err());
        assert!(parse_ucr("x", "1,1,NaN\n2,3,4\n", "1,0,0\n").is_err());
    }

    #[test]
    fn missing_files() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_ucr(dir.path(), "Nope"), Err(Error::Data(_))));
    }
}
