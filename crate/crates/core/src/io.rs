//! Text formats: `.t3` tensors, CSV matrices, and model directories.

use std::fs;
use std::path::Path;

use crate::error::{HopcaError, Result};
use crate::model::{CpModel, Diagnostics, FittedModel, TuckerModel};
use crate::tensor::{Matrix, Mode, Tensor3};

/// Serializes a tensor: a `tensor3 n p q` header line followed by the values
/// in storage order (mode 1 fastest), one per line, with 17 significant
/// digits.
pub fn format_t3(x: &Tensor3) -> String {
    let [n, p, q] = x.dims();
    let mut out = String::with_capacity(24 * x.len() + 32);
    out.push_str(&format!("tensor3 {n} {p} {q}\n"));
    for v in x.as_slice() {
        out.push_str(&format!("{v:.16e}\n"));
    }
    out
}

pub fn parse_t3(text: &str) -> Result<Tensor3> {
    let mut tokens = text.split_whitespace();
    if tokens.next() != Some("tensor3") {
        return Err(HopcaError::Parse("missing `tensor3` header".into()));
    }
    let mut dims = [0usize; 3];
    for d in dims.iter_mut() {
        let t = tokens.next().ok_or_else(|| HopcaError::Parse("header needs three dimensions".into()))?;
        *d = t.parse().map_err(|_| HopcaError::Parse(format!("bad dimension `{t}`")))?;
    }
    let data = tokens
        .map(|t| t.parse::<f64>().map_err(|_| HopcaError::Parse(format!("bad value `{t}`"))))
        .collect::<Result<Vec<f64>>>()?;
    let expected = dims.iter().product::<usize>();
    if data.len() != expected {
        return Err(HopcaError::Parse(format!("expected {expected} values, found {}", data.len())));
    }
    Tensor3::new(dims, data)
}

pub fn read_t3(path: impl AsRef<Path>) -> Result<Tensor3> {
    parse_t3(&fs::read_to_string(path)?)
}

pub fn write_t3(path: impl AsRef<Path>, x: &Tensor3) -> Result<()> {
    fs::write(path, format_t3(x))?;
    Ok(())
}

/// Reads a dense headerless CSV matrix.
pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<Matrix> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row = record
            .iter()
            .map(|t| t.parse::<f64>().map_err(|_| HopcaError::Parse(format!("bad value `{t}`"))))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(HopcaError::Parse(format!("ragged CSV: {} vs {} columns", first.len(), row.len())));
            }
        }
        rows.push(row);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    Ok(Matrix::from_fn(rows.len(), ncols, |r, c| rows[r][c]))
}

pub fn write_matrix_csv(path: impl AsRef<Path>, m: &Matrix) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for r in 0..m.nrows() {
        w.write_record(m.row(r).iter().map(|v| format!("{v:.16e}")))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a CSV with a header row.
pub fn write_csv<I, R>(path: impl AsRef<Path>, header: &[&str], records: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in records {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

const FACTOR_FILES: [&str; 3] = ["U.csv", "V.csv", "W.csv"];
const SUPPORT_FILES: [&str; 3] = ["support_u.csv", "support_v.csv", "support_w.csv"];

/// Writes factors, weights or core, support masks, diagnostics and traces
/// into `dir` (created if needed).
pub fn save_model(dir: impl AsRef<Path>, model: &FittedModel, diag: &Diagnostics) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    for m in Mode::ALL {
        let f = model.factor(m);
        write_matrix_csv(dir.join(FACTOR_FILES[m.index()]), f)?;
        write_matrix_csv(dir.join(SUPPORT_FILES[m.index()]), &f.map(|v| if v != 0.0 { 1.0 } else { 0.0 }))?;
    }
    match model {
        FittedModel::Cp(cp) => {
            let d = Matrix::from_column_slice(cp.k(), 1, &cp.d);
            write_matrix_csv(dir.join("d.csv"), &d)?;
        }
        FittedModel::Tucker(t) => write_t3(dir.join("core.t3"), &t.core)?,
    }
    fs::write(dir.join("diagnostics.txt"), diag.to_key_values())?;
    let mut rows = Vec::new();
    for (i, v) in diag.trace.iter().enumerate() {
        rows.push(["0".to_string(), (i + 1).to_string(), format!("{v:.16e}")]);
    }
    for c in &diag.components {
        for (i, v) in c.trace.iter().enumerate() {
            rows.push([(c.order + 1).to_string(), (i + 1).to_string(), format!("{v:.16e}")]);
        }
    }
    write_csv(dir.join("trace.csv"), &["component", "update", "objective"], rows)
}

/// Reads a directory written by [`save_model`].
pub fn load_model(dir: impl AsRef<Path>) -> Result<FittedModel> {
    let dir = dir.as_ref();
    let [u, v, w] = FACTOR_FILES.map(|f| read_matrix_csv(dir.join(f)));
    let (u, v, w) = (u?, v?, w?);
    let core_path = dir.join("core.t3");
    if core_path.exists() {
        let core = read_t3(core_path)?;
        if core.dims() != [u.ncols(), v.ncols(), w.ncols()] {
            return Err(HopcaError::dim("core shape does not match factor ranks"));
        }
        Ok(FittedModel::Tucker(TuckerModel { u, v, w, core }))
    } else {
        let d = read_matrix_csv(dir.join("d.csv"))?;
        Ok(FittedModel::Cp(CpModel::new(u, v, w, d.iter().copied().collect())?))
    }
}
