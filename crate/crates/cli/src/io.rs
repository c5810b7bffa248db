//! Text and JSON file formats.
//!
//! Dictionary file: UTF-8, first line `d n`, then `d` rows of `n`
//! whitespace-separated decimal floats (row-major).
//!
//! Instance file: JSON `{d, n, m, support, x_star_values, generator, seed}`.
//!
//! Trace CSV: `k,i_k,gamma,residual_norm,x_l1,in_support`, floats with 12
//! significant digits.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use fwsparse_core::instances::SparseInstance;
use fwsparse_core::linalg::{norm_l2, Dictionary, Matrix, SupportSet, UNIT_NORM_TOL};
use fwsparse_core::solvers::SolveResult;
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

/// Columns whose norm is within this distance of 1 are renormalized on load;
/// anything further off is rejected.
pub const LOAD_NORM_TOL: f64 = 1e-8;

/// 12 significant digits.
pub fn fmt_csv_float(v: f64) -> String {
    format!("{v:.11e}")
}

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_full_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> HarnessError {
    HarnessError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

pub fn dictionary_to_string(dict: &Dictionary) -> String {
    let (d, n) = (dict.dim(), dict.n_atoms());
    let mut out = format!("{d} {n}\n");
    for i in 0..d {
        for j in 0..n {
            if j > 0 {
                out.push(' ');
            }
            out.push_str(&fmt_full_float(dict.matrix().get(i, j)));
        }
        out.push('\n');
    }
    out
}

pub fn parse_dictionary(text: &str, path: &Path) -> Result<Dictionary, HarnessError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (header_line, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file, expected header `d n`"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|e| parse_err(path, header_line, format!("bad header: {e}")))?;
    let [d, n] = dims[..] else {
        return Err(parse_err(path, header_line, "header must be exactly `d n`"));
    };
    if d == 0 || n == 0 {
        return Err(parse_err(path, header_line, "d and n must be positive"));
    }

    let mut data = Vec::with_capacity(d * n);
    let mut rows = 0;
    for (line_no, line) in lines {
        if rows == d {
            return Err(parse_err(
                path,
                line_no,
                format!("header declares {d} rows, found more"),
            ));
        }
        let before = data.len();
        for token in line.split_whitespace() {
            let v: f64 = token
                .parse()
                .map_err(|e| parse_err(path, line_no, format!("bad number `{token}`: {e}")))?;
            if !v.is_finite() {
                return Err(parse_err(
                    path,
                    line_no,
                    format!("non-finite value `{token}`"),
                ));
            }
            data.push(v);
        }
        if data.len() - before != n {
            return Err(parse_err(
                path,
                line_no,
                format!(
                    "header declares {n} columns, row has {}",
                    data.len() - before
                ),
            ));
        }
        rows += 1;
    }
    if rows != d {
        return Err(parse_err(
            path,
            0,
            format!("header declares {d} rows, found {rows}"),
        ));
    }

    let mut matrix = Matrix::from_row_major(d, n, &data)?
        .col_major_data()
        .to_vec();
    for (j, col) in matrix.chunks_exact_mut(d).enumerate() {
        let norm = norm_l2(col);
        if (norm - 1.0).abs() > LOAD_NORM_TOL {
            return Err(HarnessError::NonUnitColumn {
                path: path.to_path_buf(),
                column: j,
                norm,
            });
        }
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            col.iter_mut().for_each(|v| *v /= norm);
        }
    }
    Ok(Dictionary::new(Matrix::from_col_major(d, n, matrix)?)?)
}

pub fn load_dictionary(path: &Path) -> Result<Dictionary, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_dictionary(&text, path)
}

pub fn save_dictionary(dict: &Dictionary, path: &Path) -> Result<(), HarnessError> {
    write_file(path, dictionary_to_string(dict).as_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub support: Vec<usize>,
    pub x_star_values: Vec<f64>,
    pub generator: String,
    pub seed: u64,
}

impl InstanceFile {
    pub fn from_instance(
        dict: &Dictionary,
        instance: &SparseInstance,
        generator: &str,
        seed: u64,
    ) -> Self {
        InstanceFile {
            d: dict.dim(),
            n: dict.n_atoms(),
            m: instance.m(),
            support: instance.support.indices().to_vec(),
            x_star_values: instance.support_values(),
            generator: generator.to_string(),
            seed,
        }
    }

    /// Rebuilds `x*` and `y = Φx*` against `dict`.
    pub fn to_instance(
        &self,
        dict: &Dictionary,
        path: &Path,
    ) -> Result<SparseInstance, HarnessError> {
        if self.d != dict.dim() || self.n != dict.n_atoms() {
            return Err(HarnessError::Config(format!(
                "{}: instance is {}x{}, dictionary is {}x{}",
                path.display(),
                self.d,
                self.n,
                dict.dim(),
                dict.n_atoms()
            )));
        }
        if self.m != self.support.len() {
            return Err(HarnessError::Config(format!(
                "{}: m = {} but support has {} entries",
                path.display(),
                self.m,
                self.support.len()
            )));
        }
        let support = SupportSet::new(self.support.clone(), self.n)?;
        Ok(SparseInstance::from_parts(
            dict,
            support,
            &self.x_star_values,
        )?)
    }
}

pub fn load_instance_file(path: &Path) -> Result<InstanceFile, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::json(path, e))
}

pub fn save_json<T: Serialize>(value: &T, path: &Path) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::json(path, e))?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

pub const TRACE_HEADER: &str = "k,i_k,gamma,residual_norm,x_l1,in_support";

pub fn trace_to_csv(result: &SolveResult) -> String {
    let mut out = String::with_capacity(64 * (result.trace.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for rec in &result.trace {
        let in_support = match rec.in_support {
            Some(true) => "true",
            Some(false) => "false",
            None => "",
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            rec.k,
            rec.selected_atom,
            fmt_csv_float(rec.gamma),
            fmt_csv_float(rec.residual_norm),
            fmt_csv_float(rec.x_l1),
            in_support
        );
    }
    out
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    let mut f = fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    f.write_all(bytes).map_err(|e| HarnessError::io(path, e))
}

pub fn ensure_dir(path: &Path) -> Result<PathBuf, HarnessError> {
    fs::create_dir_all(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(path.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;
    use fwsparse_core::instances::{build_identity_hadamard, build_random_unit};

    fn p() -> &'static Path {
        Path::new("test.txt")
    }

    #[test]
    fn identity_round_trip() {
        let dict = Dictionary::identity(4);
        let back = parse_dictionary(&dictionary_to_string(&dict), p()).unwrap();
        assert_eq!(back, dict);
    }

    #[test]
    fn random_round_trip_is_exact() {
        let dict = build_random_unit(8, 16, 1).unwrap();
        let back = parse_dictionary(&dictionary_to_string(&dict), p()).unwrap();
        let max_diff = dict
            .matrix()
            .col_major_data()
            .iter()
            .zip(back.matrix().col_major_data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max_diff <= 1e-15);
    }

    #[test]
    fn zero_column_rejected() {
        let text = "2 2\n1 0\n0 0\n";
        match parse_dictionary(text, p()) {
            Err(HarnessError::NonUnitColumn {
                column: 1, norm, ..
            }) => assert_eq!(norm, 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nearly_unit_columns_are_renormalized() {
        let text = "2 1\n1.000000001\n0\n";
        let dict = parse_dictionary(text, p()).unwrap();
        assert_eq!(dict.atom(0), &[1.0, 0.0]);
        let err = parse_dictionary("2 1\n1.001\n0\n", p()).unwrap_err();
        assert!(err.to_string().contains("normalize"), "{err}");
    }

    #[test]
    fn malformed_files() {
        for text in [
            "",
            "2\n1 0\n0 1\n",
            "2 2\n1 0\n",
            "2 2\n1 0\n0 1\n0 1\n",
            "2 2\n1 0 0\n0 1\n",
            "2 2\n1 x\n0 1\n",
            "2 2\n1 NaN\n0 1\n",
        ] {
            assert!(parse_dictionary(text, p()).is_err(), "accepted {text:?}");
        }
    }

    #[test]
    fn trace_csv_format() {
        let dict = build_identity_hadamard(4).unwrap();
        let y = [0.5, 0.0, 0.0, 0.0];
        let res = fwsparse_core::solvers::fw_solve(
            &dict,
            &y,
            &fwsparse_core::solvers::SolverConfig::frank_wolfe(1.0),
            None,
        )
        .unwrap();
        let csv = trace_to_csv(&res);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(TRACE_HEADER));
        assert_eq!(
            lines.next(),
            Some("0,0,5.00000000000e-1,0.00000000000e0,5.00000000000e-1,")
        );
        assert_eq!(lines.next(), None);
    }
}
