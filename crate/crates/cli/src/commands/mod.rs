pub mod density;
pub mod kernel;
pub mod project;
pub mod regress;
pub mod tessellate;

use crate::config::{ExperimentConfig, WindowSpec};
use crate::error::{CliError, CliResult};
use stit_core::measure::three_direction_rows;
use stit_core::{DirectionalDistribution, MeasureSpec};

pub(crate) fn three_direction_spec() -> MeasureSpec {
    MeasureSpec::Directions { vectors: three_direction_rows(), weights: None }
}

/// Resolves the measure and window, defaulting to `measure` and `window`
/// when absent, and records the choice in `cfg`.
pub(crate) fn measure_and_window(
    cfg: &mut ExperimentConfig,
    measure: MeasureSpec,
    window: impl FnOnce(usize) -> WindowSpec,
) -> CliResult<(DirectionalDistribution, stit_core::Polytope)> {
    let spec = cfg.measure.get_or_insert(measure).clone();
    let d = spec.dim();
    let w = cfg.window.get_or_insert_with(|| window(d)).clone();
    if w.lo.len() != d {
        return Err(CliError::Validation(format!("window has dimension {} but the measure has {d}", w.lo.len())));
    }
    Ok((spec.build()?, w.polytope()?))
}

pub(crate) fn cube_root_bandwidth(n: usize) -> f64 {
    (n as f64).cbrt()
}

/// Reads points (and optionally a trailing response column) from a CSV
/// file. A first row that does not parse as numbers is taken as a header.
pub(crate) fn read_points(path: &std::path::Path) -> CliResult<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    let mut width = None;
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Validation(format!("{} row {}: {e}", path.display(), i + 1)))?;
        let parsed: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) => {
                if let Some((c, bad)) = v.iter().enumerate().find(|(_, x)| !x.is_finite()) {
                    return Err(CliError::Validation(format!(
                        "{} row {}, column {}: non-finite value {bad}",
                        path.display(),
                        i + 1,
                        c + 1
                    )));
                }
                if *width.get_or_insert(v.len()) != v.len() {
                    return Err(CliError::Validation(format!(
                        "{} row {}: expected {} columns, found {}",
                        path.display(),
                        i + 1,
                        width.unwrap_or(0),
                        v.len()
                    )));
                }
                rows.push(v);
            }
            Err(_) if i == 0 => continue,
            Err(_) => {
                let (c, field) = rec.iter().enumerate().find(|(_, s)| s.parse::<f64>().is_err()).unwrap_or((0, ""));
                return Err(CliError::Validation(format!(
                    "{} row {}, column {}: cannot parse {field:?} as a number",
                    path.display(),
                    i + 1,
                    c + 1
                )));
            }
        }
    }
    if rows.is_empty() {
        return Err(CliError::Validation(format!("{}: no data rows", path.display())));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_errors_name_the_row() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        std::fs::write(&p, "x,y\n0.1,0.2\n0.3,abc\n").unwrap();
        let e = read_points(&p).unwrap_err().to_string();
        assert!(e.contains("row 3, column 2"), "{e}");
        std::fs::write(&p, "0.1,0.2\n0.3\n").unwrap();
        assert!(read_points(&p).unwrap_err().to_string().contains("row 2"));
        std::fs::write(&p, "x\n0.5\n-1e-3\n").unwrap();
        assert_eq!(read_points(&p).unwrap(), vec![vec![0.5], vec![-1e-3]]);
        assert!(matches!(read_points(&dir.path().join("missing.csv")), Err(CliError::Io(_))));
    }
}
