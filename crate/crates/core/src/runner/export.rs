use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::artifacts::read_snapshots;
use super::{io_error, RunnerError};

/// Files written by [`export_plotdata`].
pub const PLOT_FILES: [&str; 4] = ["plot_volume.dat", "plot_diameter.dat", "plot_curvature.dat", "plot_rescaled.dat"];

fn missing(dir: &Path) -> Vec<String> {
    ["series.csv", "snapshots.jsonl"]
        .into_iter()
        .filter(|f| !dir.join(f).is_file())
        .map(String::from)
        .collect()
}

/// Whitespace-separated columns of `series.csv`, copied verbatim.
fn columns(rows: &[csv::StringRecord], headers: &csv::StringRecord, names: &[&str]) -> Result<String, RunnerError> {
    let idx: Vec<usize> = names
        .iter()
        .map(|n| {
            headers.iter().position(|h| h == *n).ok_or_else(|| RunnerError::MissingArtifacts {
                dir: PathBuf::from("series.csv"),
                missing: vec![format!("column {n}")],
            })
        })
        .collect::<Result<_, _>>()?;
    let mut out = format!("# {}\n", names.join(" "));
    for row in rows {
        let fields: Vec<&str> = idx.iter().map(|&i| row.get(i).unwrap_or("")).collect();
        out.push_str(&fields.join(" "));
        out.push('\n');
    }
    Ok(out)
}

/// Writes plot-ready text files next to the artifacts of a finished run:
/// `(t, V)`, `(t, diam)`, `(t, curvature extrema)` and one block of
/// `(y, ũ)` per snapshot, blocks separated by two blank lines.
pub fn export_plotdata(dir: &Path) -> Result<Vec<PathBuf>, RunnerError> {
    let absent = missing(dir);
    if !absent.is_empty() {
        return Err(RunnerError::MissingArtifacts {
            dir: dir.to_path_buf(),
            missing: absent,
        });
    }
    let series = dir.join("series.csv");
    let mut reader = csv::Reader::from_path(&series).map_err(|e| io_error(format!("reading {}", series.display()))(e.into()))?;
    let headers = reader
        .headers()
        .map_err(|e| io_error(format!("reading {}", series.display()))(e.into()))?
        .clone();
    let rows = reader
        .records()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| io_error(format!("reading {}", series.display()))(e.into()))?;

    let mut rescaled = String::from("# y u_rescaled\n");
    let snapshots = read_snapshots(&dir.join("snapshots.jsonl"))?;
    for (k, s) in snapshots.iter().enumerate() {
        if k > 0 {
            rescaled.push_str("\n\n");
        }
        writeln!(rescaled, "# t = {}", s.t).expect("string write");
        if let (Some(y), Some(u)) = (&s.rescaled_nodes, &s.rescaled_values) {
            for (y, u) in y.iter().zip(u) {
                writeln!(rescaled, "{y} {u}").expect("string write");
            }
        }
    }

    let contents = [
        columns(&rows, &headers, &["t", "V"])?,
        columns(&rows, &headers, &["t", "diam"])?,
        columns(&rows, &headers, &["t", "kr_min", "kr_max", "ka_min", "ka_max"])?,
        rescaled,
    ];
    let mut written = Vec::new();
    for (name, text) in PLOT_FILES.iter().zip(contents) {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(io_error(format!("writing {}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_directory_is_missing_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        match export_plotdata(dir.path()) {
            Err(RunnerError::MissingArtifacts { missing, .. }) => {
                assert_eq!(missing, vec!["series.csv", "snapshots.jsonl"]);
            }
            other => panic!("{other:?}"),
        }
    }
}
