use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// A labelled accuracy matrix: rows over the first parameter (beta or its
/// quantile bands), columns over the second, each cell a mean with the
/// standard deviation over realisations.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyGrid {
    pub row_label: String,
    pub col_label: String,
    pub row_values: Vec<String>,
    pub col_values: Vec<String>,
    pub mean: Vec<Vec<f64>>,
    pub std: Vec<Vec<f64>>,
}

impl AccuracyGrid {
    /// Builds a grid from per-cell realisation samples.
    pub fn from_samples(
        row_label: &str,
        col_label: &str,
        row_values: Vec<String>,
        col_values: Vec<String>,
        samples: &[Vec<Vec<f64>>],
    ) -> Self {
        let rows = row_values.len();
        let cols = col_values.len();
        let mut mean = vec![vec![0.0; cols]; rows];
        let mut std = vec![vec![0.0; cols]; rows];
        for i in 0..rows {
            for j in 0..cols {
                let cell = &samples[i][j];
                if cell.is_empty() {
                    continue;
                }
                let m = cell.iter().sum::<f64>() / cell.len() as f64;
                let v = cell.iter().map(|x| (x - m).powi(2)).sum::<f64>() / cell.len() as f64;
                mean[i][j] = m;
                std[i][j] = v.sqrt();
            }
        }
        AccuracyGrid {
            row_label: row_label.to_string(),
            col_label: col_label.to_string(),
            row_values,
            col_values,
            mean,
            std,
        }
    }

    pub fn constant_labels(values: &[f64]) -> Vec<String> {
        values.iter().map(|v| v.to_string()).collect()
    }

    /// Mean over all cells.
    pub fn grand_mean(&self) -> f64 {
        let cells: Vec<f64> = self.mean.iter().flatten().copied().collect();
        cells.iter().sum::<f64>() / cells.len().max(1) as f64
    }

    /// Mean over one row (fixed row 0-based index).
    pub fn row_mean(&self, row: usize) -> f64 {
        let cells = &self.mean[row];
        cells.iter().sum::<f64>() / cells.len().max(1) as f64
    }

    pub fn min_cell(&self) -> f64 {
        self.mean
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn cell(&self, row_value: &str, col_value: &str) -> Option<f64> {
        let i = self.row_values.iter().position(|v| v == row_value)?;
        let j = self.col_values.iter().position(|v| v == col_value)?;
        Some(self.mean[i][j])
    }
}

/// Writes the grid as CSV: a small header, then one `mean` and one `std`
/// block with rows ascending (matching the figure orientation: rows are the
/// first parameter ascending, columns the second ascending). Values use the
/// shortest round-trip float representation, so re-reading the file
/// reproduces the grid exactly.
pub fn emit_heatmap(grid: &AccuracyGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "rows,{}", grid.row_label).map_err(io)?;
    writeln!(w, "cols,{}", grid.col_label).map_err(io)?;
    writeln!(w, "col_values,{}", grid.col_values.join(",")).map_err(io)?;
    for (i, rv) in grid.row_values.iter().enumerate() {
        let cells: Vec<String> = grid.mean[i].iter().map(|v| v.to_string()).collect();
        writeln!(w, "mean,{rv},{}", cells.join(",")).map_err(io)?;
    }
    for (i, rv) in grid.row_values.iter().enumerate() {
        let cells: Vec<String> = grid.std[i].iter().map(|v| v.to_string()).collect();
        writeln!(w, "std,{rv},{}", cells.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Reads a grid written by [`emit_heatmap`].
pub fn read_grid_csv(path: impl AsRef<Path>) -> Result<AccuracyGrid> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut row_label = String::new();
    let mut col_label = String::new();
    let mut col_values = Vec::new();
    let mut row_values = Vec::new();
    let mut mean: Vec<Vec<f64>> = Vec::new();
    let mut std: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        let bad = |msg: &str| Error::Parse {
            line: idx + 1,
            message: msg.to_string(),
        };
        match parts[0] {
            "rows" => row_label = parts.get(1).ok_or_else(|| bad("missing row label"))?.to_string(),
            "cols" => col_label = parts.get(1).ok_or_else(|| bad("missing col label"))?.to_string(),
            "col_values" => col_values = parts[1..].iter().map(|s| s.to_string()).collect(),
            "mean" | "std" => {
                let values: std::result::Result<Vec<f64>, _> =
                    parts[2..].iter().map(|s| s.parse::<f64>()).collect();
                let values = values.map_err(|_| bad("bad float"))?;
                if parts[0] == "mean" {
                    row_values.push(parts[1].to_string());
                    mean.push(values);
                } else {
                    std.push(values);
                }
            }
            other => return Err(bad(&format!("unknown block {other:?}"))),
        }
    }
    Ok(AccuracyGrid {
        row_label,
        col_label,
        row_values,
        col_values,
        mean,
        std,
    })
}

/// Standalone SVG heatmap with per-cell annotations.
pub fn emit_heatmap_svg(grid: &AccuracyGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let cell = 64.0;
    let margin = 70.0;
    let rows = grid.row_values.len();
    let cols = grid.col_values.len();
    let width = margin + cols as f64 * cell + 20.0;
    let height = margin + rows as f64 * cell + 20.0;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str("<style>text{font-family:sans-serif;font-size:11px;}</style>\n");
    let lo = grid.min_cell().min(0.33);
    let hi: f64 = grid.mean.iter().flatten().copied().fold(0.0f64, f64::max).max(lo + 1e-9);
    for (i, rv) in grid.row_values.iter().enumerate() {
        // rows ascending bottom-to-top, matching the figure orientation
        let y = margin + (rows - 1 - i) as f64 * cell;
        for (j, _cv) in grid.col_values.iter().enumerate() {
            let x = margin + j as f64 * cell;
            let v = grid.mean[i][j];
            let t = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
            let red = (40.0 + 215.0 * t) as u8;
            let green = (40.0 + 120.0 * (1.0 - (t - 0.5).abs() * 2.0).max(0.0)) as u8;
            let blue = (220.0 - 180.0 * t) as u8;
            svg.push_str(&format!(
                "<rect x=\"{x}\" y=\"{y}\" width=\"{cell}\" height=\"{cell}\" fill=\"rgb({red},{green},{blue})\" stroke=\"white\"/>\n"
            ));
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" fill=\"white\">{v:.3}</text>\n",
                x + cell / 2.0,
                y + cell / 2.0 + 4.0
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}={}</text>\n",
            margin - 6.0,
            y + cell / 2.0 + 4.0,
            grid.row_label,
            rv
        ));
    }
    for (j, cv) in grid.col_values.iter().enumerate() {
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}={}</text>\n",
            margin + j as f64 * cell + cell / 2.0,
            margin - 8.0,
            grid.col_label,
            cv
        ));
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_grid() -> AccuracyGrid {
        AccuracyGrid {
            row_label: "beta".into(),
            col_label: "phi".into(),
            row_values: vec!["0.1".into(), "0.9".into()],
            col_values: vec!["0.1".into(), "0.9".into()],
            mean: vec![vec![0.5133333333333333, 0.99], vec![0.55, 1.0 / 3.0]],
            std: vec![vec![0.01, 0.0], vec![0.002, 0.07]],
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let grid = toy_grid();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grid.csv");
        emit_heatmap(&grid, &path).unwrap();
        let back = read_grid_csv(&path).unwrap();
        assert_eq!(back, grid);
    }

    #[test]
    fn single_cell_grid_renders() {
        let grid = AccuracyGrid {
            row_label: "beta".into(),
            col_label: "phi".into(),
            row_values: vec!["0.5".into()],
            col_values: vec!["0.5".into()],
            mean: vec![vec![0.9]],
            std: vec![vec![0.0]],
        };
        let dir = tempfile::tempdir().unwrap();
        let svg_path = dir.path().join("grid.svg");
        emit_heatmap_svg(&grid, &svg_path).unwrap();
        let body = std::fs::read_to_string(&svg_path).unwrap();
        assert!(body.contains("<svg"));
        assert!(body.contains("0.900"));
    }

    #[test]
    fn grid_statistics() {
        let grid = toy_grid();
        assert!((grid.grand_mean() - (0.5133333333333333 + 0.99 + 0.55 + 1.0 / 3.0) / 4.0).abs() < 1e-12);
        assert_eq!(grid.cell("0.9", "0.1"), Some(0.55));
        assert!((grid.min_cell() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn from_samples_computes_mean_and_std() {
        let samples = vec![vec![vec![0.8, 0.9], vec![1.0]]];
        let grid = AccuracyGrid::from_samples(
            "beta",
            "phi",
            vec!["0.1".into()],
            vec!["0.1".into(), "0.9".into()],
            &samples,
        );
        assert!((grid.mean[0][0] - 0.85).abs() < 1e-12);
        assert!((grid.std[0][0] - 0.05).abs() < 1e-12);
        assert_eq!(grid.mean[0][1], 1.0);
        assert_eq!(grid.std[0][1], 0.0);
    }
}
