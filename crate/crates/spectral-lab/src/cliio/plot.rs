//! SVG heatmap emission for training traces: frequency on the x-axis,
//! evaluation epoch on the y-axis, cell colour = normalized magnitude.

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};

/// Five-stop dark-blue → yellow colour ramp, linearly interpolated.
fn colour(value: f64) -> String {
    const STOPS: [(f64, [u8; 3]); 5] = [
        (0.0, [68, 1, 84]),
        (0.25, [59, 82, 139]),
        (0.5, [33, 145, 140]),
        (0.75, [94, 201, 98]),
        (1.0, [253, 231, 37]),
    ];
    let v = value.clamp(0.0, 1.0);
    let mut rgb = STOPS[0].1;
    for pair in STOPS.windows(2) {
        let (lo, lo_rgb) = pair[0];
        let (hi, hi_rgb) = pair[1];
        if v >= lo && v <= hi {
            let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
            rgb = [
                (lo_rgb[0] as f64 + t * (hi_rgb[0] as f64 - lo_rgb[0] as f64)).round() as u8,
                (lo_rgb[1] as f64 + t * (hi_rgb[1] as f64 - lo_rgb[1] as f64)).round() as u8,
                (lo_rgb[2] as f64 + t * (hi_rgb[2] as f64 - lo_rgb[2] as f64)).round() as u8,
            ];
            break;
        }
    }
    format!("#{:02x}{:02x}{:02x}", rgb[0], rgb[1], rgb[2])
}

/// Parse a long-format trace CSV (epoch,omega,value) into a dense matrix.
fn parse_trace_csv(text: &str) -> Result<(Vec<usize>, Vec<i64>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Config("empty trace file".into()))?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() != 3 {
        return Err(Error::Config(format!(
            "expected a 3-column trace header, got '{header}'"
        )));
    }
    let mut cells: Vec<(usize, i64, f64)> = Vec::new();
    for (number, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!("malformed row {}: '{line}'", number + 2)));
        }
        let epoch: usize = parts[0]
            .parse()
            .map_err(|_| Error::Config(format!("bad epoch '{}' on row {}", parts[0], number + 2)))?;
        let omega: i64 = parts[1]
            .parse()
            .map_err(|_| Error::Config(format!("bad omega '{}' on row {}", parts[1], number + 2)))?;
        let value: f64 = parts[2]
            .parse()
            .map_err(|_| Error::Config(format!("bad value '{}' on row {}", parts[2], number + 2)))?;
        cells.push((epoch, omega, value));
    }
    if cells.is_empty() {
        return Err(Error::Config("trace file has no data rows".into()));
    }
    let epochs: Vec<usize> = cells
        .iter()
        .map(|c| c.0)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let omegas: Vec<i64> = cells
        .iter()
        .map(|c| c.1)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut matrix = vec![vec![0.0; omegas.len()]; epochs.len()];
    for (epoch, omega, value) in cells {
        let row = epochs.binary_search(&epoch).unwrap();
        let col = omegas.binary_search(&omega).unwrap();
        matrix[row][col] = value;
    }
    Ok((epochs, omegas, matrix))
}

/// Render the heatmap as a standalone SVG string.
pub fn trace_heatmap_svg(trace_csv: &str) -> Result<String> {
    let (epochs, omegas, matrix) = parse_trace_csv(trace_csv)?;
    let cell_w = 28.0;
    let cell_h = (640.0 / epochs.len() as f64).clamp(2.0, 24.0);
    let margin_left = 64.0;
    let margin_top = 28.0;
    let plot_w = cell_w * omegas.len() as f64;
    let plot_h = cell_h * epochs.len() as f64;
    let bar_x = margin_left + plot_w + 30.0;
    let width = bar_x + 70.0;
    let height = margin_top + plot_h + 50.0;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" \
         width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{width:.0}\" height=\"{height:.0}\" fill=\"white\"/>\n"
    ));

    // cells: epoch 0 at the bottom, increasing upwards
    for (row, epoch_values) in matrix.iter().enumerate() {
        let y = margin_top + plot_h - (row as f64 + 1.0) * cell_h;
        for (col, value) in epoch_values.iter().enumerate() {
            let x = margin_left + col as f64 * cell_w;
            svg.push_str(&format!(
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{cell_w:.2}\" height=\"{cell_h:.2}\" \
                 fill=\"{}\"/>\n",
                colour(*value)
            ));
        }
    }

    // x-axis labels (frequencies)
    for (col, omega) in omegas.iter().enumerate() {
        let x = margin_left + (col as f64 + 0.5) * cell_w;
        svg.push_str(&format!(
            "<text x=\"{x:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\" \
             font-family=\"sans-serif\">{omega}</text>\n",
            margin_top + plot_h + 16.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\" \
         font-family=\"sans-serif\">frequency</text>\n",
        margin_left + plot_w / 2.0,
        margin_top + plot_h + 36.0
    ));

    // y-axis labels (a handful of epoch ticks)
    let tick_count = epochs.len().min(8).max(2);
    for t in 0..tick_count {
        let idx = t * (epochs.len() - 1) / (tick_count - 1);
        let y = margin_top + plot_h - (idx as f64 + 0.5) * cell_h;
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{y:.1}\" font-size=\"11\" text-anchor=\"end\" \
             font-family=\"sans-serif\">{}</text>\n",
            margin_left - 6.0,
            epochs[idx]
        ));
    }
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\" \
         font-family=\"sans-serif\" transform=\"rotate(-90 16 {:.1})\">epoch</text>\n",
        margin_top + plot_h / 2.0,
        margin_top + plot_h / 2.0
    ));

    // colourbar: normalized magnitude from 0 (bottom) to 1 (top)
    let bar_h = plot_h.min(240.0);
    let bar_y = margin_top;
    let steps = 64;
    for s in 0..steps {
        let v = 1.0 - s as f64 / (steps - 1) as f64;
        let y = bar_y + s as f64 * bar_h / steps as f64;
        svg.push_str(&format!(
            "<rect x=\"{bar_x:.1}\" y=\"{y:.2}\" width=\"14\" height=\"{:.2}\" fill=\"{}\"/>\n",
            bar_h / steps as f64 + 0.5,
            colour(v)
        ));
    }
    for (value, label) in [(1.0, "1.0"), (0.5, "0.5"), (0.0, "0.0")] {
        let y = bar_y + (1.0 - value) * bar_h;
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" font-family=\"sans-serif\">{label}</text>\n",
            bar_x + 18.0,
            y + 4.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{bar_x:.1}\" y=\"{:.1}\" font-size=\"11\" font-family=\"sans-serif\">|f\u{0303}|/A</text>\n",
        bar_y - 8.0
    ));
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Read a trace CSV and write the rendered SVG.
pub fn plot_trace(input: &Path, output: &Path) -> Result<()> {
    let text = std::fs::read_to_string(input)?;
    let svg = trace_heatmap_svg(&text)?;
    super::output::write_atomic(output, svg.as_bytes())
}
