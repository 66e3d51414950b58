//! Self-contained SVG line plots of result tables.

use std::ops::Range;
use std::path::Path;

use plotters::coord::Shift;
use plotters::prelude::*;

use crate::error::{CliError, CliResult};
use crate::table::{PlotSpec, ResultTable};

const SIZE: (u32, u32) = (800, 560);

fn plot_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    }
}

fn series(table: &ResultTable, spec: &PlotSpec, y: usize) -> Vec<(f64, f64)> {
    table
        .rows
        .iter()
        .map(|r| (r[spec.x], r[y]))
        .filter(|(x, y)| {
            x.is_finite() && y.is_finite() && (!spec.log_x || *x > 0.0) && (!spec.log_y || *y > 0.0)
        })
        .collect()
}

fn span(values: impl Iterator<Item = f64>, log: bool) -> Range<f64> {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return if log { 0.1..1.0 } else { 0.0..1.0 };
    }
    if log {
        if lo == hi {
            return lo / 2.0..hi * 2.0;
        }
        lo..hi
    } else {
        let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
        lo - pad..hi + pad
    }
}

pub fn render_svg(table: &ResultTable, path: &Path) -> CliResult<()> {
    let Some(spec) = &table.plot else {
        return Ok(());
    };
    let data: Vec<(String, Vec<(f64, f64)>)> = spec
        .ys
        .iter()
        .map(|&y| (table.columns[y].header(), series(table, spec, y)))
        .collect();
    let xs = span(data.iter().flat_map(|(_, s)| s.iter().map(|p| p.0)), spec.log_x);
    let ys = span(data.iter().flat_map(|(_, s)| s.iter().map(|p| p.1)), spec.log_y);

    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(|e| plot_error(path, e))?;
    let result = match (spec.log_x, spec.log_y) {
        (false, false) => draw(&root, table, spec, &data, xs, ys),
        (true, false) => draw(&root, table, spec, &data, xs.log_scale(), ys),
        (false, true) => draw(&root, table, spec, &data, xs, ys.log_scale()),
        (true, true) => draw(&root, table, spec, &data, xs.log_scale(), ys.log_scale()),
    };
    result.map_err(|e| plot_error(path, e))?;
    root.present().map_err(|e| plot_error(path, e))
}

type DrawResult = Result<(), Box<dyn std::error::Error>>;

fn draw<X, Y>(
    root: &DrawingArea<SVGBackend<'_>, Shift>,
    table: &ResultTable,
    spec: &PlotSpec,
    data: &[(String, Vec<(f64, f64)>)],
    x: X,
    y: Y,
) -> DrawResult
where
    X: plotters::coord::ranged1d::AsRangedCoord<Value = f64>,
    Y: plotters::coord::ranged1d::AsRangedCoord<Value = f64>,
    X::CoordDescType: plotters::coord::ranged1d::ValueFormatter<f64>,
    Y::CoordDescType: plotters::coord::ranged1d::ValueFormatter<f64>,
{
    let mut chart = ChartBuilder::on(root)
        .caption(&table.title, ("sans-serif", 22))
        .margin(16)
        .x_label_area_size(48)
        .y_label_area_size(72)
        .build_cartesian_2d(x, y)?;
    chart
        .configure_mesh()
        .x_desc(spec.x_label.as_str())
        .y_desc(spec.y_label.as_str())
        .draw()?;
    for (i, (label, points)) in data.iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        chart
            .draw_series(LineSeries::new(points.iter().copied(), color.stroke_width(2)))?
            .label(label.as_str())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
        chart.draw_series(points.iter().map(|p| Circle::new(*p, 3, color.filled())))?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.85))
        .border_style(BLACK)
        .position(SeriesLabelPosition::UpperRight)
        .draw()?;
    Ok(())
}
