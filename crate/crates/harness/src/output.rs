//! CSV and SVG artifacts.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use plotters::prelude::*;

use crate::error::{Error, Result};
use crate::sim::{Row, RunRecord, TruthRow, COLUMNS};

pub const TRUTH_COLUMNS: [&str; 23] = [
    "t", "p_x", "p_y", "p_z", "v_x", "v_y", "v_z", "q_w", "q_x", "q_y", "q_z", "ba_x", "ba_y", "ba_z", "bg_x", "bg_y",
    "bg_z", "am_x", "am_y", "am_z", "wm_x", "wm_y", "wm_z",
];

/// 17 significant digits, enough to round-trip every `f64`.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn write_rows<W: Write>(w: W, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(header)?;
    for row in rows {
        wtr.write_record(row.into_iter().map(format_f64))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_record_csv<W: Write>(w: W, record: &RunRecord) -> csv::Result<()> {
    write_rows(w, &COLUMNS, record.rows.iter().map(|r| r.values().to_vec()))
}

pub fn emit_csv(record: &RunRecord, path: &Path) -> Result<()> {
    let file = create(path)?;
    write_record_csv(file, record).map_err(csv_err(path))
}

pub fn read_record_csv<R: std::io::Read>(r: R) -> Result<RunRecord> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers().map_err(|e| Error::Format(e.to_string()))?;
    if header.iter().ne(COLUMNS.iter().copied()) {
        return Err(Error::Format(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        if rec.len() != COLUMNS.len() {
            return Err(Error::Format(format!("row {i} has {} fields", rec.len())));
        }
        let mut values = [0.0; 46];
        for (slot, field) in values.iter_mut().zip(rec.iter()) {
            *slot = field
                .parse()
                .map_err(|e| Error::Format(format!("row {i}: `{field}`: {e}")))?;
        }
        rows.push(Row::from_values(&values));
    }
    Ok(RunRecord { rows })
}

pub fn load_csv(path: &Path) -> Result<RunRecord> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_record_csv(file)
}

fn truth_values(r: &TruthRow) -> Vec<f64> {
    let s = &r.truth;
    let mut v = vec![r.t];
    v.extend(s.p.iter());
    v.extend(s.v.iter());
    v.extend(s.q.to_array());
    v.extend(s.accel_bias.iter());
    v.extend(s.gyro_bias.iter());
    v.extend(r.accel_meas.iter());
    v.extend(r.gyro_meas.iter());
    v
}

pub fn emit_truth_csv(rows: &[TruthRow], path: &Path) -> Result<()> {
    let file = create(path)?;
    write_rows(file, &TRUTH_COLUMNS, rows.iter().map(truth_values)).map_err(csv_err(path))
}

fn create(path: &Path) -> Result<File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Log-scale line plot of `series` with optional horizontal and vertical
/// reference lines.
fn log_plot(
    path: &Path,
    title: &str,
    y_label: &str,
    series: &[(f64, f64)],
    h_line: Option<f64>,
    v_line: Option<f64>,
) -> Result<()> {
    let plot_err = |e: &dyn std::fmt::Display| Error::Plot {
        path: path.to_path_buf(),
        reason: e.to_string(),
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    let pts: Vec<(f64, f64)> = series.iter().copied().filter(|(_, v)| *v > 0.0).collect();
    let t_max = series.last().map_or(1.0, |p| p.0).max(f64::MIN_POSITIVE);
    let y_max = pts.iter().map(|p| p.1).fold(f64::MIN_POSITIVE, f64::max) * 2.0;
    let y_min = pts.iter().map(|p| p.1).fold(y_max, f64::min).max(y_max * 1e-16) * 0.5;

    let root = SVGBackend::new(path, (900, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| plot_err(&e))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(15)
        .x_label_area_size(40)
        .y_label_area_size(70)
        .build_cartesian_2d(0.0..t_max, (y_min..y_max).log_scale())
        .map_err(|e| plot_err(&e))?;
    chart
        .configure_mesh()
        .x_desc("t [s]")
        .y_desc(y_label)
        .draw()
        .map_err(|e| plot_err(&e))?;
    chart
        .draw_series(LineSeries::new(pts, &BLUE))
        .map_err(|e| plot_err(&e))?;
    if let Some(h) = h_line.filter(|h| *h > y_min && *h < y_max) {
        chart
            .draw_series(LineSeries::new([(0.0, h), (t_max, h)], RED.stroke_width(1)))
            .map_err(|e| plot_err(&e))?;
    }
    if let Some(v) = v_line {
        chart
            .draw_series(LineSeries::new([(v, y_min), (v, y_max)], BLACK.stroke_width(1)))
            .map_err(|e| plot_err(&e))?;
    }
    root.present().map_err(|e| plot_err(&e))?;
    Ok(())
}

/// `‖q⃗_e‖(t)` with the threshold level and its first crossing.
pub fn plot_attitude_error(record: &RunRecord, path: &Path, threshold: f64, crossing: Option<f64>) -> Result<()> {
    log_plot(
        path,
        "attitude error",
        "|q_e vec|",
        &record.series(|r| r.qe_norm),
        Some(threshold),
        crossing,
    )
}

/// `x_eᵀ M x_e` on a log axis.
pub fn plot_translation_error(record: &RunRecord, path: &Path) -> Result<()> {
    log_plot(
        path,
        "translation error in the contraction metric",
        "x_e' M x_e",
        &record.series(|r| r.xe_metric),
        None,
        None,
    )
}
