//! Plain-text, CSV and SVG renderings of a [`CvReport`].

use std::fmt::{Display, Write as _};
use std::io::Write;

use ndarray::Array2;

use super::CvReport;
use crate::error::{Error, Result};

/// Per-fold rows then a `mean` row carrying the standard deviation.
pub fn write_summary_csv<W: Write>(report: &CvReport, mut w: W) -> Result<()> {
    let params = report.fat_params.map_or(String::new(), |p| p.to_string());
    writeln!(w, "model,fold,n_test,n_errors,error,std,fat_params")?;
    for f in &report.folds {
        writeln!(
            w,
            "{},{},{},{},{:.6},,{}",
            report.model,
            f.fold,
            f.test_rows.len(),
            f.n_errors,
            f.error,
            params
        )?;
    }
    let errors: usize = report.folds.iter().map(|f| f.n_errors).sum();
    writeln!(
        w,
        "{},mean,{},{},{:.6},{:.6},{}",
        report.model,
        report.n_test(),
        errors,
        report.mean_error,
        report.std_error,
        params
    )?;
    Ok(())
}

/// `sample_id,fold,true,predicted`, in dataset order.
pub fn write_predictions_csv<W: Write>(
    report: &CvReport,
    sample_ids: &[String],
    mut w: W,
) -> Result<()> {
    let mut rows: Vec<(usize, usize, usize)> = report
        .folds
        .iter()
        .flat_map(|f| {
            f.test_rows
                .iter()
                .zip(&f.predictions)
                .map(move |(&r, &p)| (r, f.fold, p))
        })
        .collect();
    rows.sort_unstable();
    writeln!(w, "sample_id,fold,predicted")?;
    for (r, fold, p) in rows {
        let id = sample_ids
            .get(r)
            .ok_or_else(|| Error::shape(format!("row {r} has no sample id")))?;
        writeln!(w, "{id},{fold},{}", report.class_names[p])?;
    }
    Ok(())
}

/// Header `true\predicted,names…`, one row per true class.
pub fn write_confusion_csv<T: Display, W: Write>(
    m: &Array2<T>,
    names: &[String],
    mut w: W,
) -> Result<()> {
    write!(w, "true\\predicted")?;
    for n in names {
        write!(w, ",{n}")?;
    }
    writeln!(w)?;
    for (name, row) in names.iter().zip(m.outer_iter()) {
        write!(w, "{name}")?;
        for v in row {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Right-aligned count table with row totals.
pub fn confusion_table(m: &Array2<u64>, names: &[String]) -> String {
    let width = names
        .iter()
        .map(String::len)
        .chain(m.iter().map(|v| v.to_string().len()))
        .max()
        .unwrap_or(1)
        .max(5);
    let mut s = String::new();
    let _ = write!(s, "{:>width$}", "");
    for n in names {
        let _ = write!(s, " {n:>width$}");
    }
    let _ = writeln!(s, " {:>width$}", "total");
    for (name, row) in names.iter().zip(m.outer_iter()) {
        let _ = write!(s, "{name:>width$}");
        for v in row {
            let _ = write!(s, " {v:>width$}");
        }
        let _ = writeln!(s, " {:>width$}", row.sum());
    }
    s
}

/// Heatmap of a row-normalised matrix (values in `[0, 1]`).
pub fn confusion_svg(m: &Array2<f64>, names: &[String], title: &str) -> String {
    let n = names.len();
    let cell = 22;
    let margin = 14 + 7 * names.iter().map(String::len).max().unwrap_or(1);
    let size = margin + cell * n + 10;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{}" font-family="sans-serif" font-size="11">"#,
        size + 24
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="16" text-anchor="middle" font-size="13">{}</text>"#,
        size / 2,
        escape(title)
    );
    let top = 24 + margin;
    for (i, name) in names.iter().enumerate() {
        let c = margin + i * cell + cell / 2;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
            margin - 4,
            top + i * cell + cell / 2,
            escape(name)
        );
        let _ = writeln!(
            s,
            r#"<text transform="translate({c},{}) rotate(-90)" dominant-baseline="middle">{}</text>"#,
            top - 4,
            escape(name)
        );
    }
    for ((i, j), &v) in m.indexed_iter() {
        let shade = (255.0 * (1.0 - v.clamp(0.0, 1.0))).round() as u8;
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="{cell}" height="{cell}" fill="rgb({shade},{shade},255)" stroke="silver"><title>{:.3}</title></rect>"#,
            margin + j * cell,
            top + i * cell,
            v
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
