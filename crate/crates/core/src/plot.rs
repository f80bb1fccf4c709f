//! Prediction-versus-target scatter plots as standalone SVG.

use std::fmt::Write as _;

use crate::error::{Error, Result};

const SIZE: f64 = 480.0;
const MARGIN: f64 = 50.0;
const AREA: f64 = SIZE - 2.0 * MARGIN;

/// Reads `(target, prediction)` pairs from a CSV with `target` and
/// `prediction` columns; other columns are ignored.
pub fn parse_scatter_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::Row {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let find = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| Error::Schema {
            column: name.to_string(),
            message: "missing column",
        })
    };
    let (ti, pi) = (find("target")?, find("prediction")?);

    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Row {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let value = |i: usize| {
            record[i].parse::<f64>().map_err(|_| Error::Row {
                line,
                message: format!("non-numeric value `{}`", &record[i]),
            })
        };
        points.push((value(ti)?, value(pi)?));
    }
    Ok(points)
}

fn to_x(v: f64) -> f64 {
    MARGIN + v * AREA
}

fn to_y(v: f64) -> f64 {
    MARGIN + (1.0 - v) * AREA
}

/// Scatter of prediction (vertical) against target (horizontal) on the unit
/// square, with the identity line. Points outside `[0, 1]` are clipped.
pub fn render_scatter_svg(points: &[(f64, f64)]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(
        s,
        r#"<defs><clipPath id="area"><rect x="{MARGIN}" y="{MARGIN}" width="{AREA}" height="{AREA}"/></clipPath></defs>"#
    );
    let _ = writeln!(s, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);

    // axes, ticks and labels
    let _ = writeln!(
        s,
        r#"<g stroke="black" stroke-width="1"><line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/><line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/></g>"#,
        x0 = to_x(0.0),
        x1 = to_x(1.0),
        y0 = to_y(0.0),
        y1 = to_y(1.0)
    );
    let _ = writeln!(s, r#"<g font-family="sans-serif" font-size="11" fill="black">"#);
    for i in 0..=5 {
        let v = i as f64 / 5.0;
        let _ = writeln!(
            s,
            r#"<line x1="{x}" y1="{y0}" x2="{x}" y2="{y5}" stroke="black"/><text x="{x}" y="{yl}" text-anchor="middle">{v:.1}</text>"#,
            x = to_x(v),
            y0 = to_y(0.0),
            y5 = to_y(0.0) + 5.0,
            yl = to_y(0.0) + 18.0
        );
        let _ = writeln!(
            s,
            r#"<line x1="{x0}" y1="{y}" x2="{x5}" y2="{y}" stroke="black"/><text x="{xl}" y="{yt}" text-anchor="end">{v:.1}</text>"#,
            x0 = to_x(0.0),
            x5 = to_x(0.0) - 5.0,
            xl = to_x(0.0) - 8.0,
            y = to_y(v),
            yt = to_y(v) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{x}" y="{y}" text-anchor="middle">target SSIM</text>"#,
        x = to_x(0.5),
        y = SIZE - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{y}" text-anchor="middle" transform="rotate(-90 14 {y})">predicted SSIM</text>"#,
        y = to_y(0.5)
    );
    let _ = writeln!(s, "</g>");

    let _ = writeln!(
        s,
        r##"<line id="identity" x1="{x0}" y1="{y0}" x2="{x1}" y2="{y1}" stroke="#888" stroke-dasharray="4 3"/>"##,
        x0 = to_x(0.0),
        y0 = to_y(0.0),
        x1 = to_x(1.0),
        y1 = to_y(1.0)
    );
    let _ = writeln!(s, r##"<g id="points" clip-path="url(#area)" fill="#1f77b4">"##);
    for &(t, p) in points {
        let _ = writeln!(s, r#"<circle cx="{:.3}" cy="{:.3}" r="3"/>"#, to_x(t), to_y(p));
    }
    let _ = writeln!(s, "</g>\n</svg>");
    s
}
