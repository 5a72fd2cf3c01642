use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::HarnessError;
use crate::sweep::ReportRow;

pub const CSV_HEADER: &str = "source,normalization,r2,analytic,mc,mc_stderr,mutual_info_bits";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            _ => Err(HarnessError::UnknownFormat(s.to_string())),
        }
    }
}

pub fn to_csv(rows: &[ReportRow]) -> Result<String, HarnessError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(','))
        .and_then(|_| rows.iter().try_for_each(|r| w.serialize(r)))
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let bytes = w.into_inner().map_err(|e| HarnessError::Config(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| HarnessError::Config(e.to_string()))
}

pub fn to_json(rows: &[ReportRow]) -> String {
    let mut s = serde_json::to_string_pretty(rows).expect("rows serialize");
    s.push('\n');
    s
}

pub fn rows_from_json(text: &str) -> Result<Vec<ReportRow>, HarnessError> {
    crate::config::parse(text)
}

const PALETTE: [&str; 6] = ["#d62728", "#9467bd", "#17becf", "#2ca02c", "#1f77b4", "#ff7f0e"];

/// Series keyed by (source, normalization), in order of first appearance.
pub fn series_of(rows: &[ReportRow]) -> Vec<((String, String), Vec<&ReportRow>)> {
    let mut out: Vec<((String, String), Vec<&ReportRow>)> = Vec::new();
    for r in rows {
        let key = (r.source.clone(), r.normalization.clone());
        match out.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r),
            None => out.push((key, vec![r])),
        }
    }
    out
}

/// Line chart of `r²` against the analytic value (lines) and the Monte Carlo
/// value (dots with 1σ bars).
pub fn to_svg(rows: &[ReportRow]) -> Result<String, HarnessError> {
    if rows.is_empty() {
        return Err(HarnessError::Empty("no rows"));
    }
    let (w, h, left, right, top, bottom) = (640.0, 420.0, 70.0, 190.0, 20.0, 50.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let values = rows.iter().flat_map(|r| {
        let mc_lo = r.mc.zip(r.mc_stderr).map(|(m, s)| m - s);
        let mc_hi = r.mc.zip(r.mc_stderr).map(|(m, s)| m + s);
        [r.analytic, r.mc, mc_lo, mc_hi]
    });
    let (mut ymin, mut ymax) = values
        .flatten()
        .filter(|v| v.is_finite())
        .fold((0.0f64, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if ymax - ymin < 1e-12 {
        ymax = ymin + 1.0;
    }
    let pad = 0.05 * (ymax - ymin);
    ymin -= if ymin < 0.0 { pad } else { 0.0 };
    ymax += pad;
    let xmax = rows.iter().map(|r| r.r2).fold(0.0f64, f64::max).max(1e-9);
    let x = |v: f64| left + pw * v / xmax;
    let y = |v: f64| top + ph * (ymax - v) / (ymax - ymin);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{left} {top} V{b} H{r}" fill="none" stroke="black"/>"#,
        b = top + ph,
        r = left + pw
    );
    for i in 0..=5 {
        let xv = xmax * i as f64 / 5.0;
        let yv = ymin + (ymax - ymin) * i as f64 / 5.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{xv:.2}</text>"#,
            x(xv),
            top + ph + 18.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{yv:.4}</text>"#,
            left - 6.0,
            y(yv) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">reflectivity r²</text>"#,
        left + pw / 2.0,
        h - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(16 {:.1}) rotate(-90)" text-anchor="middle">demon power</text>"#,
        top + ph / 2.0
    );
    for (i, ((source, norm), pts)) in series_of(rows).into_iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(s, r#"<g class="series" data-source="{source}" data-normalization="{norm}">"#);
        let line: Vec<String> = pts
            .iter()
            .filter_map(|r| r.analytic.map(|a| format!("{:.2},{:.2}", x(r.r2), y(a))))
            .collect();
        if !line.is_empty() {
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                line.join(" ")
            );
        }
        for r in &pts {
            if let Some(m) = r.mc {
                let se = r.mc_stderr.unwrap_or(0.0);
                let _ = writeln!(
                    s,
                    r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="{color}"/><circle cx="{cx:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                    y(m - se),
                    y(m + se),
                    y(m),
                    cx = x(r.r2)
                );
            }
        }
        let ly = top + 16.0 * i as f64 + 10.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{:.1}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{source} / {norm}</text>"#,
            left + pw + 30.0,
            left + pw + 36.0,
            ly + 4.0,
            lx = left + pw + 12.0
        );
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn render(rows: &[ReportRow], format: Format) -> Result<String, HarnessError> {
    match format {
        Format::Csv => to_csv(rows),
        Format::Json => Ok(to_json(rows)),
        Format::Svg => to_svg(rows),
    }
}

pub fn emit_report(rows: &[ReportRow], format: Format, path: &Path) -> Result<(), HarnessError> {
    let text = render(rows, format)?;
    std::fs::write(path, text).map_err(|e| HarnessError::Write {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
