//! SVG rendering of the two-axis reproduction diagram: shaded quadrant
//! regions, the study's trajectory polyline, and timestamped markers.
//!
//! Output is deterministic: coordinates are formatted with fixed
//! precision and nothing depends on wall-clock time or map ordering.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::Trajectory;

const WIDTH: f64 = 560.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_TOP: f64 = 30.0;
const PLOT: f64 = 400.0;

fn x_px(inference: f64) -> f64 {
    MARGIN_LEFT + inference.clamp(0.0, 1.0) * PLOT
}

fn y_px(fitting: f64) -> f64 {
    MARGIN_TOP + (1.0 - fitting.clamp(0.0, 1.0)) * PLOT
}

fn fmt_px(v: f64) -> String {
    format!("{v:.1}")
}

/// Renders the trajectory to an SVG 1.1 document and writes it to
/// `out` atomically (temp file + rename). Returns the document text.
pub fn render_diagram(t: &Trajectory, out: &Path) -> Result<String> {
    let svg = render_svg(t)?;
    write_atomic(out, svg.as_bytes())?;
    Ok(svg)
}

/// Atomic file write: the content lands under the final name only as a
/// whole, so concurrent readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp",
            path.file_name().unwrap_or_default().to_string_lossy()
        )),
        None => Path::new(&format!(
            ".{}.tmp",
            path.file_name().unwrap_or_default().to_string_lossy()
        ))
        .to_path_buf(),
    };
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn render_svg(t: &Trajectory) -> Result<String> {
    if t.entries.is_empty() {
        return Err(Error::Validation(
            "cannot render an empty trajectory".into(),
        ));
    }
    let boundary = t.entries.last().map(|e| e.region.boundary).unwrap_or(0.5);
    let bx = x_px(boundary);
    let by = y_px(boundary);
    let (x0, x1) = (x_px(0.0), x_px(1.0));
    let (y0, y1) = (y_px(0.0), y_px(1.0)); // y0 is the bottom edge in pixels

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        fmt_px(WIDTH),
        fmt_px(HEIGHT),
        fmt_px(WIDTH),
        fmt_px(HEIGHT)
    );
    s.push_str("  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // quadrant shading: bottom-left not started (red), top-left fitting
    // only (orange), top-right successful reproduction (green),
    // bottom-right inference only (blue)
    let quad = |x: f64, y: f64, w: f64, h: f64, fill: &str, label: &str| {
        format!(
            "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{fill}\"><title>{label}</title></rect>\n",
            fmt_px(x),
            fmt_px(y),
            fmt_px(w),
            fmt_px(h)
        )
    };
    s.push_str(&quad(x0, by, bx - x0, y0 - by, "#f6cfcf", "not started"));
    s.push_str(&quad(x0, y1, bx - x0, by - y1, "#fbe3c9", "fitting only"));
    s.push_str(&quad(bx, y1, x1 - bx, by - y1, "#d7ecd2", "successful reproduction"));
    s.push_str(&quad(bx, by, x1 - bx, y0 - by, "#d3e3f5", "inference only"));

    // boundary guides
    let _ = writeln!(
        s,
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#888\" stroke-dasharray=\"4,3\"/>",
        fmt_px(bx),
        fmt_px(y1),
        fmt_px(bx),
        fmt_px(y0)
    );
    let _ = writeln!(
        s,
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#888\" stroke-dasharray=\"4,3\"/>",
        fmt_px(x0),
        fmt_px(by),
        fmt_px(x1),
        fmt_px(by)
    );

    // axes with ticks every 0.25
    let _ = writeln!(
        s,
        "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        fmt_px(x0),
        fmt_px(y1),
        fmt_px(PLOT),
        fmt_px(PLOT)
    );
    for i in 0..=4 {
        let v = i as f64 * 0.25;
        let tx = x_px(v);
        let ty = y_px(v);
        let _ = writeln!(
            s,
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
            fmt_px(tx),
            fmt_px(y0),
            fmt_px(tx),
            fmt_px(y0 + 6.0)
        );
        let _ = writeln!(
            s,
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{v:.2}</text>",
            fmt_px(tx),
            fmt_px(y0 + 20.0)
        );
        let _ = writeln!(
            s,
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
            fmt_px(x0 - 6.0),
            fmt_px(ty),
            fmt_px(x0),
            fmt_px(ty)
        );
        let _ = writeln!(
            s,
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">{v:.2}</text>",
            fmt_px(x0 - 10.0),
            fmt_px(ty + 4.0)
        );
    }
    let _ = writeln!(
        s,
        "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">Inference</text>",
        fmt_px((x0 + x1) / 2.0),
        fmt_px(y0 + 42.0)
    );
    let _ = writeln!(
        s,
        "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 {} {})\">Fitting</text>",
        fmt_px(x0 - 50.0),
        fmt_px((y0 + y1) / 2.0),
        fmt_px(x0 - 50.0),
        fmt_px((y0 + y1) / 2.0)
    );

    // trajectory polyline and markers
    if t.entries.len() > 1 {
        let points: Vec<String> = t
            .entries
            .iter()
            .map(|e| {
                format!(
                    "{},{}",
                    fmt_px(x_px(e.position.inference)),
                    fmt_px(y_px(e.position.fitting))
                )
            })
            .collect();
        let _ = writeln!(
            s,
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"#333\" stroke-width=\"1.5\"/>",
            points.join(" ")
        );
    }
    for e in &t.entries {
        let cx = x_px(e.position.inference);
        let cy = y_px(e.position.fitting);
        let _ = writeln!(
            s,
            "  <circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"#1f4e9c\"/>",
            fmt_px(cx),
            fmt_px(cy)
        );
        let _ = writeln!(
            s,
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#1f4e9c\">{}</text>",
            fmt_px(cx + 6.0),
            fmt_px(cy - 6.0),
            escape_xml(&e.timestamp)
        );
    }
    let _ = writeln!(
        s,
        "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\">{}</text>",
        fmt_px(x0),
        fmt_px(MARGIN_TOP - 10.0),
        escape_xml(&t.study_id)
    );
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
