//! Hand-written SVG scatter plots of 2-D datasets.

use std::fmt::Write as _;
use std::path::Path;

use crate::dataset::{write_atomic, SyntheticDataset};
use crate::error::{Error, Result};
use crate::oracle::AnalyticOracle;

const SIZE: f64 = 400.0;
const MARGIN: f64 = 30.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn sx(x: f64) -> f64 {
    MARGIN + x * (SIZE - 2.0 * MARGIN)
}

fn sy(y: f64) -> f64 {
    SIZE - MARGIN - y * (SIZE - 2.0 * MARGIN)
}

/// One `<circle>` per sample, colored by label, plus the true boundary as
/// `<polyline>`s when an analytic oracle is given. Output depends only on
/// the inputs.
pub fn render_svg(ds: &SyntheticDataset, boundary: Option<&AnalyticOracle>) -> Result<String> {
    if ds.dim() != 2 {
        return Err(Error::Unsupported(format!(
            "scatter plots need 2-D data, got d = {}",
            ds.dim()
        )));
    }
    let lines = match boundary {
        Some(o) => o.boundary_polylines()?,
        None => Vec::new(),
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(
        s,
        r##"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="#ffffff"/>"##
    );
    let (left, right, bottom, top) = (sx(0.0), sx(1.0), sy(0.0), sy(1.0));
    let _ = writeln!(
        s,
        r##"<g id="axes" stroke="#000000" stroke-width="1" fill="none"><line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}"/><line x1="{left}" y1="{bottom}" x2="{left}" y2="{top}"/></g>"##
    );
    let _ = writeln!(
        s,
        r#"<g id="ticks" font-family="sans-serif" font-size="10" text-anchor="middle">"#
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{t}</text>"#,
            sx(t),
            sy(0.0) + 14.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{t}</text>"#,
            sx(0.0) - 14.0,
            sy(t) + 3.0
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g id="samples" stroke="none">"#);
    for sample in ds.samples() {
        let c = sample.point.coords();
        let color = PALETTE[sample.label.index() % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<circle cx="{:.3}" cy="{:.3}" r="2" fill="{color}"/>"#,
            sx(c[0]),
            sy(c[1])
        );
    }
    let _ = writeln!(s, "</g>");
    if !lines.is_empty() {
        let _ = writeln!(
            s,
            r##"<g id="boundary" stroke="#000000" stroke-width="1" fill="none">"##
        );
        for line in &lines {
            let pts: Vec<String> = line
                .iter()
                .map(|(x, y)| format!("{:.3},{:.3}", sx(*x), sy(*y)))
                .collect();
            let _ = writeln!(s, r#"<polyline points="{}"/>"#, pts.join(" "));
        }
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(s, "</svg>");
    Ok(s)
}

pub fn plot_2d(
    ds: &SyntheticDataset,
    boundary: Option<&AnalyticOracle>,
    path: &Path,
) -> Result<()> {
    write_atomic(path, render_svg(ds, boundary)?.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomSource;
    use crate::sampler::random_sampler;

    #[test]
    fn empty_and_counted() {
        let empty = SyntheticDataset::new("none", 0, 2, 2);
        let svg = render_svg(&empty, None).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 0);

        let o = AnalyticOracle::circles(vec![0.5, 0.5], vec![0.25]).unwrap();
        let ds = random_sampler(50, &o, &mut RandomSource::new(0)).unwrap();
        let svg = render_svg(&ds, Some(&o)).unwrap();
        assert_eq!(svg.matches("<circle").count(), 50);
        assert!(svg.contains("<polyline"));
        assert_eq!(svg, render_svg(&ds, Some(&o)).unwrap());
    }

    #[test]
    fn three_dims_unsupported() {
        let ds = SyntheticDataset::new("none", 0, 3, 2);
        assert!(matches!(render_svg(&ds, None), Err(Error::Unsupported(_))));
    }
}
