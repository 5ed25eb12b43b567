//! Static SVG scatter plots: gap on x, error on y, fitted line overlaid,
//! R² in the title. Two panels: linear and log y-axes (the fit is always
//! computed without log scaling). Pure markup, no scripting.

use super::regression::LineFit;

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 360.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 44.0;
const MARGIN_B: f64 = 48.0;

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn from_values(values: impl Iterator<Item = f64>) -> Self {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() || !hi.is_finite() {
            return Self { lo: 0.0, hi: 1.0 };
        }
        if hi - lo < 1e-12 {
            let pad = hi.abs().max(1.0) * 0.1;
            return Self {
                lo: lo - pad,
                hi: hi + pad,
            };
        }
        let pad = (hi - lo) * 0.06;
        Self {
            lo: lo - pad,
            hi: hi + pad,
        }
    }

    fn frac(&self, v: f64) -> f64 {
        (v - self.lo) / (self.hi - self.lo)
    }
}

fn panel(
    out: &mut String,
    offset_x: f64,
    points: &[(f64, f64)],
    fit: Option<&LineFit>,
    subtitle: &str,
    log_y: bool,
) {
    let xs = Axis::from_values(points.iter().map(|p| p.0));
    let ymap = |y: f64| if log_y { y.max(1e-12).log10() } else { y };
    let ys = Axis::from_values(points.iter().map(|p| ymap(p.1)));

    let plot_w = PANEL_W - MARGIN_L - MARGIN_R;
    let plot_h = PANEL_H - MARGIN_T - MARGIN_B;
    let px = |x: f64| offset_x + MARGIN_L + xs.frac(x) * plot_w;
    let py = |y: f64| MARGIN_T + (1.0 - ys.frac(ymap(y))) * plot_h;

    out.push_str(&format!(
        "<rect x=\"{:.1}\" y=\"{MARGIN_T}\" width=\"{plot_w:.1}\" height=\"{plot_h:.1}\" fill=\"none\" stroke=\"#94a3b8\"/>\n",
        offset_x + MARGIN_L
    ));
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"24\" font-size=\"13\" fill=\"#0f172a\">{subtitle}</text>\n",
        offset_x + MARGIN_L
    ));

    // axis ticks
    for k in 0..=4 {
        let fx = k as f64 / 4.0;
        let xv = xs.lo + fx * (xs.hi - xs.lo);
        let x = offset_x + MARGIN_L + fx * plot_w;
        out.push_str(&format!(
            "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"#cbd5e1\"/>\n",
            MARGIN_T + plot_h,
            MARGIN_T + plot_h + 4.0
        ));
        out.push_str(&format!(
            "<text x=\"{x:.1}\" y=\"{:.1}\" font-size=\"10\" text-anchor=\"middle\" fill=\"#334155\">{xv:.2}</text>\n",
            MARGIN_T + plot_h + 16.0
        ));
        let yv_mapped = ys.lo + fx * (ys.hi - ys.lo);
        let y = MARGIN_T + (1.0 - fx) * plot_h;
        let label = if log_y {
            format!("1e{yv_mapped:.1}")
        } else {
            format!("{yv_mapped:.3}")
        };
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" text-anchor=\"end\" fill=\"#334155\">{label}</text>\n",
            offset_x + MARGIN_L - 6.0,
            y + 3.0
        ));
    }

    // fitted line, clipped to the x-range
    if let Some(fit) = fit {
        let steps = 60;
        let mut path = String::new();
        let mut first = true;
        for k in 0..=steps {
            let xv = xs.lo + (xs.hi - xs.lo) * k as f64 / steps as f64;
            let yv = fit.slope * xv + fit.intercept;
            if log_y && yv <= 0.0 {
                first = true;
                continue;
            }
            let cmd = if first { 'M' } else { 'L' };
            first = false;
            path.push_str(&format!("{cmd}{:.1} {:.1} ", px(xv), py(yv)));
        }
        if !path.is_empty() {
            out.push_str(&format!(
                "<path d=\"{path}\" fill=\"none\" stroke=\"#dc2626\" stroke-width=\"1.5\"/>\n"
            ));
        }
    }

    for &(x, y) in points {
        out.push_str(&format!(
            "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"#2563eb\" fill-opacity=\"0.7\"/>\n",
            px(x),
            py(y)
        ));
    }
}

/// Renders a two-panel scatter (linear and log y) with the fitted line and
/// R² annotated in the title.
pub fn render_scatter(
    title: &str,
    points: &[(f64, f64)],
    fit: Option<&LineFit>,
    x_label: &str,
    y_label: &str,
) -> String {
    let total_w = 2.0 * PANEL_W + 20.0;
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{total_w:.0}\" height=\"{:.0}\" viewBox=\"0 0 {total_w:.0} {:.0}\">\n",
        PANEL_H + 20.0,
        PANEL_H + 20.0
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    let full_title = match fit {
        Some(f) => format!("{title} (R² = {:.3})", f.r2),
        None => title.to_string(),
    };
    panel(
        &mut out,
        0.0,
        points,
        fit,
        &format!("{full_title} — linear y"),
        false,
    );
    panel(
        &mut out,
        PANEL_W + 20.0,
        points,
        fit,
        &format!("{full_title} — log y"),
        true,
    );
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\" fill=\"#0f172a\">{x_label}</text>\n",
        total_w / 2.0,
        PANEL_H + 12.0
    ));
    out.push_str(&format!(
        "<text x=\"14\" y=\"{:.1}\" font-size=\"11\" fill=\"#0f172a\" transform=\"rotate(-90 14 {:.1})\">{y_label}</text>\n",
        PANEL_H / 2.0,
        PANEL_H / 2.0
    ));
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::regression::fit_line_xy;

    #[test]
    fn renders_well_formed_svg() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 0.1 * i as f64 + 0.05)).collect();
        let fit = fit_line_xy(&pts, None).unwrap();
        let svg = render_scatter("test sweep", &pts, Some(&fit), "gap", "error");
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("circle"));
        assert!(svg.contains("R²"));
        assert!(!svg.contains("<script"));
    }
}
