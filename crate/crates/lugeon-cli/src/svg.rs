//! Minimal SVG heat map for prediction grids. Pure text output, byte-stable
//! for identical inputs.

use lugeon_core::pipeline::{GridCell, GridSpec};

const CELL: f64 = 14.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;
const LEGEND_W: f64 = 18.0;
const LEGEND_GAP: f64 = 30.0;

/// Three-stop blue -> white -> red ramp over t in [0, 1].
fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: u8, b: u8, s: f64| -> u8 { (a as f64 + (b as f64 - a as f64) * s).round() as u8 };
    let (r, g, b) = if t < 0.5 {
        let s = t * 2.0;
        (lerp(0x21, 0xf7, s), lerp(0x66, 0xf7, s), lerp(0xac, 0xf7, s))
    } else {
        let s = (t - 0.5) * 2.0;
        (lerp(0xf7, 0xb2, s), lerp(0xf7, 0x18, s), lerp(0xf7, 0x2b, s))
    };
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Renders the grid with axis2 along x and axis1 along y (matching the
/// row-major cell order). Underflow cells are drawn gray.
pub fn render_heatmap(spec: &GridSpec, cells: &[GridCell]) -> String {
    let rows = spec.axis1.steps;
    let cols = spec.axis2.steps;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for c in cells {
        if !c.underflow {
            lo = lo.min(c.prediction);
            hi = hi.max(c.prediction);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    let span = if hi > lo { hi - lo } else { 1.0 };

    let plot_w = cols as f64 * CELL;
    let plot_h = rows as f64 * CELL;
    let width = MARGIN_LEFT + plot_w + LEGEND_GAP + LEGEND_W + 60.0;
    let height = MARGIN_TOP + plot_h + MARGIN_BOTTOM;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"20\" font-family=\"monospace\" font-size=\"13\">prediction over {} x {}</text>\n",
        MARGIN_LEFT,
        spec.axis1.feature,
        spec.axis2.feature
    ));

    for (idx, cell) in cells.iter().enumerate() {
        let row = idx / cols;
        let col = idx % cols;
        let x = MARGIN_LEFT + col as f64 * CELL;
        let y = MARGIN_TOP + row as f64 * CELL;
        let fill = if cell.underflow {
            "#999999".to_string()
        } else {
            color((cell.prediction - lo) / span)
        };
        svg.push_str(&format!(
            "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{CELL:.1}\" height=\"{CELL:.1}\" fill=\"{fill}\"/>\n"
        ));
    }

    // axis labels and extreme tick values
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"11\">{} = {:.4}</text>\n",
        MARGIN_LEFT,
        MARGIN_TOP + plot_h + 16.0,
        spec.axis2.feature,
        spec.axis2.min
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">{:.4}</text>\n",
        MARGIN_LEFT + plot_w,
        MARGIN_TOP + plot_h + 16.0,
        spec.axis2.max
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">{} = {:.4}</text>\n",
        MARGIN_LEFT - 6.0,
        MARGIN_TOP + 10.0,
        spec.axis1.feature,
        spec.axis1.min
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">{:.4}</text>\n",
        MARGIN_LEFT - 6.0,
        MARGIN_TOP + plot_h,
        spec.axis1.max
    ));

    // legend: vertical ramp with min / mid / max values
    let lx = MARGIN_LEFT + plot_w + LEGEND_GAP;
    let steps = 32;
    let seg = plot_h / steps as f64;
    for i in 0..steps {
        let t = 1.0 - (i as f64 + 0.5) / steps as f64;
        let y = MARGIN_TOP + i as f64 * seg;
        svg.push_str(&format!(
            "<rect x=\"{lx:.1}\" y=\"{y:.1}\" width=\"{LEGEND_W:.1}\" height=\"{:.2}\" fill=\"{}\"/>\n",
            seg + 0.5,
            color(t)
        ));
    }
    for (frac, value) in [(0.0, hi), (0.5, lo + span / 2.0), (1.0, lo)] {
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"11\">{value:.4}</text>\n",
            lx + LEGEND_W + 4.0,
            MARGIN_TOP + plot_h * frac + 4.0
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
