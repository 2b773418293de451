//! Self-contained SVG rendering of the gap-statistic histogram with the
//! analytic density drawn on top, scaled by `n_converged * bin_width` so the
//! curve and the bars share one vertical axis.

use margindyn::{gap_pdf, AggregateStats};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 52.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 18.0;
const BOTTOM: f64 = 40.0;
const X_MAX: f64 = 3.0;
const BIN_WIDTH: f64 = 0.1;
const CURVE_POINTS: usize = 301;

pub fn histogram_svg(stats: &AggregateStats) -> String {
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let scale = stats.n_converged as f64 * BIN_WIDTH;

    let finite_bins: Vec<_> = stats.histogram.iter().filter(|b| b.hi.is_finite()).collect();
    let overflow: u64 = stats
        .histogram
        .iter()
        .filter(|b| !b.hi.is_finite())
        .map(|b| b.count)
        .sum();

    let mut curve: Vec<(f64, f64)> = Vec::with_capacity(CURVE_POINTS);
    for k in 0..CURVE_POINTS {
        let x = X_MAX * k as f64 / (CURVE_POINTS - 1) as f64;
        let y = gap_pdf(x).expect("density on [0, 3] is defined") * scale;
        curve.push((x, y));
    }

    let bar_max = finite_bins.iter().map(|b| b.count).max().unwrap_or(0) as f64;
    let curve_max = curve.iter().map(|&(_, y)| y).fold(0.0, f64::max);
    let y_max = bar_max.max(curve_max).max(1.0) * 1.06;

    let sx = |x: f64| LEFT + x / X_MAX * plot_w;
    let sy = |y: f64| TOP + plot_h - y / y_max * plot_h;

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    for b in &finite_bins {
        if b.count == 0 {
            continue;
        }
        let x0 = sx(b.lo);
        let x1 = sx(b.hi);
        let y = sy(b.count as f64);
        s.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
             fill=\"#74a3d4\" stroke=\"white\" stroke-width=\"0.5\"/>\n",
            x0,
            y,
            x1 - x0,
            TOP + plot_h - y
        ));
    }

    let mut path = String::from("M");
    for (i, &(x, y)) in curve.iter().enumerate() {
        if i > 0 {
            path.push_str(" L");
        }
        path.push_str(&format!("{:.2} {:.2}", sx(x), sy(y)));
    }
    s.push_str(&format!(
        "<path d=\"{path}\" fill=\"none\" stroke=\"#b03a2e\" stroke-width=\"1.8\"/>\n"
    ));

    s.push_str(&format!(
        "<line x1=\"{LEFT}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        TOP + plot_h,
        WIDTH - RIGHT,
        TOP + plot_h
    ));
    s.push_str(&format!(
        "<line x1=\"{LEFT}\" y1=\"{TOP}\" x2=\"{LEFT}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        TOP + plot_h
    ));
    for k in 0..=3 {
        let x = sx(k as f64);
        s.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
            TOP + plot_h,
            TOP + plot_h + 5.0
        ));
        s.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"middle\">{k}</text>\n",
            TOP + plot_h + 18.0
        ));
    }
    for frac in [0.0, 0.5, 1.0] {
        let v = y_max * frac;
        let y = sy(v);
        s.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{LEFT}\" y2=\"{y:.2}\" stroke=\"black\"/>\n",
            LEFT - 5.0
        ));
        s.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"end\">{:.0}</text>\n",
            LEFT - 8.0,
            y + 4.0,
            v
        ));
    }

    s.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"middle\">lower-bound statistic over {} converged trials</text>\n",
        LEFT + plot_w / 2.0,
        HEIGHT - 8.0,
        stats.n_converged
    ));
    if overflow > 0 {
        s.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"end\">overflow (&#8805; 3): {overflow}</text>\n",
            WIDTH - RIGHT - 4.0,
            TOP + 14.0
        ));
    }
    s.push_str("</svg>\n");
    s
}
