//! Deterministic standalone SVG 1.1 line charts.
//!
//! Text output only: same data, same bytes. Each series becomes one
//! polyline with a legend entry; an optional dashed horizontal reference
//! line carries its own label.

pub struct Series {
    pub label: String,
    /// (x, y) pairs in data coordinates, already ordered by x.
    pub points: Vec<(f64, f64)>,
}

pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Dashed horizontal line at this y, with a label.
    pub reference: Option<(f64, String)>,
}

const WIDTH: f64 = 1200.0;
const HEIGHT: f64 = 675.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 40.0;
const MARGIN_TOP: f64 = 60.0;
const MARGIN_BOTTOM: f64 = 70.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

struct Ticks {
    decimals: usize,
    values: Vec<f64>,
}

/// Tick positions at multiples of a step from {1, 2, 5}·10^k, covering
/// [lo, hi] with roughly `target` divisions.
fn nice_ticks(lo: f64, hi: f64, target: usize) -> Ticks {
    let range = (hi - lo).max(1e-12);
    let raw = range / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let mult = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    let step = mult * mag;
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    let values = (first..=last).map(|k| k as f64 * step).collect();
    Ticks { decimals, values }
}

fn fmt_tick(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    // avoid the "-0" label
    if s.starts_with('-') && s.trim_start_matches(['-', '0', '.']).is_empty() {
        s[1..].to_owned()
    } else {
        s
    }
}

pub fn render(chart: &Chart) -> String {
    let (x_lo, x_hi, y_lo, y_hi) = data_bounds(chart);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let to_px = |x: f64, y: f64| -> (f64, f64) {
        let px = MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
        let py = MARGIN_TOP + (y_hi - y) / (y_hi - y_lo) * plot_h;
        (px, py)
    };

    let mut svg = String::with_capacity(16 * 1024);
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" \
         height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"30\" font-family=\"sans-serif\" font-size=\"20\" \
         text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        escape(&chart.title)
    ));

    // axes
    let (x0, y0) = (MARGIN_LEFT, MARGIN_TOP + plot_h);
    svg.push_str(&format!(
        "  <line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{:.2}\" y2=\"{y0:.2}\" stroke=\"black\"/>\n",
        MARGIN_LEFT + plot_w
    ));
    svg.push_str(&format!(
        "  <line x1=\"{x0:.2}\" y1=\"{:.2}\" x2=\"{x0:.2}\" y2=\"{y0:.2}\" stroke=\"black\"/>\n",
        MARGIN_TOP
    ));

    // x ticks and grid
    let xt = nice_ticks(x_lo, x_hi, 8);
    for &tx in &xt.values {
        let (px, _) = to_px(tx, y_lo);
        svg.push_str(&format!(
            "  <line x1=\"{px:.2}\" y1=\"{y0:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
            y0 + 6.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{px:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"14\" \
             text-anchor=\"middle\">{}</text>\n",
            y0 + 24.0,
            fmt_tick(tx, xt.decimals)
        ));
    }
    // y ticks and grid
    let yt = nice_ticks(y_lo, y_hi, 6);
    for &ty in &yt.values {
        let (_, py) = to_px(x_lo, ty);
        svg.push_str(&format!(
            "  <line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{x0:.2}\" y2=\"{py:.2}\" stroke=\"black\"/>\n",
            x0 - 6.0
        ));
        svg.push_str(&format!(
            "  <line x1=\"{x0:.2}\" y1=\"{py:.2}\" x2=\"{:.2}\" y2=\"{py:.2}\" \
             stroke=\"#dddddd\"/>\n",
            MARGIN_LEFT + plot_w
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"14\" \
             text-anchor=\"end\">{}</text>\n",
            x0 - 10.0,
            py + 5.0,
            fmt_tick(ty, yt.decimals)
        ));
    }
    // axis labels
    svg.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"16\" \
         text-anchor=\"middle\">{}</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 20.0,
        escape(&chart.x_label)
    ));
    svg.push_str(&format!(
        "  <text x=\"22\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"16\" \
         text-anchor=\"middle\" transform=\"rotate(-90 22 {:.2})\">{}</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(&chart.y_label)
    ));

    // reference line
    if let Some((ref_y, ref label)) = chart.reference {
        let (_, py) = to_px(x_lo, ref_y);
        svg.push_str(&format!(
            "  <line x1=\"{x0:.2}\" y1=\"{py:.2}\" x2=\"{:.2}\" y2=\"{py:.2}\" stroke=\"#555555\" \
             stroke-dasharray=\"6 4\"/>\n",
            MARGIN_LEFT + plot_w
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"13\" \
             fill=\"#555555\" text-anchor=\"end\">{}</text>\n",
            MARGIN_LEFT + plot_w - 6.0,
            py - 6.0,
            escape(label)
        ));
    }

    // series polylines
    for (idx, series) in chart.series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let pts: Vec<String> = series
            .points
            .iter()
            .map(|&(x, y)| {
                let (px, py) = to_px(x, y);
                format!("{px:.2},{py:.2}")
            })
            .collect();
        svg.push_str(&format!(
            "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n",
            pts.join(" ")
        ));
    }

    // legend, top-right inside the plot area
    let legend_x = MARGIN_LEFT + plot_w - 180.0;
    let mut legend_y = MARGIN_TOP + 16.0;
    for (idx, series) in chart.series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        svg.push_str(&format!(
            "  <line x1=\"{legend_x:.2}\" y1=\"{legend_y:.2}\" x2=\"{:.2}\" y2=\"{legend_y:.2}\" \
             stroke=\"{color}\" stroke-width=\"2\"/>\n",
            legend_x + 26.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" \
             font-size=\"14\">{}</text>\n",
            legend_x + 32.0,
            legend_y + 5.0,
            escape(&series.label)
        ));
        legend_y += 20.0;
    }

    svg.push_str("</svg>\n");
    svg
}

fn data_bounds(chart: &Chart) -> (f64, f64, f64, f64) {
    let mut x_lo = f64::INFINITY;
    let mut x_hi = f64::NEG_INFINITY;
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for series in &chart.series {
        for &(x, y) in &series.points {
            if x.is_finite() {
                x_lo = x_lo.min(x);
                x_hi = x_hi.max(x);
            }
            if y.is_finite() {
                y_lo = y_lo.min(y);
                y_hi = y_hi.max(y);
            }
        }
    }
    if let Some((ref_y, _)) = chart.reference {
        y_lo = y_lo.min(ref_y);
        y_hi = y_hi.max(ref_y);
    }
    if !x_lo.is_finite() || x_lo == x_hi {
        x_lo -= 0.5;
        x_hi += 0.5;
    }
    if !y_lo.is_finite() || y_lo == y_hi {
        y_lo -= 0.5;
        y_hi += 0.5;
    }
    let pad = (y_hi - y_lo) * 0.06;
    (x_lo, x_hi, y_lo - pad, y_hi + pad)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
