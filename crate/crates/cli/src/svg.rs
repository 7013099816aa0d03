//! Static SVG charts drawn from exported shape-grid CSVs.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;

/// Anchor colours of the sequential map (dark blue, teal, green, yellow).
/// The map has 256 steps: `t` in [0, 1] is quantised to `k = round(255 t)`
/// and the colour is linearly interpolated between the two anchors
/// bracketing `k / 255`.
const ANCHORS: [(f64, [f64; 3]); 5] = [
    (0.00, [68.0, 1.0, 84.0]),
    (0.25, [59.0, 82.0, 139.0]),
    (0.50, [33.0, 145.0, 140.0]),
    (0.75, [94.0, 201.0, 98.0]),
    (1.00, [253.0, 231.0, 37.0]),
];

pub fn colormap(t: f64) -> [u8; 3] {
    let k = (t.clamp(0.0, 1.0) * 255.0).round() / 255.0;
    let hi = ANCHORS.iter().position(|a| a.0 >= k).unwrap_or(ANCHORS.len() - 1).max(1);
    let (t0, c0) = ANCHORS[hi - 1];
    let (t1, c1) = ANCHORS[hi];
    let u = (k - t0) / (t1 - t0);
    let mut out = [0u8; 3];
    for i in 0..3 {
        out[i] = (c0[i] + u * (c1[i] - c0[i])).round() as u8;
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    )
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Line chart of a main effect. `xs` are axis labels; numeric labels are
/// placed by value, anything else by position.
pub fn line_chart(title: &str, x_name: &str, xs: &[String], ys: &[f64]) -> String {
    let numeric: Option<Vec<f64>> = xs.iter().map(|x| x.parse().ok()).collect();
    let pos: Vec<f64> = numeric.unwrap_or_else(|| (0..xs.len()).map(|i| i as f64).collect());
    let (x0, x1) = range(pos.iter().copied());
    let (y0, y1) = range(ys.iter().copied());
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = header(title);
    let _ = writeln!(
        svg,
        "<path d=\"M{m} {t} V{b} H{r}\" fill=\"none\" stroke=\"black\"/>",
        m = MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    if y0 < 0.0 && y1 > 0.0 {
        let _ = writeln!(
            svg,
            "<line x1=\"{MARGIN}\" x2=\"{}\" y1=\"{y:.2}\" y2=\"{y:.2}\" stroke=\"#bbb\" stroke-dasharray=\"4 3\"/>",
            WIDTH - MARGIN,
            y = sy(0.0)
        );
    }
    for (v, anchor, y) in [(y0, "end", sy(y0)), (y1, "end", sy(y1))] {
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"{anchor}\">{v:.3}</text>",
            MARGIN - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{MARGIN}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
        HEIGHT - MARGIN + 18.0,
        escape(&xs[0])
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
        WIDTH - MARGIN,
        HEIGHT - MARGIN + 18.0,
        escape(&xs[xs.len() - 1])
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
        WIDTH / 2.0,
        HEIGHT - 14.0,
        escape(x_name)
    );
    let points: Vec<String> = pos
        .iter()
        .zip(ys)
        .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();
    let _ = writeln!(
        svg,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"2\"/>",
        points.join(" ")
    );
    svg.push_str("</svg>\n");
    svg
}

/// Heatmap of a pair effect on a row-major grid: `values[i * ny + j]` is the
/// value at (`first[i]`, `second[j]`).
pub fn heatmap(title: &str, names: [&str; 2], first: &[String], second: &[String], values: &[f64]) -> String {
    let (nx, ny) = (first.len(), second.len());
    let (v0, v1) = range(values.iter().copied());
    let plot_w = WIDTH - 2.0 * MARGIN - 40.0;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let cw = plot_w / nx as f64;
    let ch = plot_h / ny as f64;

    let mut svg = header(title);
    for i in 0..nx {
        for j in 0..ny {
            let [r, g, b] = colormap((values[i * ny + j] - v0) / (v1 - v0));
            let _ = writeln!(
                svg,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"rgb({r},{g},{b})\"/>",
                MARGIN + i as f64 * cw,
                HEIGHT - MARGIN - (j + 1) as f64 * ch,
                cw + 0.3,
                ch + 0.3
            );
        }
    }
    // colour bar
    let bar_x = WIDTH - MARGIN - 24.0;
    for k in 0..64 {
        let [r, g, b] = colormap(k as f64 / 63.0);
        let _ = writeln!(
            svg,
            "<rect x=\"{bar_x}\" y=\"{:.2}\" width=\"14\" height=\"{:.2}\" fill=\"rgb({r},{g},{b})\"/>",
            HEIGHT - MARGIN - (k + 1) as f64 * plot_h / 64.0,
            plot_h / 64.0 + 0.3
        );
    }
    for (v, y) in [(v0, HEIGHT - MARGIN), (v1, MARGIN + 10.0)] {
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{y:.2}\" text-anchor=\"end\">{v:.3}</text>",
            bar_x - 4.0
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{} ({} to {})</text>",
        MARGIN + plot_w / 2.0,
        HEIGHT - MARGIN + 20.0,
        escape(names[0]),
        escape(&first[0]),
        escape(&first[nx - 1])
    );
    let _ = writeln!(
        svg,
        "<text x=\"20\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {})\">{} ({} to {})</text>",
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(names[1]),
        escape(&second[0]),
        escape(&second[ny - 1])
    );
    svg.push_str("</svg>\n");
    svg
}
