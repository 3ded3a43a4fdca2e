//! Hand-rolled SVG plots: polyline charts and scatters, enough for the
//! diagnostic figures. Quantitative checks read the CSV/JSON artifacts, not
//! these files.

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

pub struct Series {
    pub points: Vec<(f64, f64)>,
    pub label: Option<String>,
    pub dashed: bool,
    pub emphasized: bool,
}

impl Series {
    pub fn line(points: Vec<(f64, f64)>) -> Self {
        Self {
            points,
            label: None,
            dashed: false,
            emphasized: false,
        }
    }

    /// The dotted overlay curve (running averages in the state plots).
    pub fn dotted(points: Vec<(f64, f64)>, label: &str) -> Self {
        Self {
            points,
            label: Some(label.to_string()),
            dashed: true,
            emphasized: true,
        }
    }
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn from_points<'a>(points: impl Iterator<Item = &'a (f64, f64)>) -> Frame {
        let mut frame = Frame {
            x_min: f64::INFINITY,
            x_max: f64::NEG_INFINITY,
            y_min: f64::INFINITY,
            y_max: f64::NEG_INFINITY,
        };
        for &(x, y) in points {
            frame.x_min = frame.x_min.min(x);
            frame.x_max = frame.x_max.max(x);
            frame.y_min = frame.y_min.min(y);
            frame.y_max = frame.y_max.max(y);
        }
        if !frame.x_min.is_finite() {
            frame = Frame {
                x_min: 0.0,
                x_max: 1.0,
                y_min: 0.0,
                y_max: 1.0,
            };
        }
        if frame.x_max == frame.x_min {
            frame.x_max += 1.0;
        }
        if frame.y_max == frame.y_min {
            frame.y_max += 1.0;
            frame.y_min -= 1.0;
        }
        let pad = 0.04 * (frame.y_max - frame.y_min);
        frame.y_min -= pad;
        frame.y_max += pad;
        frame
    }

    fn sx(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x_min) / (self.x_max - self.x_min) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn sy(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM
            - (y - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let magnitude = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * magnitude)
        .find(|s| span / s <= 6.0)
        .unwrap_or(magnitude * 10.0);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-12 * span {
        out.push(t);
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn chrome(frame: &Frame, title: &str, x_label: &str, y_label: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{title}</text>\n",
        WIDTH / 2.0
    ));
    let (x0, x1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (y0, y1) = (HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);
    out.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    ));
    for t in ticks(frame.x_min, frame.x_max) {
        let x = frame.sx(t);
        out.push_str(&format!(
            "<line x1=\"{x:.1}\" y1=\"{y0}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n\
             <text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            y0 + 5.0,
            y0 + 18.0,
            fmt_tick(t)
        ));
    }
    for t in ticks(frame.y_min, frame.y_max) {
        let y = frame.sy(t);
        out.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{x0}\" y2=\"{y:.1}\" stroke=\"black\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            x0 - 5.0,
            x0 - 8.0,
            y + 4.0,
            fmt_tick(t)
        ));
    }
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{x_label}</text>\n\
         <text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" \
         transform=\"rotate(-90 18 {:.1})\">{y_label}</text>\n",
        (x0 + x1) / 2.0,
        HEIGHT - 12.0,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    ));
    out
}

pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let frame = Frame::from_points(series.iter().flat_map(|s| s.points.iter()));
    let mut out = chrome(&frame, title, x_label, y_label);
    for (idx, s) in series.iter().enumerate() {
        if s.points.is_empty() {
            continue;
        }
        let color = if s.emphasized {
            "black"
        } else {
            PALETTE[idx % PALETTE.len()]
        };
        let width = if s.emphasized { 2.0 } else { 1.0 };
        let dash = if s.dashed {
            " stroke-dasharray=\"5 4\""
        } else {
            ""
        };
        let coords: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", frame.sx(x), frame.sy(y)))
            .collect();
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"{width}\"{dash} \
             points=\"{}\"/>\n",
            coords.join(" ")
        ));
        if let Some(label) = &s.label {
            let &(lx, ly) = s.points.last().expect("nonempty");
            out.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" fill=\"{color}\">{label}</text>\n",
                frame.sx(lx) - 4.0,
                frame.sy(ly) - 6.0
            ));
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Scatter with the identity line for reference; used for initial state vs
/// initial output.
pub fn scatter_plot(
    title: &str,
    x_label: &str,
    y_label: &str,
    points: &[(f64, f64)],
    diagonal: bool,
) -> String {
    let mut all = points.to_vec();
    if diagonal {
        // Make sure the identity line spans the data.
        let lo = points
            .iter()
            .flat_map(|&(x, y)| [x, y])
            .fold(f64::INFINITY, f64::min);
        let hi = points
            .iter()
            .flat_map(|&(x, y)| [x, y])
            .fold(f64::NEG_INFINITY, f64::max);
        all.push((lo, lo));
        all.push((hi, hi));
    }
    let frame = Frame::from_points(all.iter());
    let mut out = chrome(&frame, title, x_label, y_label);
    if diagonal {
        out.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" \
             stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n",
            frame.sx(frame.x_min),
            frame.sy(frame.x_min),
            frame.sx(frame.x_max),
            frame.sy(frame.x_max)
        ));
    }
    for &(x, y) in points {
        out.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"#1f77b4\" fill-opacity=\"0.7\"/>\n",
            frame.sx(x),
            frame.sy(y)
        ));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plots_are_well_formed() {
        let series = vec![
            Series::line(vec![(0.0, 1.0), (1.0, 0.5), (2.0, 0.25)]),
            Series::dotted(vec![(0.0, 0.6), (2.0, 0.6)], "average"),
        ];
        let svg = line_plot("states", "t", "x", &series);
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("stroke-dasharray"));

        let svg = scatter_plot("initial", "x(0)", "y(0)", &[(1.0, 2.0), (-1.0, 0.5)], true);
        assert_eq!(svg.matches("<circle").count(), 2);
    }

    #[test]
    fn degenerate_inputs_do_not_break_the_frame() {
        let svg = line_plot("flat", "t", "v", &[Series::line(vec![(0.0, 3.0), (1.0, 3.0)])]);
        assert!(svg.contains("polyline"));
        let svg = scatter_plot("empty", "a", "b", &[], false);
        assert!(svg.ends_with("</svg>\n"));
    }
}
