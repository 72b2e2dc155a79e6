//! Static SVG rendering of a trade-off band: the three audit regions, the
//! empirical curve, and any baseline points. Pure presentation; nothing
//! else reads these files.

use crate::model::TradeoffPoint;
use crate::tradeoff::{Region, TradeoffBand};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 520.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;

struct Frame {
    acc_min: f64,
    acc_max: f64,
}

impl Frame {
    fn x(&self, acc: f64) -> f64 {
        let span = (self.acc_max - self.acc_min).max(1e-9);
        MARGIN_L + (acc - self.acc_min) / span * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn y(&self, violation: f64) -> f64 {
        MARGIN_T + (1.0 - violation) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

/// Step path through (psi, value) band points, right-continuous.
fn step_path(frame: &Frame, points: &[(f64, f64)]) -> String {
    let mut d = String::new();
    for (i, &(psi, v)) in points.iter().enumerate() {
        let x = frame.x(psi);
        let y = frame.y(v);
        if i == 0 {
            d.push_str(&format!("M {x:.2} {y:.2} "));
        } else {
            d.push_str(&format!("L {x:.2} {:.2} L {x:.2} {y:.2} ", frame.y(points[i - 1].1)));
        }
    }
    d
}

/// Closed region between two step curves (lower drawn right-to-left).
fn band_polygon(frame: &Frame, upper: &[(f64, f64)], lower: &[(f64, f64)]) -> String {
    let mut d = step_path(frame, upper);
    for &(psi, v) in lower.iter().rev() {
        d.push_str(&format!("L {:.2} {:.2} ", frame.x(psi), frame.y(v)));
    }
    d.push('Z');
    d
}

fn region_color(region: Region) -> &'static str {
    match region {
        Region::Unlikely => "#4477cc",
        Region::Permissible => "#33aa55",
        Region::Suboptimal => "#cc4466",
    }
}

/// Render a band plot. `baselines` carries (name, point, region) triples.
pub fn render_band(
    band: &TradeoffBand,
    metric_label: &str,
    baselines: &[(String, TradeoffPoint, Region)],
) -> String {
    let (acc_min, acc_max) = band.grid_range().unwrap_or((0.0, 1.0));
    let frame = Frame { acc_min, acc_max };
    let uppers: Vec<(f64, f64)> = band.points.iter().map(|p| (p.psi, p.upper)).collect();
    let lowers: Vec<(f64, f64)> = band.points.iter().map(|p| (p.psi, p.lower)).collect();
    let tops: Vec<(f64, f64)> = band.points.iter().map(|p| (p.psi, 1.0)).collect();
    let bottoms: Vec<(f64, f64)> = band.points.iter().map(|p| (p.psi, 0.0)).collect();

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns='http://www.w3.org/2000/svg' width='{WIDTH}' height='{HEIGHT}' \
         viewBox='0 0 {WIDTH} {HEIGHT}' font-family='sans-serif' font-size='13'>\n"
    ));
    svg.push_str("<rect width='100%' height='100%' fill='white'/>\n");

    // audit regions: sub-optimal above the band, permissible inside,
    // unlikely below
    svg.push_str(&format!(
        "<path d='{}' fill='#f6ccd5' stroke='none'/>\n",
        band_polygon(&frame, &tops, &uppers)
    ));
    svg.push_str(&format!(
        "<path d='{}' fill='#cdeed7' stroke='none'/>\n",
        band_polygon(&frame, &uppers, &lowers)
    ));
    svg.push_str(&format!(
        "<path d='{}' fill='#ccdcf3' stroke='none'/>\n",
        band_polygon(&frame, &lowers, &bottoms)
    ));
    svg.push_str(&format!(
        "<path d='{}' fill='none' stroke='#b03050' stroke-width='1.5'/>\n",
        step_path(&frame, &uppers)
    ));
    svg.push_str(&format!(
        "<path d='{}' fill='none' stroke='#3050b0' stroke-width='1.5'/>\n",
        step_path(&frame, &lowers)
    ));

    // empirical curve
    let mut curve = band.yoto_curve.clone();
    curve.sort_by(|a, b| a.accuracy.partial_cmp(&b.accuracy).unwrap());
    if !curve.is_empty() {
        let pts: Vec<String> = curve
            .iter()
            .map(|p| format!("{:.2},{:.2}", frame.x(p.accuracy), frame.y(p.violation)))
            .collect();
        svg.push_str(&format!(
            "<polyline points='{}' fill='none' stroke='black' stroke-width='1.5'/>\n",
            pts.join(" ")
        ));
        for p in &curve {
            svg.push_str(&format!(
                "<circle cx='{:.2}' cy='{:.2}' r='2.5' fill='black'/>\n",
                frame.x(p.accuracy),
                frame.y(p.violation)
            ));
        }
    }

    // baseline markers
    for (name, point, region) in baselines {
        let x = frame.x(point.accuracy);
        let y = frame.y(point.violation);
        let color = region_color(*region);
        svg.push_str(&format!(
            "<path d='M {x0:.2} {y0:.2} L {x1:.2} {y1:.2} M {x0:.2} {y1:.2} L {x1:.2} {y0:.2}' \
             stroke='{color}' stroke-width='2.2'/>\n",
            x0 = x - 5.0,
            x1 = x + 5.0,
            y0 = y - 5.0,
            y1 = y + 5.0,
        ));
        svg.push_str(&format!(
            "<text x='{:.2}' y='{:.2}' fill='{color}'>{}</text>\n",
            x + 7.0,
            y - 5.0,
            xml_escape(name)
        ));
    }

    // axes
    let x0 = MARGIN_L;
    let x1 = WIDTH - MARGIN_R;
    let y0 = HEIGHT - MARGIN_B;
    let y1 = MARGIN_T;
    svg.push_str(&format!(
        "<line x1='{x0}' y1='{y0}' x2='{x1}' y2='{y0}' stroke='black'/>\n\
         <line x1='{x0}' y1='{y0}' x2='{x0}' y2='{y1}' stroke='black'/>\n"
    ));
    for i in 0..=5 {
        let acc = acc_min + (acc_max - acc_min) * i as f64 / 5.0;
        let x = frame.x(acc);
        svg.push_str(&format!(
            "<line x1='{x:.2}' y1='{y0}' x2='{x:.2}' y2='{}' stroke='black'/>\n\
             <text x='{x:.2}' y='{}' text-anchor='middle'>{acc:.3}</text>\n",
            y0 + 5.0,
            y0 + 20.0
        ));
        let viol = i as f64 / 5.0;
        let y = frame.y(viol);
        svg.push_str(&format!(
            "<line x1='{}' y1='{y:.2}' x2='{x0}' y2='{y:.2}' stroke='black'/>\n\
             <text x='{}' y='{:.2}' text-anchor='end'>{viol:.1}</text>\n",
            x0 - 5.0,
            x0 - 8.0,
            y + 4.0
        ));
    }
    svg.push_str(&format!(
        "<text x='{:.2}' y='{}' text-anchor='middle'>accuracy</text>\n",
        (x0 + x1) / 2.0,
        HEIGHT - 15.0
    ));
    svg.push_str(&format!(
        "<text x='18' y='{:.2}' text-anchor='middle' transform='rotate(-90 18 {:.2})'>{} violation</text>\n",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        xml_escape(metric_label)
    ));

    // legend
    let legend = [
        ("#f6ccd5", "sub-optimal"),
        ("#cdeed7", "permissible"),
        ("#ccdcf3", "unlikely"),
    ];
    for (i, (color, label)) in legend.iter().enumerate() {
        let lx = x1 - 150.0;
        let ly = y1 + 10.0 + 20.0 * i as f64;
        svg.push_str(&format!(
            "<rect x='{lx}' y='{ly}' width='14' height='14' fill='{color}' stroke='gray'/>\n\
             <text x='{}' y='{}'>{label}</text>\n",
            lx + 20.0,
            ly + 12.0
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
