//! Minimal SVG trade-off plot of a Pareto front: `c` on the x-axis, PR and
//! AP on the left axis in [0, 1], cost on the right axis.

use std::fmt::Write;

/// One front member as plotted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontPoint {
    pub c: u32,
    pub pr: f64,
    pub ap: f64,
    pub cost: f64,
}

const W: f64 = 720.0;
const H: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 80.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PR_COLOR: &str = "#c0392b";
const AP_COLOR: &str = "#2471a3";
const COST_COLOR: &str = "#7d7d7d";

fn nice_max(v: f64) -> f64 {
    if v <= 0.0 {
        return 1.0;
    }
    let mag = 10f64.powf(v.log10().floor());
    [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&m| m >= v)
        .unwrap_or(10.0 * mag)
}

fn polyline(out: &mut String, pts: &[(f64, f64)], color: &str, dashed: bool) {
    let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
    let dash = if dashed {
        r#" stroke-dasharray="5,4""#
    } else {
        ""
    };
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
        coords.join(" ")
    );
}

/// Renders the front; `cost_label` names the right axis.
pub fn render_front(points: &[FrontPoint], title: &str, cost_label: &str) -> String {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.c.cmp(&b.c).then(a.cost.total_cmp(&b.cost)));
    let c_min = pts.iter().map(|p| p.c).min().unwrap_or(0) as f64;
    let c_max = pts.iter().map(|p| p.c).max().unwrap_or(1) as f64;
    let c_span = (c_max - c_min).max(1.0);
    let cost_top = nice_max(pts.iter().map(|p| p.cost).fold(0.0, f64::max));

    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let x = |c: u32| LEFT + (f64::from(c) - c_min) / c_span * pw;
    let y_prob = |v: f64| TOP + (1.0 - v.clamp(0.0, 1.0)) * ph;
    let y_cost = |v: f64| TOP + (1.0 - v / cost_top) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );

    // Axes and ticks.
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP + ph, TOP);
    let _ = writeln!(
        s,
        r#"<path d="M{x0},{y1} V{y0} H{x1} V{y1}" fill="none" stroke="black"/>"#
    );
    for k in 0..=5 {
        let v = f64::from(k) / 5.0;
        let yy = y_prob(v);
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{yy:.1}" x2="{x0}" y2="{yy:.1}" stroke="black"/><text x="{}" y="{:.1}" text-anchor="end">{v:.1}</text>"#,
            x0 - 4.0,
            x0 - 7.0,
            yy + 4.0
        );
        let cv = cost_top * v;
        let _ = writeln!(
            s,
            r#"<line x1="{x1}" y1="{yy:.1}" x2="{}" y2="{yy:.1}" stroke="black"/><text x="{}" y="{:.1}">{cv}</text>"#,
            x1 + 4.0,
            x1 + 7.0,
            yy + 4.0
        );
    }
    let step = ((c_span / 10.0).ceil() as u32).max(1);
    let mut c = c_min as u32;
    while f64::from(c) <= c_max {
        let xx = x(c);
        let _ = writeln!(
            s,
            r#"<line x1="{xx:.1}" y1="{y0}" x2="{xx:.1}" y2="{}" stroke="black"/><text x="{xx:.1}" y="{}" text-anchor="middle">{c}</text>"#,
            y0 + 4.0,
            y0 + 18.0
        );
        c += step;
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">maximum allowable failures c</text>"#,
        LEFT + pw / 2.0,
        H - 18.0
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(18,{}) rotate(-90)" text-anchor="middle">PR / AP</text>"#,
        TOP + ph / 2.0
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate({},{}) rotate(90)" text-anchor="middle">{}</text>"#,
        W - 16.0,
        TOP + ph / 2.0,
        escape(cost_label)
    );

    let pr: Vec<(f64, f64)> = pts.iter().map(|p| (x(p.c), y_prob(p.pr))).collect();
    let ap: Vec<(f64, f64)> = pts.iter().map(|p| (x(p.c), y_prob(p.ap))).collect();
    let cost: Vec<(f64, f64)> = pts.iter().map(|p| (x(p.c), y_cost(p.cost))).collect();
    polyline(&mut s, &pr, PR_COLOR, false);
    polyline(&mut s, &ap, AP_COLOR, false);
    polyline(&mut s, &cost, COST_COLOR, true);
    for ((a, b), d) in pr.iter().zip(&ap).zip(&cost) {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{PR_COLOR}"/><rect x="{:.1}" y="{:.1}" width="6" height="6" fill="{AP_COLOR}"/><circle cx="{:.1}" cy="{:.1}" r="2.5" fill="none" stroke="{COST_COLOR}"/>"#,
            a.0,
            a.1,
            b.0 - 3.0,
            b.1 - 3.0,
            d.0,
            d.1
        );
    }

    // Legend.
    let lx = LEFT + 12.0;
    for (i, (label, color)) in [("PR", PR_COLOR), ("AP", AP_COLOR), (cost_label, COST_COLOR)]
        .iter()
        .enumerate()
    {
        let ly = TOP + 14.0 + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
