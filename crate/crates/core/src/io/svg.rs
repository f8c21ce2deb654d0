//! SVG drawing of a network. Stroke width is proportional to `√C_e`;
//! edges with `C_e = 0` are left out. Vertices without positions are placed
//! on a circle.

use std::f64::consts::PI;
use std::fmt::Write;

use crate::graph::{Conductivities, Network};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvgOptions {
    pub size: f64,
    pub margin: f64,
    /// Stroke width of the edge with the largest conductivity.
    pub max_stroke: f64,
    pub vertex_radius: f64,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions {
            size: 600.0,
            margin: 30.0,
            max_stroke: 12.0,
            vertex_radius: 4.0,
        }
    }
}

fn layout(net: &Network) -> Vec<[f64; 2]> {
    match net.positions() {
        Some(p) => p.to_vec(),
        None => {
            let n = net.vertex_count() as f64;
            (0..net.vertex_count())
                .map(|i| {
                    let t = 2.0 * PI * i as f64 / n;
                    [t.cos(), t.sin()]
                })
                .collect()
        }
    }
}

pub fn render_svg(net: &Network, c: &Conductivities, opts: &SvgOptions) -> String {
    let pts = layout(net);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in &pts {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let scale = (opts.size - 2.0 * opts.margin) / span;
    // SVG y grows downwards.
    let map = |p: [f64; 2]| (opts.margin + (p[0] - x0) * scale, opts.size - opts.margin - (p[1] - y0) * scale);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{0}" viewBox="0 0 {0} {0}">"#,
        opts.size
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let root_max = c.max().sqrt();
    let _ = writeln!(s, r#"<g stroke="black" stroke-linecap="round">"#);
    for (e, &ce) in net.edges().iter().zip(c.as_slice()) {
        if ce <= 0.0 {
            continue;
        }
        let (ax, ay) = map(pts[e.u]);
        let (bx, by) = map(pts[e.v]);
        let w = opts.max_stroke * ce.sqrt() / root_max;
        let _ = writeln!(
            s,
            r#"<line x1="{ax:.3}" y1="{ay:.3}" x2="{bx:.3}" y2="{by:.3}" stroke-width="{w:.4}"/>"#
        );
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, "<g>");
    for (i, p) in pts.iter().enumerate() {
        let (x, y) = map(*p);
        let src = net.sources()[i];
        let fill = if src > 0.0 {
            "#c0392b"
        } else if src < 0.0 {
            "#2e86c1"
        } else {
            "#7f8c8d"
        };
        let _ = writeln!(
            s,
            r#"<circle cx="{x:.3}" cy="{y:.3}" r="{:.3}" fill="{fill}"/>"#,
            opts.vertex_radius
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}
