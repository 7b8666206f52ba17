//! SVG 1.1 plots of planar regions.

use crate::output::format_float;

const STROKES: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// One closed path per curve, y axis pointing up. The view box is the
/// bounding box of all points with a 5 % margin on every side.
pub fn region_plot(curves: &[(String, Vec<[f64; 2]>)]) -> String {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in curves.iter().flat_map(|(_, pts)| pts) {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    if !lo[0].is_finite() {
        lo = [-1.0, -1.0];
        hi = [1.0, 1.0];
    }
    let span = [(hi[0] - lo[0]).max(1e-12), (hi[1] - lo[1]).max(1e-12)];
    let margin = [0.05 * span[0], 0.05 * span[1]];
    let (x0, y0) = (lo[0] - margin[0], -hi[1] - margin[1]);
    let (w, h) = (span[0] + 2.0 * margin[0], span[1] + 2.0 * margin[1]);
    let stroke_width = 0.004 * w.max(h);

    let mut svg = format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"600\" height=\"600\" \
         viewBox=\"{} {} {} {}\" preserveAspectRatio=\"xMidYMid meet\">\n",
        format_float(x0),
        format_float(y0),
        format_float(w),
        format_float(h)
    );
    for (k, (label, pts)) in curves.iter().enumerate() {
        let mut d = String::new();
        for (i, p) in pts.iter().enumerate() {
            d.push_str(if i == 0 { "M" } else { " L" });
            d.push_str(&format!("{} {}", format_float(p[0]), format_float(-p[1])));
        }
        d.push_str(" Z");
        svg.push_str(&format!(
            "  <path d=\"{d}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"><title>{label}</title></path>\n",
            STROKES[k % STROKES.len()],
            format_float(stroke_width)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
