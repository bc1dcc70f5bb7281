use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::model::Dataset;

const PALETTE: [&str; 8] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"];

/// Line chart of mean error against kappa, one series per classifier.
pub fn error_vs_kappa_chart(title: &str, series: &BTreeMap<String, Vec<(f64, f64)>>) -> String {
    let (w, h, m) = (640.0, 400.0, 60.0);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, escape(title));
    let px = |k: f64| m + k * (w - 2.0 * m);
    let ymax = series
        .values()
        .flatten()
        .map(|p| p.1)
        .fold(0.0f64, f64::max)
        .max(0.05);
    let ymax = (ymax * 10.0).ceil() / 10.0;
    let py = |e: f64| h - m - e / ymax * (h - 2.0 * m);
    let _ = writeln!(s, r#"<line x1="{m}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, h - m, w - m, h - m);
    let _ = writeln!(s, r#"<line x1="{m}" y1="{m}" x2="{m}" y2="{}" stroke="black"/>"#, h - m);
    for k in 0..=4 {
        let kv = k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{kv}</text>"#, px(kv), h - m + 18.0);
        let ev = ymax * k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{ev:.2}</text>"#, m - 6.0, py(ev) + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">kappa</text>"#, w / 2.0, h - 16.0);
    let _ = writeln!(s, r#"<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle">test error</text>"#, h / 2.0, h / 2.0);
    for (idx, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let mut pts = pts.clone();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let path: Vec<String> = pts.iter().map(|&(k, e)| format!("{:.1},{:.1}", px(k), py(e))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, path.join(" "));
        for &(k, e) in &pts {
            let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#, px(k), py(e));
        }
        let ly = m + 16.0 * idx as f64;
        let _ = writeln!(s, r#"<text x="{}" y="{ly:.1}" fill="{color}">{}</text>"#, w - m - 90.0, escape(name));
    }
    s.push_str("</svg>\n");
    s
}

/// Raster of predicted labels; held-out cells are outlined.
pub fn classification_map(title: &str, data: &Dataset, labels: &[Option<u8>]) -> String {
    let (rows, cols) = data.extent();
    let cell = (480.0 / rows.max(cols).max(1) as f64).clamp(4.0, 32.0);
    let (w, h) = (cols as f64 * cell + 20.0, rows as f64 * cell + 50.0);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="10" y="20">{}</text>"#, escape(title));
    for (i, &(r, c)) in data.coords.iter().enumerate() {
        let fill = match labels.get(i).copied().flatten() {
            Some(1) => "#2c7bb6",
            Some(_) => "#fdae61",
            None => "#dddddd",
        };
        let stroke = if data.test_mask[i] { r#" stroke="black" stroke-width="1.5""# } else { "" };
        let _ = writeln!(
            s,
            r#"<rect x="{:.1}" y="{:.1}" width="{cell:.1}" height="{cell:.1}" fill="{fill}"{stroke}/>"#,
            10.0 + c as f64 * cell,
            35.0 + r as f64 * cell
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
