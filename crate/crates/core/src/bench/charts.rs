//! Static SVG charts of the rank table.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::runner::RunArtifact;
use crate::error::Result;
use crate::eval::{Metric, RankTable};
use crate::explain::{MethodFamily, MethodId};

const FREE_SHADE: &str = "#222222";
const GUIDED_SHADE: &str = "#9a9a9a";
const PALETTE: [&str; 4] = ["#1b6ca8", "#d1495b", "#2e933c", "#edae49"];

fn shade(m: MethodId) -> &'static str {
    match m.family() {
        MethodFamily::CounterfactualFree => FREE_SHADE,
        MethodFamily::CounterfactualGuided => GUIDED_SHADE,
    }
}

/// Methods ordered best (lowest mean rank) first.
fn by_mean_rank(ranks: &RankTable) -> Vec<(MethodId, f64)> {
    let mut v: Vec<(MethodId, f64)> = ranks.mean_rank.iter().map(|(m, r)| (*m, *r)).collect();
    v.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    v
}

/// Bar chart of mean ranks; bar height grows as the rank improves.
pub fn mean_rank_chart(ranks: &RankTable) -> String {
    let bars = by_mean_rank(ranks);
    let n = bars.len().max(1) as f64;
    let (left, top, plot_h, bar_w, gap) = (50.0, 40.0, 240.0, 48.0, 22.0);
    let width = left + bars.len() as f64 * (bar_w + gap) + 20.0;
    let height = top + plot_h + 90.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<text x="{left}" y="20" font-size="14">Mean rank (taller is better)</text>"#);
    let base = top + plot_h;
    let _ = writeln!(s, r##"<line x1="{left}" y1="{base}" x2="{:.1}" y2="{base}" stroke="#000"/>"##, width - 20.0);
    for (i, (m, r)) in bars.iter().enumerate() {
        let h = plot_h * (n + 1.0 - r) / n;
        let x = left + gap / 2.0 + i as f64 * (bar_w + gap);
        let _ = writeln!(
            s,
            r#"<rect x="{x:.1}" y="{:.1}" width="{bar_w}" height="{h:.1}" fill="{}"><title>{} {r:.3}</title></rect>"#,
            base - h,
            shade(*m),
            m.label()
        );
        let cx = x + bar_w / 2.0;
        let _ = writeln!(s, r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle">{r:.2}</text>"#, base - h - 4.0);
        let _ = writeln!(
            s,
            r#"<text x="{cx:.1}" y="{:.1}" text-anchor="end" transform="rotate(-35 {cx:.1} {:.1})">{}</text>"#,
            base + 14.0,
            base + 14.0,
            m.label()
        );
    }
    let ly = height - 16.0;
    let _ = writeln!(s, r#"<rect x="{left}" y="{:.1}" width="10" height="10" fill="{FREE_SHADE}"/>"#, ly - 9.0);
    let _ = writeln!(s, r#"<text x="{:.1}" y="{ly:.1}">counterfactual-free</text>"#, left + 14.0);
    let _ = writeln!(s, r#"<rect x="{:.1}" y="{:.1}" width="10" height="10" fill="{GUIDED_SHADE}"/>"#, left + 140.0, ly - 9.0);
    let _ = writeln!(s, r#"<text x="{:.1}" y="{ly:.1}">counterfactual-guided</text>"#, left + 154.0);
    s.push_str("</svg>\n");
    s
}

/// Radar chart of median ranks per metric for one method family. Points
/// further out are better ranked.
pub fn radar_chart(ranks: &RankTable, family: MethodFamily) -> String {
    let methods: Vec<MethodId> = ranks.median_rank.keys().copied().filter(|m| m.family() == family).collect();
    let n_ranked = ranks.mean_rank.len().max(1) as f64;
    let (cx, cy, radius) = (200.0, 190.0, 130.0);
    let axes = Metric::ALL.len();
    let point = |i: usize, frac: f64| {
        let angle = -std::f64::consts::FRAC_PI_2 + i as f64 * 2.0 * std::f64::consts::PI / axes as f64;
        (cx + radius * frac * angle.cos(), cy + radius * frac * angle.sin())
    };
    let title = match family {
        MethodFamily::CounterfactualFree => "Median ranks: counterfactual-free",
        MethodFamily::CounterfactualGuided => "Median ranks: counterfactual-guided",
    };
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="400" height="420" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<text x="20" y="22" font-size="14">{title}</text>"#);
    for ring in 1..=4 {
        let f = ring as f64 / 4.0;
        let pts: Vec<String> = (0..axes).map(|i| point(i, f)).map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
        let _ = writeln!(s, r##"<polygon points="{}" fill="none" stroke="#dddddd"/>"##, pts.join(" "));
    }
    for (i, m) in Metric::ALL.iter().enumerate() {
        let (x, y) = point(i, 1.0);
        let (lx, ly) = point(i, 1.15);
        let _ = writeln!(s, r##"<line x1="{cx}" y1="{cy}" x2="{x:.1}" y2="{y:.1}" stroke="#999999"/>"##);
        let _ = writeln!(s, r#"<text x="{lx:.1}" y="{ly:.1}" text-anchor="middle" class="axis">{}</text>"#, m.label());
    }
    for (k, m) in methods.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = Metric::ALL
            .iter()
            .enumerate()
            .map(|(i, metric)| {
                let r = ranks.median_rank[m].get(metric).copied().unwrap_or(n_ranked);
                point(i, (n_ranked + 1.0 - r) / n_ranked)
            })
            .map(|(x, y)| format!("{x:.1},{y:.1}"))
            .collect();
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="{colour}" fill-opacity="0.12" stroke="{colour}" stroke-width="2"><title>{}</title></polygon>"#,
            pts.join(" "),
            m.label()
        );
        let ly = 380.0 + 14.0 * (k / 2) as f64;
        let lx = 30.0 + 180.0 * (k % 2) as f64;
        let _ = writeln!(s, r#"<rect x="{lx}" y="{:.1}" width="10" height="10" fill="{colour}"/>"#, ly - 9.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{ly:.1}">{}</text>"#, lx + 14.0, m.label());
    }
    s.push_str("</svg>\n");
    s
}

pub fn render_charts(artifact: &RunArtifact, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let files = [
        ("mean_ranks.svg", mean_rank_chart(&artifact.ranks)),
        ("median_ranks_counterfactual_free.svg", radar_chart(&artifact.ranks, MethodFamily::CounterfactualFree)),
        ("median_ranks_counterfactual_guided.svg", radar_chart(&artifact.ranks, MethodFamily::CounterfactualGuided)),
    ];
    let mut out = Vec::new();
    for (name, svg) in files {
        let path = dir.join(name);
        std::fs::write(&path, svg)?;
        out.push(path);
    }
    Ok(out)
}
