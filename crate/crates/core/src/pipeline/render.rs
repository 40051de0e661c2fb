use std::fmt::Write;

use super::report::{RunReport, SummaryRow};
use crate::featsel::CorrelationMatrix;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Metric rows (Accuracy, F1) by model columns, percentages to two decimals.
pub fn performance_table(rows: &[SummaryRow]) -> String {
    let mut header = String::from("| Metric |");
    let mut rule = String::from("|---|");
    let mut acc = String::from("| Accuracy |");
    let mut f1 = String::from("| F1 |");
    for row in rows {
        write!(header, " {} |", row.name).unwrap();
        rule.push_str("---:|");
        write!(acc, " {:.2} |", row.accuracy_pct).unwrap();
        write!(f1, " {:.2} |", row.f1_pct).unwrap();
    }
    format!("{header}\n{rule}\n{acc}\n{f1}\n")
}

/// Table of accuracy and F1 in percent, one column per model, then supporting detail.
pub fn markdown(report: &RunReport) -> String {
    let up = &report.upstream;
    let down = &report.downstream;
    let mut s = String::new();
    writeln!(s, "# macrosig run report\n").unwrap();
    writeln!(
        s,
        "Seed {}. Window {} to {}: {} rows, {} positive. Train {} rows ({} positive), test {} rows ({} positive).\n",
        report.seed, up.window_start, up.window_end, up.n_rows, up.n_positive, up.split.n_train, up.split.train_positives, up.split.n_test, up.split.test_positives
    )
    .unwrap();

    writeln!(s, "## Out-of-sample performance (%)\n").unwrap();
    writeln!(s, "{}", performance_table(&down.summary)).unwrap();

    writeln!(s, "## Confusion counts\n\n| Model | TP | FP | FN | TN |\n|---|---:|---:|---:|---:|").unwrap();
    for m in &down.models {
        let c = &m.confusion;
        writeln!(s, "| {} | {} | {} | {} | {} |", m.name, c.tp, c.fp, c.fn_, c.tn).unwrap();
    }

    if !up.backcast.is_empty() {
        writeln!(s, "\n## Backcast\n\n| Series | Months filled | Model | AIC |\n|---|---:|---|---:|").unwrap();
        for b in &up.backcast {
            let order = b.order.map_or("constant".to_string(), |o| o.to_string());
            let aic = b.aic.map_or("-".to_string(), |a| format!("{a:.2}"));
            writeln!(s, "| {} | {} | {} | {} |", b.series, b.missing_head, order, aic).unwrap();
        }
    }

    let sel = &down.selection;
    writeln!(s, "\n## Feature selection\n").unwrap();
    writeln!(s, "- Confirmed ({}): {}", sel.confirmed.len(), sel.confirmed.join(", ")).unwrap();
    writeln!(s, "- Tentative ({}): {}", sel.tentative.len(), sel.tentative.join(", ")).unwrap();
    writeln!(s, "- Rejected ({}): {}", sel.rejected.len(), sel.rejected.join(", ")).unwrap();
    for d in &sel.pruning.dropped {
        writeln!(s, "- Dropped {} (r = {:.3} with {})", d.name, d.correlation, d.partner).unwrap();
    }
    writeln!(s, "- Selected ({}): {}", sel.selected.len(), sel.selected.join(", ")).unwrap();
    s
}

const BAR_ROW: f64 = 22.0;
const LABEL_W: f64 = 170.0;
const BAR_W: f64 = 360.0;

/// Horizontal bar chart, longest bar scaled to the largest weight.
pub fn importance_svg(title: &str, weights: &[(String, f64)]) -> String {
    let top = weights.iter().fold(0.0f64, |m, (_, w)| m.max(*w));
    let height = 40.0 + BAR_ROW * weights.len() as f64 + 10.0;
    let width = LABEL_W + BAR_W + 70.0;
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(s, r#"<text x="10" y="22" font-size="14" font-weight="bold">{}</text>"#, esc(title)).unwrap();
    for (i, (name, w)) in weights.iter().enumerate() {
        let y = 40.0 + BAR_ROW * i as f64;
        let len = if top > 0.0 { BAR_W * w / top } else { 0.0 };
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, LABEL_W - 8.0, y + 14.0, esc(name)).unwrap();
        writeln!(s, r##"<rect x="{LABEL_W}" y="{}" width="{len:.2}" height="{}" fill="#4477aa"/>"##, y + 3.0, BAR_ROW - 6.0).unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{}">{w:.3}</text>"#, LABEL_W + len + 6.0, y + 14.0).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Red for positive, blue for negative, white at zero.
fn cell_colour(r: f64) -> String {
    let t = r.clamp(-1.0, 1.0).abs();
    let fade = |c: f64| (255.0 - t * (255.0 - c)).round() as u8;
    let (cr, cg, cb) = if r >= 0.0 { (202.0, 0.0, 32.0) } else { (5.0, 113.0, 176.0) };
    format!("#{:02x}{:02x}{:02x}", fade(cr), fade(cg), fade(cb))
}

const CELL: f64 = 34.0;
const MARGIN: f64 = 130.0;

pub fn correlation_svg(m: &CorrelationMatrix) -> String {
    let k = m.len() as f64;
    let size = MARGIN + CELL * k + 10.0;
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}" font-family="sans-serif" font-size="10">"#).unwrap();
    for (i, name) in m.names.iter().enumerate() {
        let c = MARGIN + CELL * (i as f64 + 0.5);
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, MARGIN - 6.0, c + 3.0, esc(name)).unwrap();
        writeln!(s, r#"<text transform="translate({c} {}) rotate(-60)">{}</text>"#, MARGIN - 6.0, esc(name)).unwrap();
    }
    for (i, row) in m.values.iter().enumerate() {
        for (j, r) in row.iter().enumerate() {
            let (x, y) = (MARGIN + CELL * j as f64, MARGIN + CELL * i as f64);
            writeln!(s, r##"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{}" stroke="#ffffff"/>"##, cell_colour(*r)).unwrap();
            writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{r:.2}</text>"#, x + CELL / 2.0, y + CELL / 2.0 + 3.0).unwrap();
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_give_empty_bars() {
        let svg = importance_svg("none", &[("a<b".into(), 0.0), ("c".into(), 0.0)]);
        assert_eq!(svg.matches(r#"width="0.00""#).count(), 2);
        assert!(svg.contains("a&lt;b"));
        roxmltree::Document::parse(&svg).unwrap();
    }

    #[test]
    fn largest_bar_spans_full_width() {
        let svg = importance_svg("t", &[("a".into(), 0.6), ("b".into(), 0.3)]);
        assert!(svg.contains(r#"width="360.00""#) && svg.contains(r#"width="180.00""#));
        roxmltree::Document::parse(&svg).unwrap();
    }

    #[test]
    fn heatmap_is_well_formed() {
        let m = CorrelationMatrix { names: vec!["x&y".into(), "z".into()], values: vec![vec![1.0, -0.5], vec![-0.5, 1.0]] };
        let svg = correlation_svg(&m);
        let doc = roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(doc.descendants().filter(|n| n.has_tag_name("rect")).count(), 4);
        assert_eq!(cell_colour(0.0), "#ffffff");
        assert_eq!(cell_colour(1.0), "#ca0020");
        assert_eq!(cell_colour(-1.0), "#0571b0");
    }
}
