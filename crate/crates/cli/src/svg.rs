//! Minimal standalone SVG heatmaps.

use std::fmt::Write;

const CELL: usize = 14;
const ROW_LABEL_WIDTH: usize = 160;
const COL_LABEL_HEIGHT: usize = 120;

/// How cell values map to colour.
#[derive(Debug, Clone, Copy)]
pub enum Scale {
    /// Values in `[-1, 1]`: blue through white to red.
    Diverging,
    /// Values in `[0, max]`: white to red.
    Sequential,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn colour(v: Option<f64>, scale: Scale, max: f64) -> String {
    let Some(v) = v.filter(|v| v.is_finite()) else {
        return "#cccccc".into();
    };
    let (r, g, b) = match scale {
        Scale::Diverging => {
            let t = v.clamp(-1.0, 1.0);
            let fade = (255.0 * (1.0 - t.abs())).round() as u8;
            if t >= 0.0 {
                (255, fade, fade)
            } else {
                (fade, fade, 255)
            }
        }
        Scale::Sequential => {
            let t = if max > 0.0 { (v / max).clamp(0.0, 1.0) } else { 0.0 };
            let fade = (255.0 * (1.0 - t)).round() as u8;
            (255, fade, fade)
        }
    };
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// `values[r][c]` drawn as a grid with labelled rows and columns.
pub fn heatmap(rows: &[String], cols: &[String], values: &[Vec<Option<f64>>], scale: Scale) -> String {
    let max = values
        .iter()
        .flatten()
        .filter_map(|v| *v)
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max);
    let width = ROW_LABEL_WIDTH + CELL * cols.len() + 10;
    let height = COL_LABEL_HEIGHT + CELL * rows.len() + 10;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="10">"#
    );
    for (c, name) in cols.iter().enumerate() {
        let x = ROW_LABEL_WIDTH + c * CELL + CELL / 2;
        let y = COL_LABEL_HEIGHT - 4;
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{y}" transform="rotate(-60 {x} {y})">{}</text>"#,
            escape(name)
        );
    }
    for (r, name) in rows.iter().enumerate() {
        let y = COL_LABEL_HEIGHT + r * CELL;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            ROW_LABEL_WIDTH - 4,
            y + CELL - 3,
            escape(name)
        );
        for (c, v) in values[r].iter().enumerate() {
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{y}" width="{CELL}" height="{CELL}" fill="{}"/>"#,
                ROW_LABEL_WIDTH + c * CELL,
                colour(*v, scale, max)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colours() {
        assert_eq!(colour(Some(1.0), Scale::Diverging, 0.0), "#ff0000");
        assert_eq!(colour(Some(-1.0), Scale::Diverging, 0.0), "#0000ff");
        assert_eq!(colour(Some(0.0), Scale::Diverging, 0.0), "#ffffff");
        assert_eq!(colour(None, Scale::Sequential, 1.0), "#cccccc");
        assert_eq!(colour(Some(2.0), Scale::Sequential, 4.0), "#ff8080");
    }

    #[test]
    fn one_rect_per_cell() {
        let s = heatmap(
            &["a".into(), "b<".into()],
            &["c1".into(), "c2".into(), "c3".into()],
            &vec![vec![Some(0.5); 3]; 2],
            Scale::Diverging,
        );
        assert_eq!(s.matches("<rect").count(), 6);
        assert!(s.contains("b&lt;"));
    }
}
