// SPDX-License-Identifier: Apache-2.0

//! SVG renderings of floorplans and HPWL/whitespace scatter plots.

use std::fmt::Write as _;
use std::path::Path;

use crate::cost::{bounding_box, boundary_violations};
use crate::error::Result;
use crate::io::write_text;
use crate::model::{Floorplan, Problem};
use crate::parallel::ParetoPoint;

const CANVAS: f64 = 800.0;
const MARGIN: f64 = 20.0;
const VIOLATION_STROKE: &str = "#d00000";
const GROUP_COLORS: [&str; 6] = ["#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"];

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn group_pattern(s: &mut String, k: usize) {
    let color = GROUP_COLORS[k % GROUP_COLORS.len()];
    let size = 6 + 2 * (k / GROUP_COLORS.len());
    write!(
        s,
        "<pattern id=\"group{k}\" patternUnits=\"userSpaceOnUse\" width=\"{size}\" height=\"{size}\">\
         <rect width=\"{size}\" height=\"{size}\" fill=\"{color}\" fill-opacity=\"0.25\"/>"
    )
    .unwrap();
    match k % 3 {
        0 => write!(s, "<circle cx=\"{0}\" cy=\"{0}\" r=\"1.5\" fill=\"{color}\"/>", size / 2).unwrap(),
        1 => write!(s, "<path d=\"M0 {0} H{1}\" stroke=\"{color}\" stroke-width=\"1.5\"/>", size / 2, size)
            .unwrap(),
        _ => write!(s, "<path d=\"M{0} 0 V{1}\" stroke=\"{color}\" stroke-width=\"1.5\"/>", size / 2, size)
            .unwrap(),
    }
    s.push_str("</pattern>\n");
}

/// Renders `fp`. Boundary violators are stroked red, each grouping
/// constraint gets its own fill pattern, preplaced blocks are hatched and
/// the fixed outline, if any, is a dashed frame.
pub fn svg_string(fp: &Floorplan, problem: &Problem) -> String {
    let cs = &problem.constraints;
    let bbox = bounding_box(fp);
    let mut extent_w = bbox.map_or(1.0, |b| b.right());
    let mut extent_h = bbox.map_or(1.0, |b| b.top());
    if let Some(o) = &problem.outline {
        extent_w = extent_w.max(o.w);
        extent_h = extent_h.max(o.h);
    }
    for r in cs.preplaced.values() {
        extent_w = extent_w.max(r.right());
        extent_h = extent_h.max(r.top());
    }
    let extent = extent_w.max(extent_h).max(f64::MIN_POSITIVE);
    let scale = (CANVAS - 2.0 * MARGIN) / extent;
    let width = extent_w * scale + 2.0 * MARGIN;
    let height = extent_h * scale + 2.0 * MARGIN;
    let sx = |x: f64| MARGIN + x * scale;
    let sy = |y: f64| height - MARGIN - y * scale;

    let violators = boundary_violations(fp, cs);
    let mut group_of = vec![None; fp.len()];
    for (k, g) in cs.groups.iter().enumerate() {
        for &b in g {
            if b < group_of.len() {
                group_of[b] = Some(k);
            }
        }
    }

    let mut s = String::new();
    writeln!(s, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>").unwrap();
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width:.6}\" height=\"{height:.6}\" \
         viewBox=\"0 0 {width:.6} {height:.6}\">"
    )
    .unwrap();
    s.push_str("<defs>\n");
    s.push_str(
        "<pattern id=\"hatch\" patternUnits=\"userSpaceOnUse\" width=\"8\" height=\"8\" \
         patternTransform=\"rotate(45)\"><rect width=\"8\" height=\"8\" fill=\"#dddddd\"/>\
         <path d=\"M0 0 V8\" stroke=\"#555555\" stroke-width=\"2\"/></pattern>\n",
    );
    for k in 0..cs.groups.len() {
        group_pattern(&mut s, k);
    }
    s.push_str("</defs>\n");
    writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>").unwrap();

    if let Some(o) = &problem.outline {
        writeln!(
            s,
            "<rect class=\"outline\" x=\"{:.6}\" y=\"{:.6}\" width=\"{:.6}\" height=\"{:.6}\" \
             fill=\"none\" stroke=\"#444444\" stroke-width=\"1.5\" stroke-dasharray=\"8 4\"/>",
            sx(0.0),
            sy(o.h),
            o.w * scale,
            o.h * scale
        )
        .unwrap();
    }

    let font = (extent * scale / 60.0).clamp(6.0, 14.0);
    for (b, r) in fp.placements.iter().enumerate() {
        let fill = if cs.preplaced.contains_key(&b) {
            "url(#hatch)".to_string()
        } else if let Some(k) = group_of[b] {
            format!("url(#group{k})")
        } else {
            "#f2f2f2".to_string()
        };
        let violating = violators.binary_search(&b).is_ok();
        let (stroke, sw, class) = if violating {
            (VIOLATION_STROKE, 2.5, "block violation")
        } else {
            ("#000000", 0.8, "block")
        };
        let name = problem.blocks.get(b).map_or_else(|| format!("b{b}"), |blk| escape(&blk.name));
        writeln!(
            s,
            "<g><rect class=\"{class}\" x=\"{:.6}\" y=\"{:.6}\" width=\"{:.6}\" height=\"{:.6}\" \
             fill=\"{fill}\" stroke=\"{stroke}\" stroke-width=\"{sw}\"><title>{name}</title></rect>\
             <text x=\"{:.6}\" y=\"{:.6}\" font-size=\"{font:.6}\" font-family=\"sans-serif\" \
             text-anchor=\"middle\" dominant-baseline=\"middle\">{name}</text></g>",
            sx(r.x),
            sy(r.top()),
            r.w * scale,
            r.h * scale,
            sx(r.x + 0.5 * r.w),
            sy(r.y + 0.5 * r.h),
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

pub fn render_svg(fp: &Floorplan, problem: &Problem, path: &Path) -> Result<()> {
    write_text(path, &svg_string(fp, problem))
}

/// Scatter of every solution as (HPWL, whitespace %). Legal points are
/// dots, illegal ones crosses; the front is joined by a line.
pub fn pareto_svg(points: &[(f64, f64, bool)], front: &[ParetoPoint]) -> String {
    let (w, h) = (640.0, 480.0);
    let (left, right, top, bottom) = (70.0, 20.0, 20.0, 50.0);
    let finite = points.iter().filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in finite {
        x0 = x0.min(p.0);
        x1 = x1.max(p.0);
        y0 = y0.min(p.1);
        y1 = y1.max(p.1);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 <= 0.0 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 <= 0.0 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
    let py = |y: f64| h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom);

    let mut s = String::new();
    writeln!(s, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>").unwrap();
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    )
    .unwrap();
    writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>").unwrap();
    writeln!(
        s,
        "<path d=\"M{left} {top} V{:.6} H{:.6}\" fill=\"none\" stroke=\"black\"/>",
        h - bottom,
        w - right
    )
    .unwrap();
    for (x, y, anchor, text) in [
        (left, h - bottom + 16.0, "start", format!("{x0:.6}")),
        (w - right, h - bottom + 16.0, "end", format!("{x1:.6}")),
        ((left + w - right) / 2.0, h - 10.0, "middle", "HPWL".to_string()),
    ] {
        writeln!(s, "<text x=\"{x:.6}\" y=\"{y:.6}\" font-size=\"11\" text-anchor=\"{anchor}\">{text}</text>")
            .unwrap();
    }
    for (y, text) in [(h - bottom, format!("{y0:.6}")), (top + 8.0, format!("{y1:.6}"))] {
        writeln!(s, "<text x=\"{:.6}\" y=\"{y:.6}\" font-size=\"11\" text-anchor=\"end\">{text}</text>", left - 4.0)
            .unwrap();
    }
    writeln!(
        s,
        "<text x=\"14\" y=\"{:.6}\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.6})\">whitespace %</text>",
        (top + h - bottom) / 2.0,
        (top + h - bottom) / 2.0
    )
    .unwrap();
    for &(x, y, legal) in points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
        let (cx, cy) = (px(x), py(y));
        if legal {
            writeln!(s, "<circle class=\"legal\" cx=\"{cx:.6}\" cy=\"{cy:.6}\" r=\"3\" fill=\"#1f77b4\"/>").unwrap();
        } else {
            writeln!(
                s,
                "<path class=\"illegal\" d=\"M{:.6} {:.6} l6 6 m0 -6 l-6 6\" stroke=\"{VIOLATION_STROKE}\" stroke-width=\"1.5\"/>",
                cx - 3.0,
                cy - 3.0
            )
            .unwrap();
        }
    }
    if !front.is_empty() {
        let pts: Vec<String> =
            front.iter().map(|p| format!("{:.6},{:.6}", px(p.hpwl), py(p.whitespace_pct))).collect();
        writeln!(
            s,
            "<polyline class=\"front\" points=\"{}\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"1.5\"/>",
            pts.join(" ")
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Block, Boundary, ConstraintSet, Outline, Rect};

    fn count(doc: &roxmltree::Document, pred: impl Fn(&roxmltree::Node) -> bool) -> usize {
        doc.descendants().filter(|n| pred(n)).count()
    }

    #[test]
    fn single_block() {
        let p = Problem { blocks: vec![Block::hard(0, "solo<&>", 2.0, 1.0)], ..Default::default() };
        let fp = Floorplan::new(vec![Rect::new(0.0, 0.0, 2.0, 1.0)]);
        let text = svg_string(&fp, &p);
        let doc = roxmltree::Document::parse(&text).unwrap();
        assert_eq!(count(&doc, |n| n.has_tag_name("rect") && n.attribute("class") == Some("block")), 1);
        let label = doc.descendants().find(|n| n.has_tag_name("text")).unwrap();
        assert_eq!(label.text(), Some("solo<&>"));
    }

    #[test]
    fn five_violators_are_red() {
        // a row of 7; five of them demand the top edge
        let blocks: Vec<Block> = (0..7).map(|i| Block::hard(i, format!("b{i}"), 1.0, 1.0)).collect();
        let mut p = Problem { blocks, ..Default::default() };
        let mut cs = ConstraintSet::default();
        for b in 0..5 {
            cs.boundary.insert(b, Boundary::Top);
        }
        cs.groups.push(vec![5, 6]);
        p.set_constraints(cs);
        p.outline = Some(Outline { w: 8.0, h: 3.0 });
        let mut rects: Vec<Rect> = (0..7).map(|i| Rect::new(i as f64, 0.0, 1.0, 1.0)).collect();
        rects[6] = Rect::new(0.0, 1.0, 1.0, 1.0);
        let fp = Floorplan::new(rects);
        let text = svg_string(&fp, &p);
        let doc = roxmltree::Document::parse(&text).unwrap();
        assert_eq!(
            count(&doc, |n| n.has_tag_name("rect") && n.attribute("stroke") == Some(VIOLATION_STROKE)),
            5
        );
        assert_eq!(count(&doc, |n| n.attribute("fill") == Some("url(#group0)")), 2);
        assert_eq!(count(&doc, |n| n.attribute("class") == Some("outline")), 1);
    }

    #[test]
    fn preplaced_is_hatched() {
        let blocks = vec![Block::hard(0, "a", 1.0, 1.0), Block::hard(1, "b", 1.0, 1.0)];
        let mut p = Problem { blocks, ..Default::default() };
        let mut cs = ConstraintSet::default();
        cs.preplaced.insert(1, Rect::new(3.0, 3.0, 1.0, 1.0));
        p.set_constraints(cs);
        let fp = Floorplan::new(vec![Rect::new(0.0, 0.0, 1.0, 1.0), Rect::new(3.0, 3.0, 1.0, 1.0)]);
        let text = svg_string(&fp, &p);
        let doc = roxmltree::Document::parse(&text).unwrap();
        assert_eq!(count(&doc, |n| n.attribute("fill") == Some("url(#hatch)")), 1);
        assert_eq!(text, svg_string(&fp, &p));
    }

    #[test]
    fn scatter_is_valid_xml() {
        let pts = [(10.0, 5.0, true), (12.0, 3.0, true), (9.0, 1.0, false)];
        let front = vec![
            ParetoPoint { hpwl: 10.0, whitespace_pct: 5.0, index: 0, seed: 0 },
            ParetoPoint { hpwl: 12.0, whitespace_pct: 3.0, index: 1, seed: 1 },
        ];
        let text = pareto_svg(&pts, &front);
        let doc = roxmltree::Document::parse(&text).unwrap();
        assert_eq!(count(&doc, |n| n.attribute("class") == Some("legal")), 2);
        assert_eq!(count(&doc, |n| n.attribute("class") == Some("illegal")), 1);
        assert!(roxmltree::Document::parse(&pareto_svg(&[], &[])).is_ok());
    }
}
