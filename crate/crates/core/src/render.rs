//! SVG rendering of panels and problem sheets, with optional PNG output.
//!
//! Digits are drawn as stroked polylines from a small built-in glyph set so
//! the vector output never depends on installed fonts. Coordinates are
//! written with two decimals, which keeps files byte-stable.

use std::fmt::Write as _;

use crate::aog::{LayoutAttrs, ProblemType};
use crate::generator::{PanelDoc, PublicProblem};
use crate::layout::{self, figure_vertices, LayoutError, Outline};

pub const PANEL_PX_MIN: u32 = 64;
pub const PANEL_PX_MAX: u32 = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderSpec {
    pub panel_px: u32,
    pub stroke_width: f64,
    /// Digit height in pixels.
    pub font_size: f64,
    /// Border inside the panel, in normalized units.
    pub margin: f64,
}

impl RenderSpec {
    /// Stroke and digit size scaled to the panel size.
    pub fn with_px(panel_px: u32) -> RenderSpec {
        let px = panel_px as f64;
        RenderSpec { panel_px, stroke_width: px / 112.0, font_size: px * 0.055, margin: 0.04 }
    }

    fn check(&self) -> Result<(), RenderError> {
        if !(PANEL_PX_MIN..=PANEL_PX_MAX).contains(&self.panel_px) {
            return Err(RenderError::InvalidSpec(format!(
                "panel_px {} outside [{PANEL_PX_MIN}, {PANEL_PX_MAX}]",
                self.panel_px
            )));
        }
        if !(self.stroke_width > 0.0 && self.font_size > 0.0 && (0.0..0.25).contains(&self.margin)) {
            return Err(RenderError::InvalidSpec("stroke, font size and margin must be positive and small".into()));
        }
        Ok(())
    }
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec::with_px(224)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RenderError {
    #[error("invalid render spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("panel index {0} out of range")]
    NoSuchPanel(usize),
    #[error("rasterization is not compiled in (enable the `raster` feature)")]
    RasterBackendUnavailable,
    #[error("rasterization failed: {0}")]
    Raster(String),
}

/// Glyph width relative to its height.
const GLYPH_ASPECT: f64 = 0.6;
const GLYPH_GAP: f64 = 0.2;

/// Polylines in a `0.6 x 1` box, `y` down.
fn glyph(c: char) -> &'static [&'static [(f64, f64)]] {
    const TL: (f64, f64) = (0.0, 0.0);
    const TR: (f64, f64) = (0.6, 0.0);
    const ML: (f64, f64) = (0.0, 0.5);
    const MR: (f64, f64) = (0.6, 0.5);
    const BL: (f64, f64) = (0.0, 1.0);
    const BR: (f64, f64) = (0.6, 1.0);
    match c {
        '0' => &[&[TL, TR, BR, BL, TL]],
        '1' => &[&[(0.15, 0.2), (0.35, 0.0), (0.35, 1.0)]],
        '2' => &[&[TL, TR, MR, ML, BL, BR]],
        '3' => &[&[TL, TR, BR, BL], &[ML, MR]],
        '4' => &[&[TL, ML, MR], &[TR, BR]],
        '5' => &[&[TR, TL, ML, MR, BR, BL]],
        '6' => &[&[TR, TL, BL, BR, MR, ML]],
        '7' => &[&[TL, TR, BR]],
        '8' => &[&[TL, TR, BR, BL, TL], &[ML, MR]],
        '9' => &[&[MR, ML, TL, TR, BR, BL]],
        _ => &[&[(0.0, 0.15), TL, TR, (0.6, 0.45), (0.3, 0.55), (0.3, 0.75)], &[(0.3, 0.95), (0.3, 1.0)]],
    }
}

/// Stroked path for `text` centered at `(cx, cy)` with glyph height `h`.
fn text_path(text: &str, cx: f64, cy: f64, h: f64) -> String {
    let n = text.chars().count() as f64;
    let width = h * (GLYPH_ASPECT * n + GLYPH_GAP * (n - 1.0));
    let (x0, y0) = (cx - width / 2.0, cy - h / 2.0);
    let mut d = String::new();
    for (i, c) in text.chars().enumerate() {
        let gx = x0 + i as f64 * h * (GLYPH_ASPECT + GLYPH_GAP);
        for line in glyph(c) {
            for (j, (x, y)) in line.iter().enumerate() {
                let cmd = if j == 0 { 'M' } else { 'L' };
                if !d.is_empty() {
                    d.push(' ');
                }
                let _ = write!(d, "{cmd}{:.2} {:.2}", gx + x * h, y0 + y * h);
            }
        }
    }
    d
}

/// Draws one panel into `out` with its top-left corner at `(ox, 0)`.
fn draw_panel(
    out: &mut String,
    ox: f64,
    ptype: ProblemType,
    layout_attrs: &LayoutAttrs,
    panel: &PanelDoc,
    spec: &RenderSpec,
) -> Result<(), RenderError> {
    let geom = layout::geometry(ptype, layout_attrs)?;
    let px = spec.panel_px as f64;
    let inner = 1.0 - 2.0 * spec.margin;
    let map = |x: f64, y: f64| (ox + (spec.margin + inner * x) * px, (spec.margin + inner * y) * px);
    for outline in &geom.outlines {
        match *outline {
            Outline::Figure { shape, cx, cy, r } => match figure_vertices(shape, cx, cy, r) {
                None => {
                    let (x, y) = map(cx, cy);
                    let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{:.2}"/>"#, r * inner * px);
                }
                Some(vs) => {
                    let pts: Vec<String> = vs
                        .iter()
                        .map(|&(x, y)| {
                            let (x, y) = map(x, y);
                            format!("{x:.2},{y:.2}")
                        })
                        .collect();
                    let _ = writeln!(out, r#"<polygon points="{}"/>"#, pts.join(" "));
                }
            },
            Outline::Segment { x1, y1, x2, y2 } => {
                let (a, b) = map(x1, y1);
                let (c, d) = map(x2, y2);
                let _ = writeln!(out, r#"<path d="M{a:.2} {b:.2} L{c:.2} {d:.2}"/>"#);
            }
        }
    }
    for slot in &geom.slots {
        let text = if slot.is_center {
            match panel.shown_constant {
                Some(v) => v.to_string(),
                None => continue,
            }
        } else {
            match panel.values.get(&slot.id) {
                Some(Some(v)) => v.to_string(),
                Some(None) => "?".to_string(),
                None => continue,
            }
        };
        let (x, y) = map(slot.x, slot.y);
        let _ = writeln!(
            out,
            r#"<g class="num" data-slot="{}"><path d="{}"/></g>"#,
            slot.id,
            text_path(&text, x, y, spec.font_size)
        );
    }
    Ok(())
}

fn svg_open(out: &mut String, w: f64, h: f64, spec: &RenderSpec) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
    );
    let _ = writeln!(out, r##"<polygon points="0,0 {w:.0},0 {w:.0},{h:.0} 0,{h:.0}" fill="#fff"/>"##);
    let _ = writeln!(
        out,
        r##"<g fill="none" stroke="#000" stroke-width="{:.2}" stroke-linecap="round" stroke-linejoin="round">"##,
        spec.stroke_width
    );
}

fn svg_close(out: &mut String) {
    out.push_str("</g>\n</svg>\n");
}

/// SVG for panel `index` (0-based) of a problem.
pub fn render_panel(problem: &PublicProblem, index: usize, spec: &RenderSpec) -> Result<String, RenderError> {
    spec.check()?;
    let panel = problem.panels.get(index).ok_or(RenderError::NoSuchPanel(index))?;
    let px = spec.panel_px as f64;
    let mut out = String::new();
    svg_open(&mut out, px, px, spec);
    draw_panel(&mut out, 0.0, problem.problem_type, &problem.layout, panel, spec)?;
    svg_close(&mut out);
    Ok(out)
}

/// All three panels side by side, each framed.
pub fn render_problem_sheet(problem: &PublicProblem, spec: &RenderSpec) -> Result<String, RenderError> {
    spec.check()?;
    let px = spec.panel_px as f64;
    let mut out = String::new();
    svg_open(&mut out, 3.0 * px, px, spec);
    for (i, panel) in problem.panels.iter().enumerate() {
        let ox = i as f64 * px;
        let h = spec.stroke_width / 2.0;
        let _ = writeln!(
            out,
            r#"<polygon points="{:.2},{h:.2} {:.2},{h:.2} {:.2},{:.2} {:.2},{:.2}"/>"#,
            ox + h,
            ox + px - h,
            ox + px - h,
            px - h,
            ox + h,
            px - h
        );
        draw_panel(&mut out, ox, problem.problem_type, &problem.layout, panel, spec)?;
    }
    svg_close(&mut out);
    Ok(out)
}

/// Rasterizes an SVG document to an 8-bit grayscale PNG.
#[cfg(feature = "raster")]
pub fn rasterize(svg: &str) -> Result<Vec<u8>, RenderError> {
    use resvg::{tiny_skia, usvg};

    let tree = usvg::Tree::from_str(svg, &usvg::Options::default()).map_err(|e| RenderError::Raster(e.to_string()))?;
    let size = tree.size().to_int_size();
    let mut pixmap = tiny_skia::Pixmap::new(size.width(), size.height())
        .ok_or_else(|| RenderError::Raster("empty canvas".into()))?;
    pixmap.fill(tiny_skia::Color::WHITE);
    resvg::render(&tree, tiny_skia::Transform::identity(), &mut pixmap.as_mut());
    let gray: Vec<u8> = pixmap
        .pixels()
        .iter()
        .map(|p| {
            let c = p.demultiply();
            ((c.red() as u32 * 299 + c.green() as u32 * 587 + c.blue() as u32 * 114 + 500) / 1000) as u8
        })
        .collect();
    let mut bytes = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut bytes, size.width(), size.height());
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc.write_header().map_err(|e| RenderError::Raster(e.to_string()))?;
        w.write_image_data(&gray).map_err(|e| RenderError::Raster(e.to_string()))?;
    }
    Ok(bytes)
}

#[cfg(not(feature = "raster"))]
pub fn rasterize(_svg: &str) -> Result<Vec<u8>, RenderError> {
    Err(RenderError::RasterBackendUnavailable)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aog::SpecFilter;
    use crate::generator::{fig1_problem, generate_problem};
    use sha2::{Digest, Sha256};

    fn numbers_in(svg: &str) -> Vec<f64> {
        let mut out = Vec::new();
        let mut cur = String::new();
        for c in svg.chars() {
            if c.is_ascii_digit() || c == '.' || c == '-' {
                cur.push(c);
            } else {
                if let Ok(v) = cur.parse::<f64>() {
                    out.push(v);
                }
                cur.clear();
            }
        }
        out
    }

    #[test]
    fn glyph_count_matches_slots() {
        for seed in 0..200 {
            let p = generate_problem(seed, &SpecFilter::default()).unwrap();
            let public = p.public();
            for i in 0..3 {
                let svg = render_panel(&public, i, &RenderSpec::default()).unwrap();
                let expected = p.panels[i].values.len() + usize::from(p.panels[i].shown_constant.is_some());
                assert_eq!(svg.matches(r#"class="num""#).count(), expected);
            }
        }
    }

    #[test]
    fn coordinates_stay_in_viewbox() {
        for seed in 0..200 {
            let public = generate_problem(seed, &SpecFilter::default()).unwrap().public();
            let svg = render_panel(&public, 2, &RenderSpec::default()).unwrap();
            let body = svg.split_once("<g fill").unwrap().1;
            // circles: also check the extent
            for c in body.split("<circle").skip(1) {
                let v = numbers_in(c);
                let (cx, cy, r) = (v[0], v[1], v[2]);
                assert!(cx - r >= 0.0 && cx + r <= 224.0 && cy - r >= 0.0 && cy + r <= 224.0, "seed {seed}");
            }
            assert!(numbers_in(body).iter().all(|&v| (0.0..=224.0).contains(&v)), "seed {seed}");
        }
    }

    #[test]
    fn masked_slot_is_a_question_mark() {
        let svg = render_panel(&fig1_problem().public(), 2, &RenderSpec::default()).unwrap();
        let q = text_path("?", 0.0, 0.0, 10.0);
        assert!(q.starts_with("M-3.00 -3.50"));
        assert_eq!(svg.matches(r#"class="num""#).count(), 2);
    }

    #[test]
    fn spec_bounds() {
        let public = fig1_problem().public();
        assert!(render_panel(&public, 0, &RenderSpec::with_px(32)).is_err());
        assert!(render_panel(&public, 0, &RenderSpec::with_px(2048)).is_err());
        assert!(render_panel(&public, 3, &RenderSpec::default()).is_err());
        assert!(render_panel(&public, 0, &RenderSpec::with_px(64)).is_ok());
    }

    #[test]
    fn output_is_stable() {
        let public = fig1_problem().public();
        let a = render_problem_sheet(&public, &RenderSpec::default()).unwrap();
        let b = render_problem_sheet(&public, &RenderSpec::default()).unwrap();
        assert_eq!(a, b);
        let digest = hex::encode(Sha256::digest(render_panel(&public, 0, &RenderSpec::default()).unwrap()));
        assert_eq!(digest, "ef805e36463edb06ee7c62561c943405fa92c725b65ef8bf5af1e62e43d58151");
    }

    #[cfg(feature = "raster")]
    #[test]
    fn raster_is_grayscale_png() {
        let svg = render_panel(&fig1_problem().public(), 0, &RenderSpec::default()).unwrap();
        let png_bytes = rasterize(&svg).unwrap();
        let dec = png::Decoder::new(std::io::Cursor::new(&png_bytes));
        let mut reader = dec.read_info().unwrap();
        let info = reader.info();
        assert_eq!((info.width, info.height), (224, 224));
        assert_eq!(info.color_type, png::ColorType::Grayscale);
        let mut buf = vec![0; reader.output_buffer_size().unwrap()];
        reader.next_frame(&mut buf).unwrap();
        // some ink, mostly paper
        let dark = buf.iter().filter(|&&v| v < 128).count();
        assert!(dark > 100 && dark < buf.len() / 4, "dark pixels {dark}");
    }
}
