//! SVG chord diagrams. Point `p` of `m` sits at angle `-2 pi p / m` (clockwise from the
//! positive real axis); coordinates are printed with six decimals so output is
//! byte-stable.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lamination::{circle_point, Lamination};
use crate::noncrossing::NoncrossingTree;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerStyle {
    pub stroke: String,
    pub width: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dash: Option<String>,
}

impl LayerStyle {
    fn solid(stroke: &str, width: f64) -> Self {
        LayerStyle {
            stroke: stroke.into(),
            width,
            dash: None,
        }
    }

    fn dashed(stroke: &str, width: f64) -> Self {
        LayerStyle {
            dash: Some("4 3".into()),
            ..Self::solid(stroke, width)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderStyle {
    /// Canvas width and height in pixels.
    pub size: u32,
    pub margin: u32,
    pub circle: bool,
    pub circle_width: f64,
    pub layers: BTreeMap<String, LayerStyle>,
}

impl Default for RenderStyle {
    fn default() -> Self {
        let mut layers = BTreeMap::new();
        layers.insert("base".into(), LayerStyle::solid("#000000", 0.6));
        layers.insert("triangulation".into(), LayerStyle::dashed("#d62728", 0.5));
        layers.insert("level-1".into(), LayerStyle::solid("#000000", 0.6));
        for (q, colour) in [(2, "#d62728"), (3, "#1f77b4"), (4, "#2ca02c"), (5, "#9467bd")] {
            layers.insert(format!("level-{q}"), LayerStyle::dashed(colour, 0.5));
        }
        RenderStyle {
            size: 800,
            margin: 10,
            circle: true,
            circle_width: 1.0,
            layers,
        }
    }
}

impl RenderStyle {
    pub fn validate(&self) -> Result<()> {
        if self.size == 0 || 2 * self.margin >= self.size {
            return Err(Error::Domain(format!(
                "canvas {} too small for margin {}",
                self.size, self.margin
            )));
        }
        let widths = std::iter::once(("circle", self.circle_width))
            .chain(self.layers.iter().map(|(k, l)| (k.as_str(), l.width)));
        for (name, w) in widths {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Domain(format!("stroke width of {name} must be > 0")));
            }
        }
        Ok(())
    }

    fn layer(&self, class: &str) -> Result<&LayerStyle> {
        self.layers
            .get(class)
            .ok_or_else(|| Error::Domain(format!("no layer style for class {class:?}")))
    }
}

/// Draws chord layers in order; a chord already drawn by an earlier layer is not drawn
/// again, so the number of `<line>` elements equals the number of distinct chords.
pub fn render_layers(m: usize, layers: &[(&str, &[(usize, usize)])], style: &RenderStyle) -> Result<String> {
    style.validate()?;
    let half = style.size as f64 / 2.0;
    let r = half - style.margin as f64;
    let xy = |p: usize| {
        let (x, y) = circle_point(p, m.max(1));
        (half + r * x, half - r * y)
    };
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">",
        style.size
    );
    if style.circle {
        let _ = writeln!(
            out,
            "<circle cx=\"{half:.6}\" cy=\"{half:.6}\" r=\"{r:.6}\" fill=\"none\" stroke=\"#000000\" stroke-width=\"{:.6}\"/>",
            style.circle_width
        );
    }
    let mut drawn = HashSet::new();
    for &(class, chords) in layers {
        let ls = style.layer(class)?;
        let mut body = String::new();
        for &(p, q) in chords {
            let key = (p.min(q), p.max(q));
            if !drawn.insert(key) {
                continue;
            }
            let ((x1, y1), (x2, y2)) = (xy(key.0), xy(key.1));
            let _ = writeln!(
                body,
                "<line x1=\"{x1:.6}\" y1=\"{y1:.6}\" x2=\"{x2:.6}\" y2=\"{y2:.6}\"/>"
            );
        }
        if body.is_empty() {
            continue;
        }
        let _ = write!(
            out,
            "<g class=\"{class}\" stroke=\"{}\" stroke-width=\"{:.6}\" stroke-linecap=\"round\"",
            ls.stroke, ls.width
        );
        if let Some(d) = &ls.dash {
            let _ = write!(out, " stroke-dasharray=\"{d}\"");
        }
        out.push_str(">\n");
        out.push_str(&body);
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn render(lam: &Lamination, style: &RenderStyle) -> Result<String> {
    render_layers(lam.resolution(), &[("base", lam.chords())], style)
}

pub fn render_nc(nc: &NoncrossingTree, style: &RenderStyle) -> Result<String> {
    render_layers(nc.n(), &[("base", nc.edges())], style)
}

/// Base chords solid, the chords added by triangulating dashed.
pub fn render_triangulated(base: &Lamination, full: &Lamination, style: &RenderStyle) -> Result<String> {
    render_layers(
        full.resolution(),
        &[("base", base.chords()), ("triangulation", full.chords())],
        style,
    )
}
