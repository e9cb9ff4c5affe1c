//! Rectangle footprints of the four transistor variants and two-layer cell
//! area metrics. All lengths are in nanometres.
//!
//! Footprints are laid out with the channel length along x and the channel
//! width along y. `g = max(l_g, t_miv)` is the width of a gate column that
//! also holds an MIV.
//!
//! | variant     | x extent                                  | y extent              |
//! |-------------|-------------------------------------------|-----------------------|
//! | traditional | 2·l_src + l_g + 2·t_spacer (+ m1_space + t_miv with an external MIV) | w_src |
//! | ch1         | 2·l_src + l_g + 2·t_spacer + t_miv        | w_src                 |
//! | ch2         | 2·l_src + 2·t_spacer + g                  | w_src + t_miv         |
//! | ch4         | 2·a + 2·t_spacer + g, a = max(l_src, w_src/4) | same as x         |

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stdcells::CellSpec;
use crate::types::Variant;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessParams {
    pub t_si: f64,
    pub h_src: f64,
    pub t_ox: f64,
    /// Source/drain doping in cm^-3; metadata only.
    pub n_src: f64,
    pub t_spacer: f64,
    /// Buried oxide thickness; metadata only.
    pub t_box: f64,
    pub t_miv: f64,
    pub l_src: f64,
    pub w_src: f64,
    pub l_g: f64,
    pub m1_space: f64,
    pub via: f64,
    pub m_width: f64,
}

impl Default for ProcessParams {
    fn default() -> Self {
        ProcessParams {
            t_si: 7.0,
            h_src: 7.0,
            t_ox: 1.0,
            n_src: 1e19,
            t_spacer: 10.0,
            t_box: 100.0,
            t_miv: 25.0,
            l_src: 48.0,
            w_src: 192.0,
            l_g: 24.0,
            m1_space: 24.0,
            via: 24.0,
            m_width: 24.0,
        }
    }
}

impl ProcessParams {
    pub fn validate(&self) -> Result<()> {
        let lengths = [
            ("t_si", self.t_si),
            ("h_src", self.h_src),
            ("t_ox", self.t_ox),
            ("n_src", self.n_src),
            ("t_spacer", self.t_spacer),
            ("t_box", self.t_box),
            ("t_miv", self.t_miv),
            ("l_src", self.l_src),
            ("w_src", self.w_src),
            ("l_g", self.l_g),
            ("m1_space", self.m1_space),
            ("via", self.via),
            ("m_width", self.m_width),
        ];
        for (name, v) in lengths {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        if (self.w_src / 4.0).fract() != 0.0 {
            return Err(Error::param("w_src", format!("{} nm is not divisible by 4", self.w_src)));
        }
        Ok(())
    }

    fn gate_column(&self) -> f64 {
        self.l_g.max(self.t_miv)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Active,
    Gate,
    Miv,
    Contact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub layer: Layer,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    fn new(layer: Layer, x: f64, y: f64, w: f64, h: f64) -> Self {
        Rect { layer, x, y, w, h }
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    /// Interiors intersect (touching edges do not count).
    pub fn overlaps(&self, o: &Rect) -> bool {
        self.x < o.x + o.w && o.x < self.x + self.w && self.y < o.y + o.h && o.y < self.y + self.h
    }

    /// Inside `[0, width] x [0, height]`, up to rounding of the centring
    /// arithmetic.
    pub fn within(&self, width: f64, height: f64) -> bool {
        let tol = 1e-9 * width.max(height);
        self.x >= -tol && self.y >= -tol && self.x + self.w <= width + tol && self.y + self.h <= height + tol
    }

    /// A contact of side `via`, shrunk if necessary, centred on this rectangle.
    fn centered_contact(&self, via: f64) -> Rect {
        let w = via.min(self.w);
        let h = via.min(self.h);
        Rect::new(
            Layer::Contact,
            self.x + 0.5 * (self.w - w),
            self.y + 0.5 * (self.h - h),
            w,
            h,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransistorLayout {
    pub variant: Variant,
    pub external_gate_miv: bool,
    pub rects: Vec<Rect>,
    /// Width of every channel; sums to `w_src`.
    pub channel_widths: Vec<f64>,
    pub width: f64,
    pub height: f64,
}

impl TransistorLayout {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn total_channel_width(&self) -> f64 {
        self.channel_widths.iter().sum()
    }
}

/// Footprint of one transistor. `external_gate_miv` adds a separate gate
/// MIV with an M1-spacing keep-out; it only applies to the traditional
/// device (the MIV variants carry the MIV inside the gate).
pub fn transistor_footprint(
    variant: Variant,
    p: &ProcessParams,
    external_gate_miv: bool,
) -> Result<TransistorLayout> {
    p.validate()?;
    let g = p.gate_column();
    let mut rects = Vec::new();
    let (width, height, channel_widths) = match variant {
        Variant::Traditional | Variant::Ch1 => {
            let miv_in_gate = if variant == Variant::Ch1 { p.t_miv } else { 0.0 };
            let core = 2.0 * p.l_src + p.l_g + 2.0 * p.t_spacer + miv_in_gate;
            let gate_x = p.l_src + p.t_spacer;
            rects.push(Rect::new(Layer::Active, 0.0, 0.0, p.l_src, p.w_src));
            rects.push(Rect::new(Layer::Gate, gate_x, 0.0, p.l_g, p.w_src));
            if variant == Variant::Ch1 {
                // MIV abuts the gate with no spacing.
                let y = 0.5 * (p.w_src - p.t_miv).max(0.0);
                rects.push(Rect::new(Layer::Miv, gate_x + p.l_g, y, p.t_miv, p.t_miv.min(p.w_src)));
            }
            rects.push(Rect::new(Layer::Active, core - p.l_src, 0.0, p.l_src, p.w_src));
            let mut width = core;
            if variant == Variant::Traditional && external_gate_miv {
                let y = 0.5 * (p.w_src - p.t_miv).max(0.0);
                rects.push(Rect::new(
                    Layer::Miv,
                    core + p.m1_space,
                    y,
                    p.t_miv,
                    p.t_miv.min(p.w_src),
                ));
                width += p.m1_space + p.t_miv;
            }
            (width, p.w_src, vec![p.w_src])
        }
        Variant::Ch2 => {
            let half = 0.5 * p.w_src;
            let width = 2.0 * p.l_src + 2.0 * p.t_spacer + g;
            let height = p.w_src + p.t_miv;
            let gate_x = p.l_src + p.t_spacer;
            for y in [0.0, half + p.t_miv] {
                rects.push(Rect::new(Layer::Active, 0.0, y, p.l_src, half));
                rects.push(Rect::new(Layer::Active, width - p.l_src, y, p.l_src, half));
            }
            rects.push(Rect::new(Layer::Gate, gate_x, 0.0, g, height));
            rects.push(Rect::new(Layer::Miv, gate_x + 0.5 * (g - p.t_miv), half, p.t_miv, p.t_miv));
            (width, height, vec![half, half])
        }
        Variant::Ch4 => {
            let quarter = 0.25 * p.w_src;
            let a = p.l_src.max(quarter);
            let side = 2.0 * a + 2.0 * p.t_spacer + g;
            let bar = a + p.t_spacer;
            for (x, y) in [(0.0, 0.0), (side - a, 0.0), (0.0, side - a), (side - a, side - a)] {
                rects.push(Rect::new(Layer::Active, x, y, a, a));
            }
            rects.push(Rect::new(Layer::Gate, bar, 0.0, g, side));
            rects.push(Rect::new(Layer::Gate, 0.0, bar, side, g));
            let c = bar + 0.5 * (g - p.t_miv);
            rects.push(Rect::new(Layer::Miv, c, c, p.t_miv, p.t_miv));
            (side, side, vec![quarter; 4])
        }
    };
    let contacts: Vec<Rect> = rects
        .iter()
        .filter(|r| r.layer == Layer::Active)
        .map(|r| r.centered_contact(p.via))
        .collect();
    rects.extend(contacts);
    Ok(TransistorLayout {
        variant,
        external_gate_miv: external_gate_miv && variant == Variant::Traditional,
        rects,
        channel_widths,
        width,
        height,
    })
}

/// Single-row placement of `count` copies of a footprint with `m1_space`
/// between neighbours. Returns the (width, height) bounding box.
fn row_bbox(fp: &TransistorLayout, count: usize, p: &ProcessParams) -> (f64, f64) {
    if count == 0 {
        return (0.0, 0.0);
    }
    let n = count as f64;
    (n * fp.width + (n - 1.0) * p.m1_space, fp.height)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellAreaEntry {
    pub cell: String,
    pub variant: Variant,
    pub top_nm2: f64,
    pub bottom_nm2: f64,
    pub cell_area_nm2: f64,
    pub substrate_nm2: f64,
    /// `100 * (1 - cell_area / cell_area_traditional)`.
    pub reduction_pct: f64,
    /// Same for the substrate area.
    pub substrate_reduction_pct: f64,
}

/// Raw areas of one cell: n devices of `variant` on the top layer, p devices
/// traditional on the bottom layer. Traditional top-layer devices get an
/// external gate MIV.
fn raw_cell_area(cell: &CellSpec, variant: Variant, p: &ProcessParams) -> Result<(f64, f64, f64, f64)> {
    let top_fp = transistor_footprint(variant, p, variant == Variant::Traditional)?;
    let bottom_fp = transistor_footprint(Variant::Traditional, p, false)?;
    let (tw, th) = row_bbox(&top_fp, cell.n_devices(), p);
    let (bw, bh) = row_bbox(&bottom_fp, cell.p_devices(), p);
    let cell_area = tw.max(bw) * th.max(bh);
    Ok((tw * th, bw * bh, cell_area, tw * th + bw * bh))
}

pub fn cell_layout_area(cell: &CellSpec, variant: Variant, p: &ProcessParams) -> Result<CellAreaEntry> {
    let (top, bottom, cell_area, substrate) = raw_cell_area(cell, variant, p)?;
    let (_, _, base_cell, base_sub) = raw_cell_area(cell, Variant::Traditional, p)?;
    Ok(CellAreaEntry {
        cell: cell.name.to_string(),
        variant,
        top_nm2: top,
        bottom_nm2: bottom,
        cell_area_nm2: cell_area,
        substrate_nm2: substrate,
        reduction_pct: 100.0 * (1.0 - cell_area / base_cell),
        substrate_reduction_pct: 100.0 * (1.0 - substrate / base_sub),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantAreaSummary {
    pub variant: Variant,
    pub mean_reduction_pct: f64,
    pub mean_substrate_reduction_pct: f64,
    pub max_substrate_reduction_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaSummary {
    pub entries: Vec<CellAreaEntry>,
    pub variants: Vec<VariantAreaSummary>,
}

impl AreaSummary {
    pub fn entry(&self, cell: &str, variant: Variant) -> Option<&CellAreaEntry> {
        self.entries.iter().find(|e| e.cell == cell && e.variant == variant)
    }

    pub fn variant(&self, variant: Variant) -> Option<&VariantAreaSummary> {
        self.variants.iter().find(|v| v.variant == variant)
    }

    /// `cell,variant,top_nm2,bottom_nm2,cell_area_nm2,substrate_nm2,reduction_pct`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cell,variant,top_nm2,bottom_nm2,cell_area_nm2,substrate_nm2,reduction_pct\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{},{},{:.6}\n",
                e.cell, e.variant, e.top_nm2, e.bottom_nm2, e.cell_area_nm2, e.substrate_nm2, e.reduction_pct
            ));
        }
        out
    }
}

/// Areas of `cells` under all four variants, with per-variant averages.
pub fn library_area_summary(cells: &[CellSpec], p: &ProcessParams) -> Result<AreaSummary> {
    let mut entries = Vec::new();
    for cell in cells {
        for v in Variant::ALL {
            entries.push(cell_layout_area(cell, v, p)?);
        }
    }
    let variants = Variant::ALL
        .iter()
        .map(|&v| {
            let sel: Vec<&CellAreaEntry> = entries.iter().filter(|e| e.variant == v).collect();
            let n = sel.len().max(1) as f64;
            VariantAreaSummary {
                variant: v,
                mean_reduction_pct: sel.iter().map(|e| e.reduction_pct).sum::<f64>() / n,
                mean_substrate_reduction_pct: sel.iter().map(|e| e.substrate_reduction_pct).sum::<f64>() / n,
                max_substrate_reduction_pct: sel.iter().map(|e| e.substrate_reduction_pct).fold(0.0, f64::max),
            }
        })
        .collect();
    Ok(AreaSummary { entries, variants })
}
