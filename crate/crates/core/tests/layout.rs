use miv_cellkit::layout::{
    cell_layout_area, library_area_summary, transistor_footprint, Layer, ProcessParams, TransistorLayout,
};
use miv_cellkit::stdcells::CellSpec;
use miv_cellkit::Variant;
use proptest::prelude::*;

fn all_footprints(p: &ProcessParams) -> Vec<TransistorLayout> {
    let mut out = Vec::new();
    for v in Variant::ALL {
        for ext in [false, true] {
            out.push(transistor_footprint(v, p, ext).unwrap());
        }
    }
    out
}

fn check_geometry(fp: &TransistorLayout, w_src: f64) {
    assert_eq!(fp.total_channel_width(), w_src, "{:?}", fp.variant);
    for r in &fp.rects {
        assert!(r.within(fp.width, fp.height), "{:?}: {r:?} outside bbox", fp.variant);
        assert!(r.w > 0.0 && r.h > 0.0);
    }
    let active: Vec<_> = fp.rects.iter().filter(|r| r.layer == Layer::Active).collect();
    for (i, a) in active.iter().enumerate() {
        for b in &active[i + 1..] {
            assert!(!a.overlaps(b), "{:?}: active overlap {a:?} {b:?}", fp.variant);
        }
    }
    assert!(fp.rects.iter().any(|r| r.layer == Layer::Gate));
    if fp.variant.is_miv() {
        assert!(fp.rects.iter().any(|r| r.layer == Layer::Miv));
    }
}

#[test]
fn geometry_invariants_at_table_values() {
    let p = ProcessParams::default();
    for fp in all_footprints(&p) {
        check_geometry(&fp, 192.0);
    }
    let ch2 = transistor_footprint(Variant::Ch2, &p, false).unwrap();
    assert_eq!(ch2.channel_widths, vec![96.0, 96.0]);
    let ch4 = transistor_footprint(Variant::Ch4, &p, false).unwrap();
    assert_eq!(ch4.channel_widths, vec![48.0; 4]);
}

#[test]
fn traditional_rectangle_sum() {
    let p = ProcessParams::default();
    let fp = transistor_footprint(Variant::Traditional, &p, false).unwrap();
    // source + spacer + gate + spacer + drain
    assert_eq!(fp.width, 48.0 + 10.0 + 24.0 + 10.0 + 48.0);
    assert_eq!(fp.height, 192.0);
}

#[test]
fn miv_variants_beat_external_miv_on_top_layer() {
    let p = ProcessParams::default();
    for cell in CellSpec::library() {
        let base = cell_layout_area(&cell, Variant::Traditional, &p).unwrap();
        for v in [Variant::Ch1, Variant::Ch2, Variant::Ch4] {
            let e = cell_layout_area(&cell, v, &p).unwrap();
            assert!(e.top_nm2 < base.top_nm2, "{} {v}", cell.name);
            assert!(e.substrate_nm2 <= 2.0 * e.cell_area_nm2);
            assert_eq!(e.bottom_nm2, base.bottom_nm2);
        }
        assert!(base.substrate_nm2 <= 2.0 * base.cell_area_nm2);
    }
}

#[test]
fn library_reductions_in_band() {
    let s = library_area_summary(&CellSpec::library(), &ProcessParams::default()).unwrap();
    assert_eq!(s.entries.len(), 56);
    assert_eq!(s.variant(Variant::Traditional).unwrap().mean_reduction_pct, 0.0);
    for e in &s.entries {
        if e.variant == Variant::Traditional {
            assert_eq!(e.reduction_pct, 0.0);
        } else {
            assert!((1.0..=35.0).contains(&e.reduction_pct), "{} {}: {}", e.cell, e.variant, e.reduction_pct);
        }
    }
    for v in [Variant::Ch1, Variant::Ch2, Variant::Ch4] {
        assert!(s.variant(v).unwrap().mean_reduction_pct > 0.0);
    }
    let csv = s.to_csv();
    assert_eq!(csv.lines().count(), 57);
    assert!(csv.starts_with("cell,variant,top_nm2,bottom_nm2,cell_area_nm2,substrate_nm2,reduction_pct\n"));
}

fn bump(p: &ProcessParams, field: usize, delta: f64) -> ProcessParams {
    let mut q = *p;
    match field {
        0 => q.t_spacer += delta,
        1 => q.t_miv += delta,
        2 => q.l_src += delta,
        3 => q.w_src += 4.0 * delta.round().max(1.0),
        4 => q.l_g += delta,
        5 => q.m1_space += delta,
        6 => q.via += delta,
        7 => q.m_width += delta,
        8 => q.t_si += delta,
        9 => q.h_src += delta,
        10 => q.t_ox += delta,
        _ => q.t_box += delta,
    }
    q
}

fn random_params() -> impl Strategy<Value = ProcessParams> {
    (1.0f64..40.0, 1.0f64..60.0, 1.0f64..100.0, 1usize..100, 1.0f64..60.0, 1.0f64..50.0, 1.0f64..50.0).prop_map(
        |(t_spacer, t_miv, l_src, wq, l_g, m1_space, via)| ProcessParams {
            t_spacer,
            t_miv,
            l_src,
            w_src: 4.0 * wq as f64,
            l_g,
            m1_space,
            via,
            ..Default::default()
        },
    )
}

proptest! {
    #[test]
    fn area_monotone_in_every_length(p in random_params(), field in 0usize..12, delta in 0.0f64..30.0) {
        let q = bump(&p, field, delta);
        for v in Variant::ALL {
            for ext in [false, true] {
                let a = transistor_footprint(v, &p, ext).unwrap().area();
                let b = transistor_footprint(v, &q, ext).unwrap().area();
                prop_assert!(b >= a, "{:?} field {}: {} -> {}", v, field, a, b);
            }
        }
    }

    #[test]
    fn geometry_invariants_hold_for_random_params(p in random_params()) {
        for fp in all_footprints(&p) {
            check_geometry(&fp, p.w_src);
        }
    }

    #[test]
    fn footprints_are_pure(p in random_params()) {
        for v in Variant::ALL {
            prop_assert_eq!(transistor_footprint(v, &p, true).unwrap(), transistor_footprint(v, &p, true).unwrap());
        }
    }
}
