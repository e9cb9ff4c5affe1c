//! Device-model checks against independent oracles.
//!
//! Golden values come from `tests/oracle/device_golden.py` (mpmath, 50
//! digits). Conductances are checked against central differences of the
//! current, gate charge against a dense trapezoid integral of the
//! capacitance.

use miv_cellkit::fixtures;
use miv_cellkit::model::{
    conductances, drain_current, gate_capacitance, gate_capacitance_asymptote, gate_charge, source_current,
    BiasPoint, ModelConstants, ModelParams, PHI_T,
};
use miv_cellkit::{Polarity, Variant};
use proptest::prelude::*;

const ID_GOLDEN_1V_1V: f64 = 3.7738233019981523e-4;
const ID_GOLDEN_0V_1V: f64 = 3.1218653971261341e-9;
const ID_GOLDEN_06V_005V: f64 = 4.6827504292606273e-5;
const CG_GOLDEN_02V: f64 = 1.5687728549950604e-16;
const Q_GOLDEN_1V: f64 = 2.654948104517948e-16;
const GM_GOLDEN_08_1: f64 = 6.3311657053234203e-4;
const GDS_GOLDEN_08_1: f64 = 5.2091403402861192e-5;

fn p0() -> ModelParams {
    fixtures::true_params(Variant::Traditional, Polarity::N)
}

fn c() -> ModelConstants {
    fixtures::constants()
}

fn id(p: &ModelParams, vgs: f64, vds: f64) -> f64 {
    drain_current(p, &c(), BiasPoint::new(vgs, vds)).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn golden_drain_currents() {
    let p = p0();
    assert!(rel(id(&p, 1.0, 1.0), ID_GOLDEN_1V_1V) < 1e-12);
    assert!(rel(id(&p, 0.0, 1.0), ID_GOLDEN_0V_1V) < 1e-11);
    assert!(rel(id(&p, 0.6, 0.05), ID_GOLDEN_06V_005V) < 1e-12);
}

#[test]
fn p_type_mirror_of_golden() {
    let mut p = p0();
    p.polarity = Polarity::P;
    assert_eq!(id(&p, -1.0, -1.0), -id(&p0(), 1.0, 1.0));
    let is = source_current(&p, &c(), BiasPoint::new(-1.0, -1.0)).unwrap();
    assert_eq!(is, id(&p0(), 1.0, 1.0));
}

#[test]
fn source_current_of_golden() {
    let is = source_current(&p0(), &c(), BiasPoint::new(1.0, 1.0)).unwrap();
    assert!(rel(-is, ID_GOLDEN_1V_1V) < 1e-12);
    assert_eq!(source_current(&p0(), &c(), BiasPoint::new(0.7, 0.0)).unwrap(), 0.0);
}

#[test]
fn mirroring_holds_on_grid() {
    let pn = p0();
    let mut pp = p0();
    pp.polarity = Polarity::P;
    for i in -8..=8 {
        for j in -8..=8 {
            let (vgs, vds) = (i as f64 * 0.125, j as f64 * 0.125);
            assert_eq!(id(&pp, vgs, vds), -id(&pn, -vgs, -vds));
        }
    }
}

#[test]
fn monotone_on_unit_square() {
    for (v, pol) in fixtures::combinations().filter(|(_, p)| *p == Polarity::N) {
        let p = fixtures::true_params(v, pol);
        let grid: Vec<f64> = (0..=40).map(|i| i as f64 / 40.0).collect();
        for &vds in &grid {
            let row: Vec<f64> = grid.iter().map(|&vgs| id(&p, vgs, vds)).collect();
            assert!(row.windows(2).all(|w| w[1] >= w[0]), "{v}: not monotone in vgs at vds={vds}");
            assert!(row.iter().all(|&i| i >= 0.0));
        }
        for &vgs in &grid {
            let col: Vec<f64> = grid.iter().map(|&vds| id(&p, vgs, vds)).collect();
            assert!(col.windows(2).all(|w| w[1] >= w[0]), "{v}: not monotone in vds at vgs={vgs}");
        }
    }
}

#[test]
fn conductances_match_golden_differences() {
    let (gm, gds) = conductances(&p0(), &c(), BiasPoint::new(0.8, 1.0)).unwrap();
    assert!(rel(gm, GM_GOLDEN_08_1) < 1e-6, "gm {gm}");
    assert!(rel(gds, GDS_GOLDEN_08_1) < 1e-6, "gds {gds}");
}

fn fd_check(p: &ModelParams, vgs: f64, vds: f64) {
    let h = 1e-6;
    let fd_gm = (id(p, vgs + h, vds) - id(p, vgs - h, vds)) / (2.0 * h);
    let fd_gds = (id(p, vgs, vds + h) - id(p, vgs, vds - h)) / (2.0 * h);
    let (gm, gds) = conductances(p, &c(), BiasPoint::new(vgs, vds)).unwrap();
    for (name, a, b) in [("gm", gm, fd_gm), ("gds", gds, fd_gds)] {
        let err = (a - b).abs();
        assert!(
            err <= 1e-12 || err <= 1e-4 * b.abs(),
            "{name} mismatch at ({vgs}, {vds}): analytic {a:e}, fd {b:e}"
        );
    }
}

#[test]
fn conductances_match_central_differences_on_grid() {
    for (v, pol) in fixtures::combinations() {
        let p = fixtures::true_params(v, pol);
        for i in -6..=6 {
            for j in -6..=6 {
                fd_check(&p, i as f64 * 0.19 + 0.013, j as f64 * 0.17 + 0.007);
            }
        }
    }
}

#[test]
fn zero_vds_conductances() {
    let (gm, gds) = conductances(&p0(), &c(), BiasPoint::new(1.0, 0.0)).unwrap();
    assert_eq!(gm, 0.0);
    let h = 1e-6;
    let fd = (id(&p0(), 1.0, h) - id(&p0(), 1.0, -h)) / (2.0 * h);
    assert!(rel(gds, fd) < 1e-4);
}

#[test]
fn subthreshold_gm_is_exponential() {
    let p = p0();
    let vds = 1.0;
    let n = 1.0 + p.cdsc + p.cdscd * vds;
    let i = id(&p, -0.5, vds);
    let (gm, _) = conductances(&p, &c(), BiasPoint::new(-0.5, vds)).unwrap();
    let expected = i / (n * PHI_T);
    assert!(rel(gm, expected) < 0.05, "gm {gm:e} vs {expected:e}");
}

#[test]
fn parameter_sensitivities() {
    let base = p0();
    let i0 = id(&base, 1.0, 1.0);

    let mut p = base.clone();
    p.vth0 += 0.02;
    assert!(id(&p, 1.0, 1.0) < i0);

    let mut p = base.clone();
    p.u0 *= 1.1;
    assert!(id(&p, 1.0, 1.0) > i0);

    let dibl_ratio = |p: &ModelParams| id(p, 1.0, 1.0) / id(p, 1.0, 0.05);
    let mut p = base.clone();
    p.etab *= 2.0;
    assert!(dibl_ratio(&p) > dibl_ratio(&base));

    let gds_sat = |p: &ModelParams| conductances(p, &c(), BiasPoint::new(0.6, 0.9)).unwrap().1;
    let mut p = base.clone();
    p.pvag *= 2.0;
    assert!(gds_sat(&p) > gds_sat(&base));

    // Subthreshold swing (V/decade) at vds = 1 V.
    let swing = |p: &ModelParams| {
        let (gm, _) = conductances(p, &c(), BiasPoint::new(0.05, 1.0)).unwrap();
        std::f64::consts::LN_10 * id(p, 0.05, 1.0) / gm
    };
    let mut p = base.clone();
    p.cdscd *= 2.0;
    assert!(swing(&p) > swing(&base));
}

#[test]
fn first_derivative_continuous_across_vdsat() {
    for vgs in [0.4, 0.6, 0.8, 1.0] {
        let h = 1e-3;
        let grid: Vec<f64> = (1..1000).map(|k| k as f64 * h).collect();
        let d2: Vec<f64> = grid
            .iter()
            .map(|&v| (id(&p0(), vgs, v + h) - 2.0 * id(&p0(), vgs, v) + id(&p0(), vgs, v - h)) / (h * h))
            .collect();
        for k in 1..d2.len() - 1 {
            let neigh = d2[k - 1].abs().max(d2[k + 1].abs());
            assert!(
                d2[k].abs() <= 10.0 * neigh + 1e-9,
                "second difference spike at vgs={vgs}, vds={}: {} vs {}",
                grid[k],
                d2[k],
                neigh
            );
        }
    }
}

#[test]
fn gate_capacitance_golden_and_asymptote() {
    let cg = gate_capacitance(&p0(), &c(), 0.2).unwrap();
    assert!(rel(cg, CG_GOLDEN_02V) < 1e-12);
    let cons = c();
    let p = p0();
    let expected = cons.w * cons.l * cons.cox() + cons.w * (p.cgso + p.cgdo) + p.cf;
    assert!(rel(gate_capacitance_asymptote(&p, &cons), expected) < 1e-15);
    assert!(rel(gate_capacitance(&p, &cons, 40.0).unwrap(), expected) < 1e-12);
}

#[test]
fn gate_capacitance_positive_and_monotone_without_low_bias_terms() {
    let mut p = p0();
    for vg in (-100..=100).map(|i| i as f64 * 0.05) {
        assert!(gate_capacitance(&p, &c(), vg).unwrap() > 0.0);
    }
    p.cgsl = 0.0;
    p.cgdl = 0.0;
    let vals: Vec<f64> = (-20..=40)
        .map(|i| gate_capacitance(&p, &c(), i as f64 * 0.025).unwrap())
        .collect();
    assert!(vals.windows(2).all(|w| w[1] >= w[0]));
}

fn trapezoid_charge(p: &ModelParams, v: f64, n: usize) -> f64 {
    let h = v / n as f64;
    let f = |u: f64| gate_capacitance(p, &c(), u).unwrap();
    let mut s = 0.5 * (f(0.0) + f(v));
    for k in 1..n {
        s += f(k as f64 * h);
    }
    s * h
}

#[test]
fn gate_charge_matches_dense_trapezoid() {
    let p = p0();
    let oracle = trapezoid_charge(&p, 1.0, 1_000_000);
    let q = gate_charge(&p, &c(), 1.0).unwrap();
    assert!(rel(q, oracle) < 1e-9, "{q:e} vs {oracle:e}");
    assert!(rel(q, Q_GOLDEN_1V) < 1e-12, "{q:e}");

    let mut pp = fixtures::true_params(Variant::Ch4, Polarity::P);
    let oracle = trapezoid_charge(&pp, -0.8, 1_000_000);
    assert!(rel(gate_charge(&pp, &c(), -0.8).unwrap(), oracle) < 1e-9);
    pp.polarity = Polarity::N;
    let oracle = trapezoid_charge(&pp, -0.5, 1_000_000);
    assert!(rel(gate_charge(&pp, &c(), -0.5).unwrap(), oracle) < 1e-9);
}

#[test]
fn gate_charge_midpoint_property() {
    for (v, pol) in fixtures::combinations() {
        let p = fixtures::true_params(v, pol);
        for vg in [-0.9, -0.3, 0.1, 0.35, 0.8] {
            let h = 1e-3;
            let dq = gate_charge(&p, &c(), vg).unwrap() - gate_charge(&p, &c(), vg - h).unwrap();
            let mid = gate_capacitance(&p, &c(), vg - h / 2.0).unwrap() * h;
            // O(h^3) remainder: bound with a generous second-derivative scale
            assert!((dq - mid).abs() < 1e-6 * mid.abs(), "{v} {pol} at {vg}");
        }
    }
}

proptest! {
    #[test]
    fn currents_conserve_charge(vgs in -1.5f64..1.5, vds in -1.5f64..1.5, idx in 0usize..8) {
        let (v, pol) = fixtures::combinations().nth(idx).unwrap();
        let p = fixtures::true_params(v, pol);
        let b = BiasPoint::new(vgs, vds);
        let id = drain_current(&p, &c(), b).unwrap();
        let is = source_current(&p, &c(), b).unwrap();
        prop_assert_eq!(id + is, 0.0);
    }

    #[test]
    fn n_current_non_negative_for_forward_bias(vgs in -1.0f64..1.5, vds in 0.0f64..1.5) {
        prop_assert!(id(&p0(), vgs, vds) >= 0.0);
    }

    #[test]
    fn dq_dv_equals_capacitance(vg in -1.0f64..1.2) {
        let h = 1e-5;
        let p = p0();
        let dq = (gate_charge(&p, &c(), vg + h).unwrap() - gate_charge(&p, &c(), vg - h).unwrap()) / (2.0 * h);
        let cg = gate_capacitance(&p, &c(), vg).unwrap();
        prop_assert!((dq - cg).abs() < 1e-6 * cg);
    }

    #[test]
    fn random_biases_match_finite_differences(vgs in -0.8f64..1.2, vds in -1.2f64..1.2) {
        fd_check(&p0(), vgs, vds);
    }
}
