//! Simulator checks: analytic RC, an independent dense solve for linear
//! networks, finite-difference Jacobians and a leakage oracle for the
//! inverter.

use miv_cellkit::circuit::{
    assemble_static, dc_operating_point, measure, transient, DcSolution, Netlist, TransientResult, Waveform,
    GMIN_FLOOR,
};
use miv_cellkit::model::{conductances, drain_current, BiasPoint};
use miv_cellkit::{fixtures, Error, Polarity, Variant};
use proptest::prelude::*;

const RC_R: f64 = 1e3;
const RC_C: f64 = 1e-12;

fn inverter(vin: Waveform, vdd: f64, load: f64) -> Netlist {
    let c = fixtures::constants();
    let mut net = Netlist::new();
    net.add_vsource("VDD", "vdd", "0", Waveform::Dc(vdd)).unwrap();
    net.add_vsource("VIN", "in", "0", vin).unwrap();
    net.add_transistor("MP", "out", "in", "vdd", fixtures::true_params(Variant::Traditional, Polarity::P), c.clone())
        .unwrap();
    net.add_transistor("MN", "out", "in", "0", fixtures::true_params(Variant::Traditional, Polarity::N), c.clone())
        .unwrap();
    net.add_capacitor("CL", "out", "0", load).unwrap();
    net
}

fn pulse() -> Waveform {
    Waveform::pwl(vec![(0.0, 0.0), (200e-12, 0.0), (210e-12, 1.0), (600e-12, 1.0), (610e-12, 0.0)]).unwrap()
}

fn unknowns(net: &Netlist, sol: &DcSolution) -> Vec<f64> {
    let mut x: Vec<f64> = sol.voltages[1..].to_vec();
    x.extend(sol.source_currents.iter().map(|(_, i)| *i));
    assert_eq!(x.len(), net.node_count() - 1 + sol.source_currents.len());
    x
}

#[test]
fn divider_is_exact() {
    let mut net = Netlist::new();
    net.add_vsource("V1", "in", "0", Waveform::Dc(1.0)).unwrap();
    net.add_resistor("R1", "in", "mid", 1e3).unwrap();
    net.add_resistor("R2", "mid", "0", 1e3).unwrap();
    let sol = dc_operating_point(&net).unwrap();
    assert!((sol.voltage("mid").unwrap() - 0.5).abs() < 1e-9);
    // branch current flows p -> n through the source, so it is negative here
    let i = sol.source_currents[0].1;
    // the conductance floor on both nodes adds about 1.25 pA
    assert!((i + 0.5e-3).abs() < 1e-11, "branch current {i:e}");
}

#[test]
fn inverter_output_high_matches_leakage_oracle() {
    let net = inverter(Waveform::Dc(0.0), 1.0, 1e-15);
    let sol = dc_operating_point(&net).unwrap();
    let vout = sol.voltage("out").unwrap();
    assert!((1.0 - vout).abs() < 1e-3, "vout = {vout}");

    // n leaks I_off at vds ~ VDD; the p device in its linear region sinks it
    // across a drop of I_off / gds_p.
    let c = fixtures::constants();
    let pn = fixtures::true_params(Variant::Traditional, Polarity::N);
    let pp = fixtures::true_params(Variant::Traditional, Polarity::P);
    let i_off = drain_current(&pn, &c, BiasPoint::new(0.0, 1.0)).unwrap();
    let (_, gds_p) = conductances(&pp, &c, BiasPoint::new(-1.0, 0.0)).unwrap();
    let drop = (i_off + GMIN_FLOOR) / gds_p;
    let got = 1.0 - vout;
    assert!(got > 0.0);
    assert!((got - drop).abs() < 0.05 * drop, "drop {got:e} vs oracle {drop:e}");
}

#[test]
fn inverter_output_low() {
    let net = inverter(Waveform::Dc(1.0), 1.0, 1e-15);
    let sol = dc_operating_point(&net).unwrap();
    assert!(sol.voltage("out").unwrap().abs() < 1e-3);
}

#[test]
fn floating_node_is_a_precondition_error() {
    let mut net = Netlist::new();
    net.add_vsource("V1", "a", "0", Waveform::Dc(1.0)).unwrap();
    net.add_resistor("R1", "a", "0", 1e3).unwrap();
    net.add_capacitor("C1", "x", "y", 1e-15).unwrap();
    assert!(matches!(dc_operating_point(&net), Err(Error::Precondition(_))));
}

#[test]
fn kcl_residual_at_solution() {
    for vin in [0.0, 0.45, 1.0] {
        let net = inverter(Waveform::Dc(vin), 1.0, 1e-15);
        let sol = dc_operating_point(&net).unwrap();
        let st = assemble_static(&net, &unknowns(&net, &sol), 0.0).unwrap();
        for (k, r) in st.residual.iter().enumerate() {
            assert!(r.abs() < 1e-9, "vin {vin}: row {k} residual {r:e}");
        }
    }
}

fn rc_net() -> Netlist {
    let mut net = Netlist::new();
    let step = Waveform::pwl(vec![(0.0, 0.0), (1e-18, 1.0)]).unwrap();
    net.add_vsource("V1", "in", "0", step).unwrap();
    net.add_resistor("R1", "in", "out", RC_R).unwrap();
    net.add_capacitor("C1", "out", "0", RC_C).unwrap();
    net
}

fn rc_error(dt: f64) -> f64 {
    let tau = RC_R * RC_C;
    let res = transient(&rc_net(), tau, dt).unwrap();
    let v = *res.waveform("out").unwrap().last().unwrap();
    let exact = 1.0 - (-1.0f64).exp();
    (v - exact).abs() / exact
}

#[test]
fn rc_step_matches_analytic() {
    let e = rc_error(RC_R * RC_C / 100.0);
    assert!(e < 0.005, "relative error {e}");
}

#[test]
fn trapezoidal_order() {
    let tau = RC_R * RC_C;
    let (e1, e2) = (rc_error(tau / 100.0), rc_error(tau / 200.0));
    let order = (e1 / e2).log2();
    assert!((1.8..=2.2).contains(&order), "order {order} from {e1:e} / {e2:e}");
}

#[test]
fn zero_input_stays_at_dc_point() {
    let net = inverter(Waveform::Dc(0.0), 1.0, 1e-15);
    let dc = dc_operating_point(&net).unwrap();
    let res = transient(&net, 200e-12, 1e-12).unwrap();
    for (name, wave) in res.node_names.iter().zip(&res.voltages) {
        let v0 = dc.voltage(name).unwrap();
        for v in wave {
            assert!((v - v0).abs() < 1e-9, "{name}: {v} vs {v0}");
        }
    }
}

#[test]
fn passive_when_sources_are_zero() {
    let net = inverter(Waveform::Dc(0.0), 0.0, 1e-15);
    let res = transient(&net, 1e-9, 1e-12).unwrap();
    let q: f64 = res
        .time
        .windows(2)
        .zip(res.supply_current.windows(2))
        .map(|(t, i)| 0.5 * (i[0] + i[1]) * (t[1] - t[0]))
        .sum();
    assert!(q.abs() < 1e-15, "supply charge {q:e}");
}

#[test]
fn inverter_transient_conserves_charge() {
    let res = transient(&inverter(pulse(), 1.0, 1e-15), 1e-9, 1e-12).unwrap();
    assert!(res.charge_error < 1e-3, "charge error {}", res.charge_error);
    assert_eq!(res.time.len(), 1001);
    assert!(res.time.windows(2).all(|w| w[1] > w[0]));
}

/// Central differences of the assembled residual against the stamped
/// Jacobian at biases spread across every operating region.
#[test]
fn transistor_jacobian_matches_finite_differences() {
    let c = fixtures::constants();
    let mut worst: f64 = 0.0;
    for variant in Variant::ALL {
        let mut net = Netlist::new();
        net.add_vsource("VDD", "vdd", "0", Waveform::Dc(1.0)).unwrap();
        net.add_transistor("MP", "out", "in", "vdd", fixtures::true_params(variant, Polarity::P), c.clone())
            .unwrap();
        net.add_transistor("MN", "out", "in", "x", fixtures::true_params(variant, Polarity::N), c.clone())
            .unwrap();
        net.add_resistor("RS", "x", "0", 50.0).unwrap();
        net.add_resistor("RI", "in", "0", 1e4).unwrap();
        let n_nodes = net.node_count() - 1;
        for (vin, vout, vx) in [(0.0, 1.0, 0.0), (0.3, 0.7, 0.01), (0.5, 0.5, 0.02), (0.9, 0.05, 0.03), (0.6, -0.1, 0.2)]
        {
            let mut x = vec![0.0; n_nodes + 1];
            for (name, v) in [("vdd", 1.0), ("in", vin), ("out", vout), ("x", vx)] {
                x[net.node_index(name).unwrap() - 1] = v;
            }
            let st = assemble_static(&net, &x, 0.0).unwrap();
            let h = 1e-6;
            for col in 0..n_nodes {
                let (mut xp, mut xm) = (x.clone(), x.clone());
                xp[col] += h;
                xm[col] -= h;
                let fp = assemble_static(&net, &xp, 0.0).unwrap().residual;
                let fm = assemble_static(&net, &xm, 0.0).unwrap().residual;
                for row in 0..st.dim {
                    let fd = (fp[row] - fm[row]) / (2.0 * h);
                    let j = st.jacobian(row, col);
                    let err = (j - fd).abs() / j.abs().max(fd.abs()).max(1e-12);
                    worst = worst.max(err);
                    assert!(err < 1e-4, "{variant} bias ({vin},{vout},{vx}) J[{row},{col}] = {j:e} vs fd {fd:e}");
                }
            }
        }
    }
    eprintln!("worst relative Jacobian mismatch {worst:e}");
}

fn synthetic(dt: f64, shift: f64, out_const: bool) -> TransientResult {
    let wave = Waveform::pwl(vec![(1e-9, 0.0), (1.01e-9, 1.0), (3e-9, 1.0), (3.01e-9, 0.0)]).unwrap();
    let n = (4e-9 / dt).round() as usize;
    let time: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
    let vin: Vec<f64> = time.iter().map(|&t| wave.value(t)).collect();
    let vout: Vec<f64> = time
        .iter()
        .map(|&t| if out_const { 1.0 } else { wave.value(t - shift) })
        .collect();
    TransientResult {
        supply_current: vec![1e-6; time.len()],
        supply_voltage: vec![1.0; time.len()],
        time,
        node_names: vec!["in".into(), "out".into()],
        voltages: vec![vin, vout],
        charge_error: 0.0,
        refined_steps: 0,
    }
}

#[test]
fn ideal_delay_line() {
    let dt = 1e-12;
    let m = measure(&synthetic(dt, 100e-12, false), "in", "out", 1.0).unwrap();
    assert_eq!(m.arcs.len(), 2);
    assert!((m.delay - 100e-12).abs() <= dt / 2.0, "delay {:e}", m.delay);
    assert!((m.t_plh.unwrap() - 100e-12).abs() <= dt / 2.0);
    assert!((m.t_phl.unwrap() - 100e-12).abs() <= dt / 2.0);
    assert!((m.power - 1e-6).abs() < 1e-15);
}

#[test]
fn constant_output_has_no_crossing() {
    let err = measure(&synthetic(1e-12, 0.0, true), "in", "out", 1.0).unwrap_err();
    assert!(matches!(err, Error::NoCrossing { ref node } if node == "out"), "{err}");
}

// Frozen from the dt = 1 ps run after it agreed with dt = 0.25 ps.
const INV_DELAY_GOLDEN: f64 = 4.03326535303038666e-12;
const INV_POWER_GOLDEN: f64 = 1.08698087541102349e-6;

#[test]
fn inverter_delay_and_power_against_refined_step() {
    let net = inverter(pulse(), 1.0, 1e-15);
    let coarse = measure(&transient(&net, 1e-9, 1e-12).unwrap(), "in", "out", 1.0).unwrap();
    let fine = measure(&transient(&net, 1e-9, 0.25e-12).unwrap(), "in", "out", 1.0).unwrap();
    assert_eq!(coarse.arcs.len(), 2);
    assert!((coarse.delay - fine.delay).abs() < 0.01 * fine.delay);
    assert!((coarse.power - fine.power).abs() < 0.01 * fine.power);
    assert!((coarse.delay - INV_DELAY_GOLDEN).abs() < 1e-9 * INV_DELAY_GOLDEN);
    assert!((coarse.power - INV_POWER_GOLDEN).abs() < 1e-9 * INV_POWER_GOLDEN);
}

#[test]
fn waveform_csv() {
    let res = transient(&rc_net(), 5e-12, 1e-12).unwrap();
    let csv = res.to_csv(&["in", "out"]).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "time_s,in,out");
    assert_eq!(lines.len(), 7);
    assert!(res.to_csv(&["nope"]).is_err());
}

/// Plain Gaussian elimination with partial pivoting.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x
}

#[derive(Debug, Clone)]
struct Network {
    /// `(a, b, ohms)` with 0 = ground and nodes 1..=10.
    resistors: Vec<(usize, usize, f64)>,
    /// `(node, volts)` sources to ground at distinct nodes.
    sources: Vec<(usize, f64)>,
}

fn network() -> impl Strategy<Value = Network> {
    const N: usize = 10;
    let tree = proptest::collection::vec((any::<prop::sample::Index>(), 10.0..1e4f64), N);
    let extra = proptest::collection::vec((0..=N, 0..=N, 10.0..1e4f64), 0..15);
    let srcs = proptest::collection::vec((1..=N, -2.0..2.0f64), 1..4);
    (tree, extra, srcs).prop_map(|(tree, extra, srcs)| {
        let mut resistors: Vec<_> = tree
            .into_iter()
            .enumerate()
            .map(|(i, (parent, r))| (i + 1, parent.index(i + 1), r))
            .collect();
        resistors.extend(extra.into_iter().filter(|(a, b, _)| a != b));
        let mut sources: Vec<(usize, f64)> = Vec::new();
        for (n, v) in srcs {
            if sources.iter().all(|s| s.0 != n) {
                sources.push((n, v));
            }
        }
        Network { resistors, sources }
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn linear_networks_match_dense_solve(nw in network()) {
        const N: usize = 10;
        let mut net = Netlist::new();
        for i in 1..=N {
            net.node(&format!("n{i}"));
        }
        let name = |i: usize| if i == 0 { "0".to_string() } else { format!("n{i}") };
        for (k, (a, b, r)) in nw.resistors.iter().enumerate() {
            net.add_resistor(&format!("R{k}"), &name(*a), &name(*b), *r).unwrap();
        }
        for (k, (n, v)) in nw.sources.iter().enumerate() {
            net.add_vsource(&format!("V{k}"), &name(*n), "0", Waveform::Dc(*v)).unwrap();
        }
        let sol = dc_operating_point(&net).unwrap();

        // Reduced nodal equations over the unconstrained nodes, including the
        // simulator's documented conductance floor from each node to ground.
        let fixed: Vec<Option<f64>> =
            (0..=N).map(|i| nw.sources.iter().find(|s| s.0 == i).map(|s| s.1)).collect();
        let free: Vec<usize> = (1..=N).filter(|&i| fixed[i].is_none()).collect();
        let pos = |i: usize| free.iter().position(|&f| f == i);
        let m = free.len();
        let mut a = vec![vec![0.0; m]; m];
        let mut b = vec![0.0; m];
        for &i in &free {
            a[pos(i).unwrap()][pos(i).unwrap()] += GMIN_FLOOR;
        }
        for &(x, y, r) in &nw.resistors {
            let g = 1.0 / r;
            for (p, q) in [(x, y), (y, x)] {
                if let Some(row) = pos(p) {
                    a[row][row] += g;
                    match (q, pos(q)) {
                        (0, _) => {}
                        (_, Some(col)) => a[row][col] -= g,
                        (_, None) => b[row] += g * fixed[q].unwrap(),
                    }
                }
            }
        }
        let v = dense_solve(a, b);
        for i in 1..=N {
            let expect = fixed[i].unwrap_or_else(|| v[pos(i).unwrap()]);
            let got = sol.voltage(&name(i)).unwrap();
            prop_assert!((got - expect).abs() < 1e-9, "node {}: {} vs {}", i, got, expect);
        }
    }
}
