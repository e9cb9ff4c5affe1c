use criterion::{criterion_group, criterion_main, Criterion};
use miv_cellkit::circuit::{transient, Waveform};
use miv_cellkit::stdcells::{build_cell_netlist, CellSpec, ModelSet, ParasiticPolicy};
use miv_cellkit::{Variant, VDD};

fn simulate(c: &mut Criterion) {
    let models = ModelSet::fixtures();
    let (n, p) = models.cell_devices(Variant::Ch2).unwrap();
    let cell = CellSpec::by_name("NAND2X1").unwrap();
    let a = Waveform::pwl(vec![(0.0, 0.0), (1e-9, 0.0), (1.01e-9, VDD), (3e-9, VDD), (3.01e-9, 0.0)]).unwrap();
    let net = build_cell_netlist(&cell, n, p, &ParasiticPolicy::default(), &[a, Waveform::Dc(VDD)], VDD).unwrap();
    let mut g = c.benchmark_group("transient");
    g.sample_size(10);
    g.bench_function("nand2_4ns_1ps", |b| b.iter(|| transient(&net, 4e-9, 1e-12).unwrap()));
    g.finish();
}

criterion_group!(benches, simulate);
criterion_main!(benches);
