use std::io::Write;
use std::path::{Path, PathBuf};

use miv_cellkit::circuit::{dc_operating_point, measure, parse_value, read_netlist, transient};
use miv_cellkit::curves::{format_curves, generate_synthetic, read_curves, CharacterizationSet, CurveKind};
use miv_cellkit::extraction::{extract as run_extract, ExtractOptions, ExtractionReport, ParamBounds};
use miv_cellkit::fixtures;
use miv_cellkit::layout::{library_area_summary, ProcessParams};
use miv_cellkit::model::{read_model_file, ModelCard};
use miv_cellkit::stdcells::{run_ppa, CellSpec, ModelSet, ParasiticPolicy, PpaReport, SimSettings};
use miv_cellkit::{Polarity, Variant};
use rayon::prelude::*;

use crate::error::{read_error, CliError, CliResult, ErrorCode};
use crate::output::{json_bytes, Outputs};
use crate::plot::{render_bars, render_lines, BarChart, LinePlot, LineStyle, Series};
use crate::{reference, AreaArgs, ExtractArgs, GenSyntheticArgs, PlotArgs, PpaArgs, RunConfig, SimulateArgs};

fn list(s: &str) -> Vec<&str> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).collect()
}

fn cells(arg: Option<&str>) -> CliResult<Vec<CellSpec>> {
    match arg {
        None => Ok(CellSpec::library()),
        Some(s) => {
            let v = list(s)
                .into_iter()
                .map(CellSpec::by_name)
                .collect::<miv_cellkit::Result<Vec<_>>>()?;
            if v.is_empty() {
                return Err(CliError::new(ErrorCode::Usage, "--cells is empty"));
            }
            Ok(v)
        }
    }
}

fn variants(arg: Option<&str>) -> CliResult<Vec<Variant>> {
    match arg {
        None => Ok(Variant::ALL.to_vec()),
        Some(s) => {
            let v = list(s)
                .into_iter()
                .map(str::parse)
                .collect::<miv_cellkit::Result<Vec<Variant>>>()?;
            if v.is_empty() {
                return Err(CliError::new(ErrorCode::Usage, "--variants is empty"));
            }
            Ok(v)
        }
    }
}

fn seconds(s: &str, flag: &str) -> CliResult<f64> {
    match parse_value(s) {
        Some(v) if v > 0.0 => Ok(v),
        _ => Err(CliError::new(ErrorCode::Usage, format!("{flag}: `{s}` is not a positive time"))),
    }
}

fn require_file(path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::input(format!("{}: no such file", path.display())))
    }
}

fn device_card(cfg: &RunConfig, v: Variant, p: Polarity) -> CliResult<ModelCard> {
    Ok(fixtures::load_card(cfg.data_dir.as_deref(), v, p)?)
}

fn bounds(cfg: &RunConfig, arg: Option<&Path>) -> CliResult<ParamBounds> {
    if let Some(p) = arg {
        require_file(p)?;
        return Ok(ParamBounds::read(p)?);
    }
    if let Some(dir) = &cfg.data_dir {
        let p = dir.join("default.bounds");
        if p.is_file() {
            return Ok(ParamBounds::read(p)?);
        }
    }
    Ok(ParamBounds::default_bounds())
}

fn report_written(out: &mut dyn Write, paths: &[PathBuf]) {
    for p in paths {
        let _ = writeln!(out, "wrote {}", p.display());
    }
}

pub fn gen_synthetic(cfg: &RunConfig, a: &GenSyntheticArgs, out: &mut dyn Write) -> CliResult<()> {
    let mut files = Outputs::default();
    for (i, (v, p)) in fixtures::combinations().enumerate() {
        let card = device_card(cfg, v, p)?;
        let set = generate_synthetic(&card.params, &card.consts, v, a.noise, cfg.seed.wrapping_add(i as u64))?;
        files.add(
            a.out.join(format!("{}.csv", fixtures::device_stem(v, p))),
            format_curves(&set),
        );
    }
    report_written(out, &files.commit()?);
    Ok(())
}

struct Fitted {
    stem: String,
    report: ExtractionReport,
    card: ModelCard,
}

fn fit_one(cfg: &RunConfig, path: &Path, b: &ParamBounds) -> CliResult<Fitted> {
    let set = read_curves(path)?;
    let consts = device_card(cfg, set.variant, set.polarity)?.consts;
    let opts = ExtractOptions {
        seed: cfg.seed,
        ..Default::default()
    };
    let report = run_extract(&set, b, &consts, &opts)?;
    Ok(Fitted {
        stem: fixtures::device_stem(set.variant, set.polarity),
        card: ModelCard {
            params: report.fitted.clone(),
            consts,
        },
        report,
    })
}

fn print_fit(out: &mut dyn Write, f: &Fitted) {
    let e = &f.report.errors;
    let _ = writeln!(
        out,
        "{:<14} IDVG {:6.3}%  IDVD {:6.3}%  CV {:6.3}%  ({:.1} s)",
        f.stem,
        e.idvg,
        e.idvd,
        e.cv,
        f.report.wall_time.as_secs_f64()
    );
}

pub fn extract(cfg: &RunConfig, a: &ExtractArgs, out: &mut dyn Write) -> CliResult<()> {
    let b = bounds(cfg, a.bounds.as_deref())?;
    let mut files = Outputs::default();
    if a.curves.is_dir() {
        let mut inputs: Vec<PathBuf> = std::fs::read_dir(&a.curves)
            .map_err(|e| read_error(&a.curves, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        inputs.sort();
        if inputs.is_empty() {
            return Err(CliError::input(format!("{}: no curve files", a.curves.display())));
        }
        let fitted = inputs
            .par_iter()
            .map(|p| fit_one(cfg, p, &b))
            .collect::<CliResult<Vec<_>>>()?;
        let model_dir = a.model_out.clone().unwrap_or_else(|| a.out.clone());
        for f in &fitted {
            print_fit(out, f);
            files.add(a.out.join(format!("{}.json", f.stem)), json_bytes(&f.report));
            files.add(model_dir.join(format!("{}.model", f.stem)), f.card.to_text());
        }
    } else {
        require_file(&a.curves)?;
        let f = fit_one(cfg, &a.curves, &b)?;
        print_fit(out, &f);
        files.add(&a.out, json_bytes(&f.report));
        if let Some(m) = &a.model_out {
            files.add(m, f.card.to_text());
        }
    }
    report_written(out, &files.commit()?);
    Ok(())
}

pub fn area(_cfg: &RunConfig, a: &AreaArgs, out: &mut dyn Write) -> CliResult<()> {
    let cells = cells(a.cells.as_deref())?;
    let summary = library_area_summary(&cells, &ProcessParams::default())?;
    let _ = writeln!(out, "variant      mean area reduction  (ref)  best substrate reduction  (ref)");
    for s in &summary.variants {
        let refv = reference_index(s.variant).map_or("-".to_string(), |i| format!("{}%", reference::AREA_REDUCTION_PCT[i]));
        let _ = writeln!(
            out,
            "{:<12} {:>18.2}%  {:>7}  {:>23.2}%  {:>6}%",
            s.variant.to_string(),
            s.mean_reduction_pct,
            refv,
            s.max_substrate_reduction_pct,
            reference::SUBSTRATE_REDUCTION_PCT
        );
    }
    let mut files = Outputs::default();
    files.add(&a.out, json_bytes(&summary));
    if let Some(c) = &a.csv {
        files.add(c, summary.to_csv());
    }
    report_written(out, &files.commit()?);
    Ok(())
}

fn reference_index(v: Variant) -> Option<usize> {
    match v {
        Variant::Traditional => None,
        Variant::Ch1 => Some(0),
        Variant::Ch2 => Some(1),
        Variant::Ch4 => Some(2),
    }
}

pub fn simulate(_cfg: &RunConfig, a: &SimulateArgs, out: &mut dyn Write) -> CliResult<()> {
    require_file(&a.netlist)?;
    let (net, tran) = read_netlist(&a.netlist)?;
    let dt = a.dt.as_deref().map(|s| seconds(s, "--dt")).transpose()?;
    let t_stop = a.tstop.as_deref().map(|s| seconds(s, "--tstop")).transpose()?;
    let spec = match (dt, t_stop, tran) {
        (Some(dt), Some(ts), _) => Some((dt, ts)),
        (dt, ts, Some(t)) => Some((dt.unwrap_or(t.dt), ts.unwrap_or(t.t_stop))),
        (None, None, None) => None,
        _ => {
            return Err(CliError::new(
                ErrorCode::Usage,
                "transient needs both --dt and --tstop (or a .tran line)",
            ))
        }
    };
    let mut files = Outputs::default();
    match spec {
        None => {
            let sol = dc_operating_point(&net)?;
            for (n, v) in sol.node_names.iter().zip(&sol.voltages).skip(1) {
                let _ = writeln!(out, "{n:<12} {v:.6} V");
            }
            files.add(&a.out, json_bytes(&sol));
        }
        Some((dt, t_stop)) => {
            let res = transient(&net, t_stop, dt)?;
            let nodes: Vec<String> = match &a.nodes {
                Some(s) => list(s).into_iter().map(String::from).collect(),
                None => res.node_names.clone(),
            };
            let refs: Vec<&str> = nodes.iter().map(String::as_str).collect();
            files.add(&a.out, res.to_csv(&refs)?);
            let _ = writeln!(
                out,
                "{} time points, charge residual {:.2e}, refined steps {}",
                res.time.len(),
                res.charge_error,
                res.refined_steps
            );
            if let Some(m) = &a.measure {
                let pins = list(m);
                let [pin_in, pin_out] = pins[..] else {
                    return Err(CliError::new(ErrorCode::Usage, "--measure expects `in,out`"));
                };
                let vdd = miv_cellkit::VDD;
                let meas = measure(&res, pin_in, pin_out, vdd)?;
                let _ = writeln!(out, "delay {:.4e} s, power {:.4e} W", meas.delay, meas.power);
                match &a.report {
                    Some(p) => files.add(p, json_bytes(&meas)),
                    None => {
                        let _ = out.write_all(&json_bytes(&meas));
                    }
                }
            }
        }
    }
    report_written(out, &files.commit()?);
    Ok(())
}

fn print_ppa(out: &mut dyn Write, r: &PpaReport) {
    let _ = writeln!(
        out,
        "variant      delay       power       d(delay) (ref)   d(power) (ref)   area red. (ref)"
    );
    let fmt = |v: Option<f64>| v.map_or("     -".to_string(), |x| format!("{x:+6.2}%"));
    for s in &r.variants {
        let idx = reference_index(s.variant);
        let refv = |a: &[f64; 3]| idx.map_or("   -".to_string(), |i| format!("{:+}%", a[i]));
        let _ = writeln!(
            out,
            "{:<12} {:.3e}  {:.3e}  {} {:>7}   {} {:>7}   {:6.2}% {:>6}",
            s.variant.to_string(),
            s.mean_delay_s,
            s.mean_power_w,
            fmt(s.delay_delta_pct),
            refv(&reference::DELAY_DELTA_PCT),
            fmt(s.power_delta_pct),
            refv(&reference::POWER_DELTA_PCT),
            s.area_reduction_pct,
            idx.map_or("-".to_string(), |i| format!("{}%", reference::AREA_REDUCTION_PCT[i]))
        );
    }
    for d in &r.diagnostics {
        let _ = writeln!(out, "FAILED {} {}: {}", d.cell, d.variant, d.message);
    }
}

pub fn ppa(_cfg: &RunConfig, a: &PpaArgs, out: &mut dyn Write) -> CliResult<()> {
    let cells = cells(a.cells.as_deref())?;
    let variants = variants(a.variants.as_deref())?;
    let models = match &a.models {
        Some(dir) => {
            if !dir.is_dir() {
                return Err(CliError::input(format!("{}: no such directory", dir.display())));
            }
            ModelSet::read_dir(dir)?
        }
        None => ModelSet::fixtures(),
    };
    let settings = SimSettings {
        dt: seconds(&a.dt, "--dt")?,
        window: seconds(&a.window, "--window")?,
        ..SimSettings::default()
    };
    let report = run_ppa(
        &cells,
        &variants,
        &models,
        &ParasiticPolicy::default(),
        &settings,
        &ProcessParams::default(),
    )?;
    print_ppa(out, &report);
    let mut files = Outputs::default();
    files.add(&a.out, json_bytes(&report));
    if let Some(c) = &a.csv {
        files.add(c, report.to_csv());
    }
    report_written(out, &files.commit()?);
    Ok(())
}

fn curve_plots(set: &CharacterizationSet, card: &ModelCard) -> CliResult<Vec<(String, LinePlot)>> {
    if card.params.polarity != set.polarity {
        return Err(CliError::input(format!(
            "model is {}-type but the curves are {}-type",
            card.params.polarity, set.polarity
        )));
    }
    let series_for = |kinds: &[CurveKind], abs: bool| -> CliResult<Vec<Series>> {
        let mut out = Vec::new();
        for (color, c) in set.curves().iter().filter(|c| kinds.contains(&c.kind)).enumerate() {
            let m = c.model_curve(&card.params, &card.consts)?;
            let label = format!("{} {:+.2} V", c.kind, c.fixed_bias);
            let pts = |v: &[f64]| -> Vec<(f64, f64)> {
                c.sweep
                    .iter()
                    .zip(v)
                    .map(|(&x, &y)| (x, if abs { y.abs() } else { y }))
                    .collect()
            };
            out.push(Series {
                label: format!("{label} ref"),
                style: LineStyle::Reference,
                color,
                points: pts(&c.values),
            });
            out.push(Series {
                label: format!("{label} fit"),
                style: LineStyle::Model,
                color,
                points: pts(&m.values),
            });
        }
        Ok(out)
    };
    let idvg = [CurveKind::IdvgLow, CurveKind::IdvgHigh];
    let plot = |title: &str, x: &str, y: &str, log_y: bool, series: Vec<Series>| LinePlot {
        title: title.to_string(),
        x_label: x.to_string(),
        y_label: y.to_string(),
        log_y,
        series,
    };
    let name = fixtures::device_stem(set.variant, set.polarity);
    Ok(vec![
        (
            format!("{name}_idvg_lin.svg"),
            plot(&format!("{name} I-V transfer"), "V_GS (V)", "I_D (A)", false, series_for(&idvg, false)?),
        ),
        (
            format!("{name}_idvg_log.svg"),
            plot(&format!("{name} I-V transfer"), "V_GS (V)", "|I_D| (A)", true, series_for(&idvg, true)?),
        ),
        (
            format!("{name}_idvd.svg"),
            plot(&format!("{name} I-V output"), "V_DS (V)", "I_D (A)", false, series_for(&[CurveKind::Idvd], false)?),
        ),
        (
            format!("{name}_cv.svg"),
            plot(&format!("{name} C-V"), "V_G (V)", "C_G (F)", false, series_for(&[CurveKind::Cv], false)?),
        ),
    ])
}

fn ppa_charts(r: &PpaReport) -> Vec<(String, BarChart)> {
    let mut groups: Vec<String> = Vec::new();
    for e in &r.entries {
        if !groups.contains(&e.cell) {
            groups.push(e.cell.clone());
        }
    }
    let series: Vec<Variant> = r.variants.iter().map(|v| v.variant).collect();
    let table = |f: &dyn Fn(&miv_cellkit::stdcells::PpaEntry) -> f64| -> Vec<Vec<f64>> {
        groups
            .iter()
            .map(|g| {
                series
                    .iter()
                    .map(|&v| r.entry(g, v).map_or(f64::NAN, f))
                    .collect()
            })
            .collect()
    };
    let chart = |title: &str, y: &str, values| BarChart {
        title: title.to_string(),
        y_label: y.to_string(),
        groups: groups.clone(),
        series: series.iter().map(|v| v.to_string()).collect(),
        values,
    };
    vec![
        (
            "ppa_delay.svg".to_string(),
            chart("Average propagation delay", "delay (ps)", table(&|e| e.delay_s * 1e12)),
        ),
        (
            "ppa_power.svg".to_string(),
            chart("Average power", "power (uW)", table(&|e| e.power_w * 1e6)),
        ),
        (
            "ppa_area.svg".to_string(),
            chart("Cell layout area", "area (nm^2)", table(&|e| e.cell_area_nm2)),
        ),
    ]
}

pub fn plot(_cfg: &RunConfig, a: &PlotArgs, out: &mut dyn Write) -> CliResult<()> {
    let mut files = Outputs::default();
    let mut any = false;
    if let (Some(curves), Some(model)) = (&a.curves, &a.model) {
        require_file(curves)?;
        require_file(model)?;
        let set = read_curves(curves)?;
        let card = read_model_file(model)?;
        for (name, p) in curve_plots(&set, &card)? {
            let r = render_lines(&p)?;
            if r.suppressed > 0 {
                log::warn!("{name}: {} non-positive samples left off the log axis", r.suppressed);
                let _ = writeln!(out, "{name}: suppressed {} non-positive samples", r.suppressed);
            }
            files.add(a.out.join(name), r.svg);
        }
        any = true;
    }
    if let Some(path) = &a.ppa {
        require_file(path)?;
        let text = std::fs::read_to_string(path).map_err(|e| read_error(path, e))?;
        let report: PpaReport =
            serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        if report.entries.is_empty() {
            return Err(CliError::input(format!("{}: report has no entries", path.display())));
        }
        for (name, c) in ppa_charts(&report) {
            files.add(a.out.join(name), render_bars(&c)?);
        }
        any = true;
    }
    if !any {
        return Err(CliError::new(ErrorCode::Usage, "nothing to plot: give --curves/--model or --ppa"));
    }
    report_written(out, &files.commit()?);
    Ok(())
}
