use std::collections::BTreeMap;

use abcage::cqed::{build_time_dependent, crosstalk_audit, ghz, make_plan, Tier, TimeDependentModel};
use abcage::driven::{
    fidelity_series, integrate_driven, resonant_cles, sspn_report, steady_state, DriveSetup,
};
use abcage::dynamics::{
    auto_chain, cage_extent, evolve, predict_table1, reconcile_table1, ReconcileOptions,
};
use abcage::gauge::{interference_matrix, ComplexEntry};
use abcage::lattice::{band_structure, build_real_space, extract_cles, flatness_metric};
use abcage::linalg::normalized_overlap;
use abcage::ode::Tolerances;
use abcage::{LatticeModel, ModeIndex, Site};
use abcage::C as Complex;
use serde::Serialize;

use crate::config::{parse_range, ExperimentConfig, LinksConfig};
use crate::error::CliError;
use crate::output::{num, Format, Sink};

pub fn dispatch(command: &str, cfg: &ExperimentConfig, sink: &mut Sink) -> Result<(), CliError> {
    match command {
        "bands" => bands(cfg, sink),
        "cles" => cles(cfg, sink),
        "cage" => cage(cfg, sink),
        "table-check" => table_check(cfg, sink),
        "steady" => steady(cfg, sink),
        "fidelity" => fidelity(cfg, sink),
        "audit" => audit(cfg, sink),
        "evolve" => walk(cfg, sink),
        other => Err(CliError::Config(format!("unknown command {other}"))),
    }
}

fn chain(cfg: &ExperimentConfig) -> Result<LatticeModel<f64>, CliError> {
    let links = cfg.model.links.build()?;
    Ok(build_real_space(cfg.model.spec(links.n_components()), &links)?)
}

fn entry(z: Complex<f64>) -> ComplexEntry {
    ComplexEntry { re: z.re, im: z.im }
}

#[derive(Serialize)]
struct BandsDoc {
    schema: &'static str,
    k: Vec<f64>,
    /// `energies[k][band]`, units of `J`.
    energies: Vec<Vec<f64>>,
    band_means: Vec<f64>,
    /// Largest deviation from the band mean.
    flatness: Vec<f64>,
    nilpotent_power: Option<usize>,
}

fn bands(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<(), CliError> {
    let links = cfg.model.links.build()?;
    let b = band_structure(&links, cfg.model.orientation, cfg.run.n_k)?;
    match sink.format {
        Format::Csv => {
            let mut header = vec!["k".to_string()];
            header.extend((1..=b.n_bands()).map(|i| format!("E_{i}")));
            let rows: Vec<Vec<String>> = b
                .k_grid
                .iter()
                .zip(&b.energies)
                .map(|(k, es)| std::iter::once(num(*k)).chain(es.iter().map(|e| num(*e))).collect())
                .collect();
            sink.csv("bands.csv", "bands/1", &header, &rows)
        }
        Format::Json => sink.json(
            "bands.json",
            &BandsDoc {
                schema: "bands/1",
                flatness: flatness_metric(&b),
                band_means: b.band_means(),
                nilpotent_power: interference_matrix(&links).nilpotent_power,
                k: b.k_grid,
                energies: b.energies,
            },
        ),
    }
}

fn cles(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<(), CliError> {
    let links = cfg.model.links.build()?;
    let states = extract_cles(&links, cfg.model.orientation, cfg.run.energy, cfg.run.window_cells)?;
    match sink.format {
        Format::Csv => {
            let header = ["state", "cell", "site", "mode", "re", "im"].map(String::from);
            let mut rows = Vec::new();
            for (i, s) in states.iter().enumerate() {
                for (m, z) in &s.amplitudes {
                    rows.push(vec![i.to_string(), m.cell.to_string(), m.site.to_string(), m.mode.to_string(), num(z.re), num(z.im)]);
                }
            }
            sink.csv("cles.csv", "cles/1", &header, &rows)
        }
        Format::Json => {
            let maps: Vec<BTreeMap<String, ComplexEntry>> = states
                .iter()
                .map(|s| s.amplitudes.iter().map(|(m, z)| (m.key(), entry(*z))).collect())
                .collect();
            sink.json(
                "cles.json",
                &serde_json::json!({ "schema": "cles/1", "energy": cfg.run.energy, "states": maps }),
            )
        }
    }
}

fn cage(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<(), CliError> {
    let links = cfg.model.links.build()?;
    let model = auto_chain(&links, cfg.model.orientation)?;
    let start = ModeIndex::new(0, Site::A, cfg.run.l);
    let report = cage_extent(&model, start, cfg.run.t_max, cfg.run.threshold)?;
    let prediction = match cfg.model.links {
        LinksConfig::Stride { n, m } => Some((n, m)),
        LinksConfig::Shift { n } => Some((n, n)),
        _ => None,
    }
    .map(|(n, m)| predict_table1(n, m, cfg.run.l).map(|p| p.oriented(cfg.model.orientation)))
    .transpose()?;
    let matches = prediction.as_ref().map(|p| {
        (p.left_edge, p.right_edge, p.size) == (report.left_edge, report.right_edge, report.size)
    });
    match sink.format {
        Format::Csv => {
            let header = ["l", "size", "left_edge", "right_edge", "contiguous", "leakage"].map(String::from);
            let row = vec![
                cfg.run.l.to_string(),
                report.size.to_string(),
                report.left_edge.to_string(),
                report.right_edge.to_string(),
                report.contiguous.to_string(),
                num(report.leakage),
            ];
            sink.csv("cage.csv", "cage/1", &header, &[row])
        }
        Format::Json => sink.json(
            "cage.json",
            &serde_json::json!({ "schema": "cage/1", "report": report, "prediction": prediction, "matches": matches }),
        ),
    }
}

fn table_check(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<(), CliError> {
    let opts = ReconcileOptions {
        n_range: parse_range(&cfg.run.n_range)?,
        m_range: parse_range(&cfg.run.m_range)?,
        t_max: cfg.run.t_max,
        threshold: cfg.run.threshold,
        orientation: cfg.model.orientation,
    };
    let report = reconcile_table1(&opts)?;
    match sink.format {
        Format::Csv => {
            let header = [
                "family", "n", "m", "l", "detected_power", "pred_left", "pred_right", "obs_left", "obs_right",
                "obs_size", "matches", "threshold_stable",
            ]
            .map(String::from);
            let rows: Vec<Vec<String>> = report
                .cases
                .iter()
                .map(|c| {
                    vec![
                        format!("{:?}", c.family).to_lowercase(),
                        c.n.to_string(),
                        c.m.to_string(),
                        c.l.to_string(),
                        c.detected_power.map(|p| p.to_string()).unwrap_or_default(),
                        c.prediction.left_edge.to_string(),
                        c.prediction.right_edge.to_string(),
                        c.observed.left_edge.to_string(),
                        c.observed.right_edge.to_string(),
                        c.observed.size.to_string(),
                        c.matches.to_string(),
                        c.threshold_stable.to_string(),
                    ]
                })
                .collect();
            sink.csv("table_check.csv", "table-check/1", &header, &rows)
        }
        Format::Json => {
            sink.json("table_check.json", &serde_json::json!({ "schema": "table-check/1", "report": report }))
        }
    }
}

fn drive_setup(cfg: &ExperimentConfig, model: &LatticeModel<f64>, omega_p: f64) -> Result<DriveSetup<f64>, CliError> {
    let d = &cfg.drive;
    let amp = Complex::from_polar(d.pump_mhz, d.pump_phase);
    Ok(DriveSetup::single(&model.spec, d.pumped_mode(), amp, omega_p, d.kappa)?)
}

fn steady(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<(), CliError> {
    let model = chain(cfg)?;
    let drive = drive_setup(cfg, &model, cfg.drive.omega_p)?;
    let ss = steady_state(&model, &drive)?;
    let rows = sspn_report(&ss, &model.spec)?;
    let amplitudes: BTreeMap<String, ComplexEntry> = ss
        .amplitudes
        .iter()
        .enumerate()
        .map(|(k, z)| (model.mode_at(k).key(), entry(*z)))
        .collect();
    sink.json(
        "steady.json",
        &serde_json::json!({
            "schema": "steady/1",
            "drive": cfg.drive,
            "residual": ss.residual,
            "total_photons": ss.sspn.iter().sum::<f64>(),
            "amplitudes": amplitudes,
        }),
    )?;
    let header = ["mode", "cell", "site", "sspn", "sspn_normalized"].map(String::from);
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.mode.to_string(), r.cell.to_string(), r.site.to_string(), num(r.raw), num(r.normalized)])
        .collect();
    sink.csv("sspn.csv", "sspn/1", &header, &table)
}

fn fidelity(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<(), CliError> {
    let links = cfg.model.links.build()?;
    let model = chain(cfg)?;
    let energy = match cfg.run.band {
        Some(b) => {
            let means = band_structure(&links, cfg.model.orientation, 16)?.band_means();
            *means
                .get(b.wrapping_sub(1))
                .ok_or_else(|| CliError::Config(format!("band {b} outside 1..={}", means.len())))?
        }
        None => cfg.drive.omega_p,
    };
    let drive = drive_setup(cfg, &model, energy)?;
    let target = resonant_cles(&model, &links, energy, cfg.drive.pumped_mode())?;
    let t_end = cfg.run.t_end.unwrap_or(20.0 / cfg.drive.kappa);
    let n = cfg.run.n_samples.max(1);
    let times: Vec<f64> = (1..=n).map(|k| t_end * k as f64 / n as f64).collect();

    let eff = integrate_driven(&TimeDependentModel::from_static(&model), &drive, &times, Tolerances::default())?;
    let tier = Tier::try_from(cfg.run.tier)?;
    let plan = make_plan(ghz(cfg.run.omega0_ghz), ghz(cfg.run.delta_ghz), cfg.run.allow_out_of_range)?;
    let mut td = build_time_dependent(&links, &plan, model.spec, tier)?;
    if cfg.run.stark_compensated {
        td = td.stark_compensated();
    }
    let full = integrate_driven(&td, &drive, &times, Tolerances::default())?;
    let f_eff = fidelity_series(&eff, &target)?;
    let f_full = fidelity_series(&full, &target)?;
    let overlap: Vec<f64> = eff.amplitudes.iter().zip(&full.amplitudes).map(|(a, b)| normalized_overlap(a, b)).collect();

    let tier_col = format!("F_tier{}", cfg.run.tier);
    match sink.format {
        Format::Csv => {
            let header = vec!["t".into(), "F_effective".into(), tier_col, "overlap".into()];
            let rows: Vec<Vec<String>> = (0..n).map(|i| vec![num(times[i]), num(f_eff[i]), num(f_full[i]), num(overlap[i])]).collect();
            sink.csv("fidelity.csv", "fidelity/1", &header, &rows)
        }
        Format::Json => sink.json(
            "fidelity.json",
            &serde_json::json!({
                "schema": "fidelity/1",
                "energy": energy,
                "tier": cfg.run.tier,
                "t": times,
                "F_effective": f_eff,
                tier_col: f_full,
                "overlap": overlap,
            }),
        ),
    }
}

fn audit(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<(), CliError> {
    let links = cfg.model.links.build()?;
    let plan = make_plan(ghz(cfg.run.omega0_ghz), ghz(cfg.run.delta_ghz), cfg.run.allow_out_of_range)?;
    let report = crosstalk_audit(&links, &plan, cfg.model.hopping_j_mhz, cfg.model.orientation)?;
    match sink.format {
        Format::Csv => {
            let header = [
                "link", "tone_row_mode", "tone_col_mode", "row_mode", "col_mode", "kind", "detuning_ghz", "intended",
            ]
            .map(String::from);
            let rows: Vec<Vec<String>> = report
                .terms
                .iter()
                .map(|t| {
                    vec![
                        t.link.name().to_string(),
                        t.tone_row_mode.to_string(),
                        t.tone_col_mode.to_string(),
                        t.row_mode.to_string(),
                        t.col_mode.to_string(),
                        format!("{:?}", t.kind),
                        num(t.detuning / std::f64::consts::TAU),
                        t.intended.to_string(),
                    ]
                })
                .collect();
            sink.csv("audit.csv", "audit/1", &header, &rows)
        }
        Format::Json => sink.json("audit.json", &serde_json::json!({ "schema": "audit/1", "report": report })),
    }
}

fn walk(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<(), CliError> {
    let model = chain(cfg)?;
    let start = ModeIndex::new(cfg.run.start_cell, Site::A, cfg.run.l);
    let w = evolve(&model, start, cfg.run.t_max, cfg.run.n_samples.max(2))?;
    let modes: Vec<String> = (0..model.dim()).map(|k| model.mode_at(k).key()).collect();
    match sink.format {
        Format::Csv => {
            let mut header = vec!["t".to_string()];
            header.extend(modes);
            let rows: Vec<Vec<String>> = w
                .times
                .iter()
                .zip(&w.populations)
                .map(|(t, p)| std::iter::once(num(*t)).chain(p.iter().map(|x| num(*x))).collect())
                .collect();
            sink.csv("evolve.csv", "evolve/1", &header, &rows)
        }
        Format::Json => sink.json(
            "evolve.json",
            &serde_json::json!({ "schema": "evolve/1", "t": w.times, "modes": modes, "populations": w.populations }),
        ),
    }
}
