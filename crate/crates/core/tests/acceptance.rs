//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use abcage::cqed::{build_time_dependent, crosstalk_audit, FrequencyPlan, Tier, TimeDependentModel};
use abcage::driven::{
    cage_region, fidelity_series, integrate_driven, overlap_fraction, resonant_cles, steady_state,
    weight_fraction, DriveSetup, Trajectory,
};
use abcage::dynamics::{auto_chain, cages_all_modes, evolve, reconcile_table1, ReconcileOptions};
use abcage::gauge::{interference_matrix, shift_family, stride_family, u2_family, u2_model};
use abcage::lattice::{band_structure, bloch_hamiltonian, build_real_space, symmetry_checks};
use abcage::linalg::{eigvalsh, normalized_overlap, unitarity_deviation};
use abcage::ode::{Stats, Tolerances};
use abcage::{CMatrix, CVector, LatticeModel, LatticeSpec, LinkId, ModeIndex, Orientation, Site};
use nalgebra::Complex;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

const J_MHZ: f64 = 10.0;
const KAPPA: f64 = 0.1;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, format!("runtime {:.2} s exceeds {limit_s} s", elapsed.as_secs_f64()))
}

fn flat_bands() -> Check {
    let start = Instant::now();
    let bands = band_structure(&u2_model::<f64>(), Orientation::default(), 101).map_err(|e| e.to_string())?;
    let std = bands.band_std();
    let worst_std = std.iter().fold(0.0f64, |a, s| a.max(*s));
    ensure(worst_std <= 1e-10, format!("band std {worst_std:e}"))?;
    let (r6, r2) = (6f64.sqrt(), 2f64.sqrt());
    let want = [-r6, -r2, 0.0, 0.0, r2, r6];
    let means = bands.band_means();
    for k in 0..bands.k_grid.len() {
        for (b, w) in want.iter().enumerate() {
            let e = bands.energies[k][b];
            ensure((e - w).abs() <= 1e-10, format!("band {b} at k index {k}: {e} vs {w}"))?;
        }
    }
    within(start.elapsed(), 1.0)?;
    Ok(format!("max std {worst_std:.1e}, means {:?}", means.iter().map(|m| format!("{m:.6}")).collect::<Vec<_>>()))
}

fn nilpotency() -> Check {
    let rep = interference_matrix(&u2_model::<f64>());
    let want = CMatrix::<f64>::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
    let dev = (&rep.i_matrix - &want).iter().fold(0.0f64, |a, z| a.max(z.norm()));
    ensure(dev == 0.0, format!("I deviates from [[0,1],[0,0]] by {dev:e}"))?;
    ensure(rep.nilpotent_power == Some(2), format!("power {:?}", rep.nilpotent_power))?;
    Ok("I = [[0,1],[0,0]] exactly, power 2".into())
}

fn c(x: f64) -> Complex<f64> {
    Complex::new(x, 0.0)
}

fn caged_walk(model: &LatticeModel<f64>, mode: usize, cells: &[i64]) -> Result<(f64, f64, f64), String> {
    let walk = evolve(model, ModeIndex::new(0, Site::A, mode), 50.0, 2001).map_err(|e| e.to_string())?;
    let region = cage_region(model, cells);
    let mut outside = 0.0f64;
    for pops in &walk.populations {
        let inside: f64 = region.iter().map(|&i| pops[i]).sum();
        let total: f64 = pops.iter().sum();
        outside = outside.max(total - inside);
    }
    // the A cell the walker hops to, and the component it must avoid there
    let far = if mode == 1 { cells[1] } else { cells[0] };
    let wrong = ModeIndex::new(far, Site::A, mode);
    let right = ModeIndex::new(far, Site::A, 3 - mode);
    let mut wrong_max = 0.0f64;
    let mut right_max = 0.0f64;
    for i in 0..walk.times.len() {
        wrong_max = wrong_max.max(walk.population(i, wrong).map_err(|e| e.to_string())?);
        right_max = right_max.max(walk.population(i, right).map_err(|e| e.to_string())?);
    }
    Ok((outside, wrong_max, right_max))
}

fn u2_caging() -> Check {
    let start = Instant::now();
    let model = build_real_space(LatticeSpec::centered(2, 11, 1.0), &u2_model()).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for (mode, cells) in [(1usize, [0i64, 1]), (2, [-1, 0])] {
        let (outside, wrong, right) = caged_walk(&model, mode, &cells)?;
        ensure(outside < 1e-8, format!("[0,A,{mode}]: {outside:e} outside cells {cells:?}"))?;
        ensure(wrong <= 1e-10, format!("[0,A,{mode}]: mode {mode} reaches the far A cell ({wrong:e})"))?;
        ensure(right > 0.1, format!("[0,A,{mode}]: far A cell never populated ({right:e})"))?;
        parts.push(format!("[0,A,{mode}] -> cells {cells:?}, outside {outside:.1e}, wrong mode {wrong:.1e}"));
    }
    within(start.elapsed(), 5.0)?;
    Ok(parts.join("; "))
}

fn shift_cages() -> Check {
    let mut cases = 0;
    for n in 2..=6usize {
        let links = shift_family::<f64>(n).map_err(|e| e.to_string())?;
        for orientation in [Orientation::Rightward, Orientation::Leftward] {
            let model = auto_chain(&links, orientation).map_err(|e| e.to_string())?;
            let reports = cages_all_modes(&model, 50.0, 1e-6).map_err(|e| e.to_string())?;
            for (i, r) in reports.iter().enumerate() {
                let l = (i + 1) as i64;
                let (mut right, mut left) = (l - 1, l - n as i64);
                if orientation == Orientation::Leftward {
                    (right, left) = (-left, -right);
                }
                let rel = r.relative();
                ensure(
                    rel.right_edge == right && rel.left_edge == left && r.size == n && r.contiguous,
                    format!("N={n} l={l} {orientation:?}: got [{}, {}] size {}", rel.left_edge, rel.right_edge, r.size),
                )?;
                ensure(r.leakage < 1e-8, format!("N={n} l={l}: leakage {:e}", r.leakage))?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} walks (N=2..6, all l, both orientations) caged on [n+l-N, n+l-1] (mirrored for leftward hops)"))
}

fn table1() -> Check {
    let report = reconcile_table1(&ReconcileOptions::default()).map_err(|e| e.to_string())?;
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("table1_reconciliation.json");
    std::fs::write(&path, serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure(report.shift.all(), format!("m = N: {}/{}", report.shift.matched, report.shift.total))?;
    ensure(report.u2.all(), format!("U(2): {}/{}", report.u2.matched, report.u2.total))?;
    ensure(report.stride.total > 0, "no 1 < m < N cases generated")?;
    Ok(format!(
        "m = N {}/{}, U(2) {}/{}, 1<m<N {}/{} (archived at {})",
        report.shift.matched,
        report.shift.total,
        report.u2.matched,
        report.u2.total,
        report.stride.matched,
        report.stride.total,
        path.display()
    ))
}

fn chiral() -> Check {
    let links = u2_model::<f64>();
    let mut worst = 0.0f64;
    let mut pairing = 0.0f64;
    for o in [Orientation::Leftward, Orientation::Rightward] {
        let rep = symmetry_checks(&links, o, 101).map_err(|e| e.to_string())?;
        worst = worst.max(rep.chiral_residual);
        for k in band_structure(&links, o, 101).map_err(|e| e.to_string())?.k_grid {
            let e = eigvalsh(&bloch_hamiltonian(&links, o, k)).map_err(|e| e.to_string())?;
            for i in 0..e.len() {
                pairing = pairing.max((e[i] + e[e.len() - 1 - i]).abs());
            }
        }
    }
    ensure(worst <= 1e-12, format!("|CH + HC| = {worst:e}"))?;
    ensure(pairing <= 1e-10, format!("+-E pairing off by {pairing:e}"))?;
    Ok(format!("|CH + HC| max {worst:.1e}, pairing {pairing:.1e}"))
}

fn fig3_chain() -> Result<LatticeModel<f64>, String> {
    build_real_space(LatticeSpec::centered(2, 11, J_MHZ), &u2_model()).map_err(|e| e.to_string())
}

fn pump(model: &LatticeModel<f64>, mode: usize, omega_p: f64) -> Result<DriveSetup<f64>, String> {
    DriveSetup::single(&model.spec, ModeIndex::new(0, Site::A, mode), c(J_MHZ), omega_p, KAPPA).map_err(|e| e.to_string())
}

fn steady_states() -> Check {
    let model = fig3_chain()?;
    let links = u2_model::<f64>();
    let mut parts = Vec::new();
    for (omega_p, mode, cells, label) in [
        (6f64.sqrt(), 1usize, [0i64, 1], "sqrt6"),
        (2f64.sqrt(), 1, [0, 1], "sqrt2"),
        (6f64.sqrt(), 2, [-1, 0], "sqrt6"),
    ] {
        let start = Instant::now();
        let tag = format!("w_P={label} pump [0,A,{mode}]");
        let drive = pump(&model, mode, omega_p)?;
        let ss = steady_state(&model, &drive).map_err(|e| e.to_string())?;
        ensure(ss.residual <= 1e-10, format!("{tag}: residual {:e}", ss.residual))?;
        let traj = integrate_driven(&TimeDependentModel::from_static(&model), &drive, &[20.0 / KAPPA], Tolerances::default())
            .map_err(|e| e.to_string())?;
        let rel = (&traj.amplitudes[0] - &ss.amplitudes).norm() / ss.amplitudes.norm();
        ensure(rel <= 1e-3, format!("{tag}: integration vs solve {rel:e}"))?;
        let on_cage = weight_fraction(&ss.sspn, &cage_region(&model, &cells));
        ensure(on_cage >= 0.999, format!("{tag}: {on_cage} of SSPN on cells {cells:?}"))?;
        let target = resonant_cles(&model, &links, omega_p, ModeIndex::new(0, Site::A, mode)).map_err(|e| e.to_string())?;
        let overlap = overlap_fraction(&target, &ss.amplitudes);
        ensure(overlap >= 0.95, format!("{tag}: CLES overlap fraction {overlap}"))?;
        within(start.elapsed(), 10.0)?;
        parts.push(format!("{tag}: res {:.0e}, int {rel:.0e}, cage {on_cage:.6}, CLES {overlap:.4}", ss.residual));
    }
    Ok(parts.join("; "))
}

fn fidelity() -> Check {
    let start = Instant::now();
    let model = fig3_chain()?;
    let omega_p = 6f64.sqrt();
    let drive = pump(&model, 1, omega_p)?;
    let target = resonant_cles(&model, &u2_model(), omega_p, ModeIndex::new(0, Site::A, 1)).map_err(|e| e.to_string())?;
    let t_end = 20.0 / KAPPA;
    let times: Vec<f64> = (1..=200).map(|k| k as f64 * t_end / 200.0).collect();
    let eff = integrate_driven(&TimeDependentModel::from_static(&model), &drive, &times, Tolerances::default())
        .map_err(|e| e.to_string())?;
    let tier1 = build_time_dependent(&u2_model(), &FrequencyPlan::default(), model.spec, Tier::BeamSplitter)
        .map_err(|e| e.to_string())?;
    let full = integrate_driven(&tier1, &drive, &times, Tolerances::default()).map_err(|e| e.to_string())?;
    let f_eff = fidelity_series(&eff, &target).map_err(|e| e.to_string())?;
    let f_full = fidelity_series(&full, &target).map_err(|e| e.to_string())?;
    let last = times.len() - 1;
    ensure(f_eff[last] >= 0.99, format!("tier-0 F(20/k) = {}", f_eff[last]))?;
    ensure(f_full[last] >= 0.95, format!("tier-1 F(20/k) = {}", f_full[last]))?;
    let mut min_overlap = f64::INFINITY;
    for (i, t) in times.iter().enumerate() {
        if *t >= 5.0 / KAPPA - 1e-9 {
            min_overlap = min_overlap.min(normalized_overlap(&eff.amplitudes[i], &full.amplitudes[i]));
        }
    }
    ensure(min_overlap >= 0.95, format!("tier-1 vs tier-0 overlap dips to {min_overlap}"))?;
    within(start.elapsed(), 120.0)?;
    Ok(format!(
        "F_eff {:.4}, F_tier1 {:.4}, min overlap on [5/k, 20/k] {min_overlap:.4}, {:.1} s",
        f_eff[last],
        f_full[last],
        start.elapsed().as_secs_f64()
    ))
}

fn crosstalk() -> Check {
    let plan = FrequencyPlan::default();
    let audit = crosstalk_audit(&u2_model::<f64>(), &plan, J_MHZ, Orientation::default()).map_err(|e| e.to_string())?;
    let dmin = audit.min_beam_splitter_detuning;
    let stark = audit.max_stark_magnitude_mhz();
    let detail = format!(
        "min unintended detuning {:.3} GHz (Delta = {:.3} GHz), max Stark {:.3} MHz",
        dmin / (2.0 * PI),
        plan.delta / (2.0 * PI),
        stark
    );
    ensure((dmin - plan.delta).abs() <= 1e-9 * plan.delta, format!("{detail}; need detuning = Delta"))?;
    ensure(stark < 0.2, format!("{detail}; need Stark < 0.2 MHz"))?;
    Ok(detail)
}

fn run_prop<S: Strategy>(
    name: &str,
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, test).map_err(|e| format!("{name}: {e}"))
}

fn properties() -> Check {
    run_prop("unitarity", 64, (0.05f64..=1.0, -PI..PI, -PI..PI, 2usize..=6, 2usize..=6), |(g, th, ps, n, m)| {
        let mut sets = vec![u2_family::<f64>(g, th, ps).unwrap(), shift_family(n).unwrap()];
        if m < n {
            sets.push(stride_family(n, m).unwrap());
        }
        for set in sets {
            for id in LinkId::ALL {
                let dev = unitarity_deviation(set.link(id).matrix());
                prop_assert!(dev <= 1e-12, "{} deviates by {dev:e}", id.name());
            }
        }
        Ok(())
    })?;

    run_prop("norm", 24, (0.05f64..=1.0, -PI..PI, -PI..PI, 1usize..=2, 1.0f64..50.0), |(g, th, ps, mode, t)| {
        let links = u2_family::<f64>(g, th, ps).unwrap();
        let model = build_real_space(LatticeSpec::centered(2, 11, 1.0), &links).unwrap();
        let walk = evolve(&model, ModeIndex::new(0, Site::A, mode), t, 50).unwrap();
        prop_assert!(walk.norm_deviation() <= 1e-10);
        Ok(())
    })?;

    let model = fig3_chain()?;
    let dim = model.dim();
    let solve = |p: CVector<f64>, w: f64| steady_state(&model, &DriveSetup::new(p, w, KAPPA).unwrap()).unwrap();
    run_prop("linearity", 32, (0..dim, 0..dim, -2.0f64..2.0, -2.0f64..2.0, -3.0f64..3.0), |(i, j, a, b, w)| {
        let mut p1 = CVector::<f64>::zeros(dim);
        p1[i] = Complex::new(a, b);
        let mut p2 = CVector::<f64>::zeros(dim);
        p2[j] = Complex::new(b, -a) + c(0.5);
        let lhs = solve(&p1 + &p2, w).amplitudes;
        let rhs = solve(p1, w).amplitudes + solve(p2, w).amplitudes;
        prop_assert!((&lhs - &rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
        Ok(())
    })?;

    let target = resonant_cles(&model, &u2_model(), 6f64.sqrt(), ModeIndex::new(0, Site::A, 1)).unwrap();
    let static_model = TimeDependentModel::from_static(&model);
    let times = [5.0, 20.0, 60.0];
    let base_drive = pump(&model, 1, 6f64.sqrt())?;
    let base_ss = steady_state(&model, &base_drive).unwrap();
    let base_traj = integrate_driven(&static_model, &base_drive, &times, Tolerances::default()).unwrap();
    let base_f = fidelity_series(&base_traj, &target).unwrap();
    run_prop("pump phase", 12, -PI..PI, |phase| {
        let mut d = base_drive.clone();
        d.pump *= Complex::from_polar(1.0, phase);
        let ss = steady_state(&model, &d).unwrap();
        for (x, y) in ss.sspn.iter().zip(&base_ss.sspn) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + y));
        }
        let traj = integrate_driven(&static_model, &d, &times, Tolerances::default()).unwrap();
        let f = fidelity_series(&traj, &target).unwrap();
        for (x, y) in f.iter().zip(&base_f) {
            prop_assert!((x - y).abs() <= 1e-8);
        }
        let snapshot = Trajectory { times: vec![1.0], amplitudes: vec![ss.amplitudes], stats: Stats::default() };
        let base_snapshot = Trajectory { times: vec![1.0], amplitudes: vec![base_ss.amplitudes.clone()], stats: Stats::default() };
        let a = fidelity_series(&snapshot, &target).unwrap()[0];
        let b = fidelity_series(&base_snapshot, &target).unwrap()[0];
        prop_assert!((a - b).abs() <= 1e-12);
        Ok(())
    })?;
    Ok("unitarity 64 cases, norm 24, linearity 32, pump phase 12".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("flat bands", flat_bands),
        ("nilpotency", nilpotency),
        ("U(2) caging", u2_caging),
        ("shift-family cages", shift_cages),
        ("cage table reconciliation", table1),
        ("chiral symmetry", chiral),
        ("steady state", steady_states),
        ("fidelity", fidelity),
        ("cross-talk audit", crosstalk),
        ("property suites", properties),
    ];
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if only.is_some_and(|k| k != n) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail} [{secs:.2} s]"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {why} [{secs:.2} s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
