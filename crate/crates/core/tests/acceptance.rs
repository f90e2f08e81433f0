//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`cargo test --test acceptance`). Failing criteria
//! are reported but do not fail the run unless `ACCEPTANCE_STRICT=1`.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use lambda_memory::control::{overlap_fidelity, ControlEnvelope, GaussianControl};
use lambda_memory::criteria::{gaussian_box, DelayScale, GaussianCriterion, MemoryCriterion};
use lambda_memory::dynamics::{
    absorption_sanity, check_convergence, efficiency, lorentzian_filter_transmission, simulate_storage,
    MemoryParams, SolverConfig,
};
use lambda_memory::optimize::{optimize_gaussian, optimize_shape, OptimizerConfig};
use lambda_memory::sensitivity::{
    fit_slope, fluctuation_stats, oat_variance, sobol_decompose, FluctuationSpec, FnCriterion, NoiseMode,
    SensitivityBox,
};
use lambda_memory::sweep::{run, AnalysisKind, SweepConfig, MANIFEST_FILE};
use rand::Rng;
use rand_mt::Mt64;

struct Suite {
    passed: usize,
    failed: Vec<String>,
}

impl Suite {
    fn report(&mut self, id: &str, name: &str, pass: bool, detail: String, elapsed: Duration) {
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {id:>2} {name}: {detail} ({:.1}s)", elapsed.as_secs_f64());
        if pass {
            self.passed += 1;
        } else {
            self.failed.push(format!("{id} {name}"));
        }
    }

    fn info(&self, name: &str, detail: String) {
        println!("[INFO]    {name}: {detail}");
    }
}

fn ishigami(x: &[f64]) -> f64 {
    x[0].sin() + 7.0 * x[1].sin().powi(2) + 0.1 * x[2].powi(4) * x[0].sin()
}

fn criterion_1(s: &mut Suite) {
    let t = Instant::now();
    let (a, b) = (7.0, 0.1);
    let pi4 = PI.powi(4);
    let v = a * a / 8.0 + b * pi4 / 5.0 + b * b * pi4 * pi4 / 18.0 + 0.5;
    let analytic = [0.5 * (1.0 + b * pi4 / 5.0).powi(2) / v, a * a / 8.0 / v, 0.0];
    let target = [0.3139, 0.4424, 0.0];
    let bx = SensitivityBox::from_ranges(vec![0.0; 3], vec![(-PI, PI); 3], 65).unwrap();
    let r = sobol_decompose(&FnCriterion::new(3, ishigami), &bx).unwrap();
    let pass = (0..3).all(|i| (r.s_first[i] - target[i]).abs() <= 0.01 && (analytic[i] - target[i]).abs() < 5e-5)
        && r.closure_residual.abs() < 1e-6;
    let detail = format!(
        "S = [{:.4}, {:.4}, {:.4}] (analytic [{:.4}, {:.4}, {:.4}], tol 0.01), residual {:.1e} (< 1e-6)",
        r.s_first[0], r.s_first[1], r.s_first[2], analytic[0], analytic[1], analytic[2], r.closure_residual
    );
    s.report("1", "Sobol' Ishigami oracle", pass, detail, t.elapsed());
}

fn criterion_2(s: &mut Suite) {
    let t = Instant::now();
    let h = FnCriterion::new(3, |x: &[f64]| x[0].exp() * x[1].sin() + x[2] * x[2]);
    let bx = SensitivityBox::from_ranges(vec![0.5; 3], vec![(0.0, 1.0); 3], 33).unwrap();
    let r = sobol_decompose(&h, &bx).unwrap();
    let sum = r.total_index();
    let pass = (sum - 1.0).abs() <= 1e-12 && r.closure_residual.abs() < 1e-6;
    let detail = format!("sum S - 1 = {:.1e}, residual {:.1e} (< 1e-6)", sum - 1.0, r.closure_residual);
    s.report("2", "Sobol' closure", pass, detail, t.elapsed());
}

fn criterion_3(s: &mut Suite) {
    let t = Instant::now();
    let search = SolverConfig::coarse();
    let mut etas = Vec::new();
    let mut pass = true;
    for (d, g, n, budget, target, tol) in [(50.0, 1.5, 51, 5000, 0.952, 0.02), (50.0, 0.01, 135, 8000, 0.587, 0.03)] {
        let m = MemoryParams::new(d, g).unwrap();
        let gauss = optimize_gaussian(m, &OptimizerConfig { solver: search, ..OptimizerConfig::gaussian() }).unwrap();
        let cfg = OptimizerConfig { solver: search, max_evals: budget, ..OptimizerConfig::shape() };
        let rec = optimize_shape(m, n, &gauss.control, &cfg).unwrap();
        let eta = efficiency(m, &rec.control, &SolverConfig::default()).unwrap();
        pass &= (eta - target).abs() <= tol;
        etas.push(format!("d={d} g={g} N={n}: η={eta:.4} (target {target} ± {tol}, Gaussian {:.4})", gauss.efficiency));
    }
    pass &= t.elapsed() <= Duration::from_secs(30 * 60);
    s.report("3", "shape-optimized efficiency", pass, etas.join("; "), t.elapsed());
}

struct Probe {
    name: &'static str,
    memory: MemoryParams,
    control: GaussianControl,
}

fn probes() -> Vec<Probe> {
    let cfg = OptimizerConfig { solver: SolverConfig::coarse(), ..OptimizerConfig::gaussian() };
    [("ATT", 10.0, 0.01), ("ATS", 30.0, 0.15), ("EIT", 100.0, 1.5)]
        .into_iter()
        .map(|(name, d, g)| {
            let memory = MemoryParams::new(d, g).unwrap();
            let control = optimize_gaussian(memory, &cfg).unwrap().gaussian().unwrap();
            Probe { name, memory, control }
        })
        .collect()
}

fn slopes(probes: &[Probe], mode: NoiseMode) -> Vec<f64> {
    let eps = [0.02, 0.05, 0.08, 0.10];
    probes
        .iter()
        .map(|p| {
            let h = MemoryCriterion { control: p.control.into(), solver: SolverConfig::default() };
            let sig: Vec<f64> = eps
                .iter()
                .map(|&e| {
                    let spec = FluctuationSpec::new(vec![p.memory.d, p.memory.g], e, 200, 0, mode).unwrap();
                    fluctuation_stats(&h, &spec).unwrap().std_dev
                })
                .collect();
            fit_slope(&eps, &sig).unwrap()
        })
        .collect()
}

fn criterion_4(s: &mut Suite, probes: &[Probe]) {
    let t = Instant::now();
    let targets = [0.38, 0.13, 0.09];
    let p = slopes(probes, NoiseMode::AtomNumberPreserving);
    let ordered = p[0] > p[1] && p[1] > p[2];
    let magnitudes = p.iter().zip(targets).all(|(v, t)| (v / t - 1.0).abs() <= 0.3);
    let detail = format!(
        "p = ATT {:.4}, ATS {:.4}, EIT {:.4} (targets 0.38/0.13/0.09 ± 30%: {}; ordering ATT > ATS > EIT: {})",
        p[0],
        p[1],
        p[2],
        if magnitudes { "ok" } else { "off" },
        if ordered { "ok" } else { "violated" }
    );
    s.report("4", "fluctuation slopes (atom-number-preserving)", ordered && magnitudes, detail, t.elapsed());
    let q = slopes(probes, NoiseMode::Independent);
    s.info(
        "fluctuation slopes (independent)",
        format!("p = ATT {:.4}, ATS {:.4}, EIT {:.4}; ordering {}", q[0], q[1], q[2], q[0] > q[1] && q[1] > q[2]),
    );
}

fn oat_sigmas(probes: &[Probe], scale: DelayScale) -> Vec<[f64; 2]> {
    probes
        .iter()
        .map(|p| {
            let h = GaussianCriterion { memory: p.memory, solver: SolverConfig::default() };
            let bx = gaussian_box(&p.control, 0.05, 21, scale).unwrap();
            [oat_variance(&h, &bx, 0).unwrap().1, oat_variance(&h, &bx, 1).unwrap().1]
        })
        .collect()
}

fn criterion_5(s: &mut Suite, probes: &[Probe]) {
    let t = Instant::now();
    let o = oat_sigmas(probes, DelayScale::Signal);
    let area = o[0][0] > o[1][0] && o[0][0] > o[2][0];
    let delay = o[1][1] > o[0][1] && o[1][1] > o[2][1];
    let detail = format!(
        "σ_area ATT {:.2e} ATS {:.2e} EIT {:.2e} (ATT largest: {area}); σ_delay ATT {:.2e} ATS {:.2e} EIT {:.2e} (ATS largest: {delay})",
        o[0][0], o[1][0], o[2][0], o[0][1], o[1][1], o[2][1]
    );
    s.report("5", "OAT ordering", area && delay, detail, t.elapsed());
    let r = oat_sigmas(probes, DelayScale::Relative);
    s.info(
        "OAT delay, relative half-width",
        format!("σ_delay ATT {:.2e} ATS {:.2e} EIT {:.2e}", r[0][1], r[1][1], r[2][1]),
    );
    for p in probes {
        let c = &p.control;
        s.info(
            &format!("probe {}", p.name),
            format!("d={} g={}: θ/π={:.3} Δτ={:.3} τ_FWHM={:.3}", p.memory.d, p.memory.g, c.theta / PI, c.delay, c.fwhm),
        );
    }
}

fn refinement(s: &mut Suite, probes: &[Probe]) {
    let t = Instant::now();
    let deltas: Vec<f64> = probes
        .iter()
        .map(|p| check_convergence(p.memory, &p.control.into(), &SolverConfig::default()).unwrap().delta)
        .collect();
    let pass = deltas.iter().all(|d| *d < 1e-3);
    s.report("R", "solver refinement at probes", pass, format!("deltas {} (< 1e-3)", deltas.iter().map(|d| format!("{d:.1e}")).collect::<Vec<_>>().join(", ")), t.elapsed());
}

fn criterion_6(s: &mut Suite) {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for d in [1.0, 10.0, 50.0] {
        for g in [0.01, 0.1, 1.5] {
            let m = MemoryParams::new(d, g).unwrap();
            let sim = absorption_sanity(m, &SolverConfig::default()).unwrap();
            worst = worst.max((sim - lorentzian_filter_transmission(m)).abs());
        }
    }
    s.report("6", "transmission oracle", worst <= 1e-3, format!("max deviation {worst:.2e} (<= 1e-3)"), t.elapsed());
}

fn criterion_7(s: &mut Suite) {
    let t = Instant::now();
    let mut rng = Mt64::new(7);
    let mut eta_range = (f64::INFINITY, f64::NEG_INFINITY);
    let mut worst_budget: f64 = 0.0;
    for _ in 0..200 {
        let m = MemoryParams::new(10f64.powf(rng.random_range(0.0..2.0)), 10f64.powf(rng.random_range(-2.0..0.5)))
            .unwrap();
        let c: ControlEnvelope = GaussianControl::new(
            rng.random_range(0.05..8.0) * PI,
            rng.random_range(-2.0..3.0),
            rng.random_range(0.1..3.0),
        )
        .unwrap()
        .into();
        let out = simulate_storage(m, &c, &SolverConfig::for_control(&c)).unwrap();
        let eta = out.efficiency();
        eta_range = (eta_range.0.min(eta), eta_range.1.max(eta));
        worst_budget =
            worst_budget.max((out.stored_energy + out.transmitted_energy + out.polarization_energy) / out.input_energy);
    }
    let gauss: ControlEnvelope = GaussianControl::new(2.0 * PI, 0.0, 1.0).unwrap().into();
    let zero_ctrl = efficiency(MemoryParams::new(30.0, 0.15).unwrap(), &ControlEnvelope::Zero, &SolverConfig::default())
        .unwrap();
    let zero_depth = efficiency(MemoryParams::new(0.0, 0.15).unwrap(), &gauss, &SolverConfig::default()).unwrap();
    let pass = eta_range.0 >= 0.0
        && eta_range.1 <= 1.0
        && worst_budget <= 1.0 + 1e-3
        && zero_ctrl < 1e-10
        && zero_depth < 1e-10;
    let detail = format!(
        "η ∈ [{:.4}, {:.4}], max energy budget {:.6} (<= 1.001), zero control {zero_ctrl:.1e}, zero depth {zero_depth:.1e}",
        eta_range.0, eta_range.1, worst_budget
    );
    s.report("7", "physical invariants", pass, detail, t.elapsed());
}

fn criterion_8(s: &mut Suite) {
    let t = Instant::now();
    let g: ControlEnvelope = GaussianControl::new(PI, 0.4, 0.8).unwrap().into();
    let self_err = (overlap_fidelity(&g, &g).unwrap() - 1.0).abs();
    let mut rng = Mt64::new(8);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let delta = rng.random_range(0.0..2.0);
        let fwhm = rng.random_range(0.1..3.0);
        let a = GaussianControl::new(PI, 0.0, fwhm).unwrap();
        let b = GaussianControl::new(3.0 * PI, delta, fwhm).unwrap();
        let sigma = a.sigma();
        let expected = (-delta * delta / (sigma * sigma)).exp();
        worst = worst.max((overlap_fidelity(&a.into(), &b.into()).unwrap() - expected).abs());
    }
    let pass = self_err <= 1e-10 && worst <= 1e-6;
    let detail = format!("|F(G,G) - 1| = {self_err:.1e} (<= 1e-10), offset pairs max error {worst:.1e} (<= 1e-6)");
    s.report("8", "overlap fidelity", pass, detail, t.elapsed());
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
        .collect();
    v.sort();
    v
}

fn criterion_9(s: &mut Suite) {
    let t = Instant::now();
    let root = tempfile::tempdir().unwrap();
    let (a, b) = (root.path().join("w1"), root.path().join("w8"));
    let mut cfg = SweepConfig {
        d_axis: vec![5.0, 30.0],
        g_axis: vec![0.1, 1.0],
        kind: AnalysisKind::Fluctuations,
        samples: 20,
        solver: SolverConfig::coarse(),
        workers: 1,
        out: a.clone(),
        ..SweepConfig::default()
    };
    cfg.optimizer.restarts = 3;
    run(&cfg).unwrap();
    let first = read_all(&a);
    let mut again = SweepConfig::load(&a.join(MANIFEST_FILE)).unwrap();
    again.out = b.clone();
    again.workers = 8;
    run(&again).unwrap();
    let second = read_all(&b);
    again.out = a.clone();
    run(&again).unwrap();
    let rerun = read_all(&a);
    let pass = first == second && first == rerun && first.len() >= 4;
    let detail = format!(
        "{} files; workers 1 vs 8 identical: {}; rerun over cache identical: {}",
        first.len(),
        first == second,
        first == rerun
    );
    s.report("9", "sweep reproducibility", pass, detail, t.elapsed());
}

fn main() {
    // Accept and ignore libtest arguments such as `--nocapture`.
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let wanted = |id: &str| filter.is_empty() || filter.iter().any(|f| f == id);
    let mut s = Suite { passed: 0, failed: Vec::new() };
    let start = Instant::now();
    if wanted("1") {
        criterion_1(&mut s);
    }
    if wanted("2") {
        criterion_2(&mut s);
    }
    if wanted("6") {
        criterion_6(&mut s);
    }
    if wanted("7") {
        criterion_7(&mut s);
    }
    if wanted("8") {
        criterion_8(&mut s);
    }
    if wanted("4") || wanted("5") || wanted("R") {
        let p = probes();
        if wanted("4") {
            criterion_4(&mut s, &p);
        }
        if wanted("5") {
            criterion_5(&mut s, &p);
        }
        if wanted("R") {
            refinement(&mut s, &p);
        }
    }
    if wanted("3") {
        criterion_3(&mut s);
    }
    if wanted("9") {
        criterion_9(&mut s);
    }
    println!(
        "acceptance: {} passed, {} failed{} ({:.0}s)",
        s.passed,
        s.failed.len(),
        if s.failed.is_empty() { String::new() } else { format!(" [{}]", s.failed.join(", ")) },
        start.elapsed().as_secs_f64()
    );
    if !s.failed.is_empty() && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
