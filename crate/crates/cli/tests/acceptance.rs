//! Acceptance checks; prints one `[PASS]`/`[FAIL]` line per criterion.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;

use num_complex::Complex64;
use qtomo_cli::config::{LadderSpec, SystemSpec, TaskSpec};
use qtomo_cli::{parse_config_in, serialize};
use qtomo_core::hamiltonian_dynamics::*;
use qtomo_core::hermite::{hermite_series_oracle, HermiteTable};
use qtomo_core::linalg::symplectic_form;
use qtomo_core::model_library::*;
use qtomo_core::quadrature::{composite, gauss_legendre};
use qtomo_core::tomography::*;
use qtomo_core::transitions::{overlap_quadrature, sum_rule_check, BogoliubovS, OverlapKernel};
use qtomo_core::{constant_fn, scalar_fn, CMatrix, CVector, RMatrix, RVector, ScalarFn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn modulated(force: ScalarFn) -> ParametricOscillator {
    ParametricOscillator::new(1.0, scalar_fn(|t| 1.0 + 0.1 * t.sin()), force, 1.0).unwrap()
}

fn symplectic_conservation() -> Check {
    let sys = modulated(scalar_fn(|t| 0.3 * (1.5 * t).cos()));
    let h = sys.hamiltonian().unwrap();
    let traj = propagate_real(&h, 10.0, PropagationOptions::with_dt(1e-3)).map_err(|e| e.to_string())?;
    let s = symplectic_form(1);
    let worst = traj
        .samples
        .iter()
        .map(|x| (&x.lambda * &s * x.lambda.transpose() - &s).amax())
        .fold(0.0, f64::max);
    ensure(
        worst <= 1e-8 && traj.samples.len() == 10001,
        format!(
            "max |Λ Σ Λᵀ − Σ| = {worst:.2e} over {} samples (≤ 1e-8)",
            traj.samples.len()
        ),
    )
}

fn closed_form_vs_integrator() -> Check {
    let (a, b) = (0.4f64.cos(), 0.4f64.sin());
    let q = RMatrix::from_row_slice(2, 2, &[a, -b, b, a]);
    let b_pp = &q * diag(&[1.0, 0.5]) * q.transpose();
    let b_xx = &q * diag(&[2.0, 1.5]) * q.transpose();
    let h = QuadraticHamiltonian::constant(
        b_pp.clone(),
        RMatrix::zeros(2, 2),
        b_xx.clone(),
        RVector::zeros(2),
        RVector::zeros(2),
        1.0,
    )
    .unwrap();
    let deviation = |dt: f64, stride: usize| -> Result<(f64, f64), String> {
        let traj = propagate_real(&h, 5.0, PropagationOptions::with_dt(dt)).map_err(|e| e.to_string())?;
        let mut worst = 0.0f64;
        for x in traj.samples.iter().step_by(stride) {
            let exact = closed_form_propagator(&b_pp, &b_xx, x.t).map_err(|e| e.to_string())?;
            worst = worst.max((&x.lambda - exact.transpose()).amax());
        }
        let last = traj.last();
        let exact = closed_form_propagator(&b_pp, &b_xx, last.t).map_err(|e| e.to_string())?;
        Ok((worst, (&last.lambda - exact.transpose()).amax()))
    };
    let (fine, _) = deviation(1e-3, 50)?;
    let (_, coarse) = deviation(0.05, 1)?;
    let (_, half) = deviation(0.025, 1)?;
    let ratio = coarse / half;
    ensure(
        fine <= 1e-8 && (12.0..=20.0).contains(&ratio),
        format!("max deviation {fine:.2e} at dt = 1e-3 (≤ 1e-8); error ratio dt 0.05 → 0.025 is {ratio:.2} (≈ 16)"),
    )
}

fn hermite_engine() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    let mut count = 0;
    for k in 0..20 {
        let d = 1 + k % 3;
        let mut r = CMatrix::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let v = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                r[(i, j)] = v;
                r[(j, i)] = v;
            }
        }
        let x = CVector::from_fn(d, |_, _| c(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)));
        let oracle = hermite_series_oracle(&r, &x, 6).map_err(|e| e.to_string())?;
        let table = HermiteTable::new(&r, &(&r * &x), &vec![6; d]).map_err(|e| e.to_string())?;
        for (m, v) in &oracle {
            worst = worst.max((table.value(m) - v).norm() / v.norm().max(1.0));
            count += 1;
        }
    }
    ensure(
        worst <= 1e-11,
        format!("worst relative error {worst:.2e} over {count} values (≤ 1e-11)"),
    )
}

fn convention_certification() -> Check {
    let mut lines = vec![];
    let mut ok = true;
    for th in [0.1f64, 0.5, 1.0] {
        let t = th.tanh();
        let table = HermiteTable::new(&CMatrix::from_element(1, 1, c(t, 0.0)), &CVector::zeros(1), &[160])
            .map_err(|e| e.to_string())?;
        let (mut m_fact, mut sqrt_fact) = (0.0, 0.0);
        // closed-form terms (2m)!/(2^{2m}(m!)²) tanh^{2m}θ
        let (mut series, mut term) = (0.0, 1.0);
        for m in 0..=80usize {
            series += term;
            term *= (2 * m + 1) as f64 * (2 * m + 2) as f64 / (4.0 * ((m + 1) * (m + 1)) as f64) * t * t;
            let h2 = table.normalized(&[2 * m]).norm_sqr();
            m_fact += h2;
            let fact: f64 = (1..=2 * m).map(|v| v as f64).product();
            sqrt_fact += h2 / fact;
        }
        let target = th.cosh();
        let (e_series, e_engine) = ((series - target).abs(), (m_fact - target).abs());
        let gap = (sqrt_fact - target).abs() / target;
        ok &= e_series <= 1e-12 && e_engine <= 1e-12 && gap > 1e-3 && (th < 1.0 || gap > 0.1);
        lines.push(format!(
            "θ={th}: |Σ−cosh| = {e_series:.1e} (series), {e_engine:.1e} (engine); √(m!) gap {:.2}%",
            100.0 * gap
        ));
    }
    ensure(ok, lines.join("; "))
}

fn sum_rules() -> Check {
    let mut lines = vec![];
    let mut ok = true;
    for th in [0.25f64, 0.5, 1.0] {
        let s = BogoliubovS::squeeze(th);
        let r0 = sum_rule_check(&s, &[0], 160).map_err(|e| e.to_string())?;
        let e0 = (r0.partial_sum - th.cosh()).abs();
        let r2 = sum_rule_check(&s, &[2], 160).map_err(|e| e.to_string())?;
        let e2 = r2.residual / r2.target;
        ok &= e0 <= 1e-10 && e2 <= 1e-8 && (r0.target - th.cosh()).abs() < 1e-14;
        lines.push(format!("θ={th}: n=0 {e0:.1e}, n=2 {e2:.1e}"));
    }
    ensure(ok, lines.join("; "))
}

fn ten_frames() -> Vec<TomogramFrame> {
    (0..10)
        .map(|k| {
            let phi = PI * (k as f64 + 0.5) / 10.0;
            let r = 0.6 + 0.15 * k as f64;
            TomogramFrame::new(vec![r * phi.cos()], vec![r * phi.sin()]).unwrap()
        })
        .collect()
}

fn integrate(f: impl Fn(f64) -> f64, center: f64, half: f64) -> f64 {
    composite(&gauss_legendre(10), center - half, center + half, 80, |x| c(f(x), 0.0)).re
}

fn tomogram_vs_quadrature() -> Check {
    let sys = modulated(scalar_fn(|t| 0.4 * t.cos()));
    let ctxs = oscillator_states(&sys, &[0.0, 0.7], PropagationOptions::with_dt(1e-3)).map_err(|e| e.to_string())?;
    let (mut pointwise, mut norm) = (0.0f64, 0.0f64);
    let mut evaluations = 0;
    for ctx in &ctxs {
        let prepared = ctx.prepare().map_err(|e| e.to_string())?;
        let zero = CVector::zeros(1);
        for frame in ten_frames() {
            for alpha in [c(0.0, 0.0), c(0.5, 0.0), c(0.5, 0.3)] {
                let a = CVector::from_element(1, alpha);
                let g = coherent_tomogram(&ctx.invariants, &frame, &a).map_err(|e| e.to_string())?;
                let s = g.sigma[(0, 0)].sqrt();
                let window = QuadratureWindow::for_state(&ctx.invariants, &a, 0, 10.0).map_err(|e| e.to_string())?;
                for k in [-1.5, 0.0, 1.0] {
                    let x = g.x0[0] + k * s;
                    let closed = tomogram_density(&g, &[x]).map_err(|e| e.to_string())?;
                    let quad = tomogram_quadrature(|y| prepared.coherent(&a, y), &frame, &[x], 1.0, &window)
                        .map_err(|e| e.to_string())?;
                    pointwise = pointwise.max((closed - quad).abs());
                    evaluations += 1;
                }
                let total = integrate(|x| tomogram_density(&g, &[x]).unwrap(), g.x0[0], 14.0 * s);
                norm = norm.max((total - 1.0).abs());
            }
            let ft = FockTomogram::new(&ctx.invariants, &frame).map_err(|e| e.to_string())?;
            let g = coherent_tomogram(&ctx.invariants, &frame, &zero).map_err(|e| e.to_string())?;
            let s = g.sigma[(0, 0)].sqrt();
            for n in 0..=4usize {
                let window = QuadratureWindow::for_state(&ctx.invariants, &zero, n, 10.0).map_err(|e| e.to_string())?;
                for k in [-1.2, 0.3, 2.0] {
                    let x = g.x0[0] + k * s;
                    let closed = ft.eval(&[n], &[x]).map_err(|e| e.to_string())?;
                    let quad = tomogram_quadrature(|y| prepared.fock(&[n], y), &frame, &[x], 1.0, &window)
                        .map_err(|e| e.to_string())?;
                    pointwise = pointwise.max((closed - quad).abs());
                    evaluations += 1;
                }
                let total = integrate(|x| ft.eval(&[n], &[x]).unwrap(), g.x0[0], 16.0 * s);
                norm = norm.max((total - 1.0).abs());
            }
        }
    }
    ensure(
        pointwise <= 1e-6 && norm <= 1e-8,
        format!("max pointwise deviation {pointwise:.2e} over {evaluations} points (≤ 1e-6); max |∫w − 1| = {norm:.2e} (≤ 1e-8)"),
    )
}

fn physicists(n: usize, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, 2.0 * x);
    if n == 0 {
        return a;
    }
    for k in 1..n {
        let next = 2.0 * x * b - 2.0 * k as f64 * a;
        a = b;
        b = next;
    }
    b
}

fn harmonic_special_case() -> Check {
    let (m, w, hb) = (1.4, 0.9, 0.6);
    let osc = ParametricOscillator::harmonic(m, w, hb).unwrap();
    let mut worst = 0.0f64;
    for t in [0.0, 0.9, 2.3, 7.1] {
        let ctx = oscillator_states(&osc, &[t], PropagationOptions::default())
            .map_err(|e| e.to_string())?
            .remove(0);
        for (mu, nu) in [(1.0, 0.0), (0.0, 1.0), (0.4, 0.7), (-0.2, 1.5)] {
            let frame = TomogramFrame::new(vec![mu], vec![nu]).unwrap();
            let ft = FockTomogram::new(&ctx.invariants, &frame).map_err(|e| e.to_string())?;
            let scale = mu * mu + m * m * w * w * nu * nu;
            let w0 = |x: f64| (m * w / (PI * hb * scale)).sqrt() * (-m * w * x * x / (hb * scale)).exp();
            for n in 0..=5usize {
                for x in [-1.1, -0.3, 0.0, 0.6, 1.4] {
                    let arg = (m * w / hb).sqrt() * x / scale.sqrt();
                    let fact: f64 = (1..=n).map(|v| v as f64).product();
                    let expect = physicists(n, arg).powi(2) / (2f64.powi(n as i32) * fact) * w0(x);
                    let got = ft.eval(&[n], &[x]).map_err(|e| e.to_string())?;
                    worst = worst.max((got - expect).abs() / expect.max(1e-3));
                }
            }
        }
    }
    ensure(
        worst <= 1e-12,
        format!("worst relative deviation {worst:.2e} for n ≤ 5 (≤ 1e-12)"),
    )
}

fn transition_unitarity() -> Check {
    let mut lines = vec![];
    let mut ok = true;
    for force in [0.0, 0.6] {
        let sys = ParametricOscillator::new(
            1.0,
            scalar_fn(|t| if t < 0.5 { 1.0 } else { 1.2 }),
            scalar_fn(move |t| force * t.cos()),
            1.0,
        )
        .unwrap();
        let v = oscillator_states(&sys, &[0.0, 1.0], PropagationOptions::with_dt(1e-3)).map_err(|e| e.to_string())?;
        let k = OverlapKernel::new(&v[0], &v[1]).map_err(|e| e.to_string())?;
        let table = k.table(&[4], &[30]).map_err(|e| e.to_string())?;
        let sum: f64 = (0..=30).map(|m| k.from_table(&table, &[0], &[m]).norm_sqr()).sum();
        let mut quad_dev = 0.0f64;
        for n in 0..=4 {
            for m in 0..=4 {
                let q = overlap_quadrature(&v[0], &v[1], &[n], &[m]).map_err(|e| e.to_string())?;
                quad_dev = quad_dev.max((k.from_table(&table, &[n], &[m]) - q).norm());
            }
        }
        ok &= (sum - 1.0).abs() <= 1e-8 && quad_dev <= 1e-7;
        lines.push(format!(
            "force {force}: |Σ − 1| = {:.1e}, quadrature deviation {quad_dev:.1e}",
            (sum - 1.0).abs()
        ));
    }
    ensure(ok, lines.join("; "))
}

fn charged_particle() -> Check {
    let hbar = 0.7f64;
    let s = 1.0 / (2.0 * hbar).sqrt();
    let (a_p, a_x) = (c(0.0, s * 0.3f64.exp()), c(s * (-0.3f64).exp(), 0.0));
    let mass = 1.5;
    let fields: [(&str, ScalarFn); 3] = [
        ("0", constant_fn(0.0)),
        ("1", constant_fn(1.0)),
        ("sin t", scalar_fn(f64::sin)),
    ];
    let times: Vec<f64> = (0..=20).map(|k| 0.1 * k as f64).collect();
    let mut worst = 0.0f64;
    for (_, field) in fields {
        let sys = ChargedParticle::new(mass, field, hbar, a_p, a_x).map_err(|e| e.to_string())?;
        let frame = sys.frame();
        let generic = evolve_modes(
            &sys.hamiltonian().unwrap(),
            &frame,
            &times,
            PropagationOptions::with_dt(1e-3),
        )
        .map_err(|e| e.to_string())?;
        for g in &generic.samples {
            let p = particle_state(&sys, g.invariants.t).map_err(|e| e.to_string())?;
            let d = [
                (p.invariants.lambda_p[(0, 0)] - g.invariants.lambda_p[(0, 0)]).norm(),
                (p.invariants.lambda_x[(0, 0)] - g.invariants.lambda_x[(0, 0)]).norm(),
                (p.invariants.delta[0] - g.invariants.delta[0]).norm(),
            ];
            worst = d.into_iter().fold(worst, f64::max);
        }
    }
    let free = ChargedParticle::new(mass, constant_fn(0.0), hbar, a_p, a_x).map_err(|e| e.to_string())?;
    let mut spread = 0.0f64;
    let ts = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0];
    let generic = evolve_modes(
        &free.hamiltonian().unwrap(),
        &free.frame(),
        &ts,
        PropagationOptions::with_dt(1e-3),
    )
    .map_err(|e| e.to_string())?;
    for (t, g) in ts.into_iter().zip(&generic.samples) {
        let position = TomogramFrame::position(1);
        let sigma = particle_tomogram_parts(&free, t, &position)
            .map_err(|e| e.to_string())?
            .sigma;
        let propagated = coherent_tomogram(&g.invariants, &position, &CVector::zeros(1))
            .map_err(|e| e.to_string())?
            .sigma[(0, 0)];
        let expect = hbar * hbar * (a_p - a_x * t / mass).norm_sqr();
        spread = spread
            .max((sigma - expect).abs() / expect)
            .max((propagated - expect).abs() / expect);
    }
    ensure(
        worst <= 1e-9 && spread <= 1e-10,
        format!("closed form vs propagation {worst:.2e} (≤ 1e-9); free dispersion relative error {spread:.2e} (≤ 1e-10, closed form and propagated)"),
    )
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn qtomo(config: &Path, out: &Path) -> Result<i32, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_qtomo"))
        .arg(config)
        .arg("--out")
        .arg(out)
        .arg("--quiet")
        .output()
        .map_err(|e| e.to_string())?;
    o.status.code().ok_or_else(|| "killed by a signal".to_string())
}

fn model_frame(sys: &SystemSpec, ladder: &LadderSpec) -> Result<LadderFrame, String> {
    let err = |e: qtomo_core::Error| e.to_string();
    let h = match sys {
        SystemSpec::Oscillator {
            mass,
            hbar,
            omega,
            force,
        } => {
            let o = ParametricOscillator::new(*mass, omega.to_fn(), force.to_fn(), *hbar).map_err(err)?;
            if *ladder == LadderSpec::Model {
                return Ok(o.frame());
            }
            o.hamiltonian().map_err(err)?
        }
        SystemSpec::ChargedParticle { mass, hbar, field } => {
            let p = ChargedParticle::unsqueezed(*mass, field.to_fn(), *hbar).map_err(err)?;
            if *ladder == LadderSpec::Model {
                return Ok(p.frame());
            }
            p.hamiltonian().map_err(err)?
        }
        SystemSpec::Custom {
            hbar, b_pp, b_px, b_xx, ..
        } => {
            let n = b_pp.nrows();
            QuadraticHamiltonian::constant(
                b_pp.clone(),
                b_px.clone(),
                b_xx.clone(),
                RVector::zeros(n),
                RVector::zeros(n),
                *hbar,
            )
            .map_err(err)?
        }
    };
    let choice = match ladder {
        LadderSpec::Model => FrameChoice::Auto,
        LadderSpec::Spectral => FrameChoice::Spectral,
        LadderSpec::Decoupled => FrameChoice::Decoupled,
        LadderSpec::Explicit { a_p, a_x } => return LadderFrame::new(a_p.clone(), a_x.clone(), h.hbar()).map_err(err),
    };
    default_ladder_frame(&h, choice).map_err(err)
}

fn cli_gating() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("out");
    let mut entries: Vec<PathBuf> = std::fs::read_dir(configs_dir())
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .collect();
    entries.sort();
    for p in &entries {
        if p.extension().is_some_and(|e| e != "conf") {
            std::fs::copy(p, dir.path().join(p.file_name().unwrap())).map_err(|e| e.to_string())?;
        }
    }
    let (mut shipped, mut verified, mut corrupted) = (0, 0, 0);
    let mut failures = vec![];
    for p in entries.iter().filter(|p| p.extension().is_some_and(|e| e == "conf")) {
        let name = p.file_name().unwrap().to_string_lossy().to_string();
        let code = qtomo(p, &out)?;
        shipped += 1;
        if code != 0 {
            failures.push(format!("{name} exited {code}"));
        }
        let text = std::fs::read_to_string(p).map_err(|e| e.to_string())?;
        let mut cfg = parse_config_in(&text, &configs_dir()).map_err(|e| e.to_string())?;
        let Some(sys) = cfg.system.clone() else { continue };
        cfg.task = TaskSpec::Verify {
            times: vec![0.0, 0.5, 1.0, 2.0],
        };
        cfg.output.path = None;
        let vpath = dir.path().join(format!("verify_{name}"));
        std::fs::write(&vpath, serialize(&cfg)).map_err(|e| e.to_string())?;
        let code = qtomo(&vpath, &out)?;
        verified += 1;
        if code != 0 {
            failures.push(format!("verify on {name} exited {code}"));
        }
        let frame = model_frame(&sys, &cfg.ladder)?;
        cfg.ladder = LadderSpec::Explicit {
            a_p: frame.a_p.clone(),
            a_x: &frame.a_x * c(2.0, 0.0),
        };
        let bpath = dir.path().join(format!("corrupt_{name}"));
        std::fs::write(&bpath, serialize(&cfg)).map_err(|e| e.to_string())?;
        let code = qtomo(&bpath, &out)?;
        corrupted += 1;
        if code != 3 {
            failures.push(format!("corrupted A_x on {name} exited {code}"));
        }
    }
    let tomo = configs_dir().join("tomogram.conf");
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    qtomo(&tomo, &a)?;
    qtomo(&tomo, &b)?;
    if std::fs::read(&a).map_err(|e| e.to_string())? != std::fs::read(&b).map_err(|e| e.to_string())? {
        failures.push("repeated runs differ".into());
    }
    ensure(
        failures.is_empty() && shipped > 0,
        format!(
            "repeated runs byte-identical; {shipped} shipped configs exit 0, {verified} verify runs exit 0, {corrupted} corrupted frames exit 3{}",
            if failures.is_empty() { String::new() } else { format!("; failures: {}", failures.join(", ")) }
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("symplectic conservation", symplectic_conservation),
        ("closed form vs integrator", closed_form_vs_integrator),
        ("hermite engine", hermite_engine),
        ("convention certification", convention_certification),
        ("sum rules", sum_rules),
        ("tomogram vs quadrature", tomogram_vs_quadrature),
        ("harmonic special case", harmonic_special_case),
        ("transition unitarity", transition_unitarity),
        ("charged particle", charged_particle),
        ("cli determinism and gating", cli_gating),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let (tag, detail) = match result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("[{tag}] {:>2}. {name}: {detail}", k + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
