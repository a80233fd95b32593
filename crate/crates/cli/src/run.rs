//! Execute a validated [`RunConfig`].

use std::sync::Arc;

use num_complex::Complex64;
use qtomo_core::hamiltonian_dynamics::{
    check_symplectic_properties, default_ladder_frame, evolve_modes, propagate_real, FrameChoice, LadderFrame,
    PropagationOptions, QuadraticHamiltonian,
};
use qtomo_core::model_library::{oscillator_states, particle_state, ChargedParticle, ParametricOscillator};
use qtomo_core::quadrature::{composite_points, gauss_legendre};
use qtomo_core::quantum_states::StateContext;
use qtomo_core::tomography::{coherent_tomogram, FockTomogram, GaussianDensity, TomogramFrame};
use qtomo_core::transitions::{sum_rule_check, BogoliubovS, OverlapKernel};
use qtomo_core::{CVector, Error, RVector};

use crate::config::{serialize, LadderSpec, RunConfig, SystemSpec, TaskSpec};
use crate::output::ResultTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Ok = 0,
    Config = 1,
    Numeric = 2,
    Tolerance = 3,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Numeric(#[from] Error),
    #[error("non-finite value in column `{column}`, row {row}")]
    NonFinite { column: String, row: usize },
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: ResultTable,
    /// Worst quantity gated against `numerics.tol`.
    pub worst: f64,
    pub breach: Option<String>,
}

impl Outcome {
    pub fn status(&self) -> ExitStatus {
        if self.breach.is_some() {
            ExitStatus::Tolerance
        } else {
            ExitStatus::Ok
        }
    }
}

enum Model {
    Oscillator(ParametricOscillator),
    Particle(ChargedParticle),
    Generic,
}

struct System {
    h: QuadraticHamiltonian,
    frame: LadderFrame,
    model: Model,
}

fn build_system(cfg: &RunConfig, sys: &SystemSpec) -> Result<System, RunError> {
    let (h, model) = match sys {
        SystemSpec::Oscillator {
            mass,
            hbar,
            omega,
            force,
        } => {
            let osc = match omega.constant_value() {
                Some(w) => ParametricOscillator::with_constant_omega(*mass, w, force.to_fn(), *hbar)?,
                None => ParametricOscillator::new(*mass, omega.to_fn(), force.to_fn(), *hbar)?,
            };
            (osc.hamiltonian()?, Model::Oscillator(osc))
        }
        SystemSpec::ChargedParticle { mass, hbar, field } => {
            let p = ChargedParticle::unsqueezed(*mass, field.to_fn(), *hbar)?;
            (p.hamiltonian()?, Model::Particle(p))
        }
        SystemSpec::Custom {
            hbar,
            b_pp,
            b_px,
            b_xx,
            c_p,
            c_x,
        } => {
            let (pp, px, xx) = (b_pp.clone(), b_px.clone(), b_xx.clone());
            let fns = |v: &[crate::functions::FnSpec]| {
                let f: Vec<_> = v.iter().map(|s| s.to_fn()).collect();
                Arc::new(move |t: f64| RVector::from_iterator(f.len(), f.iter().map(|g| g(t))))
            };
            let h = QuadraticHamiltonian::from_blocks(
                b_pp.nrows(),
                *hbar,
                Arc::new(move |_| pp.clone()),
                Arc::new(move |_| px.clone()),
                Arc::new(move |_| xx.clone()),
                fns(c_p),
                fns(c_x),
            )?;
            (h, Model::Generic)
        }
    };
    let frame = match (&cfg.ladder, &model) {
        (LadderSpec::Model, Model::Oscillator(o)) => o.frame(),
        (LadderSpec::Model, Model::Particle(p)) => p.frame(),
        (LadderSpec::Model, Model::Generic) => default_ladder_frame(&h, FrameChoice::Auto)?,
        (LadderSpec::Spectral, _) => default_ladder_frame(&h, FrameChoice::Spectral)?,
        (LadderSpec::Decoupled, _) => default_ladder_frame(&h, FrameChoice::Decoupled)?,
        (LadderSpec::Explicit { a_p, a_x }, _) => LadderFrame::new(a_p.clone(), a_x.clone(), h.hbar())?,
    };
    // a particle with a valid explicit frame keeps its closed form
    let model = match (model, &cfg.ladder) {
        (m @ Model::Oscillator(_), LadderSpec::Model) => m,
        (m @ Model::Particle(_), LadderSpec::Model) => m,
        (Model::Particle(p), LadderSpec::Explicit { .. }) => {
            match ChargedParticle::new(
                p.mass(),
                particle_field(cfg),
                h.hbar(),
                frame.a_p[(0, 0)],
                frame.a_x[(0, 0)],
            ) {
                Ok(q) => Model::Particle(q),
                Err(_) => Model::Generic,
            }
        }
        _ => Model::Generic,
    };
    Ok(System { h, frame, model })
}

fn particle_field(cfg: &RunConfig) -> qtomo_core::ScalarFn {
    match &cfg.system {
        Some(SystemSpec::ChargedParticle { field, .. }) => field.to_fn(),
        _ => qtomo_core::constant_fn(0.0),
    }
}

fn options(cfg: &RunConfig) -> PropagationOptions {
    PropagationOptions {
        dt: cfg.numerics.dt,
        residual_ceiling: cfg.numerics.residual_ceiling,
    }
}

fn generic_states(s: &System, times: &[f64], opts: PropagationOptions) -> Result<Vec<StateContext>, RunError> {
    let traj = evolve_modes(&s.h, &s.frame, times, opts)?;
    Ok(traj
        .samples
        .iter()
        .map(|x| StateContext::from_sample(x, &s.frame))
        .collect())
}

fn model_states(s: &System, times: &[f64], opts: PropagationOptions) -> Result<Option<Vec<StateContext>>, RunError> {
    Ok(match &s.model {
        Model::Oscillator(o) => Some(oscillator_states(o, times, opts)?),
        Model::Particle(p) => Some(times.iter().map(|&t| particle_state(p, t)).collect::<Result<_, _>>()?),
        Model::Generic => None,
    })
}

fn states(s: &System, times: &[f64], opts: PropagationOptions) -> Result<Vec<StateContext>, RunError> {
    match model_states(s, times, opts)? {
        Some(v) => Ok(v),
        None => generic_states(s, times, opts),
    }
}

fn system_of(cfg: &RunConfig) -> Result<System, RunError> {
    let sys = cfg
        .system
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("this task needs a system".into()))?;
    build_system(cfg, sys)
}

fn max_dev(a: &StateContext, b: &StateContext) -> f64 {
    let (x, y) = (&a.invariants, &b.invariants);
    [
        (&x.lambda_p - &y.lambda_p).iter().map(|v| v.norm()).fold(0.0, f64::max),
        (&x.lambda_x - &y.lambda_x).iter().map(|v| v.norm()).fold(0.0, f64::max),
        (&x.delta - &y.delta).iter().map(|v| v.norm()).fold(0.0, f64::max),
        (a.phase_integral - b.phase_integral).abs(),
        (a.sqrt_det_ratio - b.sqrt_det_ratio).norm(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

fn symplectic_summary(ctx: &[StateContext], table: &mut ResultTable, gate: &mut Gate) {
    let worst = ctx
        .iter()
        .map(|c| check_symplectic_properties(&c.invariants).max_residual())
        .fold(0.0, f64::max);
    gate.check(|| "symplectic residual of the invariants".into(), worst);
    table.meta("symplectic_residual", format!("{worst:e}"));
}

struct Gate {
    tol: f64,
    worst: f64,
    breach: Option<String>,
}

impl Gate {
    fn new(tol: f64) -> Self {
        Self {
            tol,
            worst: 0.0,
            breach: None,
        }
    }

    fn check(&mut self, what: impl FnOnce() -> String, value: f64) {
        self.worst = self.worst.max(value);
        if !(value <= self.tol) && self.breach.is_none() {
            self.breach = Some(format!("{} = {value:e} exceeds tolerance {:e}", what(), self.tol));
        }
    }
}

/// Run the task; tolerance breaches are reported in the outcome, not as errors.
pub fn run(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let mut gate = Gate::new(cfg.numerics.tol);
    let mut table = match &cfg.task {
        TaskSpec::Verify { times } => verify(cfg, times, &mut gate)?,
        TaskSpec::Propagate { times } => propagate(cfg, times, &mut gate)?,
        TaskSpec::Tomogram { times, alpha } => tomogram(cfg, times, Source::Coherent(alpha), &mut gate)?,
        TaskSpec::FockTomogram { times, fock } => tomogram(cfg, times, Source::Fock(fock), &mut gate)?,
        TaskSpec::SumRule { theta, n, max_m } => sumrule(theta, *n, *max_m, &mut gate)?,
        TaskSpec::Transitions { t1, t2, n_max, m_max } => transitions(cfg, *t1, *t2, *n_max, *m_max, &mut gate)?,
    };
    if let Some((row, column)) = table.first_non_finite() {
        return Err(RunError::NonFinite {
            column: column.to_string(),
            row,
        });
    }
    table.meta("task", cfg.task.name());
    table.meta("tolerance", format!("{:e}", cfg.numerics.tol));
    table.meta("worst", format!("{:e}", gate.worst));
    table.meta(
        "status",
        if gate.breach.is_some() {
            "tolerance exceeded"
        } else {
            "ok"
        },
    );
    table.meta("config", serialize(cfg).trim_end());
    Ok(Outcome {
        table,
        worst: gate.worst,
        breach: gate.breach,
    })
}

fn verify(cfg: &RunConfig, times: &[f64], gate: &mut Gate) -> Result<ResultTable, RunError> {
    let s = system_of(cfg)?;
    let opts = options(cfg);
    let generic = generic_states(&s, times, opts)?;
    let special = model_states(&s, times, opts)?;
    let mut cols: Vec<String> = ["t", "symmetric", "hermitian", "real_gram_p", "real_gram_x", "cross"]
        .map(String::from)
        .to_vec();
    if special.is_some() {
        cols.push("model_deviation".into());
    }
    let mut table = ResultTable::new(cols);
    for (k, g) in generic.iter().enumerate() {
        let r = check_symplectic_properties(&g.invariants);
        let t = g.invariants.t;
        let mut row = vec![t, r.symmetric, r.hermitian, r.real_gram_p, r.real_gram_x, r.cross];
        for (name, v) in [
            ("symmetric", r.symmetric),
            ("hermitian", r.hermitian),
            ("cross", r.cross),
        ] {
            gate.check(|| format!("{name} residual at t = {t}"), v);
        }
        for (name, v) in [("real_gram_p", r.real_gram_p), ("real_gram_x", r.real_gram_x)] {
            gate.check(|| format!("{name} residual at t = {t}"), v);
        }
        if let Some(sp) = &special {
            let d = max_dev(&sp[k], g);
            gate.check(|| format!("model deviation at t = {t}"), d);
            row.push(d);
        }
        table.push(row);
    }
    let t_end = times.last().copied().unwrap_or(0.0);
    let flow = propagate_real(&s.h, t_end, opts)?;
    gate.check(|| "real flow symplectic residual".into(), flow.max_residual);
    table.meta("modes", s.h.n_modes());
    table.meta("flow_max_residual", format!("{:e}", flow.max_residual));
    symplectic_summary(&generic, &mut table, gate);
    table.meta("model_checked", special.is_some());
    Ok(table)
}

fn propagate(cfg: &RunConfig, times: &[f64], gate: &mut Gate) -> Result<ResultTable, RunError> {
    let s = system_of(cfg)?;
    let ctx = states(&s, times, options(cfg))?;
    let n = s.h.n_modes();
    let mut cols = vec!["t".to_string()];
    for name in ["lambda_p", "lambda_x"] {
        for i in 1..=n {
            for j in 1..=n {
                cols.push(format!("{name}_{i}{j}_re"));
                cols.push(format!("{name}_{i}{j}_im"));
            }
        }
    }
    for i in 1..=n {
        cols.push(format!("delta_{i}_re"));
        cols.push(format!("delta_{i}_im"));
    }
    cols.extend(["phase", "sqrt_det_re", "sqrt_det_im"].map(String::from));
    let mut table = ResultTable::new(cols);
    for c in &ctx {
        let inv = &c.invariants;
        let mut row = vec![inv.t];
        for m in [&inv.lambda_p, &inv.lambda_x] {
            for i in 0..n {
                for j in 0..n {
                    row.extend([m[(i, j)].re, m[(i, j)].im]);
                }
            }
        }
        for v in inv.delta.iter() {
            row.extend([v.re, v.im]);
        }
        row.extend([c.phase_integral, c.sqrt_det_ratio.re, c.sqrt_det_ratio.im]);
        table.push(row);
    }
    symplectic_summary(&ctx, &mut table, gate);
    table.meta("modes", n);
    Ok(table)
}

type Density = Box<dyn FnMut(&[f64]) -> Result<f64, Error>>;

enum Source<'a> {
    Coherent(&'a [Complex64]),
    Fock(&'a [usize]),
}

/// Tensor-product Gauss–Legendre integral of `f` over a box.
fn box_integral(center: &[f64], half: &[f64], panels: usize, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    let rule = gauss_legendre(10);
    let axes: Vec<_> = center
        .iter()
        .zip(half)
        .map(|(c, h)| composite_points(&rule, c - h, c + h, panels))
        .collect();
    let n = axes.len();
    let len = axes[0].nodes.len();
    let mut idx = vec![0usize; n];
    let mut x = vec![0.0; n];
    let mut acc = 0.0;
    loop {
        let mut w = 1.0;
        for k in 0..n {
            x[k] = axes[k].nodes[idx[k]];
            w *= axes[k].weights[idx[k]];
        }
        acc += w * f(&x);
        let mut k = 0;
        loop {
            if k == n {
                return acc;
            }
            idx[k] += 1;
            if idx[k] < len {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn product_grid(points: &[f64], n: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| points.iter().map(move |&x| [p.clone(), vec![x]].concat()))
            .collect();
    }
    out
}

fn tomogram(cfg: &RunConfig, times: &[f64], source: Source, gate: &mut Gate) -> Result<ResultTable, RunError> {
    let s = system_of(cfg)?;
    let ctx = states(&s, times, options(cfg))?;
    let n = s.h.n_modes();
    let mut cols = vec!["t".to_string(), "frame".to_string()];
    for prefix in ["mu", "nu", "x"] {
        cols.extend((1..=n).map(|k| format!("{prefix}_{k}")));
    }
    cols.push("w".into());
    let mut table = ResultTable::new(cols);
    let points = cfg.grid.points();
    let grid = product_grid(&points, n);
    let cell = if points.len() > 1 {
        (points[1] - points[0]).powi(n as i32)
    } else {
        0.0
    };
    let panels = match n {
        1 => 60,
        2 => 16,
        _ => 5,
    };
    let zero = CVector::zeros(n);
    let mut worst_norm = 0.0f64;
    for c in &ctx {
        let t = c.invariants.t;
        for (fi, (mu, nu)) in cfg.grid.frames.iter().enumerate() {
            let frame = TomogramFrame::new(mu.clone(), nu.clone())?;
            let label = fi + 1;
            let mut eval: Density;
            let (center, half): (Vec<f64>, Vec<f64>);
            match &source {
                Source::Coherent(alpha) => {
                    let g = coherent_tomogram(&c.invariants, &frame, &CVector::from_column_slice(alpha))?;
                    center = g.x0.iter().copied().collect();
                    half = (0..n).map(|k| 10.0 * g.sigma[(k, k)].sqrt()).collect();
                    let d = GaussianDensity::new(&g)?;
                    eval = Box::new(move |x| Ok(d.eval(x)));
                }
                Source::Fock(fock) => {
                    let g = coherent_tomogram(&c.invariants, &frame, &zero)?;
                    center = g.x0.iter().copied().collect();
                    half = (0..n)
                        .map(|k| (10.0 + 2.0 * (fock[k] as f64 + 1.0).sqrt()) * g.sigma[(k, k)].sqrt())
                        .collect();
                    let ft = FockTomogram::new(&c.invariants, &frame)?;
                    let fock = fock.to_vec();
                    eval = Box::new(move |x| ft.eval(&fock, x));
                }
            }
            let mut failure = None;
            let total = box_integral(&center, &half, panels, |x| match eval(x) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            });
            if let Some(e) = failure {
                return Err(e.into());
            }
            let residual = (total - 1.0).abs();
            worst_norm = worst_norm.max(residual);
            gate.check(|| format!("normalization residual at t = {t}, frame {label}"), residual);
            let mut mass = 0.0;
            for x in &grid {
                let w = eval(x)?;
                mass += w * cell;
                let mut row = vec![t, label as f64];
                row.extend(mu);
                row.extend(nu);
                row.extend(x);
                row.push(w);
                table.push(row);
            }
            table.meta(&format!("grid_mass[t={t:?},frame={label}]"), format!("{mass:.12}"));
        }
    }
    symplectic_summary(&ctx, &mut table, gate);
    table.meta("modes", n);
    table.meta("normalization_residual", format!("{worst_norm:e}"));
    Ok(table)
}

fn sumrule(theta: &[f64], n: usize, max_m: usize, gate: &mut Gate) -> Result<ResultTable, RunError> {
    let mut table = ResultTable::new(
        [
            "theta",
            "partial_sum",
            "target",
            "residual",
            "tail",
            "shells",
            "converged",
        ]
        .map(String::from)
        .to_vec(),
    );
    let mut max_tail = 0.0f64;
    for &th in theta {
        let r = sum_rule_check(&BogoliubovS::squeeze(th), &[n], max_m)?;
        let rel = r.residual / r.target;
        max_tail = max_tail.max(r.tail_estimate);
        gate.check(|| format!("relative sum-rule residual at theta = {th}"), rel);
        table.push(vec![
            th,
            r.partial_sum,
            r.target,
            r.residual,
            r.tail_estimate,
            r.partials.len() as f64,
            if r.converged { 1.0 } else { 0.0 },
        ]);
    }
    table.meta("n", n);
    table.meta("max_m", max_m);
    table.meta("max_tail_estimate", format!("{max_tail:e}"));
    Ok(table)
}

fn transitions(
    cfg: &RunConfig,
    t1: f64,
    t2: f64,
    n_max: usize,
    m_max: usize,
    gate: &mut Gate,
) -> Result<ResultTable, RunError> {
    let s = system_of(cfg)?;
    let n = s.h.n_modes();
    let mut ctx = states(&s, &[t1.min(t2), t1.max(t2)], options(cfg))?;
    if t1 > t2 {
        ctx.reverse();
    }
    let kernel = OverlapKernel::new(&ctx[0], &ctx[1])?;
    let table_h = kernel.table(&vec![n_max; n], &vec![m_max; n])?;
    let mut cols = vec![];
    cols.extend((1..=n).map(|k| format!("n_{k}")));
    cols.extend((1..=n).map(|k| format!("m_{k}")));
    cols.extend(["re", "im", "prob"].map(String::from));
    let mut table = ResultTable::new(cols);
    let boxed = |max: usize| -> Vec<Vec<usize>> {
        product_grid(&(0..=max).map(|v| v as f64).collect::<Vec<_>>(), n)
            .into_iter()
            .map(|v| v.into_iter().map(|x| x as usize).collect())
            .collect()
    };
    let ms = boxed(m_max);
    let mut sums = vec![];
    for ni in boxed(n_max) {
        let mut sum = 0.0;
        for mi in &ms {
            let a = kernel.from_table(&table_h, &ni, mi);
            sum += a.norm_sqr();
            let mut row: Vec<f64> = ni.iter().chain(mi).map(|&v| v as f64).collect();
            row.extend([a.re, a.im, a.norm_sqr()]);
            table.push(row);
        }
        gate.check(|| format!("unitarity defect of row n = {ni:?}"), (1.0 - sum).abs());
        sums.push(format!("{sum:.15}"));
    }
    symplectic_summary(&ctx, &mut table, gate);
    table.meta("row_sums", sums.join(" "));
    table.meta("t1", format!("{t1:?}"));
    table.meta("t2", format!("{t2:?}"));
    Ok(table)
}
