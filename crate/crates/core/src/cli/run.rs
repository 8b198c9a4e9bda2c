//! Experiment runners: each turns a config into report rows, hard
//! invariant checks and a JSON summary.

use serde_json::json;
use thiserror::Error;

use super::config::{ConfigError, ExperimentConfig, ExperimentKind, Measure};
use crate::bounds::{self, BoundsError, CMode, CorollaryKind, Extended, GeometryConstants};
use crate::hypspace::{GeometryError, Isometry, Model, Word};
use crate::matprod::{self, MatrixError};
use crate::montecarlo::{self, derive_seed};
use crate::pingpong::{self, PingPongError, TitsTheory};
use crate::poisson::{self, FiniteChain, PoissonError};
use crate::report::{BoundKind, InvariantCheck, ReportRow};
use crate::spectral::{self, EstimateKind, SpectralError};
use crate::walk::{self, FiniteMeasure, TailTarget, WalkError};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Poisson(#[from] PoissonError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    PingPong(#[from] PingPongError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Everything an experiment produces besides timing metadata.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub rows: Vec<ReportRow>,
    pub invariants: Vec<InvariantCheck>,
    pub summary: serde_json::Value,
}

impl RunOutput {
    pub fn passed(&self) -> bool {
        self.invariants.iter().all(|c| c.passed)
    }
}

/// Tail slack, in Wilson radii, allowed above a theoretical bound.
pub const SIGMA_SLACK: f64 = 3.0;

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    match cfg.kind {
        ExperimentKind::Drift => drift(cfg),
        ExperimentKind::Tail => tail(cfg),
        ExperimentKind::BoundsTable => bounds_table(cfg),
        ExperimentKind::Poisson => poisson_run(cfg),
        ExperimentKind::Matrix => matrix(cfg),
        ExperimentKind::Frostman => frostman(cfg),
        ExperimentKind::Tits => tits(cfg),
        ExperimentKind::Continuity => continuity(cfg),
        ExperimentKind::Spectral => spectral_run(cfg),
    }
}

/// The rank when `mu` is simple random walk on a free group.
pub fn srw_rank(mu: &FiniteMeasure) -> Option<u8> {
    let Model::Tree { rank } = mu.model() else { return None };
    let w = 1.0 / f64::from(2 * rank);
    let all = mu.atoms().len() == usize::from(2 * rank)
        && mu.atoms().iter().all(|(g, p)| {
            matches!(g, Isometry::Tree { word, .. } if word.len() == 1) && (p - w).abs() <= 1e-12
        });
    all.then_some(rank)
}

/// `ℓ` from the config, the closed form for simple random walk, or a long
/// reference run.
fn drift_value(cfg: &ExperimentConfig, mu: &FiniteMeasure, seed: u64) -> Result<(f64, String), RunError> {
    if let Some(ell) = cfg.ell {
        return Ok((ell, "drift from config".into()));
    }
    if let Some(rank) = srw_rank(mu) {
        return Ok((walk::srw_drift(rank), "exact drift".into()));
    }
    let r = walk::reference_drift(mu, seed)?;
    Ok((r.mean, format!("reference drift {} ± {}", r.mean, r.radius)))
}

/// An upper bound on `‖λ_G(μ)‖₂` from the config or the closed form.
fn lambda_value(cfg: &ExperimentConfig, mu: &FiniteMeasure) -> Option<f64> {
    cfg.lambdas
        .first()
        .copied()
        .or_else(|| srw_rank(mu).and_then(|k| spectral::kesten_norm(k).ok()).map(|e| e.value))
}

fn drift(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let mu = cfg.group_measure()?;
    let seed = cfg.seed()?;
    let trials = cfg.trials_or(200)?;
    let params = cfg.params(mu.model())?;
    let exact = srw_rank(&mu).map(walk::srw_drift);
    let lower = match lambda_value(cfg, &mu) {
        Some(l) if l < 1.0 => {
            let gc = GeometryConstants::for_model(&params)?;
            let grid = r_grid(cfg);
            let pairs: Vec<(f64, f64)> = grid.iter().map(|&r| (r, r + (1.0 - r) * l)).collect();
            Some(bounds::drift_lower_bound(&gc, &pairs)?.value)
        }
        _ => None,
    };
    let mut rows = Vec::new();
    let mut invariants = Vec::new();
    let mut estimates = Vec::new();
    for &n in cfg.require_n_grid()? {
        let e = walk::estimate_drift(&mu, n, trials, derive_seed(seed, "drift"))?;
        let mut row = ReportRow::new("drift", BoundKind::Estimate)
            .with_n(n)
            .with_empirical(e.mean, e.radius)
            .with_note("99% normal interval");
        if let Some(x) = exact {
            row = row.with_note(format!("exact drift {x}"));
            let tol = 0.005 + e.radius;
            invariants.push(InvariantCheck::new(
                &format!("drift matches closed form at n={n}"),
                (e.mean - x).abs() <= tol,
                format!("estimate {} vs {x} (tolerance {tol})", e.mean),
            ));
        }
        invariants.push(InvariantCheck::new(
            &format!("drift within [0, kappa] at n={n}"),
            e.mean >= 0.0 && e.mean <= mu.kappa_s() + 1e-12,
            format!("estimate {}", e.mean),
        ));
        rows.push(row);
        if let Some(b) = lower {
            rows.push(
                ReportRow::new("drift", BoundKind::DriftLower)
                    .with_n(n)
                    .with_empirical(e.mean, e.radius)
                    .with_bound(b, b <= 0.0)
                    .with_note("lower bound on drift"),
            );
            invariants.push(InvariantCheck::new(
                &format!("drift lower bound below estimate at n={n}"),
                b <= e.mean + e.radius,
                format!("bound {b}, estimate {}", e.mean),
            ));
        }
        estimates.push(e);
    }
    Ok(RunOutput {
        rows,
        invariants,
        summary: json!({ "estimates": estimates, "exact": exact, "lower_bound": lower, "kappa_s": mu.kappa_s() }),
    })
}

fn r_grid(cfg: &ExperimentConfig) -> Vec<f64> {
    if cfg.r_grid.is_empty() {
        bounds::default_r_grid()
    } else {
        cfg.r_grid.clone()
    }
}

fn tail(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let mu = cfg.group_measure()?;
    let seed = cfg.seed()?;
    let trials = cfg.trials_or(10_000)?;
    let params = cfg.params(mu.model())?;
    let (ell, ell_note) = drift_value(cfg, &mu, derive_seed(seed, "ell"))?;
    let kappa = mu.kappa_s();
    let (c, c_note, c_est) = match cfg.c {
        Some(c) => (c, "c from config".to_string(), None),
        None => {
            if !matches!(mu.model(), Model::Tree { .. }) {
                return Err(ConfigError::Invalid("plane tail runs need an explicit c".into()).into());
            }
            let grid = poisson::default_c_grid(&mu, 16, derive_seed(seed, "c-grid"))?;
            let est = poisson::estimate_c_walk(&mu, &grid, cfg.samples.unwrap_or(4_000), derive_seed(seed, "c"))?;
            (est.value, format!("estimated c = {} ± {}", est.value, est.radius), Some(est))
        }
    };
    let d = match lambda_value(cfg, &mu) {
        Some(l) => Some(bounds::d_const(kappa, l, GeometryConstants::for_model(&params)?.a0)?),
        None => None,
    };
    let cells = walk::empirical_tails_grid(
        &mu,
        cfg.require_n_grid()?,
        cfg.require_t_grid()?,
        ell,
        trials,
        derive_seed(seed, "tail"),
        &TailTarget::Displacement,
    )?;
    let mut rows = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for cell in &cells {
        let b = bounds::simple_concentration_bound(cell.n as f64, cell.t, kappa, c);
        worst = worst.max(cell.frequency - b.value - SIGMA_SLACK * cell.wilson_radius);
        rows.push(ReportRow::tail("tail", cell, &b, BoundKind::CocycleC).with_note(&ell_note));
        if let Some(d) = d {
            let b = bounds::concentration_bound(cell.n as f64, cell.t, kappa, d);
            rows.push(ReportRow::tail("tail", cell, &b, BoundKind::ExplicitD).with_note(format!("D = {d}")));
        }
    }
    let invariants = vec![InvariantCheck::new(
        "tails below the cocycle bound",
        worst <= 0.0,
        format!("largest excess over bound + 3 radii: {worst}"),
    )];
    Ok(RunOutput {
        rows,
        invariants,
        summary: json!({
            "ell": ell, "ell_source": ell_note, "c": c, "c_source": c_note,
            "c_truncated": c_est.as_ref().map(|e| e.truncated),
            "c_radius": c_est.as_ref().map(|e| e.radius),
            "kappa_s": kappa, "D": d.map(|d| d.to_string()),
        }),
    })
}

fn ext_row(name: &str, v: Extended, note: String) -> ReportRow {
    let value = v.finite().unwrap_or(f64::INFINITY);
    ReportRow::new("bounds-table", BoundKind::Constant)
        .with_bound(value, v.is_infinite())
        .with_note(name)
        .with_note(note)
}

fn bounds_table(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let (model, kappa_default, m) = match &cfg.measure {
        Some(_) => match cfg.measure()? {
            Measure::Group(mu) => (mu.model(), Some(mu.kappa_s()), Some(mu.min_weight())),
            Measure::Matrix(_) => return Err(ConfigError::Invalid("bounds-table needs a group measure".into()).into()),
        },
        None => match cfg.model {
            Some(model) => (model, None, None),
            None => return Err(ConfigError::Invalid("bounds-table needs a model or a measure".into()).into()),
        },
    };
    let kappa = cfg
        .kappa
        .or(kappa_default)
        .ok_or_else(|| ConfigError::Invalid("bounds-table needs kappa".into()))?;
    if cfg.lambdas.is_empty() {
        return Err(ConfigError::Invalid("bounds-table needs a nonempty lambdas grid".into()).into());
    }
    let params = cfg.params(model)?;
    let gc = GeometryConstants::for_model(&params)?;
    let mut rows = Vec::new();
    let mut invariants = Vec::new();
    let mut table = Vec::new();
    for &l in &cfg.lambdas {
        let note = format!("kappa = {kappa}; lambda = {l}");
        let d = bounds::d_const(kappa, l, gc.a0)?;
        let c_inf = bounds::c_const(kappa, l, gc.a0, CMode::Infimum)?;
        let c_closed = bounds::c_const(kappa, l, gc.a0, CMode::ClosedForm)?;
        rows.push(ext_row("D", d, note.clone()));
        rows.push(ext_row("C infimum", c_inf, note.clone()));
        rows.push(ext_row("C closed form", c_closed, note.clone()));
        let tits = if l < 1.0 { Some(bounds::tits_t_n0(kappa, l, &gc)?) } else { None };
        match &tits {
            Some(tc) => {
                rows.push(ext_row("T", Extended::Finite(tc.t), note.clone()));
                rows.push(ext_row("n0", Extended::Finite(tc.n0), note.clone()));
            }
            None => {
                rows.push(
                    ext_row("T", Extended::Finite(0.0), note.clone())
                        .with_bound(0.0, true)
                        .with_note("no decay at lambda = 1"),
                );
                rows.push(ext_row("n0", Extended::Infinite, note.clone()));
            }
        }
        match (c_inf, c_closed, d) {
            (Extended::Finite(ci), Extended::Finite(cc), Extended::Finite(dv)) => {
                invariants.push(InvariantCheck::new(
                    &format!("C infimum below closed form at lambda={l}"),
                    ci <= cc * (1.0 + 1e-12),
                    format!("{ci} vs {cc}"),
                ));
                let lhs = 32.0 * (kappa + 2.0 * ci).powi(2);
                invariants.push(InvariantCheck::new(
                    &format!("32(kappa+2C)^2 <= kappa^2 D at lambda={l}"),
                    lhs <= kappa * kappa * dv * (1.0 + 1e-12),
                    format!("{lhs} vs {}", kappa * kappa * dv),
                ));
            }
            _ => invariants.push(InvariantCheck::new(
                &format!("constants infinite at lambda={l}"),
                l >= 1.0 && d.is_infinite() && c_inf.is_infinite() && c_closed.is_infinite(),
                format!("D = {d}, C = {c_inf}"),
            )),
        }
        for &n in &cfg.n_grid {
            for &t in &cfg.t_grid {
                let b = bounds::concentration_bound(n as f64, t, kappa, d);
                rows.push(
                    ReportRow::new("bounds-table", BoundKind::ExplicitD)
                        .with_n(n)
                        .with_t(t)
                        .with_bound(b.value, b.vacuous)
                        .with_note(&note)
                        .with_note(b.assumptions.join("; ")),
                );
            }
        }
        table.push(json!({
            "lambda": l, "D": d.to_string(), "C_infimum": c_inf.to_string(),
            "C_closed_form": c_closed.to_string(), "tits": tits,
        }));
    }
    if let Some(np) = cfg.free_pair_power {
        for kind in [CorollaryKind::HyperbolicGroup { n_prime: np }, CorollaryKind::RankOne { n_prime: np }] {
            let pack = bounds::corollary_constants(kind, gc.a0)?;
            let name = match kind {
                CorollaryKind::HyperbolicGroup { .. } => "hyperbolic group",
                CorollaryKind::RankOne { .. } => "rank one",
            };
            let note = format!("{name}; N = {}; alpha = {}; A = {}", pack.big_n, pack.alpha, pack.a);
            let mw = m.unwrap_or(0.5);
            for &n in &cfg.n_grid {
                for &t in &cfg.t_grid {
                    let b = pack.tail_bound(n as f64, t, kappa, mw);
                    rows.push(
                        ReportRow::new("bounds-table", BoundKind::CorollaryPack)
                            .with_n(n)
                            .with_t(t)
                            .with_bound(b.value, b.vacuous)
                            .with_note(&note)
                            .with_note(b.assumptions.join("; ")),
                    );
                }
            }
            table.push(json!({ "corollary": pack, "spectral_bound": pack.spectral_bound(mw) }));
        }
    }
    Ok(RunOutput { rows, invariants, summary: json!({ "geometry": gc, "kappa": kappa, "table": table }) })
}

fn poisson_run(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let seed = cfg.seed()?;
    let trials = cfg.trials_or(100_000)?;
    let chains: Vec<FiniteChain> = match &cfg.chain {
        Some(c) => vec![FiniteChain::from_rows(&c.rows, c.observable.clone())?],
        None => {
            let count = cfg.chains.unwrap_or(20);
            let states = cfg.states.unwrap_or(5);
            if count == 0 || states < 2 {
                return Err(ConfigError::Invalid("need at least one chain with two states".into()).into());
            }
            let mut rng = montecarlo::stream_rng(derive_seed(seed, "chains"), 0);
            (0..count).map(|_| poisson::random_chain(states, &mut rng)).collect()
        }
    };
    let n_grid = cfg.require_n_grid()?;
    let t_grid = cfg.require_t_grid()?;
    let mut rows = Vec::new();
    let (mut worst_res, mut worst_dec, mut worst_excess) = (0.0f64, 0.0f64, f64::NEG_INFINITY);
    let mut per_chain = Vec::new();
    for (k, chain) in chains.iter().enumerate() {
        let sol = poisson::solve_poisson(chain)?;
        worst_res = worst_res.max(sol.residual);
        for &n in n_grid {
            let rep = poisson::azuma_experiment(chain, &sol, n, trials, t_grid, 0, derive_seed(seed, &format!("chain {k} n {n}")))?;
            worst_dec = worst_dec.max(rep.max_decomposition_error);
            for (cell, b) in rep.cells.iter().zip(&rep.bounds) {
                worst_excess = worst_excess.max(cell.frequency - b.value - SIGMA_SLACK * cell.wilson_radius);
                rows.push(
                    ReportRow::tail("poisson", cell, b, BoundKind::MarkovAzuma)
                        .with_note(format!("chain {k}; centred sup norm {}", sol.centred_sup_norm)),
                );
            }
        }
        per_chain.push(json!({
            "chain": k, "alpha": sol.alpha, "residual": sol.residual,
            "sup_norm": sol.sup_norm, "centred_sup_norm": sol.centred_sup_norm,
        }));
    }
    let invariants = vec![
        InvariantCheck::new("Poisson residual", worst_res <= poisson::RESIDUAL_TOL, format!("{worst_res:e}")),
        InvariantCheck::new("martingale decomposition", worst_dec <= 1e-9, format!("{worst_dec:e}")),
        InvariantCheck::new("tails below the Azuma bound", worst_excess <= 0.0, format!("{worst_excess}")),
    ];
    Ok(RunOutput { rows, invariants, summary: json!({ "chains": per_chain }) })
}

/// Steps of the long run fixing the reference Lyapunov exponent.
pub const LYAPUNOV_REFERENCE_STEPS: usize = 1_000_000;

fn matrix(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let mu = cfg.matrix_measure()?;
    let seed = cfg.seed()?;
    let trials = cfg.trials_or(10_000)?;
    let ell = match cfg.ell {
        Some(e) => e,
        None => {
            matprod::lyapunov_estimate(&mu, LYAPUNOV_REFERENCE_STEPS, 1, derive_seed(seed, "lyapunov"))?.mean
        }
    };
    let (c, c_est) = match cfg.c {
        Some(c) => (c, None),
        None => {
            let e = matprod::estimate_c_matrix(&mu, cfg.samples.unwrap_or(4_000), derive_seed(seed, "c"))?;
            (e.value, Some(e))
        }
    };
    let trows = matprod::matrix_concentration_check(
        &mu,
        ell,
        c,
        cfg.require_n_grid()?,
        cfg.require_t_grid()?,
        trials,
        derive_seed(seed, "matrix-tail"),
    )?;
    let mut rows = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    let mut flagged = 0usize;
    for r in &trows {
        let kind = if r.vector.is_some() { BoundKind::MatrixVector } else { BoundKind::MatrixNorm };
        if r.bound.in_range {
            worst = worst.max(r.cell.frequency - r.bound.value - SIGMA_SLACK * r.cell.wilson_radius);
        } else {
            flagged += 1;
        }
        let mut row = ReportRow::tail("matrix", &r.cell, &r.bound, kind);
        if let Some(v) = &r.vector {
            row = row.with_note(format!("v = {v:?}"));
        }
        rows.push(row);
    }
    let mut invariants = vec![InvariantCheck::new(
        "matrix tails below both bounds",
        worst <= 0.0,
        format!("largest excess over bound + 3 radii: {worst}"),
    )];
    if let Some(e) = &c_est {
        invariants.push(InvariantCheck::new("c estimate finite", e.value.is_finite(), format!("{} (clipped {})", e.value, e.clipped)));
    }
    Ok(RunOutput {
        rows,
        invariants,
        summary: json!({
            "ell": ell, "c": c, "c_estimate": c_est, "kappa_s": mu.kappa_s(),
            "out_of_range_rows": flagged,
            "proximality_hint": matprod::proximality_hint(&mu, 2_000, derive_seed(seed, "proximality")),
        }),
    })
}

fn frostman(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let mu = cfg.group_measure()?;
    let Model::Tree { rank } = mu.model() else {
        return Err(WalkError::NeedsTree("Frostman runs").into());
    };
    let seed = cfg.seed()?;
    let lambda = lambda_value(cfg, &mu)
        .ok_or_else(|| ConfigError::Invalid("Frostman runs need an upper bound in lambdas".into()))?;
    let pairs: Vec<(f64, f64)> = r_grid(cfg).iter().map(|&r| (r, r + (1.0 - r) * lambda)).collect();
    let sup = bounds::frostman_exponent(mu.kappa_s(), &pairs)?;
    let s = 0.9 * sup.value;
    let m_max = cfg.m_max.unwrap_or(20);
    let samples = cfg.samples.unwrap_or(100_000);
    let ys = walk::sample_boundaries(&mu, m_max, samples, derive_seed(seed, "boundary"))?;
    let exact = srw_rank(&mu).map(|_| ());
    let freq = |m: usize| walk::cylinder_frequency(&ys, &Word::from_letters(std::iter::repeat(0).take(m)));
    let nu1 = if exact.is_some() { walk::srw_cylinder_mass(rank, 1) } else { freq(1) };
    let k = nu1 * s.exp();
    let mut rows = Vec::new();
    let (mut decay_ok, mut mc_ok) = (true, true);
    for m in 1..=m_max {
        let f = freq(m);
        let hits = (f * samples as f64).round() as u64;
        let radius = montecarlo::wilson_radius(hits, samples as u64);
        let bound = k * (-s * m as f64).exp();
        let mut row = ReportRow::new("frostman", BoundKind::Frostman)
            .with_n(m)
            .with_empirical(f, radius)
            .with_bound(bound, false)
            .with_note(format!("s = {s}; K = {k}"));
        if exact.is_some() {
            let p = walk::srw_cylinder_mass(rank, m);
            decay_ok &= p <= bound * (1.0 + 1e-12);
            mc_ok &= (f - p).abs() <= SIGMA_SLACK * radius;
            row = row.with_note(format!("exact cylinder mass {p}"));
        } else {
            decay_ok &= f <= bound + SIGMA_SLACK * radius;
        }
        rows.push(row);
    }
    let mut invariants = vec![InvariantCheck::new("cylinder masses decay at the Frostman rate", decay_ok, format!("s = {s}"))];
    if exact.is_some() {
        invariants.push(InvariantCheck::new("boundary samples match cylinder masses", mc_ok, format!("{samples} samples")));
    }
    Ok(RunOutput {
        rows,
        invariants,
        summary: json!({ "exponent": sup.value, "argmax_r": sup.argmax_r, "s": s, "K": k, "lambda": lambda }),
    })
}

fn tits(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let mu = cfg.group_measure()?;
    let seed = cfg.seed()?;
    let trials = cfg.trials_or(10_000)?;
    let params = cfg.params(mu.model())?;
    let (ell, ell_note) = drift_value(cfg, &mu, derive_seed(seed, "ell"))?;
    let lambda = lambda_value(cfg, &mu)
        .ok_or_else(|| ConfigError::Invalid("tits runs need an upper bound in lambdas".into()))?;
    let theory = TitsTheory { ell, lambda, geometry: GeometryConstants::for_model(&params)? };
    let oracle_len = cfg.oracle_len.unwrap_or(6);
    let mut rows = Vec::new();
    let mut invariants = Vec::new();
    let mut reports = Vec::new();
    for &n in cfg.require_n_grid()? {
        let rep = pingpong::tits_experiment(&mu, &params, n, trials, derive_seed(seed, &format!("tits {n}")), oracle_len, &theory)?;
        let base = |kind| {
            ReportRow::new("tits", kind)
                .with_n(n)
                .with_empirical(rep.frequency, rep.wilson_radius)
                .with_note(&ell_note)
        };
        let b = &rep.bounds.combiner;
        let mut row = base(BoundKind::FreenessCombiner).with_bound(b.value, b.vacuous).with_note(b.assumptions.join("; "));
        if !b.in_range {
            row = row.with_note("outside proved range");
        }
        rows.push(row);
        if let Some(b) = &rep.bounds.exponential {
            let mut row = base(BoundKind::FreenessExponential).with_bound(b.value, b.vacuous).with_note(b.assumptions.join("; "));
            if !b.in_range {
                row = row.with_note("outside proved range");
            }
            rows.push(row);
        }
        rows.push(
            ReportRow::new("tits", BoundKind::Estimate)
                .with_n(n)
                .with_empirical(rep.frequency_at_d_n, montecarlo::wilson_radius(rep.certified_at_d_n, trials as u64))
                .with_note(format!("certified at D_n = {}", rep.d_n)),
        );
        invariants.push(InvariantCheck::new(
            &format!("no relations among certified pairs at n={n}"),
            rep.oracle_failures == 0,
            format!("{} of {} checked", rep.oracle_failures, rep.oracle_checked),
        ));
        invariants.push(InvariantCheck::new(
            &format!("frequency above non-vacuous bounds at n={n}"),
            rep.consistent(SIGMA_SLACK),
            format!("frequency {}", rep.frequency),
        ));
        reports.push(rep);
    }
    Ok(RunOutput { rows, invariants, summary: json!({ "reports": reports, "ell": ell, "lambda": lambda }) })
}

fn continuity(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let base = cfg.group_measure()?;
    let Some(pspec) = &cfg.perturbation else {
        return Err(ConfigError::Invalid("continuity scans need a perturbation measure".into()).into());
    };
    let pert = match pspec.build(&cfg.base_dir)? {
        Measure::Group(m) => m,
        Measure::Matrix(_) => return Err(ConfigError::Invalid("perturbation must be a group measure".into()).into()),
    };
    if cfg.p_grid.is_empty() || cfg.p_grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(ConfigError::Invalid("p_grid must be nonempty within [0, 1]".into()).into());
    }
    let seed = cfg.seed()?;
    let n = cfg.require_n_grid()?[0];
    let trials = cfg.trials_or(200)?;
    let mut family = Vec::with_capacity(cfg.p_grid.len());
    for &p in &cfg.p_grid {
        let atoms: Vec<(Isometry, f64)> = base
            .atoms()
            .iter()
            .map(|(g, w)| (g.clone(), (1.0 - p) * w))
            .chain(pert.atoms().iter().map(|(g, w)| (g.clone(), p * w)))
            .filter(|a| a.1 > 0.0)
            .collect();
        family.push((p, FiniteMeasure::new(atoms)?));
    }
    let table = walk::drift_continuity_scan(&family, n, trials, derive_seed(seed, "continuity"))?;
    let rows = table
        .rows
        .iter()
        .map(|r| {
            ReportRow::new("continuity", BoundKind::Estimate)
                .with_n(n)
                .with_empirical(r.drift.mean, r.drift.radius)
                .with_note(format!("p = {}", r.parameter))
        })
        .collect();
    let invariants = vec![InvariantCheck::new(
        "drift estimates finite",
        table.rows.iter().all(|r| r.drift.mean.is_finite()),
        format!("max jump {}", table.max_jump),
    )];
    Ok(RunOutput { rows, invariants, summary: json!({ "table": table }) })
}

fn spectral_run(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let mu = cfg.group_measure()?;
    let n_max = cfg.n_max.unwrap_or(20);
    let seq = spectral::return_prob_estimate(&mu, n_max, spectral::DEFAULT_TABLE_BUDGET)?;
    let mut uppers = Vec::new();
    if let Some(rank) = srw_rank(&mu) {
        uppers.push(spectral::kesten_norm(rank)?);
    }
    if let Some(n0) = cfg.free_pair_power {
        uppers.push(spectral::uniform_tits_upper(mu.min_weight(), n0)?);
    }
    uppers.extend(cfg.lambdas.iter().map(|&l| {
        spectral::SpectralEstimate::new(l, EstimateKind::UpperBound, "upper bound from config")
    }));
    let best_upper = uppers.iter().map(|u| u.value).fold(f64::INFINITY, f64::min);
    let mut rows = Vec::new();
    for (j, e) in seq.iter().enumerate() {
        let mut row = ReportRow::new("spectral", BoundKind::Spectral)
            .with_n(2 * (j + 1))
            .with_note(format!("{}: {}", e.kind, e.note));
        row.empirical = Some(e.value);
        if best_upper.is_finite() {
            row = row.with_bound(best_upper, best_upper >= 1.0);
        }
        rows.push(row);
    }
    for u in &uppers {
        rows.push(
            ReportRow::new("spectral", BoundKind::Spectral)
                .with_bound(u.value, u.value >= 1.0)
                .with_note(format!("{}: {}", u.kind, u.note)),
        );
    }
    let monotone = seq.windows(2).all(|w| w[0].value <= w[1].value);
    let below = seq.iter().all(|e| e.value <= best_upper + 1e-12);
    let invariants = vec![
        InvariantCheck::new("lower estimates non-decreasing", monotone, format!("{} terms", seq.len())),
        InvariantCheck::new("lower estimates below upper bounds", below, format!("upper {best_upper}")),
    ];
    Ok(RunOutput { rows, invariants, summary: json!({ "lower_estimates": seq, "upper_bounds": uppers }) })
}
