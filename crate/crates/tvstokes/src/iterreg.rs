//! Outer iterative-regularization drivers.
//!
//! All four drivers are Richardson-like: they repeatedly denoise a residual
//! and accumulate the recovered pieces, which adds lost texture back to the
//! estimate one scale at a time.
//!
//! * [`osher_iterate`] — iterative regularization of plain ROF: solve on
//!   `f + v^k`, update the noise estimate `v^{k+1} = f + v^k - u`.
//! * [`richardson_step1`] — the residual loop on the tangent field:
//!   `r^k = argmin J(Πr) + (η₁/2)‖r - r_ex^{k-1}‖²` with `r_ex⁰ = ∇⊥f`,
//!   accumulating `τ = Σ r^i`, followed by the orientation-matching solve.
//! * [`richardson_step2`] — one tangent-field solve, then the scalar residual
//!   loop with the adaptive fidelity `η^k = max(β₂/γ^k, η^{k-1})`,
//!   `γ^k = ‖r_ex^{k-1}‖_∞ / 2`.
//! * [`richardson_both`] — the two loops composed: phase 1 accumulates τ,
//!   phase 2 runs the scalar loop against that τ.
//!
//! Every driver appends one [`IterRecord`] per outer iteration; when a clean
//! image is supplied the records also carry ‖u - g‖ and PSNR, which is how
//! the optimal stopping index is found in experiments.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField2};
use crate::grid_ops::{default_eps, divergence, grad_perp, normalized_perp, tv_energy, tv_energy_vec};
use crate::metrics::{psnr, MetricConfig};
use crate::model::match_surface;
use crate::poisson::PoissonSolver;
use crate::report::{IterRecord, Phase, SolveReport};
use crate::rof::{rof_denoise, rof_vector_projected, InnerSolveConfig};

/// When an outer loop stops (`max_outer` always caps it).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// Run exactly this many outer iterations.
    FixedCount(usize),
    /// Stop once ‖r^k‖ ≤ θ·‖r¹‖.
    ResidualFloor(f64),
    /// Stop once ‖r_ex^k‖ ≤ σ̂·√(pixel count), given a noise-level estimate.
    Discrepancy(f64),
}

impl StopRule {
    fn triggered(&self, k: usize, r_norm: f64, r1_norm: f64, rex_norm: f64, pixels: usize) -> bool {
        match *self {
            StopRule::FixedCount(count) => k >= count,
            StopRule::ResidualFloor(theta) => r_norm <= theta * r1_norm,
            StopRule::Discrepancy(sigma) => rex_norm <= sigma * (pixels as f64).sqrt(),
        }
    }
}

/// Configuration shared by the outer drivers.
#[derive(Debug, Clone)]
pub struct OuterConfig {
    /// Schedule constant for the tangent-field fidelity (must be > 1).
    pub beta1: f64,
    /// Schedule constant for the image fidelity (must be > 1).
    pub beta2: f64,
    /// Orientation-matching weight in `[0, 1]`.
    pub alpha: f64,
    /// Hard cap on outer iterations per loop.
    pub max_outer: usize,
    pub stop_rule: StopRule,
    /// Separate stop rule for phase 1 of [`richardson_both`]; defaults to
    /// `stop_rule`.
    pub phase1_stop: Option<StopRule>,
    pub inner: InnerSolveConfig,
    /// Normalization floor; `None` picks `1e-8·(1 + max|τ|)`.
    pub eps: Option<f64>,
    /// Peak value for PSNR entries in reports.
    pub peak: f64,
}

impl Default for OuterConfig {
    fn default() -> Self {
        Self {
            beta1: 8.0,
            beta2: 2.5,
            alpha: 0.9,
            max_outer: 50,
            stop_rule: StopRule::FixedCount(50),
            phase1_stop: None,
            inner: InnerSolveConfig::default(),
            eps: None,
            peak: 255.0,
        }
    }
}

impl OuterConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, beta) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(beta > 1.0 && beta.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and > 1, got {beta}"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if self.max_outer == 0 {
            return Err(Error::InvalidParameter("max_outer must be ≥ 1".into()));
        }
        Ok(())
    }

    fn metric(&self) -> MetricConfig {
        MetricConfig { peak: self.peak }
    }
}

/// `γ = ‖r‖_∞ / 2`; `None` once the residual is identically zero, which the
/// drivers treat as convergence.
pub fn fidelity_gamma(r_ex: &ScalarField) -> Option<f64> {
    let linf = r_ex.linf_norm();
    (linf > 0.0).then(|| linf / 2.0)
}

/// Vector analog of [`fidelity_gamma`]: half the largest per-pixel magnitude.
pub fn fidelity_gamma_vec(r_ex: &VectorField2) -> Option<f64> {
    let m = r_ex.max_magnitude();
    (m > 0.0).then(|| m / 2.0)
}

/// The nondecreasing fidelity schedule `η = max(β/γ, η_prev)`.
pub fn fidelity_schedule(r_ex: &ScalarField, beta: f64, eta_prev: f64) -> Option<f64> {
    fidelity_gamma(r_ex).map(|gamma| (beta / gamma).max(eta_prev))
}

/// Bregman distance from the zero field to `r`, `D^s(0, r) = ⟨s, r⟩ - J(r)`,
/// given the accompanying subgradient `s` and the value of `J` at `r`.
pub fn bregman_to_zero(r: &ScalarField, s: &ScalarField, j_at_r: f64) -> f64 {
    s.inner(r) - j_at_r
}

/// Vector-field version of [`bregman_to_zero`].
pub fn bregman_to_zero_vec(r: &VectorField2, s: &VectorField2, j_at_r: f64) -> f64 {
    s.inner(r) - j_at_r
}

fn clean_columns(
    u: &ScalarField,
    clean: Option<&ScalarField>,
    metric: &MetricConfig,
) -> Result<(Option<f64>, Option<f64>)> {
    match clean {
        None => Ok((None, None)),
        Some(g) => {
            let d = u.sub(g).l2_norm();
            Ok((Some(d), Some(psnr(u, g, metric)?)))
        }
    }
}

/// Iterative regularization of the ROF model (noise accumulation form).
///
/// With `v⁰ = 0`, iterate `u = rof(f + v^k, η)`, `v^{k+1} = f + v^k - u`.
/// One iteration is exactly `rof_denoise(f, η)`.
pub fn osher_iterate(
    f: &ScalarField,
    eta: f64,
    cfg: &OuterConfig,
    clean: Option<&ScalarField>,
) -> Result<(ScalarField, SolveReport)> {
    cfg.validate()?;
    if !f.is_finite() {
        return Err(Error::NonFinite("osher_iterate input"));
    }
    let metric = cfg.metric();
    let mut report = SolveReport::new();
    let mut noise = ScalarField::zeros(f.height(), f.width());
    let mut u = f.clone();
    let mut prev_u = f.clone();
    let mut r1_norm = 0.0;

    for k in 1..=cfg.max_outer {
        let t0 = Instant::now();
        let data = f.add(&noise);
        u = rof_denoise(&data, eta, &cfg.inner)?.0;
        noise = data.sub(&u);

        let r_norm = u.sub(&prev_u).l2_norm();
        if k == 1 {
            r1_norm = r_norm;
        }
        let u_minus_f = u.sub(f).l2_norm();
        let (u_minus_g, psnr_k) = clean_columns(&u, clean, &metric)?;
        report.records.push(IterRecord {
            k,
            phase: Phase::First,
            eta,
            r_norm,
            rex_norm: noise.l2_norm(),
            u_minus_f,
            u_minus_g,
            psnr: psnr_k,
            bregman: None,
            seconds: t0.elapsed().as_secs_f64(),
        });
        prev_u = u.clone();
        // the discrepancy quantity for this driver is ‖f - u^k‖;
        // a stationary iterate (u and v both unchanged) cannot move again
        let stationary = r_norm == 0.0 && noise.l2_norm() == 0.0;
        if stationary || cfg.stop_rule.triggered(k, r_norm, r1_norm, u_minus_f, f.len()) {
            break;
        }
    }
    Ok((u, report))
}

struct TangentLoop {
    tau: VectorField2,
    matched: ScalarField,
    records: Vec<IterRecord>,
}

/// The shared τ-accumulation loop of Algorithms operating on step 1.
fn tangent_residual_loop(
    f: &ScalarField,
    cfg: &OuterConfig,
    solver: &PoissonSolver,
    clean: Option<&ScalarField>,
    stop: StopRule,
    phase: Phase,
) -> Result<TangentLoop> {
    let metric = cfg.metric();
    let tau0 = grad_perp(f);
    let mut tau = VectorField2::zeros(f.height(), f.width());
    let mut records = Vec::new();

    let Some(gamma_vec) = fidelity_gamma_vec(&tau0) else {
        // constant image: zero residual before the first iteration
        return Ok(TangentLoop {
            tau,
            matched: f.clone(),
            records,
        });
    };
    let eta1 = cfg.beta1 / gamma_vec;
    let eta2 = cfg.beta2 / fidelity_gamma(f).expect("nonconstant image has γ > 0");

    let mut r_ex = tau0;
    let mut matched = f.clone();
    let mut r1_norm = 0.0;
    for k in 1..=cfg.max_outer {
        let t0 = Instant::now();
        let (r, _) = rof_vector_projected(&r_ex, eta1, solver, &cfg.inner)?;
        r_ex.axpy(-1.0, &r);
        tau.axpy(1.0, &r);

        // s^k = η₁ r_ex^k is the subgradient of J(Π·) at r^k
        let j_at_r = tv_energy_vec(&solver.project_div_free(&r)?);
        let bregman = bregman_to_zero_vec(&r, &r_ex.scale(eta1), j_at_r);

        let eps = cfg.eps.unwrap_or_else(|| default_eps(&tau));
        matched = match_surface(f, &tau, cfg.alpha, eta2, eps, &cfg.inner)?;

        let r_norm = r.l2_norm();
        if k == 1 {
            r1_norm = r_norm;
        }
        let rex_norm = r_ex.l2_norm();
        let (u_minus_g, psnr_k) = clean_columns(&matched, clean, &metric)?;
        records.push(IterRecord {
            k,
            phase,
            eta: eta1,
            r_norm,
            rex_norm,
            u_minus_f: matched.sub(f).l2_norm(),
            u_minus_g,
            psnr: psnr_k,
            bregman: Some(bregman),
            seconds: t0.elapsed().as_secs_f64(),
        });
        if r_ex.max_magnitude() == 0.0 || stop.triggered(k, r_norm, r1_norm, rex_norm, f.len()) {
            break;
        }
    }
    Ok(TangentLoop {
        tau,
        matched,
        records,
    })
}

/// The shared scalar residual loop of Algorithms operating on step 2.
fn scalar_residual_loop(
    f: &ScalarField,
    tau: &VectorField2,
    cfg: &OuterConfig,
    clean: Option<&ScalarField>,
    stop: StopRule,
    phase: Phase,
) -> Result<(ScalarField, Vec<IterRecord>)> {
    let metric = cfg.metric();
    let eps = cfg.eps.unwrap_or_else(|| default_eps(tau));
    let orientation = divergence(&normalized_perp(tau, eps));

    let mut u = ScalarField::zeros(f.height(), f.width());
    let mut r_ex = f.clone();
    let mut records = Vec::new();
    let mut eta_prev = 0.0;
    let mut r1_norm = 0.0;

    for k in 1..=cfg.max_outer {
        let t0 = Instant::now();
        let Some(eta_k) = fidelity_schedule(&r_ex, cfg.beta2, eta_prev) else {
            break; // zero residual: converged
        };
        let mut data = r_ex.clone();
        data.axpy(-cfg.alpha / eta_k, &orientation);
        let (r, _) = rof_denoise(&data, eta_k, &cfg.inner)?;
        r_ex.axpy(-1.0, &r);
        u.axpy(1.0, &r);

        // s^k = η^k r_ex^k - α ∇·n
        let mut s = r_ex.scale(eta_k);
        s.axpy(-cfg.alpha, &orientation);
        let bregman = bregman_to_zero(&r, &s, tv_energy(&r));

        let r_norm = r.l2_norm();
        if k == 1 {
            r1_norm = r_norm;
        }
        let rex_norm = r_ex.l2_norm();
        let (u_minus_g, psnr_k) = clean_columns(&u, clean, &metric)?;
        records.push(IterRecord {
            k,
            phase,
            eta: eta_k,
            r_norm,
            rex_norm,
            u_minus_f: u.sub(f).l2_norm(),
            u_minus_g,
            psnr: psnr_k,
            bregman: Some(bregman),
            seconds: t0.elapsed().as_secs_f64(),
        });
        eta_prev = eta_k;
        if stop.triggered(k, r_norm, r1_norm, rex_norm, f.len()) {
            break;
        }
    }
    Ok((u, records))
}

/// Iterative regularization applied to the tangent-field step.
///
/// Returns the matched image, the accumulated tangent field, and the trace.
/// The fidelity η₁ is fixed over the loop at `β₁/γ` of the initial residual;
/// the final match uses `η₂ = β₂/γ` of the image.
pub fn richardson_step1(
    f: &ScalarField,
    cfg: &OuterConfig,
    solver: &PoissonSolver,
    clean: Option<&ScalarField>,
) -> Result<(ScalarField, VectorField2, SolveReport)> {
    cfg.validate()?;
    if !f.is_finite() {
        return Err(Error::NonFinite("richardson_step1 input"));
    }
    if f.shape() != solver.shape() {
        return Err(Error::DimensionMismatch {
            expected: solver.shape(),
            found: f.shape(),
        });
    }
    let out = tangent_residual_loop(f, cfg, solver, clean, cfg.stop_rule, Phase::First)?;
    Ok((
        out.matched,
        out.tau,
        SolveReport {
            records: out.records,
        },
    ))
}

/// Iterative regularization applied to the image step.
///
/// The tangent field is solved once (`η₁ = β₁/γ`), then the scalar residual
/// loop runs with the adaptive schedule `η^k = max(β₂/γ^k, η^{k-1})` on data
/// shifted by the orientation term `(α/η^k)·∇·(τ⊥/|τ⊥|)`.
pub fn richardson_step2(
    f: &ScalarField,
    cfg: &OuterConfig,
    solver: &PoissonSolver,
    clean: Option<&ScalarField>,
) -> Result<(ScalarField, SolveReport)> {
    cfg.validate()?;
    if !f.is_finite() {
        return Err(Error::NonFinite("richardson_step2 input"));
    }
    if f.shape() != solver.shape() {
        return Err(Error::DimensionMismatch {
            expected: solver.shape(),
            found: f.shape(),
        });
    }
    let tau0 = grad_perp(f);
    let Some(gamma_vec) = fidelity_gamma_vec(&tau0) else {
        return Ok((f.clone(), SolveReport::new()));
    };
    let (tau, _) = rof_vector_projected(&tau0, cfg.beta1 / gamma_vec, solver, &cfg.inner)?;
    let (u, records) = scalar_residual_loop(f, &tau, cfg, clean, cfg.stop_rule, Phase::First)?;
    Ok((u, SolveReport { records }))
}

/// Separated iterative regularization: the τ loop of [`richardson_step1`]
/// followed by the scalar loop of [`richardson_step2`] against that τ.
///
/// Phase 1 obeys `phase1_stop` (defaulting to `stop_rule`), phase 2 obeys
/// `stop_rule`; records carry their phase.
pub fn richardson_both(
    f: &ScalarField,
    cfg: &OuterConfig,
    solver: &PoissonSolver,
    clean: Option<&ScalarField>,
) -> Result<(ScalarField, SolveReport)> {
    cfg.validate()?;
    if !f.is_finite() {
        return Err(Error::NonFinite("richardson_both input"));
    }
    if f.shape() != solver.shape() {
        return Err(Error::DimensionMismatch {
            expected: solver.shape(),
            found: f.shape(),
        });
    }
    let phase1_stop = cfg.phase1_stop.unwrap_or(cfg.stop_rule);
    let phase1 = tangent_residual_loop(f, cfg, solver, clean, phase1_stop, Phase::First)?;
    if phase1.records.is_empty() {
        // constant image
        return Ok((phase1.matched, SolveReport::new()));
    }
    let (u, phase2_records) =
        scalar_residual_loop(f, &phase1.tau, cfg, clean, cfg.stop_rule, Phase::Second)?;
    let mut records = phase1.records;
    records.extend(phase2_records);
    Ok((u, SolveReport { records }))
}
