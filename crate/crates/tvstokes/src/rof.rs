//! ROF denoising via the semi-implicit dual fixed point.
//!
//! The scalar solve minimizes `J(u) + (η/2)‖u - f‖²` with `J` the isotropic
//! total variation. Chambolle's dual formulation iterates on a vector field
//! `p` with per-pixel magnitude ≤ 1:
//!
//! ```text
//! p ← (p + δ ∇(∇·p - ηf)) / (1 + δ |∇(∇·p - ηf)|),   p⁰ = 0,
//! u = f - (1/η) ∇·p
//! ```
//!
//! with step `δ ≤ 1/4`. The normalization keeps `p` feasible at every
//! iteration, so the primal iterate is always well defined.
//!
//! The vector variant minimizes `J(Πτ) + (η/2)‖τ - τ⁰‖²` where `Π` is the
//! divergence-free projection. Since `Π` is orthogonal the objective splits:
//! the component `(I-Π)τ⁰` passes through unchanged, and the projected part is
//! solved by the same fixed point with a 2×2 matrix dual (per-pixel Frobenius
//! norm ≤ 1) and `Π` applied to the matrix divergence each sweep.

use crate::error::{Error, Result};
use crate::field::{MatrixField2x2, ScalarField, VectorField2};
use crate::grid_ops::{
    divergence_into, gradient_into, mat_divergence_into, tv_energy, tv_energy_vec,
    vec_gradient_into,
};
use crate::poisson::PoissonSolver;

/// Parameters of the inner dual fixed-point iteration.
#[derive(Debug, Clone)]
pub struct InnerSolveConfig {
    /// Dual step size δ; the scheme is stable for 0 < δ ≤ 1/4.
    pub step: f64,
    /// Hard cap on fixed-point sweeps.
    pub max_iters: usize,
    /// Stop once the largest per-pixel dual change falls below this.
    pub rel_tol: f64,
}

impl Default for InnerSolveConfig {
    fn default() -> Self {
        Self {
            step: 0.25,
            max_iters: 2000,
            rel_tol: 1e-5,
        }
    }
}

impl InnerSolveConfig {
    fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step <= 0.25) {
            return Err(Error::InvalidParameter(format!(
                "dual step must lie in (0, 0.25], got {}",
                self.step
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be ≥ 1".into()));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rel_tol must be positive and finite, got {}",
                self.rel_tol
            )));
        }
        Ok(())
    }
}

/// What the inner iteration did.
#[derive(Debug, Clone, Copy)]
pub struct InnerSolveStats {
    pub iterations_used: usize,
    /// Largest per-pixel dual change of the final sweep.
    pub final_dual_change: f64,
    /// `J + (η/2)‖·-data‖²` at the returned iterate.
    pub primal_energy: f64,
    /// Largest per-pixel dual norm at exit (feasibility wants ≤ 1).
    pub max_dual_norm: f64,
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "fidelity parameter must be positive and finite, got {eta}"
        )));
    }
    Ok(())
}

/// Scalar ROF denoising: minimizes `J(u) + (η/2)‖u - f‖²`.
pub fn rof_denoise(
    f: &ScalarField,
    eta: f64,
    cfg: &InnerSolveConfig,
) -> Result<(ScalarField, InnerSolveStats)> {
    check_eta(eta)?;
    cfg.validate()?;
    if !f.is_finite() {
        return Err(Error::NonFinite("rof_denoise input"));
    }

    let (h, w) = f.shape();
    let delta = cfg.step;
    let mut p = VectorField2::zeros(h, w);
    let mut work = ScalarField::zeros(h, w);
    let mut grad = VectorField2::zeros(h, w);

    let mut iterations_used = 0;
    let mut final_change = 0.0;
    for sweep in 1..=cfg.max_iters {
        iterations_used = sweep;
        divergence_into(&p, &mut work);
        work.axpy(-eta, f); // work = ∇·p - ηf
        gradient_into(&work, &mut grad);

        let (g1, g2) = (grad.c1(), grad.c2());
        let (p1, p2) = p.components_mut();
        let mut change: f64 = 0.0;
        for q in 0..p1.len() {
            let mag = (g1[q] * g1[q] + g2[q] * g2[q]).sqrt();
            let denom = 1.0 + delta * mag;
            let n1 = (p1[q] + delta * g1[q]) / denom;
            let n2 = (p2[q] + delta * g2[q]) / denom;
            let d1 = n1 - p1[q];
            let d2 = n2 - p2[q];
            change = change.max((d1 * d1 + d2 * d2).sqrt());
            p1[q] = n1;
            p2[q] = n2;
        }
        final_change = change;
        if change < cfg.rel_tol {
            break;
        }
    }

    divergence_into(&p, &mut work);
    let mut u = f.clone();
    u.axpy(-1.0 / eta, &work);

    let fidelity: f64 = u
        .as_slice()
        .iter()
        .zip(f.as_slice())
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum();
    let stats = InnerSolveStats {
        iterations_used,
        final_dual_change: final_change,
        primal_energy: tv_energy(&u) + 0.5 * eta * fidelity,
        max_dual_norm: p.max_magnitude(),
    };
    Ok((u, stats))
}

/// Projected vector ROF: minimizes `J(Πτ) + (η/2)‖τ - τ⁰‖²`.
///
/// The returned field satisfies `(I-Π)τ = (I-Π)τ⁰` exactly up to the
/// projection tolerance, and its projected part is divergence-free.
pub fn rof_vector_projected(
    tau0: &VectorField2,
    eta: f64,
    solver: &PoissonSolver,
    cfg: &InnerSolveConfig,
) -> Result<(VectorField2, InnerSolveStats)> {
    check_eta(eta)?;
    cfg.validate()?;
    if !tau0.is_finite() {
        return Err(Error::NonFinite("rof_vector_projected input"));
    }
    if tau0.shape() != solver.shape() {
        return Err(Error::DimensionMismatch {
            expected: solver.shape(),
            found: tau0.shape(),
        });
    }

    let (h, w) = tau0.shape();
    let delta = cfg.step;
    let projected0 = solver.project_div_free(tau0)?;
    let complement = tau0.sub(&projected0);

    let mut p = MatrixField2x2::zeros(h, w);
    let mut div_p = VectorField2::zeros(h, w);
    let mut grad = MatrixField2x2::zeros(h, w);

    let mut iterations_used = 0;
    let mut final_change = 0.0;
    for sweep in 1..=cfg.max_iters {
        iterations_used = sweep;
        mat_divergence_into(&p, &mut div_p);
        let mut psi = solver.project_div_free(&div_p)?;
        psi.axpy(-eta, &projected0); // ψ = Π(∇·p) - ηΠτ⁰
        vec_gradient_into(&psi, &mut grad);

        let [g11, g12, g21, g22] = grad.planes();
        let mut change: f64 = 0.0;
        {
            let [p11, p12, p21, p22] = p.planes_mut();
            for q in 0..g11.len() {
                let frob = (g11[q] * g11[q]
                    + g12[q] * g12[q]
                    + g21[q] * g21[q]
                    + g22[q] * g22[q])
                    .sqrt();
                let denom = 1.0 + delta * frob;
                let n11 = (p11[q] + delta * g11[q]) / denom;
                let n12 = (p12[q] + delta * g12[q]) / denom;
                let n21 = (p21[q] + delta * g21[q]) / denom;
                let n22 = (p22[q] + delta * g22[q]) / denom;
                let d = ((n11 - p11[q]) * (n11 - p11[q])
                    + (n12 - p12[q]) * (n12 - p12[q])
                    + (n21 - p21[q]) * (n21 - p21[q])
                    + (n22 - p22[q]) * (n22 - p22[q]))
                    .sqrt();
                change = change.max(d);
                p11[q] = n11;
                p12[q] = n12;
                p21[q] = n21;
                p22[q] = n22;
            }
        }
        final_change = change;
        if change < cfg.rel_tol {
            break;
        }
    }

    mat_divergence_into(&p, &mut div_p);
    let projected_div = solver.project_div_free(&div_p)?;
    let mut tau_div_free = projected0.clone();
    tau_div_free.axpy(-1.0 / eta, &projected_div);
    let tau = tau_div_free.add(&complement);

    let diff = tau.sub(tau0);
    let stats = InnerSolveStats {
        iterations_used,
        final_dual_change: final_change,
        primal_energy: tv_energy_vec(&tau_div_free) + 0.5 * eta * diff.inner(&diff),
        max_dual_norm: p.max_frobenius(),
    };
    Ok((tau, stats))
}
