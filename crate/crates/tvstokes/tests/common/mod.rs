//! Shared fixtures and independent oracles for the integration suites.
//!
//! Everything here is deliberately decoupled from the library's solver paths:
//! operator matrices are assembled from the stencil definitions, energies are
//! evaluated by direct summation, and the reference minimizers are plain
//! projected subgradient descent.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use tvstokes::{ScalarField, VectorField2};

/// Small deterministic generator for test data (splitmix64 stream).
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.next_u64() >> 11) as f64 / 9007199254740992.0;
        lo + (hi - lo) * u
    }

    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next_u64() as usize) % (hi - lo)
    }
}

pub fn random_scalar(h: usize, w: usize, lo: f64, hi: f64, rng: &mut TestRng) -> ScalarField {
    ScalarField::from_fn(h, w, |_, _| rng.uniform(lo, hi))
}

pub fn random_vector(h: usize, w: usize, lo: f64, hi: f64, rng: &mut TestRng) -> VectorField2 {
    VectorField2::from_fn(h, w, |_, _| (rng.uniform(lo, hi), rng.uniform(lo, hi)))
}

// ---------------------------------------------------------------------------
// dense operators from first principles
//
// Scalar fields flatten row-major (q = i*w + j); vector fields flatten as
// [c1-plane; c2-plane].
// ---------------------------------------------------------------------------

/// Forward-difference gradient as a (2N)×N matrix.
pub fn grad_matrix(h: usize, w: usize) -> DMatrix<f64> {
    let n = h * w;
    let mut m = DMatrix::zeros(2 * n, n);
    for i in 0..h {
        for j in 0..w {
            let q = i * w + j;
            if i + 1 < h {
                m[(q, q + w)] += 1.0;
                m[(q, q)] -= 1.0;
            }
            if j + 1 < w {
                m[(n + q, q + 1)] += 1.0;
                m[(n + q, q)] -= 1.0;
            }
        }
    }
    m
}

/// Backward-difference divergence (adjoint convention) as an N×(2N) matrix.
pub fn div_matrix(h: usize, w: usize) -> DMatrix<f64> {
    let n = h * w;
    let mut m = DMatrix::zeros(n, 2 * n);
    for i in 0..h {
        for j in 0..w {
            let q = i * w + j;
            if i == 0 {
                m[(q, q)] += 1.0;
            } else if i + 1 == h {
                m[(q, q - w)] -= 1.0;
            } else {
                m[(q, q)] += 1.0;
                m[(q, q - w)] -= 1.0;
            }
            if j == 0 {
                m[(q, n + q)] += 1.0;
            } else if j + 1 == w {
                m[(q, n + q - 1)] -= 1.0;
            } else {
                m[(q, n + q)] += 1.0;
                m[(q, n + q - 1)] -= 1.0;
            }
        }
    }
    m
}

/// Dense divergence-free projection `Π = I - G (D G)† D` via SVD pseudoinverse.
pub fn projection_matrix(h: usize, w: usize) -> DMatrix<f64> {
    let n = h * w;
    let g = grad_matrix(h, w);
    let d = div_matrix(h, w);
    let lap = &d * &g;
    let pinv = lap
        .svd(true, true)
        .pseudo_inverse(1e-10)
        .expect("svd converges");
    DMatrix::identity(2 * n, 2 * n) - &g * pinv * &d
}

pub fn scalar_to_dvec(f: &ScalarField) -> DVector<f64> {
    DVector::from_column_slice(f.as_slice())
}

pub fn dvec_to_scalar(h: usize, w: usize, v: &DVector<f64>) -> ScalarField {
    ScalarField::from_vec(h, w, v.as_slice().to_vec()).unwrap()
}

pub fn vector_to_dvec(f: &VectorField2) -> DVector<f64> {
    let mut data = Vec::with_capacity(2 * f.len());
    data.extend_from_slice(f.c1());
    data.extend_from_slice(f.c2());
    DVector::from_vec(data)
}

pub fn dvec_to_vector(h: usize, w: usize, v: &DVector<f64>) -> VectorField2 {
    let n = h * w;
    VectorField2::from_fn(h, w, |i, j| {
        let q = i * w + j;
        (v[q], v[n + q])
    })
}

// ---------------------------------------------------------------------------
// direct-summation energies and subgradients
// ---------------------------------------------------------------------------

/// Isotropic TV of a flattened scalar field and one of its subgradients.
pub fn scalar_tv_subgrad(h: usize, w: usize, u: &[f64]) -> (f64, Vec<f64>) {
    let mut energy = 0.0;
    let mut grad = vec![0.0; h * w];
    for i in 0..h {
        for j in 0..w {
            let q = i * w + j;
            let a = if i + 1 < h { u[q + w] - u[q] } else { 0.0 };
            let b = if j + 1 < w { u[q + 1] - u[q] } else { 0.0 };
            let m = (a * a + b * b).sqrt();
            energy += m;
            if m > 0.0 {
                let (da, db) = (a / m, b / m);
                if i + 1 < h {
                    grad[q + w] += da;
                    grad[q] -= da;
                }
                if j + 1 < w {
                    grad[q + 1] += db;
                    grad[q] -= db;
                }
            }
        }
    }
    (energy, grad)
}

/// Vector TV (per-pixel Frobenius norm of the componentwise forward gradient)
/// of a flattened `[c1; c2]` field, plus one of its subgradients.
pub fn vector_tv_subgrad(h: usize, w: usize, y: &[f64]) -> (f64, Vec<f64>) {
    let n = h * w;
    let mut energy = 0.0;
    let mut grad = vec![0.0; 2 * n];
    for i in 0..h {
        for j in 0..w {
            let q = i * w + j;
            let a11 = if i + 1 < h { y[q + w] - y[q] } else { 0.0 };
            let a12 = if j + 1 < w { y[q + 1] - y[q] } else { 0.0 };
            let a21 = if i + 1 < h { y[n + q + w] - y[n + q] } else { 0.0 };
            let a22 = if j + 1 < w { y[n + q + 1] - y[n + q] } else { 0.0 };
            let m = (a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22).sqrt();
            energy += m;
            if m > 0.0 {
                if i + 1 < h {
                    grad[q + w] += a11 / m;
                    grad[q] -= a11 / m;
                    grad[n + q + w] += a21 / m;
                    grad[n + q] -= a21 / m;
                }
                if j + 1 < w {
                    grad[q + 1] += a12 / m;
                    grad[q] -= a12 / m;
                    grad[n + q + 1] += a22 / m;
                    grad[n + q] -= a22 / m;
                }
            }
        }
    }
    (energy, grad)
}

/// `J(u) + (η/2)‖u - f‖²` by direct summation.
pub fn rof_objective(h: usize, w: usize, u: &[f64], f: &[f64], eta: f64) -> f64 {
    let (tv, _) = scalar_tv_subgrad(h, w, u);
    let fid: f64 = u.iter().zip(f).map(|(&a, &b)| (a - b) * (a - b)).sum();
    tv + 0.5 * eta * fid
}

/// `J(u) - α⟨∇u, n⟩ + (η/2)‖u - f‖²` by direct summation; `n` is flattened
/// `[n1; n2]`.
pub fn orientation_objective_dense(
    h: usize,
    w: usize,
    u: &[f64],
    f: &[f64],
    n: &[f64],
    alpha: f64,
    eta: f64,
) -> f64 {
    let (tv, _) = scalar_tv_subgrad(h, w, u);
    let npix = h * w;
    let mut coupling = 0.0;
    for i in 0..h {
        for j in 0..w {
            let q = i * w + j;
            let a = if i + 1 < h { u[q + w] - u[q] } else { 0.0 };
            let b = if j + 1 < w { u[q + 1] - u[q] } else { 0.0 };
            coupling += a * n[q] + b * n[npix + q];
        }
    }
    let fid: f64 = u.iter().zip(f).map(|(&a, &b)| (a - b) * (a - b)).sum();
    tv - alpha * coupling + 0.5 * eta * fid
}

/// `J(Πτ) + (η/2)‖τ - τ0‖²` with the dense projection, by direct summation.
pub fn projected_vector_objective(
    h: usize,
    w: usize,
    tau: &DVector<f64>,
    tau0: &DVector<f64>,
    eta: f64,
    projection: &DMatrix<f64>,
) -> f64 {
    let y = projection * tau;
    let (tv, _) = vector_tv_subgrad(h, w, y.as_slice());
    let diff = tau - tau0;
    tv + 0.5 * eta * diff.norm_squared()
}

// ---------------------------------------------------------------------------
// projected subgradient oracles (strongly convex step 2/(η(t+1)),
// best-iterate tracking)
// ---------------------------------------------------------------------------

/// Reference minimum of the scalar ROF objective.
pub fn oracle_rof_min(h: usize, w: usize, f: &[f64], eta: f64, iters: usize) -> f64 {
    let npix = h * w;
    let mut u = f.to_vec();
    let mut best = rof_objective(h, w, &u, f, eta);
    for t in 1..=iters {
        let (tv, mut g) = scalar_tv_subgrad(h, w, &u);
        let mut fid = 0.0;
        for q in 0..npix {
            let d = u[q] - f[q];
            fid += d * d;
            g[q] += eta * d;
        }
        best = best.min(tv + 0.5 * eta * fid);
        let step = 2.0 / (eta * (t as f64 + 1.0));
        for q in 0..npix {
            u[q] -= step * g[q];
        }
    }
    best.min(rof_objective(h, w, &u, f, eta))
}

/// Reference minimum of the orientation-matching objective.
pub fn oracle_orientation_min(
    h: usize,
    w: usize,
    f: &[f64],
    n: &[f64],
    alpha: f64,
    eta: f64,
    iters: usize,
) -> f64 {
    let npix = h * w;
    let mut u = f.to_vec();
    let mut best = orientation_objective_dense(h, w, &u, f, n, alpha, eta);
    for t in 1..=iters {
        let (_, mut g) = scalar_tv_subgrad(h, w, &u);
        for i in 0..h {
            for j in 0..w {
                let q = i * w + j;
                // d/du of -α(a·n1 + b·n2) for the two forward differences at q
                if i + 1 < h {
                    g[q + w] -= alpha * n[q];
                    g[q] += alpha * n[q];
                }
                if j + 1 < w {
                    g[q + 1] -= alpha * n[npix + q];
                    g[q] += alpha * n[npix + q];
                }
            }
        }
        for q in 0..npix {
            g[q] += eta * (u[q] - f[q]);
        }
        best = best.min(orientation_objective_dense(h, w, &u, f, n, alpha, eta));
        let step = 2.0 / (eta * (t as f64 + 1.0));
        for q in 0..npix {
            u[q] -= step * g[q];
        }
    }
    best.min(orientation_objective_dense(h, w, &u, f, n, alpha, eta))
}

/// Reference minimum of the projected vector objective.
pub fn oracle_projected_vector_min(
    h: usize,
    w: usize,
    tau0: &DVector<f64>,
    eta: f64,
    projection: &DMatrix<f64>,
    iters: usize,
) -> f64 {
    let mut tau = tau0.clone();
    let mut best = projected_vector_objective(h, w, &tau, tau0, eta, projection);
    for t in 1..=iters {
        let y = projection * &tau;
        let (tv, gy) = vector_tv_subgrad(h, w, y.as_slice());
        let diff = &tau - tau0;
        best = best.min(tv + 0.5 * eta * diff.norm_squared());
        // chain rule through the self-adjoint projection
        let g = projection.transpose() * DVector::from_vec(gy) + eta * diff;
        let step = 2.0 / (eta * (t as f64 + 1.0));
        tau -= step * g;
    }
    best.min(projected_vector_objective(h, w, &tau, tau0, eta, projection))
}

// ---------------------------------------------------------------------------
// recurrence runners
//
// The outer drivers are deterministic, so re-running their documented
// recurrences with the same building blocks reproduces their float sequences
// exactly. The runners record everything the invariant checks need.
// ---------------------------------------------------------------------------

use tvstokes::grid_ops::{default_eps, divergence, grad_perp, normalized_perp, tv_energy, tv_energy_vec};
use tvstokes::iterreg::{fidelity_gamma, fidelity_gamma_vec, fidelity_schedule};
use tvstokes::poisson::PoissonSolver;
use tvstokes::rof::{rof_denoise, rof_vector_projected, InnerSolveConfig};

pub struct TangentTrace {
    pub eta1: f64,
    pub r_norms: Vec<f64>,
    pub bregmans: Vec<f64>,
    pub tau: VectorField2,
    pub rex: VectorField2,
    /// max over k of ‖τ^k + r_ex^k - ∇⊥f‖_∞
    pub telescope_linf: f64,
    /// ⟨s¹, r¹⟩ = η₁⟨r_ex¹, r¹⟩
    pub s1_dot_r1: f64,
    /// J(Π r¹)
    pub j_pi_r1: f64,
}

/// Replays the τ-accumulation recurrence of the tangent-field driver.
pub fn run_tangent_recurrence(
    f: &ScalarField,
    beta1: f64,
    inner: &InnerSolveConfig,
    solver: &PoissonSolver,
    k_max: usize,
) -> TangentTrace {
    let tau0 = grad_perp(f);
    let eta1 = beta1 / fidelity_gamma_vec(&tau0).expect("nonconstant image");
    let mut tau = VectorField2::zeros(f.height(), f.width());
    let mut rex = tau0.clone();
    let mut trace = TangentTrace {
        eta1,
        r_norms: Vec::new(),
        bregmans: Vec::new(),
        tau: tau.clone(),
        rex: rex.clone(),
        telescope_linf: 0.0,
        s1_dot_r1: 0.0,
        j_pi_r1: 0.0,
    };
    for k in 1..=k_max {
        let (r, _) = rof_vector_projected(&rex, eta1, solver, inner).unwrap();
        rex.axpy(-1.0, &r);
        tau.axpy(1.0, &r);
        trace.r_norms.push(r.l2_norm());

        let j_pi_r = tv_energy_vec(&solver.project_div_free(&r).unwrap());
        trace.bregmans.push(rex.scale(eta1).inner(&r) - j_pi_r);
        if k == 1 {
            trace.s1_dot_r1 = rex.scale(eta1).inner(&r);
            trace.j_pi_r1 = j_pi_r;
        }

        let mut telescoped = tau.clone();
        telescoped.axpy(1.0, &rex);
        telescoped.axpy(-1.0, &tau0);
        trace.telescope_linf = trace.telescope_linf.max(telescoped.max_magnitude());

        if rex.max_magnitude() == 0.0 {
            break;
        }
    }
    trace.tau = tau;
    trace.rex = rex;
    trace
}

pub struct ScalarTrace {
    pub etas: Vec<f64>,
    pub r_norms: Vec<f64>,
    pub bregmans: Vec<f64>,
    pub u: ScalarField,
    pub rex: ScalarField,
    /// max over k of ‖u^k + r_ex^k - f‖_∞
    pub telescope_linf: f64,
}

/// Replays the scalar residual recurrence of the image-step driver.
pub fn run_scalar_recurrence(
    f: &ScalarField,
    tau: &VectorField2,
    beta2: f64,
    alpha: f64,
    inner: &InnerSolveConfig,
    k_max: usize,
) -> ScalarTrace {
    let eps = default_eps(tau);
    let orientation = divergence(&normalized_perp(tau, eps));
    let mut u = ScalarField::zeros(f.height(), f.width());
    let mut rex = f.clone();
    let mut trace = ScalarTrace {
        etas: Vec::new(),
        r_norms: Vec::new(),
        bregmans: Vec::new(),
        u: u.clone(),
        rex: rex.clone(),
        telescope_linf: 0.0,
    };
    let mut eta_prev = 0.0;
    for _k in 1..=k_max {
        let Some(eta_k) = fidelity_schedule(&rex, beta2, eta_prev) else {
            break;
        };
        let mut data = rex.clone();
        data.axpy(-alpha / eta_k, &orientation);
        let (r, _) = rof_denoise(&data, eta_k, inner).unwrap();
        rex.axpy(-1.0, &r);
        u.axpy(1.0, &r);

        trace.etas.push(eta_k);
        trace.r_norms.push(r.l2_norm());
        let mut s = rex.scale(eta_k);
        s.axpy(-alpha, &orientation);
        trace.bregmans.push(s.inner(&r) - tv_energy(&r));

        let mut telescoped = u.clone();
        telescoped.axpy(1.0, &rex);
        telescoped.axpy(-1.0, f);
        trace.telescope_linf = trace.telescope_linf.max(telescoped.linf_norm());

        eta_prev = eta_k;
    }
    trace.u = u;
    trace.rex = rex;
    trace
}

/// Replays the noise-accumulation recurrence and returns the largest
/// telescoping defect ‖f + v^k - u^k - v^{k+1}‖_∞.
pub fn run_osher_recurrence(
    f: &ScalarField,
    eta: f64,
    inner: &InnerSolveConfig,
    k_max: usize,
) -> (ScalarField, f64) {
    let mut noise = ScalarField::zeros(f.height(), f.width());
    let mut u = f.clone();
    let mut worst = 0.0f64;
    for _ in 1..=k_max {
        let data = f.add(&noise);
        u = rof_denoise(&data, eta, inner).unwrap().0;
        let next_noise = data.sub(&u);
        let mut defect = f.add(&noise);
        defect.axpy(-1.0, &u);
        defect.axpy(-1.0, &next_noise);
        worst = worst.max(defect.linf_norm());
        noise = next_noise;
    }
    (u, worst)
}

/// The scalar γ rule, re-exported for test assertions.
pub fn gamma_of(f: &ScalarField) -> f64 {
    fidelity_gamma(f).expect("nonzero field")
}
