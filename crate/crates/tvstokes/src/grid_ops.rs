//! Discrete differential operators on the pixel grid.
//!
//! The discretization is the standard pairing for dual (Chambolle-type) TV
//! solvers on a collocated grid with unit spacing:
//!
//! * [`gradient`] uses forward differences with a zero difference on the last
//!   row/column (replicate/Neumann boundary),
//! * [`divergence`] is the exact negative adjoint of [`gradient`], i.e.
//!   backward differences with truncated first and last entries, so that
//!   `⟨∇u, v⟩ = -⟨u, ∇·v⟩` holds in exact arithmetic,
//! * [`vec_gradient`]/[`mat_divergence`] apply the same pair componentwise to
//!   vector fields and 2×2 matrix fields.
//!
//! [`grad_perp`] is the rotated gradient `(-∂₂u, ∂₁u)` built from *backward*
//! differences (zero at the first row/column). With that choice the mixed
//! differences inside `∇·∇⊥` are the same stencil and cancel exactly at every
//! interior pixel; only the outermost pixel ring picks up tangential boundary
//! differences, and it vanishes there too whenever `u` is constant along the
//! border. Building `∇⊥` from the forward-difference gradient instead would
//! break the cancellation at every pixel.

use crate::field::{MatrixField2x2, ScalarField, VectorField2};

/// Forward-difference gradient `(∂₁⁺u, ∂₂⁺u)`, zero on the last row/column.
pub fn gradient(u: &ScalarField) -> VectorField2 {
    let mut out = VectorField2::zeros(u.height(), u.width());
    gradient_into(u, &mut out);
    out
}

pub fn gradient_into(u: &ScalarField, out: &mut VectorField2) {
    let (h, w) = u.shape();
    assert_eq!(out.shape(), (h, w));
    let uv = u.as_slice();
    let (c1, c2) = out.components_mut();
    for i in 0..h {
        let row = i * w;
        for j in 0..w {
            let q = row + j;
            c1[q] = if i + 1 < h { uv[q + w] - uv[q] } else { 0.0 };
            c2[q] = if j + 1 < w { uv[q + 1] - uv[q] } else { 0.0 };
        }
    }
}

/// Negative adjoint of [`gradient`]: `∂₁⁻c₁ + ∂₂⁻c₂` with truncated ends.
pub fn divergence(v: &VectorField2) -> ScalarField {
    let mut out = ScalarField::zeros(v.height(), v.width());
    divergence_into(v, &mut out);
    out
}

pub fn divergence_into(v: &VectorField2, out: &mut ScalarField) {
    let (h, w) = v.shape();
    assert_eq!(out.shape(), (h, w));
    let (c1, c2) = (v.c1(), v.c2());
    let o = out.as_mut_slice();
    for i in 0..h {
        let row = i * w;
        for j in 0..w {
            let q = row + j;
            let d1 = if i == 0 {
                c1[q]
            } else if i + 1 == h {
                -c1[q - w]
            } else {
                c1[q] - c1[q - w]
            };
            let d2 = if j == 0 {
                c2[q]
            } else if j + 1 == w {
                -c2[q - 1]
            } else {
                c2[q] - c2[q - 1]
            };
            o[q] = d1 + d2;
        }
    }
}

/// Discrete Laplacian `∇·∇u` (five-point stencil with replicated boundary).
pub fn laplacian(u: &ScalarField) -> ScalarField {
    divergence(&gradient(u))
}

/// Componentwise gradient: row r of the output is `∇` of component r.
pub fn vec_gradient(v: &VectorField2) -> MatrixField2x2 {
    let mut out = MatrixField2x2::zeros(v.height(), v.width());
    vec_gradient_into(v, &mut out);
    out
}

pub fn vec_gradient_into(v: &VectorField2, out: &mut MatrixField2x2) {
    let (h, w) = v.shape();
    assert_eq!(out.shape(), (h, w));
    let (c1, c2) = (v.c1(), v.c2());
    let [a11, a12, a21, a22] = out.planes_mut();
    for i in 0..h {
        let row = i * w;
        for j in 0..w {
            let q = row + j;
            let down = i + 1 < h;
            let right = j + 1 < w;
            a11[q] = if down { c1[q + w] - c1[q] } else { 0.0 };
            a12[q] = if right { c1[q + 1] - c1[q] } else { 0.0 };
            a21[q] = if down { c2[q + w] - c2[q] } else { 0.0 };
            a22[q] = if right { c2[q + 1] - c2[q] } else { 0.0 };
        }
    }
}

/// Rowwise divergence: exact negative adjoint of [`vec_gradient`].
pub fn mat_divergence(p: &MatrixField2x2) -> VectorField2 {
    let mut out = VectorField2::zeros(p.height(), p.width());
    mat_divergence_into(p, &mut out);
    out
}

pub fn mat_divergence_into(p: &MatrixField2x2, out: &mut VectorField2) {
    let (h, w) = p.shape();
    assert_eq!(out.shape(), (h, w));
    let [a11, a12, a21, a22] = p.planes();
    let (c1, c2) = out.components_mut();
    for i in 0..h {
        let row = i * w;
        for j in 0..w {
            let q = row + j;
            let d1 = |plane: &[f64]| {
                if i == 0 {
                    plane[q]
                } else if i + 1 == h {
                    -plane[q - w]
                } else {
                    plane[q] - plane[q - w]
                }
            };
            let d2 = |plane: &[f64]| {
                if j == 0 {
                    plane[q]
                } else if j + 1 == w {
                    -plane[q - 1]
                } else {
                    plane[q] - plane[q - 1]
                }
            };
            c1[q] = d1(a11) + d2(a12);
            c2[q] = d1(a21) + d2(a22);
        }
    }
}

/// Per-pixel 90° rotation `(c₁, c₂) ↦ (-c₂, c₁)`.
pub fn perp(v: &VectorField2) -> VectorField2 {
    let (h, w) = v.shape();
    let mut out = VectorField2::zeros(h, w);
    {
        let (vc1, vc2) = (v.c1(), v.c2());
        let (o1, o2) = out.components_mut();
        for q in 0..vc1.len() {
            o1[q] = -vc2[q];
            o2[q] = vc1[q];
        }
    }
    out
}

/// Rotated gradient `∇⊥u = (-∂₂u, ∂₁u)` from backward differences.
///
/// Zero difference on the first row/column. `divergence(grad_perp(u))`
/// vanishes identically away from the boundary ring (see module docs).
pub fn grad_perp(u: &ScalarField) -> VectorField2 {
    let (h, w) = u.shape();
    let uv = u.as_slice();
    let mut out = VectorField2::zeros(h, w);
    {
        let (c1, c2) = out.components_mut();
        for i in 0..h {
            let row = i * w;
            for j in 0..w {
                let q = row + j;
                c1[q] = if j > 0 { -(uv[q] - uv[q - 1]) } else { 0.0 };
                c2[q] = if i > 0 { uv[q] - uv[q - w] } else { 0.0 };
            }
        }
    }
    out
}

/// The unit normal field `τ⊥ / max(|τ⊥|, ε)` of a tangent field.
///
/// Rotates by -90° — the inverse of the rotation inside [`grad_perp`] — so
/// that for τ near `∇⊥f` the result points along `∇f`, which is what the
/// orientation-matching term needs (rotating the same way twice would flip
/// the normals against the image gradients). The floor `ε > 0` handles zero
/// vectors; every output magnitude is ≤ 1.
pub fn normalized_perp(v: &VectorField2, eps: f64) -> VectorField2 {
    assert!(eps > 0.0, "normalization floor must be positive");
    let (h, w) = v.shape();
    let mut out = VectorField2::zeros(h, w);
    {
        let (vc1, vc2) = (v.c1(), v.c2());
        let (o1, o2) = out.components_mut();
        for q in 0..vc1.len() {
            let (p1, p2) = (vc2[q], -vc1[q]);
            let m = (p1 * p1 + p2 * p2).sqrt().max(eps);
            o1[q] = p1 / m;
            o2[q] = p2 / m;
        }
    }
    out
}

/// Default normalization floor for a tangent field: `1e-8 · (1 + max |τ|)`.
pub fn default_eps(v: &VectorField2) -> f64 {
    1e-8 * (1.0 + v.max_magnitude())
}

/// Isotropic total variation `Σ |∇u|` (per-pixel Euclidean norm).
pub fn tv_energy(u: &ScalarField) -> f64 {
    let (h, w) = u.shape();
    let uv = u.as_slice();
    let mut sum = 0.0;
    for i in 0..h {
        let row = i * w;
        for j in 0..w {
            let q = row + j;
            let g1 = if i + 1 < h { uv[q + w] - uv[q] } else { 0.0 };
            let g2 = if j + 1 < w { uv[q + 1] - uv[q] } else { 0.0 };
            sum += (g1 * g1 + g2 * g2).sqrt();
        }
    }
    sum
}

/// Vector total variation `Σ |∇τ|_F` (per-pixel Frobenius norm).
pub fn tv_energy_vec(v: &VectorField2) -> f64 {
    let g = vec_gradient(v);
    (0..g.len()).map(|q| g.frobenius_at(q)).sum()
}
