//! SVD mapping of arbitrary weight matrices onto two meshes.

use super::{decompose, MeshKind, PhaseProgram};
use crate::{CMatrix, Complex, Error, Result};

/// A weight matrix factored as U * diag(sigma) * V^H with both unitaries
/// decomposed into phase programs.
///
/// Singular values are normalized so the largest equals one; the removed
/// scale is kept as `gain_budget` for the OGU stage, so the attenuation
/// stage stays passive.
#[derive(Debug, Clone)]
pub struct SvdProgram {
    pub u_prog: PhaseProgram,
    /// Normalized singular values, sorted descending, all <= 1.
    pub sigma: Vec<f64>,
    /// Program implementing V^H (applied first).
    pub v_prog: PhaseProgram,
    /// Linear amplitude scale folded out of sigma (sigma_max of the input).
    pub gain_budget: f64,
}

impl SvdProgram {
    pub fn logical_n(&self) -> usize {
        self.u_prog.logical_n
    }

    /// Layer built from a single unitary: V^H is trivial, sigma = 1.
    pub fn from_unitary(u: &CMatrix, kind: MeshKind) -> Result<SvdProgram> {
        let n = u.nrows();
        Ok(SvdProgram {
            u_prog: decompose(u, kind)?,
            sigma: vec![1.0; n],
            v_prog: PhaseProgram::identity(n),
            gain_budget: 1.0,
        })
    }
}

/// Factor `w` into an [`SvdProgram`] for the requested mesh kind.
pub fn map_weights(w: &CMatrix, kind: MeshKind) -> Result<SvdProgram> {
    if w.nrows() != w.ncols() || w.nrows() < 2 {
        return Err(Error::DimensionMismatch { expected: w.nrows(), got: w.ncols() });
    }
    if w.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::invalid("weight matrix has non-finite entries"));
    }
    let n = w.nrows();
    let svd = w.clone().svd(true, true);
    let u = svd.u.ok_or_else(|| Error::invalid("SVD did not produce U"))?;
    let v_t = svd.v_t.ok_or_else(|| Error::invalid("SVD did not produce V^H"))?;
    let mut sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let gain_budget = if smax > 0.0 { smax } else { 1.0 };
    for s in &mut sigma {
        *s /= gain_budget;
    }
    // nalgebra's complex SVD can leave U, V^H unitary only up to rounding;
    // re-orthonormalize through the decomposition tolerance by polishing
    // with one QR pass when needed.
    let u = polish_unitary(u);
    let v_t = polish_unitary(v_t);
    Ok(SvdProgram {
        u_prog: decompose(&u, kind)?,
        sigma,
        v_prog: decompose(&v_t, kind)?,
        gain_budget,
    })
}

fn polish_unitary(m: CMatrix) -> CMatrix {
    if crate::matrix::unitarity_deviation(&m) < 1e-9 {
        return m;
    }
    let qr = m.clone().qr();
    let r_diag: Vec<Complex> = (0..m.ncols()).map(|i| qr.r()[(i, i)]).collect();
    let mut q = qr.q();
    for (j, d) in r_diag.iter().enumerate() {
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex::new(1.0, 0.0) };
        for i in 0..q.nrows() {
            q[(i, j)] *= phase;
        }
    }
    q
}
