//! Complex matrix and optical-field primitives.

use crate::rng::SeededRng;
use crate::units::Dbm;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

pub type Complex = num_complex::Complex64;
pub type CMatrix = DMatrix<Complex>;
pub type CVector = DVector<Complex>;

/// Complex field amplitudes, one per port; `|a|^2` is power in mW.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalField {
    pub amps: CVector,
}

impl OpticalField {
    pub fn new(amps: CVector) -> Self {
        OpticalField { amps }
    }

    pub fn zeros(n: usize) -> Self {
        OpticalField { amps: CVector::zeros(n) }
    }

    /// Equal amplitude, equal phase on every port; total power `total_mw`.
    pub fn uniform(n: usize, total_mw: f64) -> Self {
        let a = Complex::new((total_mw / n as f64).sqrt(), 0.0);
        OpticalField { amps: CVector::from_element(n, a) }
    }

    /// Single excited port carrying `mw` milliwatts.
    pub fn single_port(n: usize, port: usize, mw: f64) -> Self {
        let mut amps = CVector::zeros(n);
        amps[port] = Complex::new(mw.sqrt(), 0.0);
        OpticalField { amps }
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn power_mw(&self, port: usize) -> f64 {
        self.amps[port].norm_sqr()
    }

    pub fn total_power_mw(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Per-port power in dBm; zero power maps to the `-inf` sentinel.
    pub fn power_dbm(&self, port: usize) -> Result<Dbm> {
        if port >= self.amps.len() {
            return Err(Error::invalid(format!(
                "port {port} out of range for {}-port field",
                self.amps.len()
            )));
        }
        Ok(Dbm::from_mw(self.power_mw(port)))
    }
}

/// Max deviation of `t^H t` from the identity (entrywise modulus).
pub fn unitarity_deviation(t: &CMatrix) -> f64 {
    let n = t.ncols();
    let prod = t.adjoint() * t;
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j { Complex::new(1.0, 0.0) } else { Complex::new(0.0, 0.0) };
            dev = dev.max((prod[(i, j)] - expect).norm());
        }
    }
    dev
}

pub fn check_unitary(t: &CMatrix, tol: f64) -> Result<()> {
    if t.nrows() != t.ncols() {
        return Err(Error::DimensionMismatch { expected: t.nrows(), got: t.ncols() });
    }
    let dev = unitarity_deviation(t);
    if dev > tol {
        return Err(Error::NotUnitary(dev));
    }
    Ok(())
}

/// Haar-random unitary via QR of a complex Gaussian matrix, with the R
/// diagonal phases absorbed so the distribution is group-invariant.
pub fn haar_unitary(n: usize, rng: &mut SeededRng) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        Complex::new(rng.standard_normal(), rng.standard_normal()) / Complex::new(2f64.sqrt(), 0.0)
    });
    let qr = g.qr();
    let r_diag: Vec<Complex> = (0..n).map(|i| qr.r()[(i, i)]).collect();
    let mut q = qr.q();
    for (j, d) in r_diag.iter().enumerate() {
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Complex Gaussian matrix with i.i.d. CN(0, 1/n) entries.
pub fn gaussian_matrix(n: usize, rng: &mut SeededRng) -> CMatrix {
    let scale = 1.0 / (2.0 * n as f64).sqrt();
    CMatrix::from_fn(n, n, |_, _| {
        Complex::new(rng.standard_normal() * scale, rng.standard_normal() * scale)
    })
}
