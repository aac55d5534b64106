//! Single 2x2 MZI models.
//!
//! The multiplier unit is two directional couplers around a theta phase
//! shifter, with an external phi shifter on the upper input arm. Three
//! variants are modelled: the ideal unitary transfer matrix, the loss-aware
//! matrix built from the per-component dB budget, and a crosstalk-perturbed
//! matrix that mixes the row-swapped transfer into the main one.

use crate::rng::SeededRng;
use crate::units::{db_to_amplitude, Db};
use crate::{Complex, Error, Result};
use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub type Matrix2c = Matrix2<Complex>;

/// Phase-shifter settings; theta in [0, pi], phi in [0, 2*pi].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePair {
    pub theta: f64,
    pub phi: f64,
}

impl PhasePair {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::invalid(format!("theta {theta} outside [0, pi]")));
        }
        if !(0.0..=2.0 * PI).contains(&phi) {
            return Err(Error::invalid(format!("phi {phi} outside [0, 2*pi]")));
        }
        Ok(PhasePair { theta, phi })
    }

    /// Bar state: straight-through routing.
    pub const BAR: PhasePair = PhasePair { theta: PI, phi: 0.0 };
    /// Cross state: input swap.
    pub const CROSS: PhasePair = PhasePair { theta: 0.0, phi: 0.0 };
}

/// Device-level optical loss parameters (amplitude convention, dB inputs).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossModel {
    /// Directional-coupler insertion loss, dB per coupler.
    pub l_dc_db: f64,
    /// Metal absorption per phase-shifter pass, dB.
    pub l_m_db: f64,
    /// Propagation loss, dB/cm.
    pub l_p_db_per_cm: f64,
    /// MZI length, cm.
    pub l_mzi_cm: f64,
    /// Cross-over coupling coefficients of the two DCs.
    pub kappa1: f64,
    pub kappa2: f64,
}

impl Default for LossModel {
    fn default() -> Self {
        LossModel {
            l_dc_db: 0.1,
            l_m_db: 0.2,
            l_p_db_per_cm: 2.0,
            l_mzi_cm: 0.03,
            kappa1: 0.5,
            kappa2: 0.5,
        }
    }
}

impl LossModel {
    /// All losses zero, exact 50:50 couplers.
    pub fn lossless() -> Self {
        LossModel {
            l_dc_db: 0.0,
            l_m_db: 0.0,
            l_p_db_per_cm: 0.0,
            l_mzi_cm: 0.0,
            kappa1: 0.5,
            kappa2: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("l_dc_db", self.l_dc_db),
            ("l_m_db", self.l_m_db),
            ("l_p_db_per_cm", self.l_p_db_per_cm),
            ("l_mzi_cm", self.l_mzi_cm),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(format!("{name} must be >= 0, got {v}")));
            }
        }
        for (name, k) in [("kappa1", self.kappa1), ("kappa2", self.kappa2)] {
            if !(0.0..=1.0).contains(&k) {
                return Err(Error::invalid(format!("{name} must be in [0,1], got {k}")));
            }
        }
        Ok(())
    }

    pub(crate) fn amplitudes(&self) -> Result<LossAmplitudes> {
        self.validate()?;
        Ok(LossAmplitudes {
            dc: db_to_amplitude(Db(self.l_dc_db))?,
            metal: db_to_amplitude(Db(self.l_m_db))?,
            prop: db_to_amplitude(Db(self.l_p_db_per_cm * self.l_mzi_cm))?,
        })
    }
}

pub(crate) struct LossAmplitudes {
    pub dc: f64,
    pub metal: f64,
    pub prop: f64,
}

/// Statistical crosstalk-coefficient model (dB-domain Gaussian around a
/// linear-in-theta mean).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrosstalkModel {
    /// Bar-state crosstalk X_B, dB.
    pub x_bar_db: f64,
    /// Cross-state crosstalk X_C, dB.
    pub x_cross_db: f64,
    /// Relative standard deviation of the dB-domain sample.
    pub sigma_frac: f64,
    pub enabled: bool,
}

impl Default for CrosstalkModel {
    fn default() -> Self {
        CrosstalkModel {
            x_bar_db: -25.0,
            x_cross_db: -18.0,
            sigma_frac: 0.05,
            enabled: true,
        }
    }
}

impl CrosstalkModel {
    pub fn disabled() -> Self {
        CrosstalkModel { enabled: false, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.x_bar_db > self.x_cross_db {
            return Err(Error::invalid(format!(
                "bar-state crosstalk ({} dB) must not exceed cross-state ({} dB)",
                self.x_bar_db, self.x_cross_db
            )));
        }
        if self.sigma_frac < 0.0 {
            return Err(Error::invalid("sigma_frac must be >= 0"));
        }
        Ok(())
    }

    /// Mean crosstalk in dB at a given theta: linear interpolation from the
    /// cross state (theta = 0) to the bar state (theta = pi).
    pub fn mean_db(&self, theta: f64) -> f64 {
        (self.x_bar_db - self.x_cross_db) / PI * theta + self.x_cross_db
    }
}

/// Ideal (lossless, crosstalk-free) 2x2 MZI transfer matrix.
pub fn ideal_mzi(phases: PhasePair) -> Matrix2c {
    let e_th = Complex::from_polar(1.0, phases.theta);
    let e_ph = Complex::from_polar(1.0, phases.phi);
    let i = Complex::i();
    let half = Complex::new(0.5, 0.0);
    Matrix2c::new(
        e_ph * (e_th - 1.0) * half,
        i * (e_th + 1.0) * half,
        i * e_ph * (e_th + 1.0) * half,
        -(e_th - 1.0) * half,
    )
}

/// Loss-aware 2x2 MZI transfer matrix: `T_DC2 * T_theta * T_DC1 * T_phi`
/// with every dB parameter converted to an amplitude factor.
pub fn lossy_mzi(phases: PhasePair, loss: &LossModel) -> Result<Matrix2c> {
    let a = loss.amplitudes()?;
    let dc = |kappa: f64| {
        let t = Complex::new(a.dc * (1.0 - kappa).sqrt(), 0.0);
        let k = Complex::new(0.0, a.dc * kappa.sqrt());
        Matrix2c::new(t, k, k, t)
    };
    let t_dc1 = dc(loss.kappa1);
    let t_dc2 = dc(loss.kappa2);
    let t_theta = Matrix2c::new(
        Complex::from_polar(a.prop * a.metal, phases.theta),
        Complex::new(0.0, 0.0),
        Complex::new(0.0, 0.0),
        Complex::new(a.prop, 0.0),
    );
    let t_phi = Matrix2c::new(
        Complex::from_polar(a.metal, phases.phi),
        Complex::new(0.0, 0.0),
        Complex::new(0.0, 0.0),
        Complex::new(1.0, 0.0),
    );
    Ok(t_dc2 * t_theta * t_dc1 * t_phi)
}

/// Draw a crosstalk power fraction X for an MZI at the given theta.
///
/// The dB-domain sample is Normal(mu(theta), (sigma_frac*mu)^2); the linear
/// result is clamped to [0, 1]. A disabled model returns exactly 0.
pub fn sample_crosstalk(theta: f64, model: &CrosstalkModel, rng: &mut SeededRng) -> Result<f64> {
    if !model.enabled {
        return Ok(0.0);
    }
    model.validate()?;
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::invalid(format!("theta {theta} outside [0, pi]")));
    }
    let mu = model.mean_db(theta);
    let x_db = rng.normal(mu, (model.sigma_frac * mu).abs());
    Ok(10f64.powf(x_db / 10.0).clamp(0.0, 1.0))
}

/// How the sampled crosstalk fraction enters the field matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum XtalkMix {
    /// Field coefficients scaled by (1-X) and X, the literal matrix form.
    FieldCoefficient,
    /// X treated as a power fraction: field coefficients sqrt(1-X), sqrt(X).
    #[default]
    PowerFraction,
}

impl XtalkMix {
    pub(crate) fn coefficients(self, x: f64) -> (f64, f64) {
        match self {
            XtalkMix::FieldCoefficient => (1.0 - x, x),
            XtalkMix::PowerFraction => ((1.0 - x).sqrt(), x.sqrt()),
        }
    }
}

/// Crosstalk-perturbed MZI: main term plus row-swapped leakage term.
///
/// With `T` the lossy matrix, the result is `a(x)*T + b(x)*swap_rows(T)`;
/// the default literal form uses `a = 1-x`, `b = x`.
pub fn noisy_mzi(phases: PhasePair, loss: &LossModel, x: f64) -> Result<Matrix2c> {
    noisy_mzi_mixed(phases, loss, x, XtalkMix::FieldCoefficient, Complex::new(1.0, 0.0))
}

/// As [`noisy_mzi`] but with a selectable mixing rule and an optical phase
/// applied to the leakage term.
pub fn noisy_mzi_mixed(
    phases: PhasePair,
    loss: &LossModel,
    x: f64,
    mix: XtalkMix,
    leak_phase: Complex,
) -> Result<Matrix2c> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid(format!("crosstalk fraction {x} outside [0,1]")));
    }
    let t = lossy_mzi(phases, loss)?;
    let (main, leak) = mix.coefficients(x);
    let swapped = Matrix2c::new(t[(1, 0)], t[(1, 1)], t[(0, 0)], t[(0, 1)]);
    Ok(t * Complex::new(main, 0.0) + swapped * (leak_phase * leak))
}

/// Per-output insertion loss of a single MZI in dB under phase-averaged
/// (uniform-power) excitation: the lossy-to-ideal row-power ratio.
pub fn mzi_insertion_loss_db(phases: PhasePair, loss: &LossModel) -> Result<[f64; 2]> {
    let tl = lossy_mzi(phases, loss)?;
    let ti = ideal_mzi(phases);
    let mut out = [0.0; 2];
    for row in 0..2 {
        let num: f64 = (0..2).map(|c| tl[(row, c)].norm_sqr()).sum();
        let den: f64 = (0..2).map(|c| ti[(row, c)].norm_sqr()).sum();
        out[row] = -10.0 * (num / den).log10();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::unitarity_deviation;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn to_dmatrix(m: &Matrix2c) -> DMatrix<Complex> {
        DMatrix::from_fn(2, 2, |i, j| m[(i, j)])
    }

    #[test]
    fn ideal_mzi_cross_state() {
        let t = ideal_mzi(PhasePair::CROSS);
        let i = Complex::i();
        let z = Complex::new(0.0, 0.0);
        assert!((t[(0, 0)] - z).norm() < 1e-12);
        assert!((t[(0, 1)] - i).norm() < 1e-12);
        assert!((t[(1, 0)] - i).norm() < 1e-12);
        assert!((t[(1, 1)] - z).norm() < 1e-12);
    }

    #[test]
    fn ideal_mzi_bar_state() {
        let t = ideal_mzi(PhasePair::BAR);
        assert!((t[(0, 0)] - Complex::new(-1.0, 0.0)).norm() < 1e-12);
        assert!((t[(1, 1)] - Complex::new(1.0, 0.0)).norm() < 1e-12);
        assert!(t[(0, 1)].norm() < 1e-12 && t[(1, 0)].norm() < 1e-12);
    }

    #[test]
    fn ideal_mzi_quarter_phases() {
        // theta = phi = pi/2, checked against direct evaluation of the
        // closed form.
        let t = ideal_mzi(PhasePair::new(PI / 2.0, PI / 2.0).unwrap());
        let half = 0.5;
        let expect = [
            Complex::new(-half, -half),
            Complex::new(-half, half),
            Complex::new(-half, -half),
            Complex::new(half, -half),
        ];
        for (k, e) in expect.iter().enumerate() {
            let (i, j) = (k / 2, k % 2);
            assert!((t[(i, j)] - e).norm() < 1e-12, "entry ({i},{j})");
        }
    }

    #[test]
    fn lossless_degenerates_to_ideal() {
        let loss = LossModel::lossless();
        for (th, ph) in [(0.3, 1.1), (2.0, 5.5), (PI, 0.0)] {
            let p = PhasePair::new(th, ph).unwrap();
            let tl = lossy_mzi(p, &loss).unwrap();
            let ti = ideal_mzi(p);
            assert!((tl - ti).iter().all(|c| c.norm() < 1e-12));
        }
    }

    #[test]
    fn table1_loss_band_and_cross_state_asymmetry() {
        let loss = LossModel::default();
        let mut min_il = f64::INFINITY;
        let mut max_il = f64::NEG_INFINITY;
        for k in 0..=80 {
            let theta = PI * k as f64 / 80.0;
            let il = mzi_insertion_loss_db(PhasePair::new(theta, 0.0).unwrap(), &loss).unwrap();
            for v in il {
                min_il = min_il.min(v);
                max_il = max_il.max(v);
            }
        }
        assert!(min_il > 0.25 && max_il < 0.9, "band [{min_il:.3}, {max_il:.3}]");
        // Cross state: the signal reaching O2 came through the phi shifter.
        let il0 = mzi_insertion_loss_db(PhasePair::CROSS, &loss).unwrap();
        assert!(il0[1] > il0[0]);
        let il_pi = mzi_insertion_loss_db(PhasePair::BAR, &loss).unwrap();
        assert!(il_pi[0] > il_pi[1]);
    }

    #[test]
    fn metal_only_attenuates_exact_paths() {
        let loss = LossModel {
            l_dc_db: 0.0,
            l_m_db: 0.2,
            l_p_db_per_cm: 0.0,
            l_mzi_cm: 0.0,
            kappa1: 0.5,
            kappa2: 0.5,
        };
        let m = db_to_amplitude(Db(0.2)).unwrap();
        let p = PhasePair::new(1.3, 0.7).unwrap();
        let t = lossy_mzi(p, &loss).unwrap();
        let e_th = Complex::from_polar(1.0, p.theta);
        let e_ph = Complex::from_polar(1.0, p.phi);
        let half = Complex::new(0.5, 0.0);
        let mc = Complex::new(m, 0.0);
        // phi input arm carries m, theta upper arm carries m
        let expect00 = mc * e_ph * (mc * e_th - 1.0) * half;
        let expect11 = (Complex::new(1.0, 0.0) - mc * e_th) * half;
        assert!((t[(0, 0)] - expect00).norm() < 1e-12);
        assert!((t[(1, 1)] - expect11).norm() < 1e-12);
    }

    #[test]
    fn crosstalk_sampler_endpoints() {
        let model = CrosstalkModel { sigma_frac: 0.0, ..Default::default() };
        let mut rng = SeededRng::new(0);
        let x0 = sample_crosstalk(0.0, &model, &mut rng).unwrap();
        assert!((x0 - 10f64.powf(-1.8)).abs() < 1e-12); // X_C = -18 dB
        let xpi = sample_crosstalk(PI, &model, &mut rng).unwrap();
        assert!((xpi - 10f64.powf(-2.5)).abs() < 1e-12); // X_B = -25 dB
        assert!((model.mean_db(PI / 2.0) + 21.5).abs() < 1e-12);
        let off = CrosstalkModel::disabled();
        assert_eq!(sample_crosstalk(1.0, &off, &mut rng).unwrap(), 0.0);
    }

    #[test]
    fn noisy_mzi_limits() {
        let loss = LossModel::default();
        let p = PhasePair::new(0.9, 4.0).unwrap();
        let t = lossy_mzi(p, &loss).unwrap();
        for mix in [XtalkMix::FieldCoefficient, XtalkMix::PowerFraction] {
            let one = Complex::new(1.0, 0.0);
            let n0 = noisy_mzi_mixed(p, &loss, 0.0, mix, one).unwrap();
            assert!((n0 - t).iter().all(|c| c.norm() < 1e-12));
            let n1 = noisy_mzi_mixed(p, &loss, 1.0, mix, one).unwrap();
            assert!((n1[(0, 0)] - t[(1, 0)]).norm() < 1e-12);
            assert!((n1[(1, 1)] - t[(0, 1)]).norm() < 1e-12);
        }
        assert!(noisy_mzi(p, &loss, 1.5).is_err());
    }

    #[test]
    fn noisy_mzi_dominant_port_monotone() {
        let loss = LossModel::default();
        let p = PhasePair::BAR; // dominant path I2 -> O2
        let input = nalgebra::Vector2::new(Complex::new(0.0, 0.0), Complex::new(1.0, 0.0));
        let mut last = f64::INFINITY;
        for k in 0..=10 {
            let x = 0.05 * k as f64;
            let t = noisy_mzi(p, &loss, x).unwrap();
            let out = t * input;
            let dominant = out[1].norm_sqr();
            assert!(dominant <= last + 1e-12, "x={x}");
            last = dominant;
        }
    }

    proptest! {
        #[test]
        fn ideal_mzi_unitary(theta in 0.0..PI, phi in 0.0..(2.0*PI)) {
            let t = ideal_mzi(PhasePair::new(theta, phi).unwrap());
            prop_assert!(unitarity_deviation(&to_dmatrix(&t)) < 1e-12);
        }

        #[test]
        fn lossy_mzi_passive(theta in 0.0..PI, phi in 0.0..(2.0*PI),
                             ldc in 0.0..1.0f64, lm in 0.0..1.0f64, lp in 0.0..5.0f64) {
            let loss = LossModel {
                l_dc_db: ldc, l_m_db: lm, l_p_db_per_cm: lp,
                l_mzi_cm: 0.03, kappa1: 0.5, kappa2: 0.5,
            };
            let t = lossy_mzi(PhasePair::new(theta, phi).unwrap(), &loss).unwrap();
            let sv = to_dmatrix(&t).svd(false, false);
            let smax = sv.singular_values.max();
            prop_assert!(smax <= 1.0 + 1e-12);
        }

        #[test]
        fn sampler_zero_sigma_linear_in_theta(theta in 0.0..PI) {
            let model = CrosstalkModel { sigma_frac: 0.0, ..Default::default() };
            let mut rng = SeededRng::new(3);
            let x = sample_crosstalk(theta, &model, &mut rng).unwrap();
            let expect_db = model.mean_db(theta);
            prop_assert!((10.0 * x.log10() - expect_db).abs() < 1e-9);
        }
    }
}
