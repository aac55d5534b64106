//! Nonlinear activation units.
//!
//! The optoelectronic NAU taps a fraction alpha of the incoming optical
//! power onto a photodetector; the amplified photocurrent drives an
//! MZI-based intensity modulator on the remaining power, producing a
//! ReLU-like response when the bias voltage equals V_pi. The nonideal model
//! adds PD sensitivity cutoff, shot noise, dark current, and modulator
//! loss/crosstalk.
//!
//! Unit convention: field amplitudes are in sqrt(mW); the electrical chain
//! operates in SI units, so detected power converts to watts before meeting
//! responsivity and TIA gain.

use crate::matrix::OpticalField;
use crate::units::db_to_amplitude;
use crate::{Complex, Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const ELECTRON_CHARGE: f64 = 1.60e-19;
const MW_TO_W: f64 = 1e-3;

/// Shot-noise formula selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ShotNoiseForm {
    /// sqrt(2 q I_in^2 R B), the form used by the activation model here.
    #[default]
    SquaredCurrent,
    /// Textbook sqrt(2 q I B), for sensitivity studies.
    Textbook,
    Off,
}

/// Optoelectronic NAU parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NauParams {
    /// Tap ratio of the input directional coupler.
    pub alpha: f64,
    /// Modulator pi voltage, volts.
    pub v_pi: f64,
    /// Bias voltage, volts (ReLU-like response at v_b = v_pi).
    pub v_b: f64,
    /// TIA gain, ohms.
    pub g_tia: f64,
    /// PD responsivity, A/W.
    pub resp: f64,
    /// PD bandwidth, Hz.
    pub bandwidth: f64,
    /// PD dark current, amperes.
    pub i_dark: f64,
    /// PD sensitivity, dBm; detected power at or below it reads zero.
    pub s_pd_dbm: f64,
    /// Modulator insertion loss, dB.
    pub l_mod_db: f64,
    /// Modulator crosstalk coefficient (linear fraction).
    pub x_mod: f64,
    /// Phase of the modulator crosstalk term, radians.
    pub theta_mod: f64,
    pub shot: ShotNoiseForm,
}

impl Default for NauParams {
    fn default() -> Self {
        NauParams {
            alpha: 0.1,
            v_pi: 10.0,
            v_b: 10.0,
            g_tia: 100.0,
            resp: 1.0,
            bandwidth: 42.5e9,
            i_dark: 3.5e-6,
            s_pd_dbm: -11.7,
            l_mod_db: 0.0,
            x_mod: 0.0,
            theta_mod: 0.0,
            shot: ShotNoiseForm::SquaredCurrent,
        }
    }
}

impl NauParams {
    /// Every nonideality removed: lossless modulator, perfect PD.
    pub fn idealized() -> Self {
        NauParams {
            i_dark: 0.0,
            s_pd_dbm: f64::NEG_INFINITY,
            shot: ShotNoiseForm::Off,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::invalid("alpha must lie in [0,1]"));
        }
        if self.v_pi <= 0.0 {
            return Err(Error::invalid("v_pi must be positive"));
        }
        for (name, v) in [
            ("g_tia", self.g_tia),
            ("resp", self.resp),
            ("bandwidth", self.bandwidth),
            ("i_dark", self.i_dark),
            ("l_mod_db", self.l_mod_db),
            ("x_mod", self.x_mod),
        ] {
            if v < 0.0 {
                return Err(Error::invalid(format!("{name} must be >= 0")));
            }
        }
        Ok(())
    }

    fn phase_arg(&self, v_h: f64) -> f64 {
        PI * self.v_b / (2.0 * self.v_pi) + PI * v_h / (2.0 * self.v_pi)
    }
}

/// Ideal electro-optic activation: tapped power drives the modulator
/// without any detector or modulator imperfections.
pub fn ideal_nau(o: Complex, p: &NauParams) -> Result<Complex> {
    p.validate()?;
    if !o.re.is_finite() || !o.im.is_finite() {
        return Err(Error::invalid("non-finite NAU input"));
    }
    let p_w = o.norm_sqr() * MW_TO_W;
    let v_h = p.g_tia * p.resp * p.alpha * p_w; // identity conditioning
    let arg = p.phase_arg(v_h);
    let envelope = Complex::from_polar(1.0, -arg) * arg.cos();
    Ok(Complex::i() * o * Complex::new((1.0 - p.alpha).sqrt(), 0.0) * envelope)
}

/// Nonideal activation per the optoelectronic chain: OIU loss and crosstalk
/// fold into the input, the PD applies sensitivity/shot/dark effects, and
/// the modulator contributes its own loss and crosstalk.
///
/// `oiu_il` and `g` are linear power coefficients; `xp` is the crosstalk
/// field (phase already applied) reaching the NAU input.
pub fn nonideal_nau(
    o: Complex,
    p: &NauParams,
    oiu_il: f64,
    g: f64,
    xp: Complex,
) -> Result<Complex> {
    p.validate()?;
    if !(o.re.is_finite() && o.im.is_finite() && xp.re.is_finite() && xp.im.is_finite()) {
        return Err(Error::invalid("non-finite NAU input"));
    }
    if oiu_il < 0.0 || g < 0.0 {
        return Err(Error::invalid("power coefficients must be >= 0"));
    }
    // Eq.-style input composition: power coefficients act on the field.
    let o_prime = Complex::new(oiu_il * g, 0.0) * (o + xp);
    let p_mw = o_prime.norm_sqr();
    let p_w = p_mw * MW_TO_W;

    // PD chain; zero photocurrent at or below the sensitivity floor.
    let sens_mw = if p.s_pd_dbm == f64::NEG_INFINITY {
        0.0
    } else {
        10f64.powf(p.s_pd_dbm / 10.0)
    };
    let i_pd = if p_mw <= sens_mw {
        0.0
    } else {
        let i_in = p.resp * p.alpha * p_w;
        let shot = match p.shot {
            ShotNoiseForm::SquaredCurrent => {
                (2.0 * ELECTRON_CHARGE * i_in * i_in * p.resp * p.bandwidth).sqrt()
            }
            ShotNoiseForm::Textbook => (2.0 * ELECTRON_CHARGE * i_in * p.bandwidth).sqrt(),
            ShotNoiseForm::Off => 0.0,
        };
        i_in + shot + p.i_dark
    };
    let v_h = p.g_tia * i_pd;
    let delta_phi = PI * (p.v_b + v_h) / p.v_pi;

    let l_mod = db_to_amplitude(crate::units::Db(p.l_mod_db))?;
    let keep = Complex::new(l_mod * (1.0 - p.alpha).sqrt(), 0.0);
    let main = Complex::i()
        * keep
        * o_prime
        * Complex::from_polar(1.0, -delta_phi / 2.0)
        * (delta_phi / 2.0).cos();
    let leak = keep * o_prime * Complex::from_polar(p.x_mod, p.theta_mod);
    Ok(main + leak)
}

/// Elementwise complex ReLU convention: pass the amplitude when its real
/// part is positive, zero otherwise.
pub fn plain_relu(o: Complex) -> Complex {
    if o.re > 0.0 {
        o
    } else {
        Complex::new(0.0, 0.0)
    }
}

/// Which activation a network layer applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum NauHandle {
    Identity,
    #[default]
    PlainRelu,
    IdealEq6(NauParams),
    NonIdeal(NauParams),
}

impl NauHandle {
    pub fn apply(&self, field: &OpticalField) -> Result<OpticalField> {
        let amps = match self {
            NauHandle::Identity => field.amps.clone(),
            NauHandle::PlainRelu => field.amps.map(plain_relu),
            NauHandle::IdealEq6(p) => {
                let mut out = field.amps.clone();
                for a in out.iter_mut() {
                    *a = ideal_nau(*a, p)?;
                }
                out
            }
            NauHandle::NonIdeal(p) => {
                let mut out = field.amps.clone();
                for a in out.iter_mut() {
                    *a = nonideal_nau(*a, p, 1.0, 1.0, Complex::new(0.0, 0.0))?;
                }
                out
            }
        };
        Ok(OpticalField::new(amps))
    }
}

/// Mean-square deviation of the nonideal response from the ideal one over a
/// power sweep, averaged over random crosstalk phases. Inputs sweep real
/// amplitudes from 0 to `max_amp` (sqrt(mW)).
pub fn nau_response_mse(
    p: &NauParams,
    oiu_il: f64,
    g: f64,
    xp_power_mw: f64,
    max_amp: f64,
    sweep_points: usize,
    phase_trials: usize,
    rng: &mut crate::rng::SeededRng,
) -> Result<f64> {
    let ideal_params = NauParams::idealized();
    let mut total = 0.0;
    let mut count = 0usize;
    for k in 0..sweep_points {
        let amp = max_amp * k as f64 / (sweep_points - 1) as f64;
        let o = Complex::new(amp, 0.0);
        let reference = ideal_nau(o, &ideal_params)?;
        for _ in 0..phase_trials {
            let theta_err = rng.uniform(0.0, 2.0 * PI);
            let xp = Complex::from_polar(xp_power_mw.sqrt(), -theta_err);
            let actual = nonideal_nau(o, p, oiu_il, g, xp)?;
            total += (actual - reference).norm_sqr();
            count += 1;
        }
    }
    Ok(total / count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    #[test]
    fn ideal_nau_zero_input_zero_output() {
        let p = NauParams::default();
        let out = ideal_nau(Complex::new(0.0, 0.0), &p).unwrap();
        assert!(out.norm() < 1e-15);
    }

    #[test]
    fn ideal_nau_high_transmission_region() {
        // At the drive level where the total phase argument reaches pi the
        // cosine envelope returns to full magnitude.
        let p = NauParams::default();
        // arg = pi/2 + pi/2 * (alpha G R P)/v_pi = pi  =>  P = v_pi/(alpha G R)
        let p_w = p.v_pi / (p.alpha * p.g_tia * p.resp);
        let amp = (p_w / MW_TO_W).sqrt();
        let o = Complex::new(amp, 0.0);
        let out = ideal_nau(o, &p).unwrap();
        assert!((out.norm() - (1.0 - p.alpha).sqrt() * o.norm()).abs() < 1e-9);
    }

    #[test]
    fn ideal_nau_relu_knee() {
        // Below threshold the output is ~0; past it, transmission grows
        // monotonically toward linear.
        let p = NauParams::default();
        let mut last = 0.0;
        let mut ratios = Vec::new();
        for k in 0..=40 {
            let p_w = p.v_pi / (p.alpha * p.g_tia * p.resp) * k as f64 / 40.0;
            let amp = (p_w / MW_TO_W).sqrt();
            let out = ideal_nau(Complex::new(amp, 0.0), &p).unwrap().norm();
            assert!(out >= last - 1e-9, "magnitude must grow along the knee");
            last = out;
            if amp > 0.0 {
                ratios.push(out / amp);
            }
        }
        assert!(ratios[0] < 0.05, "deep suppression below threshold");
        assert!(ratios.last().unwrap() > &(0.9 * (1.0 - p.alpha).sqrt()));
    }

    #[test]
    fn sensitivity_cutoff_zeroes_output() {
        let p = NauParams { i_dark: 0.0, x_mod: 0.0, ..Default::default() };
        // -20 dBm < -11.7 dBm sensitivity
        let o = Complex::new(0.1, 0.0);
        let out = nonideal_nau(o, &p, 1.0, 1.0, Complex::new(0.0, 0.0)).unwrap();
        assert!(out.norm() < 1e-15, "bias-only response is the cosine null");
    }

    #[test]
    fn nonideal_degenerates_to_ideal() {
        let p = NauParams::idealized();
        let mut rng = SeededRng::new(4);
        for _ in 0..50 {
            let o = Complex::new(rng.uniform(0.0, 50.0), rng.uniform(-10.0, 10.0));
            let a = nonideal_nau(o, &p, 1.0, 1.0, Complex::new(0.0, 0.0)).unwrap();
            let b = ideal_nau(o, &p).unwrap();
            assert!((a - b).norm() < 1e-10, "o={o}");
        }
    }

    #[test]
    fn photocurrent_monotone_above_threshold() {
        let p = NauParams::default();
        let mut last_out = f64::NEG_INFINITY;
        let mut above = false;
        for k in 1..=60 {
            let amp = k as f64; // sqrt(mW), well past sensitivity
            let o = Complex::new(amp, 0.0);
            let p_mw = o.norm_sqr();
            if p_mw > 10f64.powf(p.s_pd_dbm / 10.0) {
                let i_in = p.resp * p.alpha * p_mw * MW_TO_W;
                assert!(i_in > last_out);
                last_out = i_in;
                above = true;
            }
        }
        assert!(above);
    }

    #[test]
    fn plain_relu_cases() {
        assert_eq!(plain_relu(Complex::new(1.0, 0.0)), Complex::new(1.0, 0.0));
        assert_eq!(plain_relu(Complex::new(-1.0, 0.5)), Complex::new(0.0, 0.0));
        assert_eq!(plain_relu(Complex::new(0.0, 0.0)), Complex::new(0.0, 0.0));
        let z = Complex::new(0.3, -0.7);
        assert_eq!(plain_relu(z), z);
    }

    #[test]
    fn mse_monotone_in_crosstalk_power() {
        let p = NauParams::default();
        let mut rng = SeededRng::new(8);
        let mut last = 0.0;
        for xp_mw in [0.0, 1.0, 10.0, 100.0] {
            let mse = nau_response_mse(&p, 1.0, 1.0, xp_mw, 35.0, 40, 200, &mut rng).unwrap();
            assert!(mse >= last, "xp={xp_mw}: {mse} < {last}");
            last = mse;
        }
    }
}
