//! dB / dBm unit conventions.
//!
//! All conversions use the field-amplitude convention: a loss of `x` dB
//! multiplies a field amplitude by `10^(-x/20)` and a power by `10^(-x/10)`.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// A relative power ratio in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Db(pub f64);

/// An absolute optical power in dBm (referenced to 1 mW).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dbm(pub f64);

impl Db {
    /// Linear power ratio `10^(dB/10)`.
    pub fn power(self) -> f64 {
        10f64.powf(self.0 / 10.0)
    }

    /// Linear amplitude ratio `10^(dB/20)`.
    pub fn amplitude(self) -> f64 {
        10f64.powf(self.0 / 20.0)
    }

    pub fn from_power(ratio: f64) -> Db {
        Db(10.0 * ratio.log10())
    }
}

impl Dbm {
    /// Explicit zero-power sentinel.
    pub const NEG_INF: Dbm = Dbm(f64::NEG_INFINITY);

    pub fn from_mw(mw: f64) -> Dbm {
        if mw <= 0.0 {
            Dbm::NEG_INF
        } else {
            Dbm(10.0 * mw.log10())
        }
    }

    pub fn mw(self) -> f64 {
        if self.0 == f64::NEG_INFINITY {
            0.0
        } else {
            10f64.powf(self.0 / 10.0)
        }
    }

    pub fn is_neg_inf(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

/// Amplitude factor for a stated attenuation: `10^(-loss/20)`.
///
/// Losses are given as positive dB attenuations; gain belongs to the OGU and
/// is rejected here.
pub fn db_to_amplitude(loss: Db) -> Result<f64> {
    if !loss.0.is_finite() || loss.0 < 0.0 {
        return Err(Error::invalid(format!(
            "loss must be a finite attenuation >= 0 dB, got {}",
            loss.0
        )));
    }
    Ok(10f64.powf(-loss.0 / 20.0))
}

/// Power factor for a stated attenuation: `10^(-loss/10)`.
pub fn db_to_power_loss(loss: Db) -> Result<f64> {
    db_to_amplitude(loss).map(|a| a * a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn db_to_amplitude_cases() {
        assert_eq!(db_to_amplitude(Db(0.0)).unwrap(), 1.0);
        assert!((db_to_amplitude(Db(20.0)).unwrap() - 0.1).abs() < 1e-15);
        // 10^(-0.005), evaluated independently
        assert!((db_to_amplitude(Db(0.1)).unwrap() - 0.9885530946569389).abs() < 1e-12);
        assert!(db_to_amplitude(Db(-1.0)).is_err());
        assert!(db_to_amplitude(Db(f64::NAN)).is_err());
    }

    #[test]
    fn amplitude_reduces_power_by_exact_db() {
        let a = db_to_amplitude(Db(3.7)).unwrap();
        let out_dbm = Dbm::from_mw(a * a * 1.0);
        assert!((out_dbm.0 - (-3.7)).abs() < 1e-12);
    }

    #[test]
    fn dbm_sentinel() {
        assert!(Dbm::from_mw(0.0).is_neg_inf());
        assert_eq!(Dbm::NEG_INF.mw(), 0.0);
        assert!((Dbm::from_mw(1.0).0).abs() < 1e-15);
        assert!((Dbm::from_mw(0.01).0 + 20.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn round_trip_below_1e12(db in -100.0f64..100.0) {
            let p = Db(db).power();
            let back = Db::from_power(p).0;
            let rel = ((back - db) / db.abs().max(1.0)).abs();
            prop_assert!(rel < 1e-12);
        }
    }
}
