use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Weak,
    Dsme,
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weak" => Ok(Variant::Weak),
            "dsme" => Ok(Variant::Dsme),
            other => Err(Error::InvalidParameter(format!("unknown variant '{other}' (weak|dsme)"))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Weak => "weak",
            Variant::Dsme => "dsme",
        })
    }
}

/// Physical rates in units with hbar = 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega: f64,
    pub nu: f64,
    pub chi: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub mbar: f64,
    #[serde(default)]
    pub variant: Variant,
}

impl SystemParams {
    /// The weak-coupling desk set used throughout the tests.
    pub fn desk() -> Self {
        SystemParams { omega: 5.0, nu: 1.0, chi: 0.05, kappa: 0.3, gamma: 0.02, mbar: 0.5, variant: Variant::Weak }
    }

    /// The ultra-strong coupling desk set.
    pub fn desk_dsme() -> Self {
        SystemParams { chi: 0.5, variant: Variant::Dsme, ..Self::desk() }
    }

    /// Takes the bath occupation from a temperature in frequency units
    /// (`k_B = hbar = 1`).
    pub fn with_temperature(self, temperature: f64) -> Result<Self> {
        if !(temperature >= 0.0) || !temperature.is_finite() {
            return Err(Error::InvalidParameter(format!("temperature must be finite and >= 0, got {temperature}")));
        }
        let mbar = if temperature == 0.0 { 0.0 } else { 1.0 / ((self.nu / temperature).exp() - 1.0) };
        Ok(SystemParams { mbar, ..self })
    }

    pub fn with_variant(self, variant: Variant) -> Self {
        SystemParams { variant, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.omega, self.nu, self.chi, self.kappa, self.gamma, self.mbar];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("all rates must be finite".into()));
        }
        if self.nu <= 0.0 {
            return Err(Error::InvalidParameter(format!("nu must be positive, got {}", self.nu)));
        }
        for (name, v) in [("chi", self.chi), ("kappa", self.kappa), ("gamma", self.gamma), ("mbar", self.mbar)] {
            if v < 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// `1 / ln((mbar + 1) / mbar)`, which tends to 0 as `mbar -> 0`.
    pub fn inverse_log_occupation(&self) -> f64 {
        if self.mbar == 0.0 {
            warn_zero_temperature();
            return 0.0;
        }
        1.0 / (1.0 / self.mbar).ln_1p()
    }

    /// Rate of the `D[a^dag a]` term of the dressed-state model.
    pub fn dsme_dephasing(&self) -> f64 {
        match self.variant {
            Variant::Weak => 0.0,
            Variant::Dsme => 4.0 * self.chi * self.chi * self.gamma * self.inverse_log_occupation() / (self.nu * self.nu),
        }
    }
}

fn warn_zero_temperature() {
    static ONCE: std::sync::Once = std::sync::Once::new();
    ONCE.call_once(|| {
        log::warn!("dsme at mbar = 0: dephasing rate and Re(epsilon) set to their zero-temperature limit 0");
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(SystemParams::desk().validate().is_ok());
        assert!(SystemParams { nu: 0.0, ..SystemParams::desk() }.validate().is_err());
        assert!(SystemParams { kappa: -0.1, ..SystemParams::desk() }.validate().is_err());
        assert!(SystemParams { gamma: f64::NAN, ..SystemParams::desk() }.validate().is_err());
    }

    #[test]
    fn temperature_constructor() {
        let p = SystemParams::desk().with_temperature(1.0 / 3f64.ln()).unwrap();
        assert!((p.mbar - 0.5).abs() < 1e-14);
        assert_eq!(SystemParams::desk().with_temperature(0.0).unwrap().mbar, 0.0);
    }

    #[test]
    fn dephasing_limits() {
        let p = SystemParams::desk_dsme();
        let want = 4.0 * 0.25 * 0.02 / 3f64.ln();
        assert!((p.dsme_dephasing() - want).abs() < 1e-15);
        assert_eq!(SystemParams { mbar: 0.0, ..p }.dsme_dephasing(), 0.0);
        assert_eq!(SystemParams::desk().dsme_dephasing(), 0.0);
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("dsme".parse::<Variant>().unwrap(), Variant::Dsme);
        assert!("strong".parse::<Variant>().is_err());
        assert_eq!(Variant::Weak.to_string(), "weak");
    }
}
