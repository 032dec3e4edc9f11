//! Well descriptions, unit conversion and the piecewise potential.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const EV_PER_JOULE: f64 = 6.241_509_074_460_76e18;
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
pub const ANGSTROM: f64 = 1e-10;

/// A well in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionalWell {
    pub v1_joule: f64,
    pub v2_joule: f64,
    pub half_width_m: f64,
    pub ramp_m: f64,
    pub mass_kg: f64,
    pub hbar: f64,
}

impl DimensionalWell {
    /// Electron in a well given in eV and angstrom.
    pub fn electron_ev_angstrom(v1_ev: f64, v2_ev: f64, half_width_a: f64, ramp_a: f64) -> Self {
        DimensionalWell {
            v1_joule: v1_ev / EV_PER_JOULE,
            v2_joule: v2_ev / EV_PER_JOULE,
            half_width_m: half_width_a * ANGSTROM,
            ramp_m: ramp_a * ANGSTROM,
            mass_kg: ELECTRON_MASS,
            hbar: HBAR,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason: &str| Err(Error::Validation { field, reason: reason.to_string() });
        if !(self.half_width_m > 0.0) || !self.half_width_m.is_finite() {
            return bad("half_width_m", "must be positive");
        }
        if !(self.ramp_m >= 0.0) || !self.ramp_m.is_finite() {
            return bad("ramp_m", "must be non-negative");
        }
        if !(self.v2_joule > 0.0) || !self.v2_joule.is_finite() {
            return bad("v2_joule", "must be positive");
        }
        if !(self.v1_joule >= self.v2_joule) || !self.v1_joule.is_finite() {
            return bad("v1_joule", "must be at least v2_joule");
        }
        if !(self.mass_kg > 0.0) || !self.mass_kg.is_finite() {
            return bad("mass_kg", "must be positive");
        }
        if !(self.hbar > 0.0) || !self.hbar.is_finite() {
            return bad("hbar", "must be positive");
        }
        Ok(())
    }

    /// Energy scale hbar^2 / (2 m L^2) in joules; beta times this is the energy.
    pub fn energy_unit(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass_kg * self.half_width_m * self.half_width_m)
    }
}

/// The nondimensional triplet (v1, v2, lambda).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellSpec {
    pub v1: f64,
    pub v2: f64,
    pub lambda: f64,
}

impl WellSpec {
    pub fn new(v1: f64, v2: f64, lambda: f64) -> Result<Self> {
        let w = WellSpec { v1, v2, lambda };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v2 > 0.0) || !self.v2.is_finite() {
            return Err(Error::Validation { field: "v2", reason: format!("must be positive, got {}", self.v2) });
        }
        if !(self.v1 >= self.v2) || !self.v1.is_finite() {
            return Err(Error::Validation { field: "v1", reason: format!("must be >= v2, got {}", self.v1) });
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::Validation {
                field: "lambda",
                reason: format!("must be non-negative, got {}", self.lambda),
            });
        }
        Ok(())
    }

    pub fn is_symmetric(&self) -> bool {
        (self.v1 - self.v2).abs() <= 1e-12 * self.v1
    }

    /// Back to SI units for a given half-width, mass and hbar.
    pub fn dimensional(&self, half_width_m: f64, mass_kg: f64, hbar: f64) -> DimensionalWell {
        let unit = hbar * hbar / (2.0 * mass_kg * half_width_m * half_width_m);
        DimensionalWell {
            v1_joule: self.v1 * unit,
            v2_joule: self.v2 * unit,
            half_width_m,
            ramp_m: self.lambda * half_width_m,
            mass_kg,
            hbar,
        }
    }
}

impl fmt::Display for WellSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(v1={}, v2={}, lambda={})", self.v1, self.v2, self.lambda)
    }
}

pub fn nondimensionalize(dw: &DimensionalWell) -> Result<WellSpec> {
    dw.validate()?;
    let unit = dw.energy_unit();
    Ok(WellSpec { v1: dw.v1_joule / unit, v2: dw.v2_joule / unit, lambda: dw.ramp_m / dw.half_width_m })
}

/// The five zones, left to right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Zone {
    Left,
    LeftRamp,
    Center,
    RightRamp,
    Right,
}

impl Zone {
    pub const ALL: [Zone; 5] = [Zone::Left, Zone::LeftRamp, Zone::Center, Zone::RightRamp, Zone::Right];

    pub fn label(&self) -> &'static str {
        match self {
            Zone::Left => "1",
            Zone::LeftRamp => "1'",
            Zone::Center => "0",
            Zone::RightRamp => "2'",
            Zone::Right => "2",
        }
    }
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Potential v(xi). With lambda = 0 this is the square well.
pub fn potential_value(w: &WellSpec, xi: f64) -> f64 {
    let edge = 1.0 + w.lambda;
    if xi <= -edge {
        w.v1
    } else if xi < -1.0 {
        -w.v1 * (xi + 1.0) / w.lambda
    } else if xi <= 1.0 {
        0.0
    } else if xi < edge {
        w.v2 * (xi - 1.0) / w.lambda
    } else {
        w.v2
    }
}

/// Zone containing `xi`; a junction belongs to the zone on its left.
pub fn zone_of(w: &WellSpec, xi: f64) -> Zone {
    let edge = 1.0 + w.lambda;
    if xi <= -edge {
        Zone::Left
    } else if xi <= -1.0 {
        Zone::LeftRamp
    } else if xi <= 1.0 {
        Zone::Center
    } else if xi <= edge {
        Zone::RightRamp
    } else {
        Zone::Right
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reed_conversion() {
        let w = nondimensionalize(&DimensionalWell::electron_ev_angstrom(100.0, 100.0, 1.0, 1e-9)).unwrap();
        assert!((w.v1 - 26.2468).abs() < 1e-4);
        assert!((w.lambda - 1e-9).abs() < 1e-24);
        let w = nondimensionalize(&DimensionalWell::electron_ev_angstrom(50.0, 50.0, 2.0, 0.0)).unwrap();
        assert!((w.v1 - 52.4936).abs() < 1e-3);
    }

    #[test]
    fn validation_names_field() {
        let mut dw = DimensionalWell::electron_ev_angstrom(1.0, 2.0, 1.0, 0.1);
        match nondimensionalize(&dw) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "v1_joule"),
            other => panic!("{other:?}"),
        }
        dw.v1_joule = 3.0 / EV_PER_JOULE;
        dw.mass_kg = -1.0;
        assert!(matches!(nondimensionalize(&dw), Err(Error::Validation { field: "mass_kg", .. })));
    }

    #[test]
    fn potential_branches() {
        let w = WellSpec { v1: 1.0, v2: 0.5, lambda: 1.0 };
        assert_eq!(potential_value(&w, 0.0), 0.0);
        assert_eq!(potential_value(&w, -2.0), 1.0);
        assert_eq!(potential_value(&w, 1.5), 0.25);
        assert_eq!(potential_value(&w, 2.0), 0.5);
        assert_eq!(potential_value(&w, -1.0), 0.0);
        assert_eq!(zone_of(&w, -5.0), Zone::Left);
        assert_eq!(zone_of(&w, -1.0), Zone::LeftRamp);
        assert_eq!(zone_of(&w, 1.0001), Zone::RightRamp);
        assert_eq!(zone_of(&w, 1.0), Zone::Center);
        assert_eq!(zone_of(&w, 2.0), Zone::RightRamp);
        assert_eq!(zone_of(&w, -2.0), Zone::Left);
    }
}
