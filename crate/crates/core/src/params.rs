use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical parameters of the two-photon Dicke Hamiltonian.
///
/// The pseudospin length is stored doubled (`two_j = 2j`, equal to the
/// number of atoms) so half-integer `j` is represented exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega: f64,
    pub omega0: f64,
    pub gamma: f64,
    pub two_j: u32,
    pub n_max: usize,
}

impl ModelParams {
    pub fn new(omega: f64, omega0: f64, gamma: f64, two_j: u32, n_max: usize) -> Result<Self> {
        let params = ModelParams {
            omega,
            omega0,
            gamma,
            two_j,
            n_max,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason: &str| {
            Err(Error::InvalidParams {
                field,
                reason: reason.to_string(),
            })
        };
        if !self.omega.is_finite() || self.omega <= 0.0 {
            return bad("omega", "must be finite and > 0");
        }
        if !self.omega0.is_finite() {
            return bad("omega0", "must be finite");
        }
        if !self.gamma.is_finite() || self.gamma < 0.0 {
            return bad("gamma", "must be finite and >= 0");
        }
        if self.two_j < 1 {
            return bad("j", "must be >= 1/2");
        }
        if self.n_max < 2 {
            return bad("nmax", "must be >= 2");
        }
        Ok(())
    }

    /// Fails unless the coupling lies below the spectral-collapse point `omega / 2`.
    pub fn require_normal_phase(&self) -> Result<()> {
        self.validate()?;
        if self.gamma >= 0.5 * self.omega {
            // m_x = ±j is the first subspace to collapse.
            return Err(Error::SpectralCollapse {
                lambda: self.gamma / self.omega,
                gamma_collapse: 0.5 * self.omega,
            });
        }
        Ok(())
    }

    pub fn j(&self) -> f64 {
        0.5 * self.two_j as f64
    }

    /// Number of atoms, `N = 2j`.
    pub fn n_atoms(&self) -> f64 {
        self.two_j as f64
    }

    pub fn spin_dim(&self) -> usize {
        self.two_j as usize + 1
    }

    pub fn full_dim(&self) -> usize {
        (self.n_max + 1) * self.spin_dim()
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_fields() {
        assert!(ModelParams::new(0.0, 1.0, 0.1, 2, 10).is_err());
        assert!(ModelParams::new(1.0, 1.0, -0.1, 2, 10).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.1, 0, 10).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.1, 2, 1).is_err());
        assert!(ModelParams::new(1.0, f64::NAN, 0.1, 2, 10).is_err());
    }

    #[test]
    fn normal_phase_guard() {
        let p = ModelParams::new(1.0, 1.0, 0.49, 3, 10).unwrap();
        assert!(p.require_normal_phase().is_ok());
        let p = ModelParams::new(1.0, 1.0, 0.5, 3, 10).unwrap();
        assert!(matches!(
            p.require_normal_phase(),
            Err(Error::SpectralCollapse { .. })
        ));
    }

    #[test]
    fn dimensions() {
        let p = ModelParams::new(1.0, 1.0, 0.1, 30, 200).unwrap();
        assert_eq!(p.full_dim(), 6231);
        assert_eq!(p.j(), 15.0);
        let p = ModelParams::new(1.0, 1.0, 0.1, 50, 2000).unwrap();
        assert_eq!(p.full_dim(), 102051);
    }
}
