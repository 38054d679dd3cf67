//! Physical constants and unit conversions.

/// Reduced Planck constant in meV·ps.
pub const HBAR: f64 = 0.6582119569;

/// ħ²/m_e in meV·μm², from ħc = 197.3269804 meV·μm and m_e c² = 510998.95 keV.
pub const HBAR2_OVER_ELECTRON_MASS: f64 = 197.3269804 * 197.3269804 / 510_998_950.0;

/// Converts a mass given in electron masses to ħ²/(meV·μm²).
pub fn mass_from_electron_masses(m_over_me: f64) -> f64 {
    m_over_me / HBAR2_OVER_ELECTRON_MASS
}

/// Inverse of [`mass_from_electron_masses`].
pub fn mass_to_electron_masses(mass: f64) -> f64 {
    mass * HBAR2_OVER_ELECTRON_MASS
}

/// Energy in meV to angular frequency in ps⁻¹.
#[inline]
pub fn mev_to_per_ps(e: f64) -> f64 {
    e / HBAR
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn electron_mass_round_trip() {
        let m = mass_from_electron_masses(1e-4);
        assert!((mass_to_electron_masses(m) - 1e-4).abs() < 1e-18);
        // ħ²/m_e ≈ 7.62e-5 meV·μm²
        assert!((HBAR2_OVER_ELECTRON_MASS - 7.61996e-5).abs() < 1e-9);
    }
}
