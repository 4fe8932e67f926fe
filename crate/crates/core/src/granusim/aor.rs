use crate::domain::ParticleSpec;
use crate::{Error, Result};

/// Humidity at which the wetting terms saturate, ml.
const HUMIDITY_SATURATION_ML: f64 = 0.5;

/// Angle-of-repose hysteresis of a particle pile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AorParams {
    /// Surface angle at which the pile collapses, degrees.
    pub aor_upper: f64,
    /// Surface angle right after a collapse, degrees.
    pub aor_lower: f64,
    /// Fraction of the content that sticks to the walls and never flows.
    pub sticky_fraction: f64,
}

impl AorParams {
    pub fn new(aor_upper: f64, aor_lower: f64, sticky_fraction: f64) -> Result<Self> {
        let p = AorParams {
            aor_upper,
            aor_lower,
            sticky_fraction,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.aor_lower
            && self.aor_lower < self.aor_upper
            && self.aor_upper < 90.0
            && (0.0..1.0).contains(&self.sticky_fraction);
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "invalid angle-of-repose parameters {self:?}"
            )))
        }
    }

    /// Surface relaxation per collapse, degrees.
    pub fn collapse_drop(&self) -> f64 {
        self.aor_upper - self.aor_lower
    }
}

/// Angle of repose from particle properties.
///
/// Rougher (less spherical), smaller and wetter particles stand steeper;
/// irregular grains also relax further on each avalanche.
pub fn aor_model(particle: &ParticleSpec) -> AorParams {
    let roughness = 1.0 - particle.sphericity_psi;
    let wet = (particle.humidity_ml / HUMIDITY_SATURATION_ML).min(1.0);
    let aor_upper =
        20.0 + 25.0 * roughness + 8.0 * (-particle.diameter_dp / 5.0).exp() + 12.0 * wet;
    let aor_lower = aor_upper - (2.0 + 4.0 * roughness);
    AorParams {
        aor_upper,
        aor_lower,
        sticky_fraction: 0.8 * wet,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn particle(d: f64, psi: f64) -> ParticleSpec {
        ParticleSpec::new("p", d, psi, 0.0013).unwrap()
    }

    #[test]
    fn sphere_example() {
        let a = aor_model(&particle(10.0, 1.0));
        let expected = 20.0 + 8.0 * (-2.0f64).exp();
        assert!((a.aor_upper - expected).abs() < 1e-12);
        assert!((a.aor_upper - 21.08).abs() < 5e-3);
        assert!((a.aor_lower - 19.08).abs() < 5e-3);
        assert_eq!(a.sticky_fraction, 0.0);
    }

    #[test]
    fn irregular_example() {
        let a = aor_model(&particle(2.0, 0.6));
        assert!((a.aor_upper - 35.36).abs() < 5e-3);
        assert!((a.aor_lower - (a.aor_upper - 3.6)).abs() < 1e-12);
    }

    #[test]
    fn monotone_in_sphericity() {
        let mut last = f64::INFINITY;
        for i in 1..=100 {
            let a = aor_model(&particle(3.0, i as f64 / 100.0)).aor_upper;
            assert!(a <= last);
            last = a;
        }
    }

    #[test]
    fn humidity_saturates() {
        let p = particle(0.5, 0.9);
        let dry = aor_model(&p);
        let wet = aor_model(&p.clone().with_humidity(0.5).unwrap());
        let soaked = aor_model(&p.with_humidity(2.0).unwrap());
        assert!((wet.aor_upper - dry.aor_upper - 12.0).abs() < 1e-12);
        assert_eq!(wet, soaked);
        assert!((wet.sticky_fraction - 0.8).abs() < 1e-15);
        wet.validate().unwrap();
    }

    #[test]
    fn whole_domain_is_valid() {
        for d in [0.1, 1.0, 12.0] {
            for psi in [0.3, 0.55, 1.0] {
                for h in [0.0, 0.25, 0.5] {
                    aor_model(&particle(d, psi).with_humidity(h).unwrap())
                        .validate()
                        .unwrap();
                }
            }
        }
    }
}
