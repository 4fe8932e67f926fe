//! Particle and container definitions, unit conversions and the bulk
//! property relations (equivalent diameter, sphericity, shape class,
//! content mass).
//!
//! Public quantities are in millimetres, grams and millilitres. Torque and
//! force math elsewhere converts to SI through the helpers in [`si`].

use std::f64::consts::PI;
use std::fmt;

use crate::{Error, Result};

/// Conversions from the public mm/g/ml units to SI.
pub mod si {
    pub fn mm(v: f64) -> f64 {
        v * 1e-3
    }

    pub fn grams(v: f64) -> f64 {
        v * 1e-3
    }

    pub fn to_grams(kg: f64) -> f64 {
        kg * 1e3
    }

    /// mm³ to ml.
    pub fn ml(mm3: f64) -> f64 {
        mm3 * 1e-3
    }
}

pub const DEFAULT_PACKING_FRACTION: f64 = 0.6;

/// Intrinsic properties of one particle type.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSpec {
    pub name: String,
    /// Equivalent-sphere diameter, mm.
    pub diameter_dp: f64,
    pub sphericity_psi: f64,
    /// Material density of a single particle, g/mm³.
    pub material_density: f64,
    pub packing_fraction: f64,
    /// Added water, ml. Zero for dry particles.
    pub humidity_ml: f64,
}

impl ParticleSpec {
    /// Dry particle with the default packing fraction.
    pub fn new(
        name: impl Into<String>,
        diameter_dp: f64,
        sphericity_psi: f64,
        material_density: f64,
    ) -> Result<Self> {
        let spec = ParticleSpec {
            name: name.into(),
            diameter_dp,
            sphericity_psi,
            material_density,
            packing_fraction: DEFAULT_PACKING_FRACTION,
            humidity_ml: 0.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_humidity(mut self, humidity_ml: f64) -> Result<Self> {
        self.humidity_ml = humidity_ml;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.diameter_dp > 0.0
            && self.diameter_dp.is_finite()
            && self.sphericity_psi > 0.0
            && self.sphericity_psi <= 1.0
            && self.material_density > 0.0
            && self.material_density.is_finite()
            && self.packing_fraction > 0.0
            && self.packing_fraction < 1.0
            && self.humidity_ml >= 0.0
            && self.humidity_ml.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid particle spec {self:?}")))
        }
    }

    /// Volume of one particle, mm³.
    pub fn particle_volume(&self) -> f64 {
        sphere_volume(self.diameter_dp)
    }

    /// Mass of one particle, g.
    pub fn particle_mass(&self) -> f64 {
        self.material_density * self.particle_volume()
    }

    /// Bulk density of the packed content, g/mm³.
    pub fn bulk_density(&self) -> f64 {
        self.material_density * self.packing_fraction
    }

    pub fn shape_class(&self) -> Result<ShapeClass> {
        shape_class(self.diameter_dp, self.sphericity_psi)
    }
}

/// Cuboid bottle held by a two-finger grasp on its side walls.
///
/// The grasp point lies on the bottle axis at `grasp_height` above the inner
/// base; tilt rotates the bottle about that point.
#[derive(Debug, Clone, PartialEq)]
pub struct ContainerSpec {
    /// Inner width along the tilt plane, mm.
    pub inner_width: f64,
    pub inner_depth: f64,
    pub inner_height: f64,
    /// Empty container mass, g.
    pub container_mass_mc: f64,
    pub grasp_height: f64,
    /// m/s².
    pub gravity_g: f64,
}

impl Default for ContainerSpec {
    fn default() -> Self {
        ContainerSpec {
            inner_width: 60.0,
            inner_depth: 60.0,
            inner_height: 130.0,
            container_mass_mc: 50.0,
            grasp_height: 90.0,
            gravity_g: 9.81,
        }
    }
}

impl ContainerSpec {
    pub fn validate(&self) -> Result<()> {
        let lengths = [self.inner_width, self.inner_depth, self.inner_height];
        let ok = lengths.iter().all(|l| *l > 0.0 && l.is_finite())
            && self.grasp_height > 0.0
            && self.grasp_height < self.inner_height
            && self.container_mass_mc > 0.0
            && self.container_mass_mc.is_finite()
            && self.gravity_g > 0.0
            && self.gravity_g.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid container spec {self:?}")))
        }
    }

    /// Inner cross-section area, mm².
    pub fn cross_section(&self) -> f64 {
        self.inner_width * self.inner_depth
    }

    /// Volume in ml occupied by a fill of the given height.
    pub fn volume_ml(&self, height_mm: f64) -> f64 {
        si::ml(self.cross_section() * height_mm)
    }
}

/// A particle type filled to a given height.
#[derive(Debug, Clone, PartialEq)]
pub struct ContentFill {
    pub particle: ParticleSpec,
    /// Fill height H_p, mm.
    pub fill_height_hp: f64,
}

impl ContentFill {
    pub fn new(particle: ParticleSpec, fill_height_hp: f64) -> Self {
        ContentFill {
            particle,
            fill_height_hp,
        }
    }

    pub fn validate(&self, container: &ContainerSpec) -> Result<()> {
        self.particle.validate()?;
        container.validate()?;
        if !(self.fill_height_hp > 0.0 && self.fill_height_hp < container.inner_height) {
            return Err(Error::domain(format!(
                "fill height {} mm outside (0, {}) mm",
                self.fill_height_hp, container.inner_height
            )));
        }
        Ok(())
    }

    /// Bulk content volume, mm³.
    pub fn content_volume(&self, container: &ContainerSpec) -> f64 {
        container.cross_section() * self.fill_height_hp
    }

    /// Fill with the same particle whose height gives the requested mass.
    pub fn with_mass(particle: ParticleSpec, mass_g: f64, container: &ContainerSpec) -> Self {
        let height = mass_g / (particle.bulk_density() * container.cross_section());
        ContentFill::new(particle, height)
    }
}

/// Five-way particle shape descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ShapeClass(u8);

impl ShapeClass {
    pub const COUNT: usize = 5;

    pub fn new(value: u8) -> Result<Self> {
        if usize::from(value) < Self::COUNT {
            Ok(ShapeClass(value))
        } else {
            Err(Error::domain(format!("shape class {value} outside 0..=4")))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        usize::from(self.0)
    }

    pub fn all() -> impl Iterator<Item = ShapeClass> {
        (0..Self::COUNT as u8).map(ShapeClass)
    }
}

impl fmt::Display for ShapeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Volume of a sphere of diameter `d`, mm³.
pub fn sphere_volume(d: f64) -> f64 {
    PI / 6.0 * d * d * d
}

/// Diameter of the sphere with the given volume.
pub fn equivalent_diameter(individual_volume: f64) -> Result<f64> {
    if !(individual_volume > 0.0 && individual_volume.is_finite()) {
        return Err(Error::domain(format!(
            "particle volume {individual_volume} must be positive"
        )));
    }
    Ok((6.0 * individual_volume / PI).cbrt())
}

/// Surface area of the equal-volume sphere divided by the particle's
/// surface area.
pub fn sphericity(individual_volume: f64, surface_area: f64) -> Result<f64> {
    if !(individual_volume > 0.0 && surface_area > 0.0)
        || !individual_volume.is_finite()
        || !surface_area.is_finite()
    {
        return Err(Error::domain(format!(
            "sphericity needs positive volume and area, got V={individual_volume}, A={surface_area}"
        )));
    }
    Ok(PI.cbrt() * (6.0 * individual_volume).powf(2.0 / 3.0) / surface_area)
}

/// Shape class from size and sphericity. Anything at or below 1 mm is a
/// powder regardless of sphericity.
pub fn shape_class(diameter_dp: f64, sphericity_psi: f64) -> Result<ShapeClass> {
    if !(diameter_dp > 0.0 && diameter_dp.is_finite())
        || !(sphericity_psi > 0.0 && sphericity_psi <= 1.0)
    {
        return Err(Error::domain(format!(
            "shape class undefined for D_p={diameter_dp}, psi={sphericity_psi}"
        )));
    }
    let class = if diameter_dp <= 1.0 {
        0
    } else if sphericity_psi <= 0.7 {
        1
    } else if sphericity_psi <= 0.9 {
        2
    } else if sphericity_psi <= 0.96 {
        3
    } else {
        4
    };
    Ok(ShapeClass(class))
}

/// Ground-truth content mass, g.
pub fn content_mass(fill: &ContentFill, container: &ContainerSpec) -> Result<f64> {
    fill.validate(container)?;
    let p = &fill.particle;
    Ok(p.material_density
        * p.packing_fraction
        * container.inner_width
        * container.inner_depth
        * fill.fill_height_hp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn equivalent_diameter_examples() {
        assert!(rel(equivalent_diameter(PI / 6.0).unwrap(), 1.0) < 1e-15);
        assert!(rel(equivalent_diameter(8.0 * PI / 6.0).unwrap(), 2.0) < 1e-15);
        assert!(matches!(equivalent_diameter(0.0), Err(Error::Domain(_))));
        assert!(equivalent_diameter(-1.0).is_err());
    }

    #[test]
    fn equivalent_diameter_round_trip() {
        for d in [0.1, 1.0, 10.0, 100.0] {
            assert!(rel(equivalent_diameter(sphere_volume(d)).unwrap(), d) < 1e-12);
        }
    }

    #[test]
    fn sphericity_examples() {
        assert!(rel(sphericity(PI / 6.0, PI).unwrap(), 1.0) < 1e-14);
        let cube = sphericity(1.0, 6.0).unwrap();
        assert!(rel(cube, (PI / 6.0).cbrt()) < 1e-14);
        assert!((cube - 0.8060).abs() < 5e-5);
        assert!(sphericity(1.0, 0.0).is_err());
        assert!(sphericity(0.0, 1.0).is_err());
    }

    #[test]
    fn shape_class_rules() {
        let c = |d, p| shape_class(d, p).unwrap().value();
        assert_eq!(c(0.8, 0.99), 0);
        assert_eq!(c(1.0, 0.5), 0);
        assert_eq!(c(5.0, 0.95), 3);
        assert_eq!(c(3.0, 0.70), 1);
        assert_eq!(c(3.0, 0.7000001), 2);
        assert_eq!(c(3.0, 0.9), 2);
        assert_eq!(c(3.0, 0.96), 3);
        assert_eq!(c(3.0, 0.9600001), 4);
        assert_eq!(c(3.0, 1.0), 4);
        assert!(shape_class(3.0, 1.01).is_err());
        assert!(shape_class(0.0, 0.5).is_err());
        assert!(shape_class(3.0, 0.0).is_err());
    }

    #[test]
    fn content_mass_examples() {
        let container = ContainerSpec::default();
        let p = ParticleSpec::new("p", 3.0, 0.9, 0.001).unwrap();
        let m = content_mass(&ContentFill::new(p.clone(), 50.0), &container).unwrap();
        assert!(rel(m, 108.0) < 1e-12);
        let m2 = content_mass(&ContentFill::new(p.clone(), 100.0), &container).unwrap();
        assert!(rel(m2, 2.0 * m) < 1e-12);
        assert!(content_mass(&ContentFill::new(p.clone(), 0.0), &container).is_err());
        assert!(content_mass(&ContentFill::new(p, 131.0), &container).is_err());
    }

    #[test]
    fn with_mass_inverts_content_mass() {
        let container = ContainerSpec::default();
        let p = ParticleSpec::new("p", 3.0, 0.9, 0.0013).unwrap();
        let fill = ContentFill::with_mass(p, 120.0, &container);
        assert!(rel(content_mass(&fill, &container).unwrap(), 120.0) < 1e-12);
    }

    #[test]
    fn default_container_is_valid() {
        ContainerSpec::default().validate().unwrap();
        let bad = ContainerSpec {
            grasp_height: 140.0,
            ..ContainerSpec::default()
        };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn shape_class_total(d in 1e-3f64..=100.0, psi in 1e-6f64..=1.0) {
            let c = shape_class(d, psi).unwrap();
            prop_assert!(c.index() < ShapeClass::COUNT);
            prop_assert_eq!(c, shape_class(d, psi).unwrap());
        }

        #[test]
        fn sphericity_scale_invariant(v in 0.01f64..100.0, ratio in 1.0f64..3.0, lambda in 0.1f64..10.0) {
            // area chosen so the unscaled body is no more spherical than a sphere
            let a = ratio * PI.cbrt() * (6.0 * v).powf(2.0 / 3.0);
            let psi = sphericity(v, a).unwrap();
            let scaled = sphericity(lambda.powi(3) * v, lambda * lambda * a).unwrap();
            prop_assert!(rel(scaled, psi) < 1e-12);
            prop_assert!(psi <= 1.0 + 1e-12);
        }

        #[test]
        fn content_mass_linear(h in 1.0f64..60.0, rho in 1e-4f64..1e-2, k in 0.1f64..2.0) {
            let container = ContainerSpec::default();
            let p = ParticleSpec::new("p", 3.0, 0.9, rho).unwrap();
            let base = content_mass(&ContentFill::new(p.clone(), h), &container).unwrap();
            let taller = content_mass(&ContentFill::new(p.clone(), h * k), &container).unwrap();
            prop_assert!(rel(taller, k * base) < 1e-12);
            let denser = ParticleSpec { material_density: rho * k, ..p };
            let heavier = content_mass(&ContentFill::new(denser, h), &container).unwrap();
            prop_assert!(rel(heavier, k * base) < 1e-12);
        }
    }
}
