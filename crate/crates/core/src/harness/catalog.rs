//! The synthetic particle catalog.

use rand::Rng;

use crate::domain::ParticleSpec;
use crate::seed;

/// `(name, D_p mm, Ψ, material density g/mm³)`.
const BASE: [(&str, f64, f64, f64); 37] = [
    // powders
    ("flour-analog", 0.2, 0.85, 0.0014),
    ("fine-sand-analog", 0.4, 0.85, 0.0026),
    ("fine-sugar-analog", 0.5, 0.9, 0.0016),
    ("table-salt-analog", 0.6, 0.88, 0.00216),
    ("ground-coffee-analog", 0.8, 0.75, 0.0011),
    ("semolina-analog", 0.9, 0.82, 0.0014),
    ("couscous-analog", 1.0, 0.9, 0.0013),
    // flat or elongated
    ("rosemary-analog", 2.0, 0.55, 0.0006),
    ("long-grain-rice-analog", 3.0, 0.68, 0.0015),
    ("rolled-oat-analog", 4.0, 0.58, 0.0009),
    ("sunflower-seed-analog", 5.5, 0.66, 0.0009),
    ("bran-flake-analog", 6.0, 0.56, 0.0007),
    ("pumpkin-seed-analog", 7.0, 0.62, 0.001),
    ("cornflake-analog", 10.0, 0.55, 0.0006),
    // irregular
    ("orzo-analog", 3.2, 0.78, 0.0015),
    ("barley-analog", 3.5, 0.82, 0.0013),
    ("buckwheat-analog", 4.0, 0.86, 0.0012),
    ("lentil-analog", 4.5, 0.8, 0.0014),
    ("coffee-bean-analog", 7.0, 0.83, 0.0011),
    ("macaroni-analog", 8.0, 0.72, 0.0008),
    ("kidney-bean-analog", 9.0, 0.85, 0.0012),
    ("almond-analog", 11.5, 0.76, 0.0011),
    // rounded
    ("hemp-seed-analog", 3.5, 0.94, 0.0011),
    ("mung-bean-analog", 4.0, 0.92, 0.0013),
    ("adzuki-bean-analog", 5.2, 0.93, 0.0013),
    ("navy-bean-analog", 6.5, 0.93, 0.0013),
    ("soybean-analog", 6.8, 0.95, 0.0012),
    ("corn-kernel-analog", 8.0, 0.91, 0.0012),
    ("chickpea-analog", 8.5, 0.94, 0.0012),
    // spherical
    ("steel-shot-analog", 2.0, 1.0, 0.0078),
    ("millet-analog", 2.2, 0.97, 0.0012),
    ("glass-bead-analog", 3.0, 1.0, 0.0025),
    ("peppercorn-analog", 4.5, 0.97, 0.0011),
    ("plastic-pellet-analog", 5.0, 0.99, 0.00095),
    ("tapioca-pearl-analog", 6.0, 0.985, 0.0013),
    ("airsoft-bb-analog", 6.0, 1.0, 0.0009),
    ("green-pea-analog", 7.0, 0.98, 0.0013),
];

/// Particles held out of training in the unseen-particle split: one per
/// shape class, each inside the size and sphericity span of its class.
pub const HOLDOUT_NAMES: [&str; 5] = [
    "ground-coffee-analog",
    "rolled-oat-analog",
    "lentil-analog",
    "adzuki-bean-analog",
    "tapioca-pearl-analog",
];

pub const CATALOG_SIZE: usize = BASE.len();

const DENSITY_RANGE: (f64, f64) = (0.0005, 0.008);

/// The 37 catalog particles. The seed jitters material density by up to
/// ±5 % and packing fraction within [0.57, 0.63]; size and sphericity (and
/// hence shape class) are fixed.
pub fn generate_catalog(seed: u64) -> Vec<ParticleSpec> {
    let mut rng = seed::rng(seed, &[seed::tag("catalog")]);
    BASE.iter()
        .map(|&(name, d, psi, rho)| {
            let density = (rho * rng.gen_range(0.95..1.05)).clamp(DENSITY_RANGE.0, DENSITY_RANGE.1);
            let mut p =
                ParticleSpec::new(name, d, psi, density).expect("catalog entries are valid");
            p.packing_fraction = rng.gen_range(0.57..0.63);
            p
        })
        .collect()
}

/// The fine sugar used for the humidity study: D_p 0.5 mm, Ψ 0.9,
/// density 0.0016 g/mm³.
pub fn sugar_analog() -> ParticleSpec {
    ParticleSpec::new("fine-sugar-analog", 0.5, 0.9, 0.0016).expect("valid sugar spec")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn thirty_seven_unique_names() {
        let c = generate_catalog(0);
        assert_eq!(c.len(), 37);
        let names: HashSet<_> = c.iter().map(|p| p.name.clone()).collect();
        assert_eq!(names.len(), 37);
        for h in HOLDOUT_NAMES {
            assert!(names.contains(h));
        }
    }

    #[test]
    fn class_coverage_and_ranges() {
        let c = generate_catalog(9);
        let mut counts = [0; 5];
        for p in &c {
            counts[p.shape_class().unwrap().index()] += 1;
            assert!((0.2..=12.0).contains(&p.diameter_dp));
            assert!((0.55..=1.0).contains(&p.sphericity_psi));
            assert!((0.0005..=0.008).contains(&p.material_density));
        }
        assert!(counts[0] >= 3);
        assert!(counts[1..].iter().all(|&n| n >= 4), "{counts:?}");
        let held: HashSet<usize> = c
            .iter()
            .filter(|p| HOLDOUT_NAMES.contains(&p.name.as_str()))
            .map(|p| p.shape_class().unwrap().index())
            .collect();
        assert_eq!(held.len(), 5);
    }

    #[test]
    fn deterministic() {
        assert_eq!(generate_catalog(3), generate_catalog(3));
        assert_ne!(generate_catalog(3), generate_catalog(4));
    }
}
