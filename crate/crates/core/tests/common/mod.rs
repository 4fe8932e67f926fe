//! Independent reference implementations shared by the integration tests
//! and the acceptance suite.
#![allow(dead_code)]

use grainsense::domain::{content_mass, ContainerSpec, ContentFill, ParticleSpec};
use grainsense::estimators::{MlpModel, Standardizer};
use grainsense::features::{
    envelopes, principal_vibration_signal, vib_features, EnvelopeConfig, VibrationSignal,
    CONTACT_TOP_K,
};
use grainsense::granusim::{
    stick_slip_trace, vibration_markerfield, wrist_torque, AorParams, NoiseModel, Scene, StickSlip,
    SweepConfig, FINGERTIP_UNITS_PER_NM,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Wrist torque by Monte-Carlo area integration in the world frame.
///
/// The interior is covered by an `n × n` grid with one jittered sample per
/// cell. Each sample is rotated into the world; content is the fraction
/// `H_p / H` of samples lowest along the world surface normal at
/// inclination β.
pub fn mc_torque(
    theta: f64,
    beta: f64,
    fill: &ContentFill,
    c: &ContainerSpec,
    n: usize,
    seed: u64,
) -> f64 {
    let mut r = rng(seed);
    let (st, ct) = theta.to_radians().sin_cos();
    let (sb, cb) = beta.to_radians().sin_cos();
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let u = c.inner_width * ((i as f64 + r.gen::<f64>()) / n as f64 - 0.5);
            let v = c.inner_height * (j as f64 + r.gen::<f64>()) / n as f64 - c.grasp_height;
            let x = u * ct - v * st;
            let z = u * st + v * ct;
            pts.push((-sb * x + cb * z, x));
        }
    }
    let k = ((pts.len() as f64) * fill.fill_height_hp / c.inner_height).round() as usize;
    pts.select_nth_unstable_by(k, |a, b| a.0.total_cmp(&b.0));
    let x_mean = pts[..k].iter().map(|p| p.1).sum::<f64>() / k as f64 / 1000.0;
    let x_c = -(0.5 * c.inner_height - c.grasp_height) * st / 1000.0;
    let m = content_mass(fill, c).unwrap() / 1000.0;
    c.gravity_g * (m * x_mean + c.container_mass_mc / 1000.0 * x_c)
}

/// Maximum relative torque error over `configs` random tilts, surfaces and
/// fill heights.
pub fn com_oracle_max_error(configs: usize, samples_per_side: usize, seed: u64) -> f64 {
    let c = ContainerSpec::default();
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < configs {
        let theta = r.gen_range(-60.0..60.0);
        let beta = r.gen_range(-35.0..35.0);
        let h = r.gen_range(20.0..70.0);
        let fill = ContentFill::new(
            ParticleSpec::new("mc", 3.0, 0.9, r.gen_range(0.0008..0.003)).unwrap(),
            h,
        );
        let Ok(exact) = wrist_torque(theta, beta, &fill, &c) else {
            continue;
        };
        let mc = mc_torque(theta, beta, &fill, &c, samples_per_side, r.gen());
        worst = worst.max((exact - mc).abs() / exact.abs());
        done += 1;
    }
    worst
}

/// `v1_a` and `v2_a` written directly from their 1-based definitions.
pub fn brute_vib_features(s: &[f64]) -> Vec<f64> {
    let big_t = s.len();
    let at = |t: usize| s[t - 1];
    let mut v1 = Vec::new();
    let mut v2 = Vec::new();
    for a in 1..=50usize {
        let mut sum1 = 0.0;
        let mut t = a + 1;
        while t <= big_t {
            sum1 += (at(t) - at(t - a)).abs();
            t += 1;
        }
        let mut sum2 = 0.0;
        let mut t = a + 1;
        while t + a <= big_t {
            sum2 += (2.0 * at(t) - at(t - a) - at(t + a)).abs();
            t += 1;
        }
        v1.push(sum1);
        v2.push(sum2);
    }
    v1.extend(v2);
    v1
}

/// Number of random length-3200 signals whose features differ from the
/// brute-force sums in any bit.
pub fn feature_oracle_mismatches(signals: usize, seed: u64) -> usize {
    let mut r = rng(seed);
    (0..signals)
        .filter(|_| {
            let s: Vec<f64> = (0..3200).map(|_| r.gen_range(-1.0..1.0)).collect();
            let f = vib_features(&VibrationSignal {
                values: s.clone(),
                sample_rate: 800.0,
            })
            .unwrap();
            f != brute_vib_features(&s)
        })
        .count()
}

/// Largest relative disagreement between analytic and central-difference
/// gradients for one random network and batch. Parameters whose ±ε
/// perturbation flips any rectifier are skipped.
pub fn gradient_check(dims: &[usize], seed: u64) -> f64 {
    let eps = 1e-5;
    let mut r = rng(seed);
    let mut m = MlpModel::zeros(dims).unwrap();
    let params: Vec<f64> = (0..m.param_count())
        .map(|_| r.gen_range(-0.5..0.5))
        .collect();
    m.set_params(&params).unwrap();
    let din = dims[0];
    let dout = *dims.last().unwrap();
    m.input_scale = Standardizer {
        mean: (0..din).map(|_| r.gen_range(-1.0..1.0)).collect(),
        std: (0..din).map(|_| r.gen_range(0.5..2.0)).collect(),
    };
    m.output_scale = Standardizer {
        mean: vec![r.gen_range(-1.0..1.0); dout],
        std: vec![r.gen_range(0.5..2.0); dout],
    };
    let xs: Vec<Vec<f64>> = (0..6)
        .map(|_| (0..din).map(|_| r.gen_range(-2.0..2.0)).collect())
        .collect();
    let ys: Vec<Vec<f64>> = (0..6)
        .map(|_| (0..dout).map(|_| r.gen_range(-2.0..2.0)).collect())
        .collect();
    let (_, grad) = m.loss_gradient(&xs, &ys);
    let base_pattern = m.activation_pattern(&xs);
    let mut worst: f64 = 0.0;
    let mut probe = m.clone();
    let mut p = params.clone();
    for i in 0..params.len() {
        p[i] = params[i] + eps;
        probe.set_params(&p).unwrap();
        let (up, _) = probe.loss_gradient(&xs, &ys);
        let flip_up = probe.activation_pattern(&xs) != base_pattern;
        p[i] = params[i] - eps;
        probe.set_params(&p).unwrap();
        let (down, _) = probe.loss_gradient(&xs, &ys);
        let flip_down = probe.activation_pattern(&xs) != base_pattern;
        p[i] = params[i];
        if flip_up || flip_down {
            continue;
        }
        let numeric = (up - down) / (2.0 * eps);
        let scale = grad[i].abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((grad[i] - numeric).abs() / scale);
    }
    worst
}

/// Every readout of random sweeps keeps `|β| ≤ aor_upper`, and every
/// collapse lands exactly on `±aor_lower`.
pub fn hysteresis_holds(cases: usize, seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    for _ in 0..cases {
        let upper = r.gen_range(15.0..60.0);
        let lower = upper - r.gen_range(1.0..10.0);
        let aor = AorParams::new(upper, lower, 0.0).unwrap();
        let mut pile = StickSlip::settled(aor);
        let mut theta = 0.0;
        for _ in 0..400 {
            theta += r.gen_range(-6.0..6.0);
            for c in pile.advance_to(theta) {
                if (c.beta_after.abs() - lower).abs() > 1e-9 {
                    return Err(format!(
                        "collapse landed at {} instead of ±{lower}",
                        c.beta_after
                    ));
                }
            }
            let beta = pile.state().surface_angle_beta;
            if beta.abs() > upper + 1e-9 {
                return Err(format!("|β| = {} exceeds aor_upper {upper}", beta.abs()));
            }
        }
    }
    Ok(())
}

pub fn test_scene(d: f64, psi: f64, rho: f64, h: f64) -> Scene {
    let fill = ContentFill::new(ParticleSpec::new("inv", d, psi, rho).unwrap(), h);
    Scene::new(fill, ContainerSpec::default()).unwrap()
}

/// Envelopes sandwich the trace away from collapses.
pub fn sandwich_holds(scene: &Scene, seed: u64) -> Result<(), String> {
    let sigma = NoiseModel::default().torque_sigma;
    let cfg = SweepConfig::slow_rotation();
    let sweep = stick_slip_trace(scene, &cfg, sigma, seed).map_err(|e| e.to_string())?;
    let ec = EnvelopeConfig::for_noise(sigma, cfg.kappa);
    let env = envelopes(&sweep.trace, &ec).map_err(|e| e.to_string())?;
    for i in 0..env.angles.len() {
        if env.lower[i] > env.upper[i] {
            return Err(format!("lower above upper at sample {i}"));
        }
    }
    let collapse_angles: Vec<f64> = sweep.collapses.iter().map(|c| c.theta).collect();
    let (xs, ys) = (&sweep.trace.angles, &sweep.trace.values);
    for (i, a) in env.angles.iter().enumerate() {
        if collapse_angles.iter().any(|c| (c - a).abs() < 0.5) {
            continue;
        }
        let k = xs.partition_point(|x| x < a).clamp(1, xs.len() - 1);
        let w = (a - xs[k - 1]) / (xs[k] - xs[k - 1]);
        let v = ys[k - 1] + w * (ys[k] - ys[k - 1]);
        if v < env.lower[i] - ec.jump_threshold || v > env.upper[i] + ec.jump_threshold {
            return Err(format!(
                "trace {v} outside [{}, {}] at {a} deg",
                env.lower[i], env.upper[i]
            ));
        }
    }
    Ok(())
}

/// Largest L∞ distance between the envelopes of two noisy traces of the
/// same fill, in units of `σ·κ`.
pub fn envelope_seed_spread(scene: &Scene, seed_a: u64, seed_b: u64) -> f64 {
    let sigma = NoiseModel::default().torque_sigma;
    let cfg = SweepConfig::slow_rotation();
    let ec = EnvelopeConfig::for_noise(sigma, cfg.kappa);
    let env = |s| envelopes(&stick_slip_trace(scene, &cfg, sigma, s).unwrap().trace, &ec).unwrap();
    let (a, b) = (env(seed_a), env(seed_b));
    let d = a
        .lower
        .iter()
        .zip(&b.lower)
        .chain(a.upper.iter().zip(&b.upper))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    d / (sigma * cfg.kappa)
}

/// Sensor scale of the fingertip trace.
pub const TRACE_GAIN: f64 = FINGERTIP_UNITS_PER_NM;

/// Post-shake torque at fixed content mass for rising fill heights, checked
/// against Monte-Carlo integration. Errors unless strictly decreasing.
pub fn torque_monotone_in_height(mass_g: f64) -> Result<(), String> {
    let c = ContainerSpec::default();
    for theta in [30.0, 45.0, 60.0] {
        let torques: Vec<f64> = [30.0, 40.0, 50.0, 60.0, 70.0]
            .iter()
            .map(|&h| {
                let rho = mass_g / (0.6 * c.cross_section() * h);
                let fill = ContentFill::new(ParticleSpec::new("p", 3.0, 0.9, rho).unwrap(), h);
                let t = wrist_torque(theta, 0.0, &fill, &c).unwrap().abs();
                let mc = mc_torque(theta, 0.0, &fill, &c, 600, 7).abs();
                if (t - mc).abs() > 1e-3 * t {
                    return f64::NAN;
                }
                t
            })
            .collect();
        if !torques.windows(2).all(|w| w[1] < w[0]) {
            return Err(format!("θ={theta}: {torques:?}"));
        }
    }
    Ok(())
}

/// Mean `v1_1` over `seeds` collision fields at fixed mass, one value per
/// diameter.
pub fn size_intensity(diameters: &[f64], seeds: u64) -> Vec<f64> {
    let c = ContainerSpec::default();
    diameters
        .iter()
        .map(|&d| {
            let fill =
                ContentFill::with_mass(ParticleSpec::new("p", d, 0.9, 0.0012).unwrap(), 150.0, &c);
            (0..seeds)
                .map(|s| {
                    let field = vibration_markerfield(&fill, &c, 0.001, s).unwrap();
                    vib_features(&principal_vibration_signal(&field, CONTACT_TOP_K).unwrap())
                        .unwrap()[0]
                })
                .sum::<f64>()
                / seeds as f64
        })
        .collect()
}

/// Random signals failing the shift, power-of-two scale or reversal
/// properties of the vibration features.
pub fn feature_property_failures(signals: usize, seed: u64) -> usize {
    let mut r = rng(seed);
    let f = |s: &[f64]| {
        vib_features(&VibrationSignal {
            values: s.to_vec(),
            sample_rate: 800.0,
        })
        .unwrap()
    };
    (0..signals)
        .filter(|_| {
            let len = r.gen_range(101..3200);
            let s: Vec<f64> = (0..len).map(|_| r.gen_range(-10.0..10.0)).collect();
            let base = f(&s);
            let c = r.gen_range(-50.0..50.0);
            let lambda = 2f64.powi(r.gen_range(-6..6)) * if r.gen() { -1.0 } else { 1.0 };
            let shifted = f(&s.iter().map(|v| v + c).collect::<Vec<_>>());
            let scaled = f(&s.iter().map(|v| v * lambda).collect::<Vec<_>>());
            let reversed = f(&s.iter().rev().copied().collect::<Vec<_>>());
            let close = |a: &[f64], b: &[f64], tol: f64| {
                a.iter()
                    .zip(b)
                    .all(|(x, y)| (x - y).abs() <= tol * x.abs().max(1.0))
            };
            let scaled_ok = base
                .iter()
                .zip(&scaled)
                .all(|(x, y)| x * lambda.abs() == *y);
            !(close(&base, &shifted, 1e-9) && scaled_ok && close(&base, &reversed, 1e-12))
        })
        .count()
}
