//! Lower and upper envelopes of a step-like torque trace.
//!
//! Avalanches show up as sudden drops against the local trend. The trace is
//! cut at those drops into stick segments and each segment is smoothed with
//! a local line fit. The upper envelope joins the segment maxima just before
//! each drop, the lower envelope joins the minima just after it. Before the
//! first drop both envelopes follow the trace, and after the last drop the
//! lower envelope does.

use crate::granusim::SignalTrace;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeConfig {
    /// Samples per envelope.
    pub points: usize,
    /// Minimum drop against the local trend that counts as an avalanche.
    pub jump_threshold: f64,
    /// Samples on each side used to estimate a drop.
    pub jump_window: usize,
    /// Half-width of the smoothing line fit, samples.
    pub smoothing_half_window: usize,
}

impl EnvelopeConfig {
    /// Threshold at five noise standard deviations.
    pub fn for_noise(noise_sigma: f64, kappa: f64) -> Self {
        EnvelopeConfig {
            jump_threshold: 5.0 * noise_sigma * kappa,
            ..Self::default()
        }
    }
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        EnvelopeConfig {
            points: 100,
            jump_threshold: 0.01,
            jump_window: 10,
            smoothing_half_window: 20,
        }
    }
}

/// Piecewise-linear curve through knots with increasing abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub knots: Vec<(f64, f64)>,
}

impl Curve {
    /// Linear interpolation, constant beyond the end knots.
    pub fn eval(&self, x: f64) -> f64 {
        let k = &self.knots;
        if x <= k[0].0 {
            return k[0].1;
        }
        if x >= k[k.len() - 1].0 {
            return k[k.len() - 1].1;
        }
        let i = k.partition_point(|p| p.0 <= x);
        let (x0, y0) = k[i - 1];
        let (x1, y1) = k[i];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Envelopes {
    pub angles: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub lower_curve: Curve,
    pub upper_curve: Curve,
    /// Index of the last sample before each detected drop.
    pub drops: Vec<usize>,
}

impl Envelopes {
    /// `[lower | upper]`, the topple features.
    pub fn concat(&self) -> Vec<f64> {
        self.lower.iter().chain(&self.upper).copied().collect()
    }
}

/// Least-squares line through `(x, y)` evaluated at `at`.
fn line_fit_at(x: &[f64], y: &[f64], at: f64) -> f64 {
    let n = x.len() as f64;
    if x.len() == 1 {
        return y[0];
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 {
        return my;
    }
    my + sxy / sxx * (at - mx)
}

fn detect_drops(trace: &SignalTrace, cfg: &EnvelopeConfig) -> Vec<usize> {
    let (x, y) = (&trace.angles, &trace.values);
    let n = x.len();
    let m = cfg.jump_window.max(1);
    let mut drops = Vec::new();
    let mut run: Option<(usize, f64)> = None;
    for b in 0..n.saturating_sub(1) {
        let l0 = (b + 1).saturating_sub(m);
        let r1 = (b + m).min(n - 1);
        let mid = 0.5 * (x[b] + x[b + 1]);
        let jump = line_fit_at(&x[b + 1..=r1], &y[b + 1..=r1], mid)
            - line_fit_at(&x[l0..=b], &y[l0..=b], mid);
        if jump < -cfg.jump_threshold {
            run = match run {
                Some((best, v)) if v <= jump => Some((best, v)),
                _ => Some((b, jump)),
            };
        } else if let Some((best, _)) = run.take() {
            drops.push(best);
        }
    }
    if let Some((best, _)) = run {
        drops.push(best);
    }
    drops
}

fn smooth_segment(x: &[f64], y: &[f64], half: usize) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(x.len() - 1);
            line_fit_at(&x[lo..=hi], &y[lo..=hi], x[i])
        })
        .collect()
}

/// Extracts the lower and upper envelopes and samples each at
/// `cfg.points` equally spaced angles spanning the trace.
pub fn envelopes(trace: &SignalTrace, cfg: &EnvelopeConfig) -> Result<Envelopes> {
    let n = trace.len();
    if n == 0 {
        return Err(Error::domain("cannot extract envelopes of an empty trace"));
    }
    if cfg.points < 2 {
        return Err(Error::domain("envelopes need at least two sample points"));
    }
    let x = &trace.angles;
    let drops = detect_drops(trace, cfg);

    let mut bounds = Vec::with_capacity(drops.len() + 1);
    let mut start = 0;
    for &d in &drops {
        bounds.push((start, d));
        start = d + 1;
    }
    bounds.push((start, n - 1));
    let smooth: Vec<Vec<f64>> = bounds
        .iter()
        .map(|&(a, b)| smooth_segment(&x[a..=b], &trace.values[a..=b], cfg.smoothing_half_window))
        .collect();

    let follow = |seg: usize| -> Vec<(f64, f64)> {
        let (a, _) = bounds[seg];
        smooth[seg]
            .iter()
            .enumerate()
            .map(|(i, v)| (x[a + i], *v))
            .collect()
    };
    let last = bounds.len() - 1;
    let (upper_knots, lower_knots) = if drops.is_empty() {
        (follow(0), follow(0))
    } else {
        let mut upper = follow(0);
        for (seg, &(_, b)) in bounds.iter().enumerate().skip(1) {
            upper.push((x[b], *smooth[seg].last().unwrap()));
        }
        let mut lower = follow(0);
        for (seg, &(a, _)) in bounds.iter().enumerate().take(last).skip(1) {
            lower.push((x[a], smooth[seg][0]));
        }
        lower.extend(follow(last));
        (upper, lower)
    };
    let upper_curve = Curve { knots: upper_knots };
    let lower_curve = Curve { knots: lower_knots };

    let (x0, x1) = (x[0], x[n - 1]);
    let angles: Vec<f64> = (0..cfg.points)
        .map(|i| x0 + (x1 - x0) * i as f64 / (cfg.points - 1) as f64)
        .collect();
    let mut lower = Vec::with_capacity(cfg.points);
    let mut upper = Vec::with_capacity(cfg.points);
    for &a in &angles {
        let (l, u) = (lower_curve.eval(a), upper_curve.eval(a));
        lower.push(l.min(u));
        upper.push(l.max(u));
    }
    Ok(Envelopes {
        angles,
        lower,
        upper,
        lower_curve,
        upper_curve,
        drops,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(angles: Vec<f64>, values: Vec<f64>) -> SignalTrace {
        SignalTrace::new(angles, values, 100.0).unwrap()
    }

    fn grid(from: f64, to: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| from + (to - from) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn collapse_free_line_is_its_own_envelope() {
        let a = grid(-60.0, 60.0, 2401);
        let v: Vec<f64> = a.iter().map(|t| 3.0 + 0.25 * t).collect();
        let e = envelopes(&trace(a, v), &EnvelopeConfig::default()).unwrap();
        assert!(e.drops.is_empty());
        assert_eq!(e.lower, e.upper);
        for (t, l) in e.angles.iter().zip(&e.lower) {
            assert!((l - (3.0 + 0.25 * t)).abs() < 1e-9);
        }
    }

    #[test]
    fn collapse_free_curve_follows_trace() {
        let a = grid(-60.0, 60.0, 2401);
        let v: Vec<f64> = a.iter().map(|t| 50.0 * t.to_radians().sin()).collect();
        let e = envelopes(&trace(a, v), &EnvelopeConfig::default()).unwrap();
        assert!(e.drops.is_empty());
        assert_eq!(e.lower, e.upper);
        for (t, l) in e.angles.iter().zip(&e.lower) {
            // local line fits carry a small curvature bias
            assert!((l - 50.0 * t.to_radians().sin()).abs() < 5e-3);
        }
    }

    /// Sawtooth riding between `upper(θ) = 2 + 0.1θ` and `upper − 1`, with a
    /// drop every 10° from 5° on.
    fn sawtooth() -> (SignalTrace, Vec<f64>) {
        let a = grid(0.0, 60.0, 1201);
        let upper = |t: f64| 2.0 + 0.1 * t;
        let breaks: Vec<f64> = vec![5.0, 15.0, 25.0, 35.0, 45.0, 55.0];
        let v: Vec<f64> = a
            .iter()
            .map(|&t| {
                let prev = breaks.iter().rev().find(|&&b| b < t).copied();
                let next = breaks.iter().find(|&&b| b >= t).copied().unwrap_or(65.0);
                let start = prev.unwrap_or(-5.0);
                let frac = (t - start) / (next - start);
                upper(start) - 1.0 + frac * (upper(next) - upper(start) + 1.0)
            })
            .collect();
        (trace(a, v), breaks)
    }

    #[test]
    fn sawtooth_envelopes_hit_constructed_extrema() {
        let (t, breaks) = sawtooth();
        let e = envelopes(&t, &EnvelopeConfig::default()).unwrap();
        assert_eq!(e.drops.len(), breaks.len());
        for (d, b) in e.drops.iter().zip(&breaks) {
            assert!((t.angles[*d] - b).abs() < 1e-9);
        }
        let step = 0.05;
        for &b in &breaks {
            assert!((e.upper_curve.eval(b) - (2.0 + 0.1 * b)).abs() < 1e-9);
            // the first post-drop sample lies on the lower line
            let after = b + step;
            let lower_line = 1.0 + 0.1 * b + (after - b) * (0.1 * 10.0 + 1.0) / 10.0;
            assert!((e.lower_curve.eval(after) - lower_line).abs() < 1e-9);
        }
        // between drops the upper envelope is the upper line
        for (a, u) in e.angles.iter().zip(&e.upper) {
            if (5.0..=55.0).contains(a) {
                assert!((u - (2.0 + 0.1 * a)).abs() < 1e-9, "{a}");
            }
        }
    }

    #[test]
    fn lower_never_exceeds_upper() {
        let (t, _) = sawtooth();
        let e = envelopes(&t, &EnvelopeConfig::default()).unwrap();
        assert!(e.lower.iter().zip(&e.upper).all(|(l, u)| l <= u));
        assert_eq!(e.concat().len(), 200);
    }

    #[test]
    fn edge_inputs() {
        assert!(envelopes(&trace(vec![], vec![]), &EnvelopeConfig::default()).is_err());
        let one = envelopes(&trace(vec![1.0], vec![2.0]), &EnvelopeConfig::default()).unwrap();
        assert!(one.lower.iter().all(|v| *v == 2.0));
        let cfg = EnvelopeConfig {
            points: 1,
            ..EnvelopeConfig::default()
        };
        assert!(envelopes(&trace(vec![1.0, 2.0], vec![2.0, 3.0]), &cfg).is_err());
    }
}
