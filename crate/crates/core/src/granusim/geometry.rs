//! Cross-section geometry of the content pile.
//!
//! The bottle interior is the rectangle `u ∈ [-w/2, w/2]`, `v ∈ [0, H]` in
//! the container frame. The mobile content occupies the part of that
//! rectangle on the gravity side of a straight free surface. Tilt `theta`
//! rotates the container counter-clockwise about the grasp point; the free
//! surface makes angle `beta` with the world horizontal, measured in the same
//! sense, so a surface that sticks to the container has `beta == theta`.

use crate::domain::{si, ContainerSpec, ContentFill};
use crate::{Error, Result};

pub type Point = [f64; 2];

/// How the top of the bottle is treated when locating the free surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RimPolicy {
    /// Content touching the rim is a spill; tilts are limited to |θ| < 90°.
    #[default]
    Open,
    /// Capped bottle: content may rest against the lid at any tilt.
    Closed,
}

/// Signed area and centroid of a simple polygon (shoelace formulas).
pub fn polygon_area_centroid(poly: &[Point]) -> (f64, Point) {
    let n = poly.len();
    if n < 3 {
        return (0.0, [0.0, 0.0]);
    }
    let mut a = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let [x0, y0] = poly[i];
        let [x1, y1] = poly[(i + 1) % n];
        let cross = x0 * y1 - x1 * y0;
        a += cross;
        cx += (x0 + x1) * cross;
        cy += (y0 + y1) * cross;
    }
    a *= 0.5;
    if a == 0.0 {
        return (0.0, poly[0]);
    }
    (a, [cx / (6.0 * a), cy / (6.0 * a)])
}

/// Clips a convex polygon to the half-plane `normal · p <= level`.
///
/// Returns the clipped polygon and the length of the cut along the boundary
/// line.
pub fn clip_half_plane(poly: &[Point], normal: Point, level: f64) -> (Vec<Point>, f64) {
    let dist = |p: &Point| normal[0] * p[0] + normal[1] * p[1] - level;
    let mut out = Vec::with_capacity(poly.len() + 2);
    let mut cut = Vec::with_capacity(2);
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let dp = dist(&p);
        let dq = dist(&q);
        if dp <= 0.0 {
            out.push(p);
        }
        if (dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0) {
            let t = dp / (dp - dq);
            let x = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
            out.push(x);
            cut.push(x);
        }
    }
    let chord = match cut.as_slice() {
        [a, b] => ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt(),
        _ => 0.0,
    };
    (out, chord)
}

fn interior(container: &ContainerSpec) -> [Point; 4] {
    let hw = 0.5 * container.inner_width;
    let h = container.inner_height;
    [[-hw, 0.0], [hw, 0.0], [hw, h], [-hw, h]]
}

/// Free-surface normal in the container frame (pointing away from content).
fn surface_normal(theta_deg: f64, beta_deg: f64) -> Point {
    let phi = (beta_deg - theta_deg).to_radians();
    [-phi.sin(), phi.cos()]
}

/// The mobile content cross-section in the container frame.
#[derive(Debug, Clone)]
pub struct ContentSection {
    pub polygon: Vec<Point>,
    pub area: f64,
    /// Centroid in the container frame, mm.
    pub centroid: Point,
    /// Surface level: content satisfies `normal · p <= level`.
    pub level: f64,
    pub normal: Point,
}

/// Locates the free surface that encloses `target_area` mm² of the interior.
pub fn content_section(
    theta_deg: f64,
    beta_deg: f64,
    target_area: f64,
    container: &ContainerSpec,
) -> Result<ContentSection> {
    let rect = interior(container);
    let total = container.inner_width * container.inner_height;
    if !(target_area > 0.0 && target_area < total) {
        return Err(Error::domain(format!(
            "content area {target_area} mm² outside (0, {total}) mm²"
        )));
    }
    let normal = surface_normal(theta_deg, beta_deg);
    let proj: Vec<f64> = rect
        .iter()
        .map(|p| normal[0] * p[0] + normal[1] * p[1])
        .collect();
    let mut lo = proj.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut hi = proj.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    // Safeguarded Newton on A(level) = target; dA/dlevel is the cut length.
    let mut level = lo + (hi - lo) * target_area / total;
    let tol = 1e-13 * total;
    for _ in 0..200 {
        let (poly, chord) = clip_half_plane(&rect, normal, level);
        let (area, _) = polygon_area_centroid(&poly);
        let err = area - target_area;
        if err.abs() <= tol {
            break;
        }
        if err < 0.0 {
            lo = level;
        } else {
            hi = level;
        }
        let newton = if chord > 0.0 {
            level - err / chord
        } else {
            f64::NAN
        };
        level = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * (lo.abs() + hi.abs()) {
            break;
        }
    }
    let (polygon, _) = clip_half_plane(&rect, normal, level);
    let (area, centroid) = polygon_area_centroid(&polygon);
    Ok(ContentSection {
        polygon,
        area,
        centroid,
        level,
        normal,
    })
}

/// Container-frame point (mm) to world offset from the grasp point (m).
pub fn to_world(local: Point, theta_deg: f64, container: &ContainerSpec) -> (f64, f64) {
    let (s, c) = theta_deg.to_radians().sin_cos();
    let u = local[0];
    let v = local[1] - container.grasp_height;
    (si::mm(u * c - v * s), si::mm(u * s + v * c))
}

/// World-frame offset (x, z) in metres of the content centre of mass from
/// the grasp point, for an open-top bottle.
pub fn content_com(
    theta_deg: f64,
    beta_deg: f64,
    fill: &ContentFill,
    container: &ContainerSpec,
) -> Result<(f64, f64)> {
    content_com_with(theta_deg, beta_deg, fill, container, RimPolicy::Open)
}

pub fn content_com_with(
    theta_deg: f64,
    beta_deg: f64,
    fill: &ContentFill,
    container: &ContainerSpec,
    rim: RimPolicy,
) -> Result<(f64, f64)> {
    fill.validate(container)?;
    if rim == RimPolicy::Open && theta_deg.abs() >= 90.0 {
        return Err(Error::domain(format!(
            "open bottle tilt {theta_deg} deg outside (-90, 90)"
        )));
    }
    if !theta_deg.is_finite() || !beta_deg.is_finite() {
        return Err(Error::domain("non-finite tilt or surface angle"));
    }
    let section = content_section(
        theta_deg,
        beta_deg,
        container.inner_width * fill.fill_height_hp,
        container,
    )?;
    if rim == RimPolicy::Open {
        let hw = 0.5 * container.inner_width;
        let h = container.inner_height;
        let n = section.normal;
        let touches = [[-hw, h], [hw, h]]
            .iter()
            .any(|p| n[0] * p[0] + n[1] * p[1] <= section.level);
        if touches {
            return Err(Error::Spill {
                theta_deg,
                fill_height_mm: fill.fill_height_hp,
            });
        }
    }
    Ok(to_world(section.centroid, theta_deg, container))
}

/// World offset of the empty container's centre of mass from the grasp
/// point, m. The shell is taken as uniform, so its centre sits on the axis
/// at half the inner height.
pub fn container_com(theta_deg: f64, container: &ContainerSpec) -> (f64, f64) {
    to_world([0.0, 0.5 * container.inner_height], theta_deg, container)
}

/// World offset of content that stays in its settled, container-fixed shape.
pub fn settled_com(theta_deg: f64, fill: &ContentFill, container: &ContainerSpec) -> (f64, f64) {
    to_world([0.0, 0.5 * fill.fill_height_hp], theta_deg, container)
}
