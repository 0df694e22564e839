//! Array layouts, coordinate frames and the spherical-cap primitives used by
//! every orientation update.
//!
//! Boresights are stored in the local frame of their panel. The feasible set
//! for each of them is the cap `{f : ‖f‖ = 1, fᵀe_z ≥ cos θ_max}` around the
//! panel normal `e_z`.

use nalgebra::Rotation3;

use crate::error::{Error, Result};
use crate::linalg::{Mat3, Vec3};

/// Tolerance on the unit-norm invariant of a boresight.
pub const UNIT_TOL: f64 = 1e-10;
/// Boresights may fall below the cap rim by this much before being clamped
/// back; anything larger is treated as a logic error.
pub const CAP_CLAMP_TOL: f64 = 1e-9;

pub fn e_z() -> Vec3 {
    Vec3::new(0.0, 0.0, 1.0)
}

/// Tie-break direction orthogonal to `e_z`, used whenever the cap
/// projection or the linear minimizer is not unique.
pub fn tie_direction() -> Vec3 {
    Vec3::new(1.0, 0.0, 0.0)
}

/// Spherical cap around the local panel normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cap {
    theta_max: f64,
    cos_max: f64,
    sin_max: f64,
}

impl Cap {
    pub fn new(theta_max: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta_max) {
            return Err(Error::InvalidParameter(format!(
                "maximum zenith angle {theta_max} outside [0, pi/2]"
            )));
        }
        let (sin_max, cos_max) = if theta_max == std::f64::consts::FRAC_PI_2 {
            (1.0, 0.0)
        } else {
            theta_max.sin_cos()
        };
        Ok(Self {
            theta_max,
            cos_max,
            sin_max,
        })
    }

    pub fn hemisphere() -> Self {
        Self::new(std::f64::consts::FRAC_PI_2).expect("pi/2 is a valid cap")
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    pub fn cos_max(&self) -> f64 {
        self.cos_max
    }

    pub fn sin_max(&self) -> f64 {
        self.sin_max
    }

    pub fn contains(&self, f: &Vec3) -> bool {
        (f.norm() - 1.0).abs() <= UNIT_TOL && f.z >= self.cos_max - UNIT_TOL
    }
}

/// Uniform planar array placed in the local x-y plane of its panel.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayLayout {
    nx: usize,
    ny: usize,
    spacing: f64,
    origin: Vec3,
    rotation: Mat3,
}

impl ArrayLayout {
    pub fn new(nx: usize, ny: usize, spacing: f64, origin: Vec3, rotation: Mat3) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidParameter("array dimensions must be positive".into()));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidParameter(format!("element spacing {spacing} must be positive")));
        }
        let orth = (rotation.transpose() * rotation - Mat3::identity()).abs().max();
        let det = rotation.determinant();
        if orth > 1e-12 || (det - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "panel rotation is not proper orthogonal (|RᵀR - I| = {orth:e}, det = {det})"
            )));
        }
        Ok(Self {
            nx,
            ny,
            spacing,
            origin,
            rotation,
        })
    }

    /// A panel whose local frame coincides with the global one.
    pub fn axis_aligned(nx: usize, ny: usize, spacing: f64, origin: Vec3) -> Result<Self> {
        Self::new(nx, ny, spacing, origin, Mat3::identity())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    /// Centered-grid offsets in the panel frame, in canonical element order
    /// `n = n_x + (n_y - 1) N_x`.
    pub fn local_positions(&self) -> Vec<Vec3> {
        let cx = (self.nx as f64 + 1.0) / 2.0;
        let cy = (self.ny as f64 + 1.0) / 2.0;
        let mut out = Vec::with_capacity(self.len());
        for iy in 1..=self.ny {
            for ix in 1..=self.nx {
                out.push(Vec3::new(
                    (ix as f64 - cx) * self.spacing,
                    (iy as f64 - cy) * self.spacing,
                    0.0,
                ));
            }
        }
        out
    }

    /// Global element positions `origin + R · local`.
    pub fn element_positions(&self) -> Vec<Vec3> {
        self.local_positions()
            .into_iter()
            .map(|p| self.origin + self.rotation * p)
            .collect()
    }

    /// Maps a local boresight to the global frame.
    pub fn to_global(&self, f: &Vec3) -> Vec3 {
        self.rotation * f
    }
}

/// Rotation taking the local `e_z` onto `normal`; used to make a panel face a
/// given direction. Antiparallel inputs rotate about the x-axis.
pub fn facing_rotation(normal: &Vec3) -> Result<Mat3> {
    let n = normal.try_normalize(0.0).ok_or(Error::DegenerateDirection)?;
    let rot = Rotation3::rotation_between(&e_z(), &n)
        .unwrap_or_else(|| Rotation3::from_axis_angle(&Vec3::x_axis(), std::f64::consts::PI));
    Ok(*rot.matrix())
}

/// Euclidean projection of `x / ‖x‖` onto the cap.
///
/// Inputs already of unit length (to within a few ulps) are not renormalized,
/// which makes the projection exactly idempotent.
pub fn project_to_cap(x: &Vec3, cap: &Cap) -> Result<Vec3> {
    let norm = x.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::DegenerateDirection);
    }
    let unit = if (norm - 1.0).abs() <= 4.0 * f64::EPSILON {
        *x
    } else {
        x / norm
    };
    let z = unit.z;
    if z >= cap.cos_max {
        return Ok(unit);
    }
    let perp = Vec3::new(unit.x, unit.y, 0.0);
    let perp_norm = perp.norm();
    let horizontal = if perp_norm > 0.0 {
        perp / perp_norm
    } else {
        tie_direction()
    };
    Ok(e_z() * cap.cos_max + horizontal * cap.sin_max)
}

/// `(I - f fᵀ) g`: Riemannian gradient on the unit sphere.
pub fn tangent_project(f: &Vec3, g: &Vec3) -> Vec3 {
    g - f * f.dot(g)
}

/// Minimizer of `⟨grad, x⟩` over the cap.
///
/// Returns `None` for an exactly zero gradient, in which case the caller
/// keeps its current point.
pub fn fw_vertex(grad: &Vec3, cap: &Cap, tie: &Vec3) -> Option<Vec3> {
    let norm = grad.norm();
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    let g = grad / norm;
    let z = g.z;
    if z <= -cap.cos_max {
        return Some(-g);
    }
    let v = g - e_z() * z;
    let v_norm = v.norm();
    let rim = if v_norm > 0.0 { -(v / v_norm) } else { *tie };
    Some(rim * cap.sin_max + e_z() * cap.cos_max)
}

/// `(f + ρ d) / ‖f + ρ d‖`.
pub fn retract(f: &Vec3, d: &Vec3, rho: f64) -> Result<Vec3> {
    let step = f + d * rho;
    let norm = step.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::DegenerateRetraction);
    }
    Ok(step / norm)
}

/// Accepts cap-feasible unit vectors unchanged, clamps rounding-level
/// violations back onto the rim and rejects anything else.
pub fn ensure_on_cap(f: &Vec3, cap: &Cap) -> Result<Vec3> {
    let excess = cap.cos_max - f.z;
    if excess <= 0.0 {
        return Ok(*f);
    }
    if excess <= CAP_CLAMP_TOL {
        return project_to_cap(f, cap);
    }
    Err(Error::CapViolation { excess })
}

/// Boresight from zenith/azimuth angles in the panel frame.
pub fn boresight(zenith: f64, azimuth: f64) -> Vec3 {
    let (sz, cz) = zenith.sin_cos();
    let (sa, ca) = azimuth.sin_cos();
    Vec3::new(sz * ca, sz * sa, cz)
}

/// Spherical Fibonacci codebook of `count` near-equal-area directions on
/// the cap.
pub fn fibonacci_cap(count: usize, cap: &Cap) -> Vec<Vec3> {
    let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
    (0..count)
        .map(|i| {
            let i = i as f64;
            let zenith = (1.0 - (i + 0.5) / count as f64 * (1.0 - cap.cos_max)).acos();
            let frac = i / (golden * golden);
            let azimuth = 2.0 * std::f64::consts::PI * (frac - frac.floor());
            boresight(zenith, azimuth)
        })
        .collect()
}

/// Codebook entry closest in Euclidean distance (largest inner product).
pub fn nearest_codeword(f: &Vec3, codebook: &[Vec3]) -> Vec3 {
    *codebook
        .iter()
        .max_by(|a, b| a.dot(f).total_cmp(&b.dot(f)))
        .expect("codebook must be non-empty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn single_element_sits_at_origin() {
        let o = Vec3::new(1.0, -2.0, 3.0);
        let rot = facing_rotation(&Vec3::new(0.3, 0.4, -1.0)).unwrap();
        let layout = ArrayLayout::new(1, 1, 0.1, o, rot).unwrap();
        assert_eq!(layout.element_positions(), vec![o]);
    }

    #[test]
    fn two_elements_are_symmetric() {
        let layout = ArrayLayout::axis_aligned(2, 1, 0.04285, Vec3::zeros()).unwrap();
        let pos = layout.element_positions();
        assert_relative_eq!(pos[0].x, -0.021425, epsilon = 1e-15);
        assert_relative_eq!(pos[1].x, 0.021425, epsilon = 1e-15);
        assert_eq!(pos[0].y, 0.0);
    }

    #[test]
    fn five_by_five_grid_spans_four_spacings() {
        let spacing = 0.0857 / 2.0;
        let layout = ArrayLayout::axis_aligned(5, 5, spacing, Vec3::zeros()).unwrap();
        let pos = layout.element_positions();
        assert_eq!(pos.len(), 25);
        let centroid = pos.iter().fold(Vec3::zeros(), |a, p| a + p) / 25.0;
        assert!(centroid.norm() < 1e-15);
        let span_x = pos.iter().map(|p| p.x).fold(f64::MIN, f64::max) - pos.iter().map(|p| p.x).fold(f64::MAX, f64::min);
        assert_relative_eq!(span_x, 4.0 * spacing, epsilon = 1e-15);
        // canonical index order: x runs fastest
        assert!(pos[1].x > pos[0].x && pos[1].y == pos[0].y);
        assert!(pos[5].y > pos[0].y);
    }

    #[test]
    fn rejects_improper_rotation() {
        let mut r = Mat3::identity();
        r[(2, 2)] = -1.0;
        assert!(ArrayLayout::new(2, 2, 0.1, Vec3::zeros(), r).is_err());
        assert!(ArrayLayout::axis_aligned(0, 2, 0.1, Vec3::zeros()).is_err());
        assert!(ArrayLayout::axis_aligned(2, 2, 0.0, Vec3::zeros()).is_err());
    }

    #[test]
    fn pole_projects_to_itself() {
        let cap = Cap::new(0.3).unwrap();
        assert_eq!(project_to_cap(&e_z(), &cap).unwrap(), e_z());
    }

    #[test]
    fn interior_point_is_normalized_only() {
        let cap = Cap::new(PI / 3.0).unwrap();
        let x = Vec3::new(0.2, 0.1, 2.0);
        assert_relative_eq!(project_to_cap(&x, &cap).unwrap(), x / x.norm(), epsilon = 1e-15);
    }

    #[test]
    fn south_pole_uses_tie_direction() {
        let cap = Cap::new(PI / 3.0).unwrap();
        let y = project_to_cap(&(-e_z()), &cap).unwrap();
        assert_relative_eq!(y, Vec3::new((PI / 3.0).sin(), 0.0, (PI / 3.0).cos()), epsilon = 1e-15);
    }

    #[test]
    fn zero_vector_is_rejected() {
        assert_eq!(project_to_cap(&Vec3::zeros(), &Cap::hemisphere()), Err(Error::DegenerateDirection));
    }

    #[test]
    fn tangent_projection_examples() {
        let f = Vec3::new(0.0, 0.6, 0.8);
        assert!(tangent_project(&f, &(f * 3.0)).norm() < 1e-15);
        assert_eq!(tangent_project(&e_z(), &Vec3::new(1.0, 0.0, 1.0)), Vec3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn fw_vertex_pole_cases() {
        let hemi = Cap::hemisphere();
        let y = fw_vertex(&e_z(), &hemi, &tie_direction()).unwrap();
        assert_relative_eq!(y, tie_direction(), epsilon = 1e-15);
        for theta in [0.1, 0.7, 1.2, PI / 2.0] {
            let cap = Cap::new(theta).unwrap();
            assert_eq!(fw_vertex(&(-e_z()), &cap, &tie_direction()).unwrap(), e_z());
        }
        assert!(fw_vertex(&Vec3::zeros(), &hemi, &tie_direction()).is_none());
    }

    #[test]
    fn retraction_examples() {
        let f = Vec3::new(0.0, 0.6, 0.8);
        assert_eq!(retract(&f, &Vec3::zeros(), 0.7).unwrap(), f);
        let cap = Cap::new(PI / 4.0).unwrap();
        let y = boresight(PI / 4.0, 1.0);
        assert_relative_eq!(retract(&e_z(), &(y - e_z()), 1.0).unwrap(), y, epsilon = 1e-15);
        assert!(cap.contains(&y));
        assert_eq!(retract(&e_z(), &(-e_z()), 1.0), Err(Error::DegenerateRetraction));
    }

    #[test]
    fn clamp_only_rounding_violations() {
        let cap = Cap::new(PI / 4.0).unwrap();
        let rim = boresight(PI / 4.0 + 1e-12, 0.3);
        let fixed = ensure_on_cap(&rim, &cap).unwrap();
        assert!(fixed.z >= cap.cos_max());
        let outside = boresight(PI / 4.0 + 0.1, 0.3);
        assert!(matches!(ensure_on_cap(&outside, &cap), Err(Error::CapViolation { .. })));
    }

    #[test]
    fn fibonacci_codebook_is_feasible() {
        let cap = Cap::new(PI / 5.0).unwrap();
        let book = fibonacci_cap(32, &cap);
        assert_eq!(book.len(), 32);
        assert!(book.iter().all(|f| f.z >= cap.cos_max() && (f.norm() - 1.0).abs() < 1e-14));
    }

    #[test]
    fn facing_rotation_maps_normal() {
        for n in [Vec3::new(1.0, 2.0, -0.5), -e_z(), e_z()] {
            let r = facing_rotation(&n).unwrap();
            assert_relative_eq!(r * e_z(), n.normalize(), epsilon = 1e-12);
            assert_relative_eq!(r.determinant(), 1.0, epsilon = 1e-12);
        }
    }
}
