//! Ray-cast depth renderer for posed skeletal models.
//!
//! Every joint is a sphere of its own radius and every bone a capsule whose
//! radius is the mean of its two end radii. Pixel `(x, y)` looks along the
//! ray through its centre and records the z coordinate of the nearest
//! surface point.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::camera::{CameraModel, DepthImage, BACKGROUND_MM};
use crate::kinematics::{KinematicsError, Pose, SkeletalModel};
use crate::lie::Vec3;
use crate::math;

/// Joints closer than this to the camera plane are rejected, mm.
pub const NEAR_MM: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RenderError {
    /// No joint projects inside the frame.
    OffScreen,
    /// Some primitive reaches in front of the near plane.
    BehindCamera,
    /// Radius list length differs from the joint count.
    RadiusMismatch,
    Kinematics(KinematicsError),
}

impl fmt::Display for RenderError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RenderError::OffScreen => f.write_str("no joint projects inside the image"),
            RenderError::BehindCamera => f.write_str("model reaches behind the near plane"),
            RenderError::RadiusMismatch => f.write_str("one radius per joint required"),
            RenderError::Kinematics(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for RenderError {}

impl From<KinematicsError> for RenderError {
    fn from(e: KinematicsError) -> Self {
        RenderError::Kinematics(e)
    }
}

/// A renderable solid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Primitive {
    Sphere { center: Vec3, radius: f64 },
    Capsule { a: Vec3, b: Vec3, radius: f64 },
}

impl Primitive {
    fn bounds(&self) -> (Vec3, Vec3) {
        match *self {
            Primitive::Sphere { center, radius } => {
                let r = Vec3::new(radius, radius, radius);
                (center - r, center + r)
            }
            Primitive::Capsule { a, b, radius } => {
                let r = Vec3::new(radius, radius, radius);
                let lo = Vec3::new(a.x.min(b.x), a.y.min(b.y), a.z.min(b.z));
                let hi = Vec3::new(a.x.max(b.x), a.y.max(b.y), a.z.max(b.z));
                (lo - r, hi + r)
            }
        }
    }

    /// Depth of the first hit along the z-normalized ray `d`, if any.
    #[inline]
    pub fn intersect(&self, d: Vec3) -> Option<f64> {
        match *self {
            Primitive::Sphere { center, radius } => ray_sphere(d, center, radius),
            Primitive::Capsule { a, b, radius } => {
                let mut best = ray_sphere(d, a, radius);
                if let Some(t) = ray_sphere(d, b, radius) {
                    best = Some(best.map_or(t, |s| s.min(t)));
                }
                if let Some(t) = ray_cylinder(d, a, b, radius) {
                    best = Some(best.map_or(t, |s| s.min(t)));
                }
                best
            }
        }
    }
}

#[inline]
fn ray_sphere(d: Vec3, c: Vec3, r: f64) -> Option<f64> {
    let a = d.norm_squared();
    let b = d.dot(c);
    let disc = b * b - a * (c.norm_squared() - r * r);
    if disc < 0.0 {
        return None;
    }
    let t = (b - math::sqrt(disc)) / a;
    (t > 0.0).then_some(t)
}

#[inline]
fn ray_cylinder(d: Vec3, p0: Vec3, p1: Vec3, r: f64) -> Option<f64> {
    let axis = p1 - p0;
    let len = axis.norm();
    if len <= 0.0 {
        return None;
    }
    let n = axis * (1.0 / len);
    let w = -p0;
    let dp = d - n * d.dot(n);
    let wp = w - n * w.dot(n);
    let a = dp.norm_squared();
    if a < 1e-18 {
        return None;
    }
    let b = 2.0 * wp.dot(dp);
    let c = wp.norm_squared() - r * r;
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let t = (-b - math::sqrt(disc)) / (2.0 * a);
    if t <= 0.0 {
        return None;
    }
    let s = (w + d * t).dot(n);
    (0.0..=len).contains(&s).then_some(t)
}

/// Spheres at the joints and capsules along the bones of a posed model.
pub fn primitives(model: &SkeletalModel, positions: &[Vec3], radii: &[f64]) -> Vec<Primitive> {
    let mut out = Vec::with_capacity(2 * positions.len());
    for (j, spec) in model.joints.iter().enumerate() {
        out.push(Primitive::Sphere { center: positions[j], radius: radii[j] });
        if let Some(p) = spec.parent {
            out.push(Primitive::Capsule { a: positions[p], b: positions[j], radius: 0.5 * (radii[p] + radii[j]) });
        }
    }
    out
}

/// Renders `pose` with the given per-joint radii (mm).
pub fn render(model: &SkeletalModel, pose: &Pose, camera: &CameraModel, radii: &[f64]) -> Result<DepthImage, RenderError> {
    if radii.len() != model.joint_count() {
        return Err(RenderError::RadiusMismatch);
    }
    let (_, positions) = model.forward_kinematics(pose)?;
    let on_screen = positions.0.iter().any(|p| {
        camera.project(*p).is_some_and(|(u, v)| {
            u >= -0.5 && v >= -0.5 && u < camera.width as f64 - 0.5 && v < camera.height as f64 - 0.5
        })
    });
    if !on_screen {
        return Err(RenderError::OffScreen);
    }
    render_primitives(&primitives(model, &positions.0, radii), camera)
}

/// Ray-casts an arbitrary primitive list.
pub fn render_primitives(prims: &[Primitive], camera: &CameraModel) -> Result<DepthImage, RenderError> {
    let mut boxes = Vec::with_capacity(prims.len());
    let (mut gx0, mut gy0, mut gx1, mut gy1) = (i64::MAX, i64::MAX, i64::MIN, i64::MIN);
    for p in prims {
        let (lo, hi) = p.bounds();
        if lo.z <= NEAR_MM {
            return Err(RenderError::BehindCamera);
        }
        let b = pixel_box(camera, lo, hi);
        if let Some((x0, y0, x1, y1)) = b {
            gx0 = gx0.min(x0);
            gy0 = gy0.min(y0);
            gx1 = gx1.max(x1);
            gy1 = gy1.max(y1);
        }
        boxes.push(b);
    }
    if gx0 > gx1 {
        return Ok(DepthImage::empty(camera.width, camera.height));
    }
    let (w, h) = ((gx1 - gx0 + 1) as usize, (gy1 - gy0 + 1) as usize);
    let mut data = vec![BACKGROUND_MM; w * h];
    for (p, b) in prims.iter().zip(&boxes) {
        let Some((x0, y0, x1, y1)) = *b else { continue };
        for y in y0..=y1 {
            for x in x0..=x1 {
                if let Some(t) = p.intersect(camera.ray(x as f64, y as f64)) {
                    let cell = &mut data[(y - gy0) as usize * w + (x - gx0) as usize];
                    if t < *cell {
                        *cell = t;
                    }
                }
            }
        }
    }
    Ok(DepthImage::from_window(camera.width, camera.height, gx0 as u32, gy0 as u32, w, h, data).cropped())
}

/// Conservative pixel bounds of a 3-D box (in front of the camera), clipped
/// to the frame.
fn pixel_box(camera: &CameraModel, lo: Vec3, hi: Vec3) -> Option<(i64, i64, i64, i64)> {
    let (mut umin, mut umax, mut vmin, mut vmax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for z in [lo.z, hi.z] {
        for x in [lo.x, hi.x] {
            let u = camera.focal * x / z + camera.cx;
            umin = umin.min(u);
            umax = umax.max(u);
        }
        for y in [lo.y, hi.y] {
            let v = camera.focal * y / z + camera.cy;
            vmin = vmin.min(v);
            vmax = vmax.max(v);
        }
    }
    let x0 = (math::floor(umin) as i64).max(0);
    let y0 = (math::floor(vmin) as i64).max(0);
    let x1 = (math::floor(umax) as i64 + 1).min(camera.width as i64 - 1);
    let y1 = (math::floor(vmax) as i64 + 1).min(camera.height as i64 - 1);
    (x0 <= x1 && y0 <= y1).then_some((x0, y0, x1, y1))
}
